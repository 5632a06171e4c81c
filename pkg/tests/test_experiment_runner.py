import csv
import json
from pathlib import Path

import pytest

from src.models.experiment import ExperimentItem, RunStatus
from src.services.config_parser import load_config, parse_config
from src.services.experiment_runner import (
    EXIT_OK,
    ExperimentBatchRunner,
    describe_regularizer,
    run_experiment,
)

PENNIES = {
    "kind": "selfplay",
    "game": {"type": "matching_pennies"},
    "players": {"algorithm": "coftrl", "regularizer": "neg_entropy"},
    "horizon": 32,
}


def _csv(path):
    with path.open(newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


def test_matching_pennies_run_writes_every_output(tmp_path):
    config = parse_config(json.dumps(PENNIES), output_dir=tmp_path)
    result = run_experiment(config)
    assert result.status == EXIT_OK
    assert sorted(p.name for p in result.outputs) == ["manifest.json", "metrics.csv", "trajectory.csv"]
    assert len(_csv(tmp_path / "trajectory.csv")) == 64
    rows = _csv(tmp_path / "metrics.csv")
    assert [int(r["t"]) for r in rows if r["player"] == "0"] == [1, 2, 4, 8, 16, 32]
    assert all(float(r["regret"]) == 0.0 and float(r["cce_gap"]) == 0.0 for r in rows)
    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["config"]["horizon"] == 32
    assert manifest["outputs"] == ["trajectory.csv", "metrics.csv"]
    assert manifest["constants"][0]["regularizer"] == "neg_entropy"
    assert manifest["metrics"]["social_regret"] == 0.0


def test_adversarial_run_against_zero_utilities(tmp_path):
    doc = {"kind": "adversarial", "game": {"type": "random_general_sum", "actions": 3},
           "adversary": {"type": "zero"}, "horizon": 64}
    result = run_experiment(parse_config(json.dumps(doc), output_dir=tmp_path))
    assert result.trajectory.switch_rounds == (None,)
    assert result.metrics.external_regret == (0.0,)
    assert result.metrics.cce_gap is None
    assert all(r["cce_gap"] == "" for r in _csv(tmp_path / "metrics.csv"))


def test_landscape_runs_are_reproducible(tmp_path):
    doc = {"kind": "landscape", "landscape": {"points": 5}}
    first = run_experiment(parse_config(json.dumps(doc), output_dir=tmp_path / "a"))
    second = run_experiment(parse_config(json.dumps(doc), output_dir=tmp_path / "b"))
    assert len(first.surfaces) == 4
    for name in ("landscape.csv", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = _csv(tmp_path / "a" / "landscape.csv")
    assert len(rows) == 4 * 25
    assert all(float(r["lambda"]) == 1.0 for r in rows if float(r["r1"]) >= 0 and float(r["r2"]) >= 0)
    assert second.status == EXIT_OK


def test_describe_regularizer():
    config = parse_config(json.dumps({"players": [{"regularizer": {"kind": "tsallis", "q": 0.5}}]}))
    assert describe_regularizer(config.players[0].regularizer) == "tsallis(q=0.5)"


def test_batch_runner_isolates_failures(tmp_path, write_config):
    good = write_config(PENNIES, "pennies.json")
    other = write_config({**PENNIES, "game": {"type": "rock_paper_scissors"}}, "rps.json")
    bad = write_config({"kind": "selfplay", "players": [{"algorithm": "sgd"}]}, "broken.json")
    started, completed, errors, batches = [], [], [], []
    runner = ExperimentBatchRunner(
        [ExperimentItem.from_path(p) for p in (good, bad, other)],
        overrides={"output_dir": tmp_path / "out", "horizon": 8},
        on_item_started=started.append,
        on_item_completed=completed.append,
        on_item_error=lambda item, message: errors.append((item.name, message)),
        on_batch_completed=batches.append,
    )
    items = runner.run()
    assert [item.status for item in items] == [RunStatus.COMPLETED, RunStatus.ERROR, RunStatus.COMPLETED]
    assert len(started) == 3
    assert [item.name for item in completed] == ["pennies", "rps"]
    assert errors[0][0] == "broken" and "players[0].algorithm" in errors[0][1]
    assert [item.name for item in runner.failed] == ["broken"]
    assert len(batches) == 1
    assert (tmp_path / "out" / "pennies" / "trajectory.csv").exists()
    assert (tmp_path / "out" / "rps" / "manifest.json").exists()
    assert json.loads((tmp_path / "out" / "rps" / "manifest.json").read_text())["config"]["horizon"] == 8


def test_cancelled_batch_skips_pending_items(write_config, tmp_path):
    first = write_config(PENNIES, "first.json")
    second = write_config(PENNIES, "second.json")
    runner = ExperimentBatchRunner([ExperimentItem.from_path(first), ExperimentItem.from_path(second)],
                                   overrides={"output_dir": tmp_path / "out"})
    runner.on_item_completed = lambda item: runner.cancel()
    items = runner.run()
    assert items[0].is_completed
    assert items[1].status is RunStatus.PENDING


@pytest.mark.slow
def test_verify_document(tmp_path):
    config = load_config(Path(__file__).resolve().parent.parent / "configs" / "verify.json", output_dir=tmp_path)
    result = run_experiment(config)
    assert result.report is not None
    assert (tmp_path / "manifest.json").exists()
