"""Run experiment documents and write their outputs."""

import logging
from concurrent.futures import FIRST_COMPLETED, Future, ProcessPoolExecutor, wait
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from ..errors import ExperimentError
from ..exporters.landscape_exporter import LandscapeExporter
from ..exporters.manifest_exporter import ManifestExporter
from ..exporters.metrics_exporter import MetricsExporter
from ..exporters.trajectory_exporter import TrajectoryExporter
from ..models.experiment import (
    ExperimentConfig,
    ExperimentItem,
    ExperimentKind,
    LandscapeSpec,
    LandscapeSurface,
    LearnerSpec,
    RegularizerSpec,
    RunStatus,
)
from ..models.game import game_action_counts, make_game
from ..models.trajectory import Metrics, Trajectory
from .config_parser import build_regularizer, config_to_dict, load_config
from .harness import adversarial_play, make_adversary, self_play
from .learners import CoftrlLearner, Learner, SafeguardedLearner, make_learner
from .metrics import compute_metrics
from .solvers import landscape_axis, landscape_grid, landscape_points
from .verification import VerificationReport, run_verify

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_ERROR = 2
VERIFICATION_FAILED_MESSAGE = "verification failed"


@dataclass
class RunResult:
    """Outcome of one experiment."""
    status: int
    outputs: list[Path] = field(default_factory=list)
    metrics: Optional[Metrics] = None
    trajectory: Optional[Trajectory] = None
    surfaces: list[LandscapeSurface] = field(default_factory=list)
    report: Optional[VerificationReport] = None


def describe_regularizer(spec: RegularizerSpec) -> str:
    """Short label such as tsallis(q=0.5) or combination(1*neg_entropy+2*log)."""
    if spec.p is not None:
        return f"{spec.kind}(p={spec.p:.6g})"
    if spec.q is not None:
        return f"{spec.kind}(q={spec.q:.6g})"
    if spec.parts:
        return f"{spec.kind}(" + "+".join(f"{w:g}*{describe_regularizer(r)}" for w, r in spec.parts) + ")"
    return spec.kind


def build_learner(spec: LearnerSpec, dimension: int) -> Learner:
    return make_learner(spec.algorithm, build_regularizer(spec.regularizer, dimension), spec.eta, spec.alpha)


def _constants(spec: LearnerSpec, dimension: int, horizon: int) -> dict[str, Any]:
    c = build_regularizer(spec.regularizer, dimension).constants(horizon)
    return {
        "regularizer": describe_regularizer(spec.regularizer),
        "gamma": c.gamma,
        "mu": c.mu,
        "r_max": c.r_max,
        "is_local": c.is_local,
        "eta": spec.eta,
        "alpha": spec.alpha,
    }


def _write_run(config: ExperimentConfig, trajectory: Trajectory, constants: list[dict]) -> RunResult:
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    metrics = compute_metrics(trajectory)
    outputs = [
        TrajectoryExporter.export(trajectory, out / TrajectoryExporter.FILENAME),
        MetricsExporter.export(metrics, out / MetricsExporter.FILENAME),
    ]
    outputs.append(ManifestExporter.export(
        config_to_dict(config),
        constants,
        out / ManifestExporter.FILENAME,
        metrics=metrics.summary(),
        outputs=[p.name for p in outputs],
    ))
    return RunResult(status=EXIT_OK, outputs=outputs, metrics=metrics, trajectory=trajectory)


def run_selfplay(config: ExperimentConfig) -> RunResult:
    game = make_game(config.game, seed=config.seed)
    counts = game.action_counts
    learners = [build_learner(spec, d) for spec, d in zip(config.players, counts)]
    constants = [_constants(spec, d, config.horizon) for spec, d in zip(config.players, counts)]
    for i, c in enumerate(constants):
        logger.info("Player %d: %s", i, ", ".join(f"{k}={v}" for k, v in c.items()))
    trajectory = self_play(game, learners, config.horizon, seed=config.seed)
    return _write_run(config, trajectory, constants)


def run_adversarial(config: ExperimentConfig) -> RunResult:
    d = game_action_counts(config.game)[0]
    spec = config.players[0]
    inner = build_learner(spec, d)
    if not isinstance(inner, CoftrlLearner):
        raise ExperimentError("adversarial runs need a coftrl learner")
    learner = SafeguardedLearner(inner, config.game.players, config.game.smoothness, config.horizon)
    adversary = make_adversary(config.adversary.type, d, seed=config.seed)
    trajectory = adversarial_play(learner, adversary, config.horizon, seed=config.seed)
    return _write_run(config, trajectory, [_constants(spec, d, config.horizon)])


def run_landscape(spec: LandscapeSpec) -> list[LandscapeSurface]:
    """Learning-rate surface of every requested regularizer over the same 2-action grid."""
    grid = landscape_points(landscape_axis(spec.r_min, spec.r_max, spec.points))
    surfaces = []
    for reg_spec in spec.regularizers:
        reg = build_regularizer(reg_spec, 2)
        rates = landscape_grid(reg, spec.eta, spec.alpha, grid)
        surfaces.append(LandscapeSurface(describe_regularizer(reg_spec), tuple(grid), tuple(rates)))
    return surfaces


def _run_landscape_experiment(config: ExperimentConfig) -> RunResult:
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    surfaces = run_landscape(config.landscape)
    csv_path = LandscapeExporter.export(surfaces, out / LandscapeExporter.FILENAME)
    constants = [
        {"regularizer": s.regularizer, **_landscape_constants(r)}
        for s, r in zip(surfaces, config.landscape.regularizers)
    ]
    manifest = ManifestExporter.export(
        config_to_dict(config), constants, out / ManifestExporter.FILENAME, outputs=[csv_path.name],
    )
    return RunResult(status=EXIT_OK, outputs=[csv_path, manifest], surfaces=surfaces)


def _landscape_constants(spec: RegularizerSpec) -> dict[str, Any]:
    c = build_regularizer(spec, 2).constants()
    return {"gamma": c.gamma, "mu": c.mu, "r_max": c.r_max, "is_local": c.is_local}


def _run_verify_experiment(config: ExperimentConfig) -> RunResult:
    report = run_verify(config.suite or "all", seed=config.seed)
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    manifest = ManifestExporter.export(
        config_to_dict(config), [], out / ManifestExporter.FILENAME, metrics=report.to_dict(),
    )
    status = EXIT_OK if report.passed else EXIT_VERIFICATION_FAILED
    return RunResult(status=status, outputs=[manifest], report=report)


def run_experiment(config: ExperimentConfig) -> RunResult:
    """
    Execute a resolved experiment and write its outputs under config.output_dir.

    Returns:
        RunResult whose status is 0 on success and 1 on failed verification

    Raises:
        ExperimentError: If a solver fails, tagged with round and player
        ConsistencyError: If two metric computations disagree
    """
    logger.info("Running %s experiment (T=%d, seed=%d) into %s",
                config.kind.value, config.horizon, config.seed, config.output_dir)
    if config.kind is ExperimentKind.SELFPLAY:
        return run_selfplay(config)
    if config.kind is ExperimentKind.ADVERSARIAL:
        return run_adversarial(config)
    if config.kind is ExperimentKind.LANDSCAPE:
        return _run_landscape_experiment(config)
    return _run_verify_experiment(config)


def _run_item(config_path: Path, overrides: dict[str, Any]) -> tuple[int, list[Path]]:
    """Process-pool entry point: parse, run, and report status and outputs."""
    result = run_experiment(load_config(config_path, **overrides))
    return result.status, result.outputs


class ExperimentBatchRunner:
    """
    Runs several experiment documents, optionally in parallel processes.

    Callbacks:
        on_item_started: Called with the item when it is submitted
        on_item_completed: Called with the item when it finished
        on_item_error: Called with (item, error message)
        on_batch_completed: Called once with all items
    """

    def __init__(
        self,
        items: Sequence[ExperimentItem],
        jobs: int = 1,
        overrides: Optional[dict[str, Any]] = None,
        on_item_started: Optional[Callable[[ExperimentItem], None]] = None,
        on_item_completed: Optional[Callable[[ExperimentItem], None]] = None,
        on_item_error: Optional[Callable[[ExperimentItem, str], None]] = None,
        on_batch_completed: Optional[Callable[[list[ExperimentItem]], None]] = None,
    ):
        """
        Initialize the batch runner.

        Args:
            items: Experiments to run
            jobs: Number of worker processes; 1 runs in this process
            overrides: seed / horizon / output_dir overrides applied to every document.
                With several items an output_dir override becomes output_dir/<config name>.
        """
        self.items = list(items)
        self.jobs = max(1, jobs)
        self.overrides = dict(overrides or {})
        self.on_item_started = on_item_started
        self.on_item_completed = on_item_completed
        self.on_item_error = on_item_error
        self.on_batch_completed = on_batch_completed
        self._is_cancelled = False

    def cancel(self) -> None:
        """Request cancellation; running experiments finish, pending ones are skipped."""
        self._is_cancelled = True

    def _overrides_for(self, item: ExperimentItem) -> dict[str, Any]:
        overrides = dict(self.overrides)
        if overrides.get("output_dir") is not None and len(self.items) > 1:
            overrides["output_dir"] = Path(overrides["output_dir"]) / item.name
        return overrides

    def _started(self, item: ExperimentItem) -> None:
        item.status = RunStatus.RUNNING
        if self.on_item_started:
            self.on_item_started(item)

    def _finished(self, item: ExperimentItem, status: int, outputs: list[Path]) -> None:
        item.outputs = list(outputs)
        if status == EXIT_OK:
            item.status = RunStatus.COMPLETED
            if self.on_item_completed:
                self.on_item_completed(item)
        else:
            self._failed(item, VERIFICATION_FAILED_MESSAGE)

    def _failed(self, item: ExperimentItem, message: str) -> None:
        item.set_error(message)
        logger.error("%s: %s", item.name, message)
        if self.on_item_error:
            self.on_item_error(item, message)

    def run(self) -> list[ExperimentItem]:
        """Run every item and return them with their final status."""
        if self.jobs == 1:
            self._run_sequential()
        else:
            self._run_parallel()
        if self.on_batch_completed:
            self.on_batch_completed(self.items)
        return self.items

    def _run_sequential(self) -> None:
        for item in self.items:
            if self._is_cancelled:
                break
            self._started(item)
            try:
                status, outputs = _run_item(item.config_path, self._overrides_for(item))
            except (ValueError, RuntimeError) as e:
                self._failed(item, str(e))
                continue
            self._finished(item, status, outputs)

    def _run_parallel(self) -> None:
        with ProcessPoolExecutor(max_workers=self.jobs) as pool:
            pending: dict[Future, ExperimentItem] = {}
            for item in self.items:
                self._started(item)
                pending[pool.submit(_run_item, item.config_path, self._overrides_for(item))] = item
            while pending:
                if self._is_cancelled:
                    for future in pending:
                        future.cancel()
                done, _ = wait(pending, return_when=FIRST_COMPLETED)
                for future in done:
                    item = pending.pop(future)
                    if future.cancelled():
                        item.status = RunStatus.PENDING
                        continue
                    try:
                        status, outputs = future.result()
                    except (ValueError, RuntimeError) as e:
                        self._failed(item, str(e))
                        continue
                    self._finished(item, status, outputs)

    @property
    def failed(self) -> list[ExperimentItem]:
        return [item for item in self.items if item.has_error]


