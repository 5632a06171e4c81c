import csv
import math

import numpy as np
import pytest

from src.exporters import LandscapeExporter, ManifestExporter, MetricsExporter, TrajectoryExporter
from src.exporters.formatting import format_float
from src.models.experiment import LandscapeSurface
from src.models.trajectory import Metrics, SeriesPoint, Trajectory


def _rows(path):
    with path.open(newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


@pytest.fixture
def uneven_run():
    actions = (np.array([[0.5, 0.5]]), np.array([[0.2, 0.3, 0.5]]))
    utilities = (np.array([[1.0, -1.0]]), np.array([[0.0, 0.25, -0.5]]))
    rates = (np.array([0.125]), np.array([math.nan]))
    return Trajectory(actions=actions, utilities=utilities, learning_rates=rates)


def test_format_float():
    assert format_float(1.0) == "1"
    assert format_float(0.5) == "0.5"
    assert float(format_float(0.1)) == 0.1
    assert float(format_float(1 / 3)) == 1 / 3
    assert format_float(math.nan) == "nan"
    assert format_float(None) == ""


def test_trajectory_header_and_padding(uneven_run, tmp_path):
    path = TrajectoryExporter.export(uneven_run, tmp_path / "trajectory.csv")
    header, first, second = _rows(path)
    assert header == ["t", "player", "x_0", "x_1", "x_2", "lambda", "nu_0", "nu_1", "nu_2"]
    assert first == ["1", "0", "0.5", "0.5", "", "0.125", "1", "-1", ""]
    assert second == ["1", "1", "0.2", "0.3", "0.5", "nan", "0", "0.25", "-0.5"]


def test_empty_trajectory_is_rejected(tmp_path):
    empty = Trajectory(actions=(np.empty((0, 2)),), utilities=(np.empty((0, 2)),), learning_rates=(np.empty(0),))
    with pytest.raises(ValueError):
        TrajectoryExporter.export(empty, tmp_path / "trajectory.csv")


def _metrics(series):
    return Metrics(horizon=2, external_regret=(0.0,), nonnegative_regret=(0.0,), social_regret=0.0,
                   cce_gap=None, path_length=0.0, variation=(0.0,), regret_series=tuple(series))


def test_metrics_rows_are_sorted_and_gaps_may_be_empty(tmp_path):
    series = [
        SeriesPoint(t=2, player=0, regret=-1.0, nonneg_regret=0.0, cce_gap=None, path_length=4.0),
        SeriesPoint(t=1, player=0, regret=0.5, nonneg_regret=0.5, cce_gap=None, path_length=0.0),
    ]
    rows = _rows(MetricsExporter.export(_metrics(series), tmp_path / "metrics.csv"))
    assert rows[0] == MetricsExporter.COLUMNS
    assert rows[1] == ["1", "0", "0.5", "0.5", "", "0"]
    assert rows[2] == ["2", "0", "-1", "0", "", "4"]


def test_metrics_without_series_are_rejected(tmp_path):
    with pytest.raises(ValueError):
        MetricsExporter.export(_metrics([]), tmp_path / "metrics.csv")


def _surface(name):
    return LandscapeSurface(regularizer=name, points=((0.0, 0.0), (0.0, -5.0)), learning_rates=(1.0, 0.8))


def test_single_landscape_is_unlabelled(tmp_path):
    rows = _rows(LandscapeExporter.export([_surface("neg_entropy")], tmp_path / "landscape.csv"))
    assert rows == [["r1", "r2", "lambda"], ["0", "0", "1"], ["0", "-5", "0.80000000000000004"]]


def test_several_landscapes_are_labelled(tmp_path):
    rows = _rows(LandscapeExporter.export([_surface("a"), _surface("b")], tmp_path / "landscape.csv"))
    assert rows[0] == ["regularizer", "r1", "r2", "lambda"]
    assert [row[0] for row in rows[1:]] == ["a", "a", "b", "b"]


def test_empty_landscape_is_rejected(tmp_path):
    with pytest.raises(ValueError):
        LandscapeExporter.export([], tmp_path / "landscape.csv")


def test_manifest_round_trip(tmp_path):
    path = ManifestExporter.export({"kind": "selfplay"}, [{"gamma": 1.0}], tmp_path / "manifest.json",
                                   metrics={"social_regret": 0.0}, outputs=["trajectory.csv"])
    data = ManifestExporter.load(path)
    assert data == {"config": {"kind": "selfplay"}, "constants": [{"gamma": 1.0}],
                    "outputs": ["trajectory.csv"], "metrics": {"social_regret": 0.0}}
    with pytest.raises(ValueError):
        ManifestExporter.export({}, [], tmp_path / "other.json")
