"""Sampled metrics CSV exporter."""

import csv
from pathlib import Path
from typing import Optional

from ..models.trajectory import Metrics
from .formatting import format_float


class MetricsExporter:
    """Export the regret series of a run, one row per checkpoint and player."""

    FILENAME = "metrics.csv"
    COLUMNS = ["t", "player", "regret", "nonneg_regret", "cce_gap", "path_length"]

    @staticmethod
    def export(metrics: Metrics, output_path: Optional[Path] = None) -> Path:
        """
        Export the sampled metrics as CSV.

        cce_gap is left empty for runs without a game (adversarial runs).

        Raises:
            ValueError: If the metrics carry no series
        """
        if not metrics.regret_series:
            raise ValueError("No metrics series available to export")

        output_path = Path(output_path) if output_path is not None else Path(MetricsExporter.FILENAME)
        with output_path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(MetricsExporter.COLUMNS)
            for point in sorted(metrics.regret_series, key=lambda p: (p.t, p.player)):
                writer.writerow([
                    point.t,
                    point.player,
                    format_float(point.regret),
                    format_float(point.nonneg_regret),
                    format_float(point.cce_gap),
                    format_float(point.path_length),
                ])

        return output_path
