"""Per-round trajectory CSV exporter."""

import csv
from pathlib import Path
from typing import Optional

from ..models.trajectory import Trajectory
from .formatting import format_float


class TrajectoryExporter:
    """Export a run as one CSV row per round and player."""

    FILENAME = "trajectory.csv"

    @staticmethod
    def columns(width: int) -> list[str]:
        """t, player, x_0..x_{w-1}, lambda, nu_0..nu_{w-1} for the widest player w."""
        return (
            ["t", "player"]
            + [f"x_{k}" for k in range(width)]
            + ["lambda"]
            + [f"nu_{k}" for k in range(width)]
        )

    @staticmethod
    def export(trajectory: Trajectory, output_path: Optional[Path] = None) -> Path:
        """
        Export the trajectory as CSV.

        Players with fewer actions leave their trailing x/nu cells empty.
        Rounds are numbered from 1; lambda is "nan" for fixed-rate learners.

        Args:
            trajectory: Recorded run
            output_path: Optional output path, default trajectory.csv in the working directory

        Returns:
            Path to the exported file

        Raises:
            ValueError: If the trajectory has no rounds
        """
        if trajectory.horizon == 0:
            raise ValueError("No rounds available to export")

        output_path = Path(output_path) if output_path is not None else Path(TrajectoryExporter.FILENAME)
        width = max(trajectory.action_counts)

        with output_path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(TrajectoryExporter.columns(width))
            for t in range(trajectory.horizon):
                for i in range(trajectory.player_count):
                    pad = [""] * (width - trajectory.action_counts[i])
                    writer.writerow(
                        [t + 1, i]
                        + [format_float(v) for v in trajectory.actions[i][t]] + pad
                        + [format_float(float(trajectory.learning_rates[i][t]))]
                        + [format_float(v) for v in trajectory.utilities[i][t]] + pad
                    )

        return output_path
