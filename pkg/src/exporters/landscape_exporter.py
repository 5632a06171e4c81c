"""Learning-rate landscape CSV exporter."""

import csv
from pathlib import Path
from typing import Optional, Sequence

from ..models.experiment import LandscapeSurface
from .formatting import format_float


class LandscapeExporter:
    """Export one or more landscape surfaces as (r1, r2, lambda) rows."""

    FILENAME = "landscape.csv"
    COLUMNS = ["r1", "r2", "lambda"]

    @staticmethod
    def export(surfaces: Sequence[LandscapeSurface], output_path: Optional[Path] = None) -> Path:
        """
        Export landscape surfaces as CSV.

        A leading `regularizer` column is added when more than one surface is
        written to the same file.

        Raises:
            ValueError: If there is nothing to export
        """
        if not surfaces or not any(s.points for s in surfaces):
            raise ValueError("No landscape available to export")

        output_path = Path(output_path) if output_path is not None else Path(LandscapeExporter.FILENAME)
        labelled = len(surfaces) > 1

        with output_path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow((["regularizer"] if labelled else []) + LandscapeExporter.COLUMNS)
            for surface in surfaces:
                for (r1, r2), rate in zip(surface.points, surface.learning_rates):
                    row = [format_float(r1), format_float(r2), format_float(rate)]
                    writer.writerow(([surface.regularizer] if labelled else []) + row)

        return output_path
