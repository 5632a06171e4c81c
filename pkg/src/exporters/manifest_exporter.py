"""Run manifest exporter (JSON)."""

import json
from pathlib import Path
from typing import Any, Optional, Sequence


class ManifestExporter:
    """Export what is needed to reproduce a run: the resolved config, constants and outputs."""

    FILENAME = "manifest.json"

    @staticmethod
    def export(
        config: dict[str, Any],
        constants: Sequence[dict[str, Any]],
        output_path: Optional[Path] = None,
        metrics: Optional[dict[str, Any]] = None,
        outputs: Sequence[str] = (),
        pretty_print: bool = True,
    ) -> Path:
        """
        Export the run manifest as a JSON file.

        No timestamps are written, so repeated runs give identical manifests.

        Args:
            config: Resolved config as produced by config_to_dict
            constants: Per player gamma, mu, r_max, is_local, eta, alpha
            output_path: Optional output path, default manifest.json
            metrics: Scalar metric summary
            outputs: Names of the other files written by the run
            pretty_print: Whether to format JSON with indentation

        Returns:
            Path to the exported file

        Raises:
            ValueError: If the config is empty
        """
        if not config:
            raise ValueError("No config available to export")

        output_path = Path(output_path) if output_path is not None else Path(ManifestExporter.FILENAME)
        data: dict[str, Any] = {
            "config": config,
            "constants": list(constants),
            "outputs": list(outputs),
        }
        if metrics is not None:
            data["metrics"] = metrics

        indent = 2 if pretty_print else None
        output_path.write_text(json.dumps(data, indent=indent, ensure_ascii=False), encoding="utf-8")
        return output_path

    @staticmethod
    def load(path: Path) -> dict[str, Any]:
        return json.loads(Path(path).read_text(encoding="utf-8"))
