from .trajectory_exporter import TrajectoryExporter
from .metrics_exporter import MetricsExporter
from .landscape_exporter import LandscapeExporter
from .manifest_exporter import ManifestExporter

__all__ = ['TrajectoryExporter', 'MetricsExporter', 'LandscapeExporter', 'ManifestExporter']
