from .experiment import ExperimentConfig, ExperimentItem, ExperimentKind, RunStatus
from .game import GameSpec, GameType, MixedProfile, NormalFormGame
from .trajectory import Metrics, Trajectory

__all__ = [
    'ExperimentConfig', 'ExperimentItem', 'ExperimentKind', 'RunStatus',
    'GameSpec', 'GameType', 'MixedProfile', 'NormalFormGame',
    'Metrics', 'Trajectory',
]
