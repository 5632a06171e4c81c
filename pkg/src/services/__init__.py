from .experiment_runner import ExperimentBatchRunner, run_experiment
from .learners import CoftrlLearner, MwuLearner, OmwuLearner, SafeguardedLearner
from .regularizers import make_regularizer
from .verification import run_verify

__all__ = [
    'ExperimentBatchRunner', 'run_experiment',
    'CoftrlLearner', 'MwuLearner', 'OmwuLearner', 'SafeguardedLearner',
    'make_regularizer', 'run_verify',
]
