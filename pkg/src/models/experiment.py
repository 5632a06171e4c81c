"""Data models for experiment documents and their run state."""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

from .game import GameSpec


class ExperimentKind(Enum):
    """What an experiment document asks for."""
    SELFPLAY = "selfplay"
    ADVERSARIAL = "adversarial"
    LANDSCAPE = "landscape"
    VERIFY = "verify"


class RunStatus(Enum):
    """Status of an experiment in a batch."""
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    ERROR = "error"


@dataclass(frozen=True)
class RegularizerSpec:
    """Regularizer descriptor with its hyperparameter already resolved."""
    kind: str
    p: Optional[float] = None
    q: Optional[float] = None
    parts: tuple[tuple[float, "RegularizerSpec"], ...] = ()


@dataclass(frozen=True)
class LearnerSpec:
    """One player's learner; eta and alpha are resolved numbers (alpha is None when unused)."""
    algorithm: str
    regularizer: RegularizerSpec
    eta: float
    alpha: Optional[float] = None


@dataclass(frozen=True)
class AdversarySpec:
    type: str = "alternating"


@dataclass(frozen=True)
class LandscapeSpec:
    """Learning-rate landscape over a square grid of 2-action regret vectors."""
    regularizers: tuple[RegularizerSpec, ...]
    eta: float = 1.0
    alpha: float = 4.0
    r_min: float = -10.0
    r_max: float = 10.0
    points: int = 41


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved experiment document."""
    kind: ExperimentKind
    game: GameSpec
    players: tuple[LearnerSpec, ...]
    horizon: int
    seed: int = 0
    output_dir: Path = Path("results")
    adversary: Optional[AdversarySpec] = None
    landscape: Optional[LandscapeSpec] = None
    suite: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.output_dir, str):
            object.__setattr__(self, "output_dir", Path(self.output_dir))


@dataclass
class ExperimentItem:
    """An experiment document and its state within a batch."""
    config_path: Path
    config: Optional[ExperimentConfig] = None
    status: RunStatus = RunStatus.PENDING
    outputs: list[Path] = field(default_factory=list)
    error_message: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.config_path, str):
            self.config_path = Path(self.config_path)

    @property
    def name(self) -> str:
        return self.config_path.stem

    @property
    def is_completed(self) -> bool:
        return self.status == RunStatus.COMPLETED

    @property
    def has_error(self) -> bool:
        return self.status == RunStatus.ERROR

    def set_error(self, message: str) -> None:
        self.status = RunStatus.ERROR
        self.error_message = message

    @classmethod
    def from_path(cls, path: str | Path) -> "ExperimentItem":
        return cls(config_path=Path(path))


@dataclass(frozen=True)
class LandscapeSurface:
    """Learning rates chosen by one regularizer over a grid of regret vectors."""
    regularizer: str
    points: tuple[tuple[float, float], ...]
    learning_rates: tuple[float, ...]
