"""Parse and serialize JSON experiment documents.

Every "default" token and the p* / q* shorthands are resolved at parse time,
so a serialized config carries the exact numbers a run used.
"""

import json
import logging
import math
from dataclasses import asdict
from pathlib import Path
from typing import Any, Optional

from ..errors import ConfigError
from ..models.experiment import (
    AdversarySpec,
    ExperimentConfig,
    ExperimentKind,
    LandscapeSpec,
    LearnerSpec,
    RegularizerSpec,
)
from ..models.game import DEFAULT_SMOOTHNESS, GameSpec, GameType, game_action_counts
from .harness import AdversaryKind
from .learners import AVAILABLE_ALGORITHMS, AlgorithmKind, default_params, mwu_learning_rate
from .regularizers import (
    AVAILABLE_KINDS,
    RegularizerKind,
    Regularizer,
    combine,
    make_regularizer,
    p_star,
    q_star,
)

logger = logging.getLogger(__name__)

DEFAULT_TOKEN = "default"
SUITES = ("regularizers", "solvers", "learners", "harness", "all")
LANDSCAPE_KINDS = ("neg_entropy", "log", "squared_lp", "tsallis")


def build_regularizer(spec: RegularizerSpec, dimension: int) -> Regularizer:
    """Instantiate a resolved regularizer descriptor over `dimension` actions."""
    if spec.kind == RegularizerKind.COMBINATION.value:
        return combine([(weight, build_regularizer(part, dimension)) for weight, part in spec.parts])
    return make_regularizer(spec.kind, dimension, p=spec.p, q=spec.q)


def _require(doc: dict, key: str, path: str) -> Any:
    if key not in doc:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    return doc[key]


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(path, f"expected a finite number, got {value!r}")
    return float(value)


def _integer(value: Any, path: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(path, f"must be at least {minimum}, got {value}")
    return value


def _parse_game(doc: Any, path: str = "game") -> GameSpec:
    if not isinstance(doc, dict):
        raise ConfigError(path, "expected an object")
    try:
        game_type = GameType(_require(doc, "type", path))
    except ValueError:
        valid = ", ".join(t.value for t in GameType)
        raise ConfigError(f"{path}.type", f"unknown game type {doc['type']!r}; valid types: {valid}")
    players = _integer(doc.get("players", 2), f"{path}.players", 2)
    actions = _integer(doc.get("actions", 2), f"{path}.actions", 2)
    smoothness = _number(doc.get("smoothness", DEFAULT_SMOOTHNESS), f"{path}.smoothness")
    if not smoothness > 0:
        raise ConfigError(f"{path}.smoothness", f"must be positive, got {smoothness}")
    if game_type in (GameType.MATCHING_PENNIES, GameType.ROCK_PAPER_SCISSORS) and players != 2:
        raise ConfigError(f"{path}.players", f"{game_type.value} is a 2-player game")
    return GameSpec(type=game_type, players=players, actions=actions, smoothness=smoothness)


def _parse_regularizer(doc: Any, dimension: int, path: str) -> RegularizerSpec:
    if isinstance(doc, str):
        doc = {"kind": doc}
    if not isinstance(doc, dict):
        raise ConfigError(path, "expected an object or a kind name")
    kind = _require(doc, "kind", path)
    try:
        kind = RegularizerKind(kind)
    except ValueError:
        valid = ", ".join(
            f"{info.name} ({info.hyperparameter})" if info.hyperparameter else info.name
            for info in AVAILABLE_KINDS.values()
        )
        raise ConfigError(f"{path}.kind", f"unknown regularizer kind {kind!r}; valid kinds: {valid}")

    if kind is RegularizerKind.SQUARED_LP:
        p = doc.get("p", DEFAULT_TOKEN)
        p = p_star(dimension) if p in (DEFAULT_TOKEN, "p*", None) else _number(p, f"{path}.p")
        if not 1.0 < p <= 2.0:
            raise ConfigError(f"{path}.p", f"must lie in (1, 2], got {p}")
        return RegularizerSpec(kind=kind.value, p=p)

    if kind is RegularizerKind.TSALLIS:
        q = doc.get("q", DEFAULT_TOKEN)
        q = q_star(dimension) if q in (DEFAULT_TOKEN, "q*", None) else _number(q, f"{path}.q")
        if not 0.0 < q < 1.0:
            raise ConfigError(f"{path}.q", f"must lie in (0, 1), got {q}")
        return RegularizerSpec(kind=kind.value, q=q)

    if kind is RegularizerKind.COMBINATION:
        raw_parts = _require(doc, "parts", path)
        if not isinstance(raw_parts, list) or not raw_parts:
            raise ConfigError(f"{path}.parts", "expected a non-empty list")
        parts = []
        for j, part in enumerate(raw_parts):
            part_path = f"{path}.parts[{j}]"
            if not isinstance(part, dict):
                raise ConfigError(part_path, "expected an object with weight and regularizer")
            weight = _number(_require(part, "weight", part_path), f"{part_path}.weight")
            if not weight > 0:
                raise ConfigError(f"{part_path}.weight", f"must be positive, got {weight}")
            inner = _parse_regularizer(_require(part, "regularizer", part_path), dimension, f"{part_path}.regularizer")
            parts.append((weight, inner))
        return RegularizerSpec(kind=kind.value, parts=tuple(parts))

    return RegularizerSpec(kind=kind.value)


def _parse_learner(doc: Any, dimension: int, n: int, smoothness: float, horizon: int, path: str) -> LearnerSpec:
    if not isinstance(doc, dict):
        raise ConfigError(path, "expected an object")
    try:
        algorithm = AlgorithmKind(doc.get("algorithm", AlgorithmKind.COFTRL.value))
    except ValueError:
        valid = ", ".join(k.value for k in AlgorithmKind)
        raise ConfigError(f"{path}.algorithm", f"unknown algorithm {doc['algorithm']!r}; valid algorithms: {valid}")
    info = AVAILABLE_ALGORITHMS[algorithm]

    if not info.uses_regularizer and "regularizer" in doc:
        raise ConfigError(
            f"{path}.regularizer", f"{algorithm.value} always plays the negative entropy; remove the field"
        )
    raw_reg = doc.get("regularizer", RegularizerKind.NEG_ENTROPY.value) if info.uses_regularizer else "neg_entropy"
    reg_spec = _parse_regularizer(raw_reg, dimension, f"{path}.regularizer")
    try:
        reg = build_regularizer(reg_spec, dimension)
    except ValueError as e:
        raise ConfigError(f"{path}.regularizer", str(e)) from e
    defaults = default_params(reg, dimension, n, smoothness)

    eta = doc.get("eta", DEFAULT_TOKEN)
    if eta == DEFAULT_TOKEN:
        eta = mwu_learning_rate(dimension, horizon) if algorithm is AlgorithmKind.MWU else defaults.eta
    eta = _number(eta, f"{path}.eta")
    if not eta > 0:
        raise ConfigError(f"{path}.eta", f"must be positive, got {eta}")

    alpha = None
    if info.uses_alpha:
        alpha = doc.get("alpha", DEFAULT_TOKEN)
        alpha = defaults.alpha if alpha == DEFAULT_TOKEN else _number(alpha, f"{path}.alpha")
        gamma = reg.constants().gamma
        if not alpha > gamma:
            raise ConfigError(f"{path}.alpha", f"must exceed gamma = {gamma:.6g}, got {alpha}")
    return LearnerSpec(algorithm=algorithm.value, regularizer=reg_spec, eta=eta, alpha=alpha)


def _parse_landscape(doc: Any, path: str = "landscape") -> LandscapeSpec:
    doc = {} if doc is None else doc
    if not isinstance(doc, dict):
        raise ConfigError(path, "expected an object")
    raw = doc.get("regularizers", list(LANDSCAPE_KINDS))
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{path}.regularizers", "expected a non-empty list")
    regularizers = tuple(_parse_regularizer(r, 2, f"{path}.regularizers[{j}]") for j, r in enumerate(raw))
    spec = LandscapeSpec(
        regularizers=regularizers,
        eta=_number(doc.get("eta", 1.0), f"{path}.eta"),
        alpha=_number(doc.get("alpha", 4.0), f"{path}.alpha"),
        r_min=_number(doc.get("r_min", -10.0), f"{path}.r_min"),
        r_max=_number(doc.get("r_max", 10.0), f"{path}.r_max"),
        points=_integer(doc.get("points", 41), f"{path}.points", 2),
    )
    if not spec.eta > 0:
        raise ConfigError(f"{path}.eta", f"must be positive, got {spec.eta}")
    if not spec.r_min < spec.r_max:
        raise ConfigError(f"{path}.r_max", "must exceed r_min")
    return spec


def parse_config(
    text: str,
    seed: Optional[int] = None,
    horizon: Optional[int] = None,
    output_dir: Optional[Path] = None,
) -> ExperimentConfig:
    """
    Parse an experiment document into a fully resolved config.

    Args:
        text: JSON document
        seed: Overrides the document's seed
        horizon: Overrides the document's horizon (before defaults are resolved)
        output_dir: Overrides the document's output directory

    Returns:
        ExperimentConfig with every default resolved

    Raises:
        ConfigError: With the path of the offending field
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("", f"invalid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ConfigError("", "the document must be a JSON object")

    try:
        kind = ExperimentKind(doc.get("kind", ExperimentKind.SELFPLAY.value))
    except ValueError:
        valid = ", ".join(k.value for k in ExperimentKind)
        raise ConfigError("kind", f"unknown experiment kind {doc['kind']!r}; valid kinds: {valid}")

    game = _parse_game(doc.get("game", {"type": GameType.MATCHING_PENNIES.value}))
    horizon = horizon if horizon is not None else doc.get("horizon", 1024)
    horizon = _integer(horizon, "horizon", 1)
    seed = _integer(seed if seed is not None else doc.get("seed", 0), "seed", 0)
    out = output_dir if output_dir is not None else doc.get("output_dir", "results")

    counts = game_action_counts(game)
    expected = {ExperimentKind.SELFPLAY: game.players, ExperimentKind.ADVERSARIAL: 1}.get(kind, 0)
    raw_players = doc.get("players", [{}]) if expected else []
    if isinstance(raw_players, dict):
        raw_players = [raw_players] * max(expected, 1)
    if not isinstance(raw_players, list):
        raise ConfigError("players", "expected a list of learner objects")
    if expected and len(raw_players) == 1 and expected > 1:
        raw_players = raw_players * expected
    if expected and len(raw_players) != expected:
        raise ConfigError("players", f"expected {expected} learners for this game, got {len(raw_players)}")
    players = tuple(
        _parse_learner(p, counts[j], game.players, game.smoothness, horizon, f"players[{j}]")
        for j, p in enumerate(raw_players)
    )

    adversary = None
    if kind is ExperimentKind.ADVERSARIAL:
        raw = doc.get("adversary", {})
        adversary_type = raw.get("type", AdversaryKind.ALTERNATING.value) if isinstance(raw, dict) else raw
        try:
            adversary = AdversarySpec(type=AdversaryKind(adversary_type).value)
        except ValueError:
            valid = ", ".join(k.value for k in AdversaryKind)
            raise ConfigError("adversary.type", f"unknown adversary {adversary_type!r}; valid adversaries: {valid}")
        if players[0].algorithm != AlgorithmKind.COFTRL.value:
            raise ConfigError("players[0].algorithm", "adversarial runs use a safeguarded coftrl learner")

    landscape = _parse_landscape(doc.get("landscape")) if kind is ExperimentKind.LANDSCAPE else None

    suite = None
    if kind is ExperimentKind.VERIFY:
        suite = doc.get("suite", "all")
        if suite not in SUITES:
            raise ConfigError("suite", f"unknown suite {suite!r}; valid suites: {', '.join(SUITES)}")

    return ExperimentConfig(
        kind=kind,
        game=game,
        players=players,
        horizon=horizon,
        seed=seed,
        output_dir=Path(out),
        adversary=adversary,
        landscape=landscape,
        suite=suite,
    )


def load_config(path: str | Path, **overrides: Any) -> ExperimentConfig:
    """Read and parse a document from disk; keyword overrides go to parse_config."""
    path = Path(path)
    if not path.exists():
        raise ConfigError("", f"config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"), **overrides)


def _regularizer_to_dict(spec: RegularizerSpec) -> dict[str, Any]:
    data: dict[str, Any] = {"kind": spec.kind}
    if spec.p is not None:
        data["p"] = spec.p
    if spec.q is not None:
        data["q"] = spec.q
    if spec.parts:
        data["parts"] = [{"weight": w, "regularizer": _regularizer_to_dict(r)} for w, r in spec.parts]
    return data


def config_to_dict(config: ExperimentConfig) -> dict[str, Any]:
    """JSON-ready view of a resolved config."""
    data: dict[str, Any] = {
        "kind": config.kind.value,
        "game": {
            "type": config.game.type.value,
            "players": config.game.players,
            "actions": config.game.actions,
            "smoothness": config.game.smoothness,
        },
        "players": [
            {
                "algorithm": p.algorithm,
                **(
                    {"regularizer": _regularizer_to_dict(p.regularizer)}
                    if AVAILABLE_ALGORITHMS[AlgorithmKind(p.algorithm)].uses_regularizer else {}
                ),
                "eta": p.eta,
                **({"alpha": p.alpha} if p.alpha is not None else {}),
            }
            for p in config.players
        ],
        "horizon": config.horizon,
        "seed": config.seed,
        "output_dir": str(config.output_dir),
    }
    if config.adversary is not None:
        data["adversary"] = asdict(config.adversary)
    if config.landscape is not None:
        landscape = asdict(config.landscape)
        landscape["regularizers"] = [_regularizer_to_dict(r) for r in config.landscape.regularizers]
        data["landscape"] = landscape
    if config.suite is not None:
        data["suite"] = config.suite
    return data


def serialize_config(config: ExperimentConfig) -> str:
    return json.dumps(config_to_dict(config), indent=2)
