"""Configuration loading and validation for daxt."""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, MutableMapping, Optional, Tuple, Union

try:
    import yaml  # type: ignore
except Exception:  # pragma: no cover - optional dependency
    yaml = None

from daxt.errors import ConfigError

ENV_PREFIX = "DAXT_"

FLAT_KEYS: Tuple[str, ...] = (
    "input",
    "synth_games",
    "seed",
    "a",
    "xt_tol",
    "xt_max_iter",
    "epochs",
    "batch",
    "split",
    "rho",
    "eps",
    "min_interceptions",
    "min_tackles",
    "min_appearances",
    "per_position",
    "positions",
    "market_values",
    "matches",
    "weights",
    "benchmark",
    "tolerance",
    "workers",
    "out",
)
_PATH_KEYS = frozenset({"input", "positions", "market_values", "matches", "out"})


@dataclass(frozen=True)
class ScoreWeights:
    """Per-feature weights of the defender score; all ones is the published formula."""

    interceptions: float = 1.0
    tackles: float = 1.0
    clearances: float = 1.0
    passes: float = 1.0

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.interceptions, self.tackles, self.clearances, self.passes)

    def describe(self) -> str:
        if self == ScoreWeights():
            return "default"
        return ",".join(repr(float(value)) for value in self.as_tuple())

    @classmethod
    def parse(cls, value: Any) -> "ScoreWeights":
        if value is None or isinstance(value, ScoreWeights):
            return value or cls()
        if isinstance(value, Mapping):
            unknown = set(value) - {f.name for f in dataclasses.fields(cls)}
            if unknown:
                raise ConfigError(f"Unknown score weight(s): {sorted(unknown)}")
            weights = cls(**{key: float(item) for key, item in value.items()})
        else:
            if isinstance(value, str):
                text = value.strip()
                if text.lower() in {"", "default"}:
                    return cls()
                parts = [part.strip() for part in text.split(",")]
            else:
                parts = list(value)
            if len(parts) != 4:
                raise ConfigError(f"weights expects 4 comma-separated values or 'default', got {value!r}")
            try:
                weights = cls(*(float(part) for part in parts))
            except (TypeError, ValueError) as error:
                raise ConfigError(f"weights must be numeric: {value!r}") from error
        if any(weight < 0 for weight in weights.as_tuple()):
            raise ConfigError("Score weights must be non-negative.")
        return weights


@dataclass(frozen=True)
class InputSettings:
    """Where the events come from; a synthetic league when ``events`` is unset."""

    events: Optional[Path] = None
    synth_games: int = 20
    seed: int = 7
    positions: Optional[Path] = None
    market_values: Optional[Path] = None
    matches: Optional[Path] = None


@dataclass(frozen=True)
class XTSettings:
    tol: float = 1e-6
    max_iter: int = 100


@dataclass(frozen=True)
class TrainingSettings:
    """Sequence length and optimizer hyperparameters."""

    a: int = 2
    epochs: int = 50
    batch: int = 32
    split: float = 0.2
    rho: float = 0.95
    eps: float = 1e-7


@dataclass(frozen=True)
class ScoringSettings:
    min_interceptions: int = 100
    min_tackles: int = 50
    min_appearances: int = 0
    per_position: bool = True
    weights: ScoreWeights = field(default_factory=ScoreWeights)
    benchmark: Optional[str] = None
    tolerance: int = 10


@dataclass(frozen=True)
class PathSettings:
    """Run directory root."""

    out: Path = Path("daxt-run")


@dataclass(frozen=True)
class RunConfig:
    """Root configuration model."""

    inputs: InputSettings = field(default_factory=InputSettings)
    xt: XTSettings = field(default_factory=XTSettings)
    training: TrainingSettings = field(default_factory=TrainingSettings)
    scoring: ScoringSettings = field(default_factory=ScoringSettings)
    paths: PathSettings = field(default_factory=PathSettings)
    workers: int = 1

    def to_flat(self) -> Dict[str, Any]:
        """Flat key view, the form config files and flags use."""

        return {
            "input": self.inputs.events,
            "synth_games": self.inputs.synth_games,
            "seed": self.inputs.seed,
            "a": self.training.a,
            "xt_tol": self.xt.tol,
            "xt_max_iter": self.xt.max_iter,
            "epochs": self.training.epochs,
            "batch": self.training.batch,
            "split": self.training.split,
            "rho": self.training.rho,
            "eps": self.training.eps,
            "min_interceptions": self.scoring.min_interceptions,
            "min_tackles": self.scoring.min_tackles,
            "min_appearances": self.scoring.min_appearances,
            "per_position": self.scoring.per_position,
            "positions": self.inputs.positions,
            "market_values": self.inputs.market_values,
            "matches": self.inputs.matches,
            "weights": self.scoring.weights,
            "benchmark": self.scoring.benchmark,
            "tolerance": self.scoring.tolerance,
            "workers": self.workers,
            "out": self.paths.out,
        }

    def echo(self) -> Dict[str, Any]:
        """JSON-safe config for manifests; ``out`` is elided and paths reduced to file names."""

        echoed: Dict[str, Any] = {}
        for key, value in self.to_flat().items():
            if key == "out":
                continue
            if isinstance(value, Path):
                value = value.name
            elif isinstance(value, ScoreWeights):
                value = value.describe()
            echoed[key] = value
        return echoed

    def with_overrides(self, overrides: Mapping[str, Any], base_dir: Optional[Path] = None) -> "RunConfig":
        """Return a copy with flat-key *overrides* applied; ``None`` values are ignored."""

        flat = self.to_flat()
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in flat:
                raise ConfigError(f"Unknown config key: {key}")
            flat[key] = value
        return _build_config(flat, base_dir or Path.cwd())


def load_config(
    path: Optional[Union[str, Path]] = None,
    *,
    env: Optional[Mapping[str, str]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """Load configuration from a file, then ``DAXT_*`` environment values, then *overrides*."""

    raw: Dict[str, Any] = {}
    base_dir = Path.cwd()
    if path is not None:
        path = Path(path).expanduser().resolve()
        if not path.exists():
            raise FileNotFoundError(f"Config file not found: {path}")
        raw = _parse_config_text(path.read_text(encoding="utf-8"), suffix=path.suffix)
        base_dir = path.parent
    config = _build_config(raw, base_dir)

    env_values: MutableMapping[str, Any] = {}
    _apply_env_overrides(env_values, os.environ if env is None else env)
    if env_values:
        config = config.with_overrides(env_values)
    if overrides:
        config = config.with_overrides(overrides)
    return config


def _parse_config_text(text: str, suffix: str) -> Dict[str, Any]:
    stripped = text.strip()
    if not stripped:
        return {}
    if suffix.lower() == ".json" or stripped.startswith("{"):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as error:
            raise ConfigError(f"Invalid JSON config: {error}") from error
    elif suffix.lower() in {".yaml", ".yml"} and yaml is not None:
        data = yaml.safe_load(stripped)
    else:
        data = _parse_flat_text(stripped)
    if not isinstance(data, dict):
        raise ConfigError("Config file must hold a mapping of keys to values.")
    return data


def _parse_flat_text(text: str) -> Dict[str, Any]:
    """Parse ``key = value`` lines (``key: value`` also accepted)."""

    data: Dict[str, Any] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        separator = "=" if "=" in line else ":"
        if separator not in line:
            raise ConfigError(f"Cannot parse config line {number}: {line}")
        key, value = line.split(separator, 1)
        data[key.strip()] = _coerce_scalar(value.strip())
    return data


def _coerce_scalar(value: str) -> Any:
    if len(value) >= 2 and value[0] == value[-1] and value[0] in {"'", '"'}:
        return value[1:-1]
    lowered = value.lower()
    if lowered in {"true", "false"}:
        return lowered == "true"
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            continue
    return value


def _apply_env_overrides(config: MutableMapping[str, Any], env: Mapping[str, str]) -> None:
    """Collect ``DAXT_<KEY>`` environment variables as flat overrides."""

    for key, value in env.items():
        if not key.startswith(ENV_PREFIX):
            continue
        name = key[len(ENV_PREFIX) :].lower()
        if name not in FLAT_KEYS:
            raise ConfigError(f"Unknown config key in environment: {key}")
        config[name] = _coerce_scalar(value.strip())


def _as_int(raw: Mapping[str, Any], key: str, default: int, minimum: int) -> int:
    value = raw.get(key, default)
    if isinstance(value, bool):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    try:
        number = int(value)
    except (TypeError, ValueError) as error:
        raise ConfigError(f"{key} must be an integer, got {value!r}") from error
    if number != float(value):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    if number < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {number}")
    return number


def _as_float(raw: Mapping[str, Any], key: str, default: float) -> float:
    value = raw.get(key, default)
    if isinstance(value, bool):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError) as error:
        raise ConfigError(f"{key} must be a number, got {value!r}") from error


def _as_bool(raw: Mapping[str, Any], key: str, default: bool) -> bool:
    value = raw.get(key, default)
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in {"true", "false", "yes", "no", "1", "0"}:
        return value.lower() in {"true", "yes", "1"}
    if isinstance(value, int) and value in (0, 1):
        return bool(value)
    raise ConfigError(f"{key} must be true or false, got {value!r}")


def _as_identifier(raw: Mapping[str, Any], key: str) -> Optional[str]:
    value = raw.get(key)
    if value is None or str(value).strip() == "":
        return None
    if isinstance(value, (bool, float)):
        raise ConfigError(f"{key} must be an identifier, got {value!r}")
    return str(value).strip()


def _as_path(raw: Mapping[str, Any], key: str, base_dir: Path) -> Optional[Path]:
    value = raw.get(key)
    if value is None or value == "":
        return None
    return (base_dir / Path(str(value)).expanduser()).resolve()


def _build_config(raw: Mapping[str, Any], base_dir: Path) -> RunConfig:
    unknown = sorted(set(raw) - set(FLAT_KEYS))
    if unknown:
        raise ConfigError(f"Unknown config key(s): {', '.join(unknown)}")

    xt = XTSettings(
        tol=_as_float(raw, "xt_tol", XTSettings.tol),
        max_iter=_as_int(raw, "xt_max_iter", XTSettings.max_iter, 1),
    )
    if not xt.tol > 0:
        raise ConfigError(f"xt_tol must be positive, got {xt.tol}")

    training = TrainingSettings(
        a=_as_int(raw, "a", TrainingSettings.a, 1),
        epochs=_as_int(raw, "epochs", TrainingSettings.epochs, 1),
        batch=_as_int(raw, "batch", TrainingSettings.batch, 1),
        split=_as_float(raw, "split", TrainingSettings.split),
        rho=_as_float(raw, "rho", TrainingSettings.rho),
        eps=_as_float(raw, "eps", TrainingSettings.eps),
    )
    if not 0.0 < training.split < 1.0:
        raise ConfigError(f"split must lie in (0, 1), got {training.split}")
    if not 0.0 < training.rho < 1.0:
        raise ConfigError(f"rho must lie in (0, 1), got {training.rho}")
    if not training.eps > 0:
        raise ConfigError(f"eps must be positive, got {training.eps}")

    scoring = ScoringSettings(
        min_interceptions=_as_int(raw, "min_interceptions", ScoringSettings.min_interceptions, 0),
        min_tackles=_as_int(raw, "min_tackles", ScoringSettings.min_tackles, 0),
        min_appearances=_as_int(raw, "min_appearances", ScoringSettings.min_appearances, 0),
        per_position=_as_bool(raw, "per_position", ScoringSettings.per_position),
        weights=ScoreWeights.parse(raw.get("weights")),
        benchmark=_as_identifier(raw, "benchmark"),
        tolerance=_as_int(raw, "tolerance", ScoringSettings.tolerance, 0),
    )

    inputs = InputSettings(
        events=_as_path(raw, "input", base_dir),
        synth_games=_as_int(raw, "synth_games", InputSettings.synth_games, 1),
        seed=_as_int(raw, "seed", InputSettings.seed, 0),
        positions=_as_path(raw, "positions", base_dir),
        market_values=_as_path(raw, "market_values", base_dir),
        matches=_as_path(raw, "matches", base_dir),
    )
    out = _as_path(raw, "out", base_dir) or (base_dir / PathSettings.out).resolve()

    return RunConfig(
        inputs=inputs,
        xt=xt,
        training=training,
        scoring=scoring,
        paths=PathSettings(out=out),
        workers=_as_int(raw, "workers", 1, 1),
    )
