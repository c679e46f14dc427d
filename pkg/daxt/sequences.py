"""Sequence windows over the action stream and min-max scaling of feature tables."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.preprocessing import MinMaxScaler

from daxt.errors import ContractViolation, NotFittedError
from daxt.events import DEFENSIVE_TYPES, GameStream
from daxt.scheduler import ChunkScheduler, Task
from daxt.utils import chunked, read_csv_frame, write_csv
from daxt.xt import XTSurface, game_action_values

logger = logging.getLogger(__name__)

TRAINING = "training"
INTERCEPTION = "interception"
TACKLE = "tackle"


def feature_names(a: int) -> List[str]:
    return [f"f{index}" for index in range(1, 3 * a + 1)]


@dataclass(frozen=True, eq=False)
class FeatureTable:
    """Rows of flattened ``(xT_i, x_i, y_i)`` features over windows of *a* actions.

    ``targets`` is set for training tables only; ``locations`` (DA start x, y)
    for interception and tackle tables only.
    """

    a: int
    kind: str
    features: np.ndarray
    game_ids: Tuple[str, ...]
    event_idx: np.ndarray
    player_ids: Tuple[str, ...]
    targets: Optional[np.ndarray] = None
    locations: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.features.ndim != 2 or self.features.shape[1] != 3 * self.a:
            raise ContractViolation(f"Feature table needs {3 * self.a} columns, got shape {self.features.shape}")
        n = self.features.shape[0]
        if len(self.game_ids) != n or len(self.player_ids) != n or self.event_idx.shape != (n,):
            raise ContractViolation("Feature table provenance columns do not match the row count.")

    def __len__(self) -> int:
        return int(self.features.shape[0])

    @classmethod
    def empty(cls, a: int, kind: str) -> "FeatureTable":
        return cls(
            a=a,
            kind=kind,
            features=np.zeros((0, 3 * a)),
            game_ids=(),
            event_idx=np.zeros(0, dtype=np.int64),
            player_ids=(),
            targets=np.zeros(0) if kind == TRAINING else None,
            locations=None if kind == TRAINING else np.zeros((0, 2)),
        )

    @classmethod
    def concat(cls, tables: Sequence["FeatureTable"], a: int, kind: str) -> "FeatureTable":
        parts = [table for table in tables if len(table)]
        if not parts:
            return cls.empty(a, kind)
        return cls(
            a=a,
            kind=kind,
            features=np.vstack([table.features for table in parts]),
            game_ids=tuple(game for table in parts for game in table.game_ids),
            event_idx=np.concatenate([table.event_idx for table in parts]),
            player_ids=tuple(player for table in parts for player in table.player_ids),
            targets=np.concatenate([table.targets for table in parts]) if kind == TRAINING else None,
            locations=None if kind == TRAINING else np.vstack([table.locations for table in parts]),
        )


@dataclass
class _Rows:
    """Row accumulator for a single game and table kind."""

    a: int
    kind: str
    features: List[np.ndarray] = field(default_factory=list)
    game_ids: List[str] = field(default_factory=list)
    event_idx: List[int] = field(default_factory=list)
    player_ids: List[str] = field(default_factory=list)
    targets: List[float] = field(default_factory=list)
    locations: List[Tuple[float, float]] = field(default_factory=list)

    def table(self) -> FeatureTable:
        if not self.features:
            return FeatureTable.empty(self.a, self.kind)
        return FeatureTable(
            a=self.a,
            kind=self.kind,
            features=np.vstack(self.features),
            game_ids=tuple(self.game_ids),
            event_idx=np.array(self.event_idx, dtype=np.int64),
            player_ids=tuple(self.player_ids),
            targets=np.array(self.targets) if self.kind == TRAINING else None,
            locations=np.array(self.locations, dtype=float).reshape(-1, 2) if self.kind != TRAINING else None,
        )


def run_lengths(game: GameStream, values: np.ndarray) -> np.ndarray:
    """Length of the valuable same-team, same-period run ending at each action."""

    lengths = np.zeros(len(game.actions), dtype=np.int64)
    for index, action in enumerate(game.actions):
        if np.isnan(values[index]):
            continue
        previous = game.actions[index - 1] if index else None
        if (
            previous is not None
            and lengths[index - 1] > 0
            and previous.team_id == action.team_id
            and previous.period == action.period
        ):
            lengths[index] = lengths[index - 1] + 1
        else:
            lengths[index] = 1
    return lengths


def _window(game: GameStream, values: np.ndarray, first: int, a: int) -> np.ndarray:
    row = np.empty(3 * a)
    for offset in range(a):
        action = game.actions[first + offset]
        row[3 * offset : 3 * offset + 3] = (values[first + offset], action.start_x, action.start_y)
    return row


def extract_game(game: GameStream, surface: XTSurface, a: int) -> Dict[str, FeatureTable]:
    """Training, interception and tackle rows of one game."""

    if a < 1:
        raise ContractViolation(f"Sequence length a must be >= 1, got {a}")
    values = game_action_values(game, surface)
    lengths = run_lengths(game, values)
    rows = {kind: _Rows(a=a, kind=kind) for kind in (TRAINING, INTERCEPTION, TACKLE)}
    actions = game.actions

    for j, action in enumerate(actions):
        if lengths[j] >= a + 1:
            bucket = rows[TRAINING]
            bucket.features.append(_window(game, values, j - a, a))
            bucket.game_ids.append(game.game_id)
            bucket.event_idx.append(j)
            bucket.player_ids.append("")
            bucket.targets.append(float(values[j]))
            continue
        if action.action_type not in DEFENSIVE_TYPES or j < 1:
            continue

        before = actions[j - 1]
        last: Optional[int] = None
        if lengths[j - 1] >= a and before.team_id != action.team_id and before.period == action.period:
            last = j - 1
        elif (
            j >= 2
            and not before.success
            and not before.is_defensive
            and before.team_id != action.team_id
            and before.period == action.period
            and lengths[j - 2] >= a
            and actions[j - 2].team_id == before.team_id
            and actions[j - 2].period == before.period
        ):
            last = j - 2
        if last is None:
            continue
        bucket = rows[action.action_type]
        bucket.features.append(_window(game, values, last - a + 1, a))
        bucket.game_ids.append(game.game_id)
        bucket.event_idx.append(j)
        bucket.player_ids.append(action.player_id)
        bucket.locations.append((action.start_x, action.start_y))

    return {kind: bucket.table() for kind, bucket in rows.items()}


def _extract_chunk(task: Task[Tuple[List[GameStream], XTSurface, int]], slot: int) -> Dict[str, FeatureTable]:
    games, surface, a = task.payload
    parts = [extract_game(game, surface, a) for game in games]
    return {kind: FeatureTable.concat([part[kind] for part in parts], a, kind) for kind in (TRAINING, INTERCEPTION, TACKLE)}


def build_tables(
    games: Sequence[GameStream],
    surface: XTSurface,
    a: int,
    *,
    workers: int = 1,
    chunk_size: int = 16,
) -> Dict[str, FeatureTable]:
    """All three tables in one pass; row order follows corpus game order, then event index."""

    if a < 1:
        raise ContractViolation(f"Sequence length a must be >= 1, got {a}")
    tasks = [
        Task(name=f"windows-{index}", payload=(chunk, surface, a))
        for index, chunk in enumerate(chunked(games, chunk_size))
    ]
    results = [result for _, _, result in ChunkScheduler(workers).dispatch(tasks, _extract_chunk)]
    tables = {
        kind: FeatureTable.concat([result[kind] for result in results], a, kind)
        for kind in (TRAINING, INTERCEPTION, TACKLE)
    }
    logger.debug(
        "a=%d: %d training, %d interception, %d tackle rows",
        a,
        len(tables[TRAINING]),
        len(tables[INTERCEPTION]),
        len(tables[TACKLE]),
    )
    return tables


def build_training_set(games: Sequence[GameStream], surface: XTSurface, a: int, *, workers: int = 1) -> FeatureTable:
    return build_tables(games, surface, a, workers=workers)[TRAINING]


def build_da_sets(
    games: Sequence[GameStream], surface: XTSurface, a: int, *, workers: int = 1
) -> Tuple[FeatureTable, FeatureTable]:
    tables = build_tables(games, surface, a, workers=workers)
    return tables[INTERCEPTION], tables[TACKLE]


def save_table(table: FeatureTable, path: Path) -> Path:
    """CSV with ``f1..f3a,target,game_id,event_idx,player_id`` (plus ``x,y`` for DA tables)."""

    header = feature_names(table.a) + ["target", "game_id", "event_idx", "player_id"]
    is_da = table.kind != TRAINING
    if is_da:
        header += ["x", "y"]

    def rows():
        for index in range(len(table)):
            row = [float(value) for value in table.features[index]]
            row.append(float(table.targets[index]) if table.targets is not None else None)
            row += [table.game_ids[index], int(table.event_idx[index]), table.player_ids[index]]
            if is_da:
                row += [float(table.locations[index, 0]), float(table.locations[index, 1])]
            yield row

    return write_csv(Path(path), header, rows())


def load_table(path: Path, kind: str) -> FeatureTable:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Feature table not found: {path}")
    frame = read_csv_frame(path, dtype={"game_id": str, "player_id": str}, keep_default_na=False)
    columns = [column for column in frame.columns if column.startswith("f") and column[1:].isdigit()]
    if not columns or len(columns) % 3:
        raise ContractViolation(f"{path}: feature columns must come in (xT, x, y) triples")
    a = len(columns) // 3
    if columns != feature_names(a):
        raise ContractViolation(f"{path}: unexpected feature header {columns}")
    is_da = kind != TRAINING
    return FeatureTable(
        a=a,
        kind=kind,
        features=frame[columns].to_numpy(dtype=float).reshape(-1, 3 * a),
        game_ids=tuple(frame["game_id"].astype(str)),
        event_idx=frame["event_idx"].to_numpy(dtype=np.int64),
        player_ids=tuple(frame["player_id"].astype(str)),
        targets=None if is_da else frame["target"].to_numpy(dtype=float),
        locations=frame[["x", "y"]].to_numpy(dtype=float).reshape(-1, 2) if is_da else None,
    )


class Scaler:
    """Min-max scaling over the feature columns plus the target column.

    Fitted only on the training table; interception and tackle tables reuse it.
    Degenerate columns (max == min) map to 0 and values outside the fitted
    range are not clipped.
    """

    def __init__(self) -> None:
        self._scaler: Optional[MinMaxScaler] = None

    @property
    def fitted(self) -> bool:
        return self._scaler is not None

    def _require(self) -> MinMaxScaler:
        if self._scaler is None:
            raise NotFittedError("Scaler used before fit.")
        return self._scaler

    def fit(self, columns: np.ndarray) -> "Scaler":
        columns = np.asarray(columns, dtype=float)
        if columns.ndim != 2 or columns.shape[0] == 0:
            raise ContractViolation("Scaler needs a non-empty 2-D array.")
        self._scaler = MinMaxScaler(clip=False).fit(columns)
        return self

    @classmethod
    def from_bounds(cls, data_min: Sequence[float], data_max: Sequence[float]) -> "Scaler":
        bounds = np.vstack([np.asarray(data_min, dtype=float), np.asarray(data_max, dtype=float)])
        if np.any(bounds[1] < bounds[0]):
            raise ContractViolation("Scaler bounds require max >= min per column.")
        return cls().fit(bounds)

    @property
    def data_min(self) -> np.ndarray:
        return self._require().data_min_.copy()

    @property
    def data_max(self) -> np.ndarray:
        return self._require().data_max_.copy()

    @property
    def n_columns(self) -> int:
        return int(self._require().n_features_in_)

    @property
    def degenerate(self) -> np.ndarray:
        scaler = self._require()
        return scaler.data_max_ == scaler.data_min_

    def transform_features(self, features: np.ndarray) -> np.ndarray:
        """Scale feature rows (all columns except the trailing target)."""

        scaler = self._require()
        features = np.asarray(features, dtype=float)
        width = scaler.n_features_in_ - 1
        if features.ndim == 1:
            features = features.reshape(1, -1)
        if features.shape[1] != width:
            raise ContractViolation(f"Expected {width} feature columns, got {features.shape[1]}")
        scaled = features * scaler.scale_[:width] + scaler.min_[:width]
        scaled[:, self.degenerate[:width]] = 0.0
        return scaled

    def transform(self, row: Sequence[float]) -> np.ndarray:
        return self.transform_features(np.asarray(row, dtype=float))[0]

    def transform_target(self, values: np.ndarray) -> np.ndarray:
        scaler = self._require()
        values = np.asarray(values, dtype=float)
        if self.degenerate[-1]:
            return np.zeros_like(values)
        return values * scaler.scale_[-1] + scaler.min_[-1]

    def inverse_transform_target(self, values):
        """Original units of scaled target *values* (scalar or array)."""

        scaler = self._require()
        scaled = np.asarray(values, dtype=float)
        if self.degenerate[-1]:
            result = np.full_like(scaled, scaler.data_min_[-1])
        else:
            result = (scaled - scaler.min_[-1]) / scaler.scale_[-1]
        return float(result) if result.ndim == 0 else result


def fit_scaler(table: FeatureTable) -> Scaler:
    if table.kind != TRAINING or table.targets is None:
        raise ContractViolation("The scaler is fitted on the training table only.")
    if not len(table):
        raise ContractViolation("Cannot fit a scaler on an empty training table.")
    return Scaler().fit(np.column_stack([table.features, table.targets]))


def transform(scaler: Scaler, row: Sequence[float]) -> np.ndarray:
    return scaler.transform(row)


def inverse_transform_target(scaler: Scaler, value: float) -> float:
    return scaler.inverse_transform_target(value)
