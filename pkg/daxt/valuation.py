"""Per-action DAxT values and per-player aggregation."""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from daxt.errors import ContractViolation
from daxt.network import TrainedModel
from daxt.sequences import INTERCEPTION, TACKLE, FeatureTable
from daxt.utils import read_csv_frame, write_csv

logger = logging.getLogger(__name__)

KINDS = (INTERCEPTION, TACKLE)
VALUED_COLUMNS = ("game_id", "event_idx", "player_id", "kind", "x", "y", "daxt")


@dataclass(frozen=True)
class ValuedAction:
    game_id: str
    event_idx: int
    player_id: str
    kind: str
    x: float
    y: float
    daxt: float


def value_defensive_actions(model: TrainedModel, table: FeatureTable) -> List[ValuedAction]:
    """Predicted xT of the event each defensive action prevented, in table order."""

    if table.kind not in KINDS:
        raise ContractViolation(f"Expected an interception or tackle table, got {table.kind!r}")
    if table.a != model.a:
        raise ContractViolation(f"Table was built with a={table.a}, model with a={model.a}")
    if not len(table):
        return []
    predictions = model.predict(table.features)
    return [
        ValuedAction(
            game_id=table.game_ids[index],
            event_idx=int(table.event_idx[index]),
            player_id=table.player_ids[index],
            kind=table.kind,
            x=float(table.locations[index, 0]),
            y=float(table.locations[index, 1]),
            daxt=float(predictions[index]),
        )
        for index in range(len(table))
    ]


@dataclass(frozen=True)
class PlayerDefStats:
    player_id: str
    interception_sum: float = 0.0
    interception_count: int = 0
    tackle_sum: float = 0.0
    tackle_count: int = 0

    @property
    def interception_avg(self) -> float:
        return self.interception_sum / self.interception_count if self.interception_count else 0.0

    @property
    def tackle_avg(self) -> float:
        return self.tackle_sum / self.tackle_count if self.tackle_count else 0.0

    def total(self, kind: str) -> float:
        return self.interception_sum if kind == INTERCEPTION else self.tackle_sum

    def count(self, kind: str) -> int:
        return self.interception_count if kind == INTERCEPTION else self.tackle_count

    def average(self, kind: str) -> float:
        return self.interception_avg if kind == INTERCEPTION else self.tackle_avg


@dataclass(frozen=True)
class PlayerAggregation:
    """All players' sums plus the thresholded averages views."""

    players: Tuple[PlayerDefStats, ...]
    interception_averages: Tuple[PlayerDefStats, ...]
    tackle_averages: Tuple[PlayerDefStats, ...]
    min_interceptions: int
    min_tackles: int

    def by_player(self) -> Dict[str, PlayerDefStats]:
        return {stats.player_id: stats for stats in self.players}

    def ranking(self, kind: str, measure: str) -> List[PlayerDefStats]:
        """Cumulative (``sum``) or average (``avg``) ranking for *kind*, best first."""

        if kind not in KINDS or measure not in {"sum", "avg"}:
            raise ContractViolation(f"Unknown ranking {kind}/{measure}")
        if measure == "avg":
            return list(self.interception_averages if kind == INTERCEPTION else self.tackle_averages)
        pool = [stats for stats in self.players if stats.count(kind)]
        return sorted(pool, key=lambda stats: (-stats.total(kind), stats.player_id))


def aggregate_players(
    valued: Iterable[ValuedAction],
    min_interceptions: int = 100,
    min_tackles: int = 50,
) -> PlayerAggregation:
    values: Dict[Tuple[str, str], List[float]] = defaultdict(list)
    for action in valued:
        if action.kind not in KINDS:
            raise ContractViolation(f"Unknown defensive action kind {action.kind!r}")
        values[(action.player_id, action.kind)].append(action.daxt)

    players = []
    for player_id in sorted({player for player, _ in values}):
        interceptions = values.get((player_id, INTERCEPTION), [])
        tackles = values.get((player_id, TACKLE), [])
        players.append(
            PlayerDefStats(
                player_id=player_id,
                interception_sum=math.fsum(interceptions),
                interception_count=len(interceptions),
                tackle_sum=math.fsum(tackles),
                tackle_count=len(tackles),
            )
        )

    def averages(kind: str, threshold: int) -> Tuple[PlayerDefStats, ...]:
        pool = [stats for stats in players if stats.count(kind) and stats.count(kind) >= threshold]
        return tuple(sorted(pool, key=lambda stats: (-stats.average(kind), stats.player_id)))

    return PlayerAggregation(
        players=tuple(players),
        interception_averages=averages(INTERCEPTION, min_interceptions),
        tackle_averages=averages(TACKLE, min_tackles),
        min_interceptions=min_interceptions,
        min_tackles=min_tackles,
    )


@dataclass(frozen=True)
class ComparisonRow:
    player_id: str
    count: int
    average: float
    market_value: Optional[float]


def benchmark_comparison(
    aggregation: PlayerAggregation,
    player_id: str,
    kind: str,
    tolerance: int,
    market_values: Optional[Mapping[str, float]] = None,
) -> List[ComparisonRow]:
    """Players whose *kind* count lies within ``±tolerance`` of *player_id*'s, best average first."""

    stats = aggregation.by_player()
    if player_id not in stats:
        raise ContractViolation(f"Benchmark player {player_id} has no defensive actions")
    reference = stats[player_id].count(kind)
    market_values = market_values or {}
    rows = [
        ComparisonRow(
            player_id=entry.player_id,
            count=entry.count(kind),
            average=entry.average(kind),
            market_value=market_values.get(entry.player_id),
        )
        for entry in aggregation.players
        if entry.count(kind) and abs(entry.count(kind) - reference) <= tolerance
    ]
    return sorted(rows, key=lambda row: (-row.average, row.player_id))


def save_benchmark(
    rows: Sequence[ComparisonRow],
    path: Path,
    names: Optional[Mapping[str, str]] = None,
) -> Path:
    names = names or {}
    body = ((row.player_id, names.get(row.player_id, ""), row.count, row.average, row.market_value) for row in rows)
    return write_csv(Path(path), ("player_id", "player_name", "count", "average", "market_value"), body)


def save_valued_actions(valued: Sequence[ValuedAction], path: Path) -> Path:
    rows = ((v.game_id, v.event_idx, v.player_id, v.kind, v.x, v.y, v.daxt) for v in valued)
    return write_csv(Path(path), VALUED_COLUMNS, rows)


def load_valued_actions(path: Path) -> List[ValuedAction]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Valued actions not found: {path}")
    frame = read_csv_frame(path, dtype={"game_id": str, "player_id": str, "kind": str}, keep_default_na=False)
    missing = [column for column in VALUED_COLUMNS if column not in frame.columns]
    if missing:
        raise ContractViolation(f"{path}: missing columns {missing}")
    return [
        ValuedAction(
            game_id=row.game_id,
            event_idx=int(row.event_idx),
            player_id=row.player_id,
            kind=row.kind,
            x=float(row.x),
            y=float(row.y),
            daxt=float(row.daxt),
        )
        for row in frame.itertuples(index=False)
    ]


def save_player_stats(aggregation: PlayerAggregation, path: Path) -> Path:
    header = (
        "player_id",
        "interception_sum",
        "interception_count",
        "interception_avg",
        "tackle_sum",
        "tackle_count",
        "tackle_avg",
    )
    rows = (
        (
            stats.player_id,
            stats.interception_sum,
            stats.interception_count,
            stats.interception_avg,
            stats.tackle_sum,
            stats.tackle_count,
            stats.tackle_avg,
        )
        for stats in aggregation.players
    )
    return write_csv(Path(path), header, rows)


def save_ranking(
    aggregation: PlayerAggregation,
    kind: str,
    measure: str,
    path: Path,
    names: Optional[Mapping[str, str]] = None,
) -> Path:
    """``player_id,player_name,value,count`` table, best first."""

    names = names or {}
    ranked = aggregation.ranking(kind, measure)
    rows = (
        (
            stats.player_id,
            names.get(stats.player_id, ""),
            stats.total(kind) if measure == "sum" else stats.average(kind),
            stats.count(kind),
        )
        for stats in ranked
    )
    return write_csv(Path(path), ("player_id", "player_name", "value", "count"), rows)
