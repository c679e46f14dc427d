"""Clearance/Pass xT, pool normalization, the defender score and market-value correlation."""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from daxt.config import ScoreWeights
from daxt.errors import ContractViolation
from daxt.events import GameStream
from daxt.stats import TestResult, pearson
from daxt.utils import read_csv_frame, write_csv
from daxt.valuation import PlayerAggregation
from daxt.xt import XTSurface, game_action_values

logger = logging.getLogger(__name__)

POSITIONS: Tuple[str, ...] = ("center_back", "full_back", "defensive_midfielder", "other")
FEATURES: Tuple[str, ...] = ("interceptions", "tackles", "clearances", "passes")


@dataclass(frozen=True)
class PlayerMetadataRow:
    """Joined external columns for one player; every field is optional."""

    player_name: str = ""
    market_value: Optional[float] = None
    goals_conceded: Optional[int] = None
    appearances: Optional[int] = None

    @property
    def goals_per_appearance(self) -> Optional[float]:
        if self.goals_conceded is None or not self.appearances:
            return None
        return self.goals_conceded / self.appearances


def compute_cxt_pxt(games: Sequence[GameStream], surface: XTSurface) -> Dict[str, Tuple[float, float]]:
    """Per-player (Clearance xT, Pass xT) sums over successful clearances and passes."""

    clearances: Dict[str, List[float]] = defaultdict(list)
    passes: Dict[str, List[float]] = defaultdict(list)
    players = set()
    for game in games:
        values = game_action_values(game, surface)
        for action, value in zip(game.actions, values):
            players.add(action.player_id)
            if math.isnan(value):
                continue
            if action.action_type == "clearance":
                clearances[action.player_id].append(float(value))
            elif action.action_type == "pass":
                passes[action.player_id].append(float(value))
    return {
        player: (math.fsum(clearances.get(player, [])), math.fsum(passes.get(player, [])))
        for player in sorted(players)
    }


def count_appearances(games: Iterable[GameStream]) -> Dict[str, int]:
    """Number of games in which each player records at least one action."""

    appearances: Dict[str, int] = defaultdict(int)
    for game in games:
        for player in {action.player_id for action in game.actions}:
            appearances[player] += 1
    return dict(appearances)


def player_names(games: Iterable[GameStream]) -> Dict[str, str]:
    names: Dict[str, str] = {}
    for game in games:
        for action in game.actions:
            if action.player_name and action.player_id not in names:
                names[action.player_id] = action.player_name
    return names


@dataclass(frozen=True)
class RawFeatures:
    """Cumulative I_V, T_V, CxT and PxT for one player."""

    player_id: str
    interceptions: float
    tackles: float
    clearances: float
    passes: float

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.interceptions, self.tackles, self.clearances, self.passes)


def raw_features(aggregation: PlayerAggregation, cxt_pxt: Mapping[str, Tuple[float, float]]) -> List[RawFeatures]:
    stats = aggregation.by_player()
    players = sorted(set(stats) | set(cxt_pxt))
    features = []
    for player in players:
        entry = stats.get(player)
        clearance, passing = cxt_pxt.get(player, (0.0, 0.0))
        features.append(
            RawFeatures(
                player_id=player,
                interceptions=entry.interception_sum if entry else 0.0,
                tackles=entry.tackle_sum if entry else 0.0,
                clearances=clearance,
                passes=passing,
            )
        )
    return features


def normalize_pool(pool: Sequence[RawFeatures]) -> List[Tuple[float, float, float, float]]:
    """Min-max map each feature to 0–100 over *pool*; degenerate features map to 0."""

    if not pool:
        raise ContractViolation("Cannot normalize an empty player pool")
    matrix = np.array([player.as_tuple() for player in pool], dtype=float)
    low = matrix.min(axis=0)
    span = matrix.max(axis=0) - low
    normalized = np.zeros_like(matrix)
    varying = span > 0
    normalized[:, varying] = 100.0 * (matrix[:, varying] - low[varying]) / span[varying]
    return [tuple(float(value) for value in row) for row in normalized]


def defender_score(
    interceptions: float,
    tackles: float,
    clearances: float,
    passes: float,
    weights: ScoreWeights = ScoreWeights(),
) -> float:
    """((I_V + T_V + CxT) / 3 + PxT) / 4 with optional per-feature weights."""

    defensive = weights.interceptions * interceptions + weights.tackles * tackles + weights.clearances * clearances
    return (defensive / 3.0 + weights.passes * passes) / 4.0


@dataclass(frozen=True)
class DefenderScore:
    player_id: str
    position: str
    interceptions: float
    tackles: float
    clearances: float
    passes: float
    score: float
    raw: RawFeatures


def score_players(
    features: Sequence[RawFeatures],
    positions: Mapping[str, str],
    *,
    appearances: Optional[Mapping[str, int]] = None,
    min_appearances: int = 0,
    per_position: bool = True,
    weights: ScoreWeights = ScoreWeights(),
) -> List[DefenderScore]:
    """Normalize within position pools (or one pool) and score every eligible player."""

    appearances = appearances or {}
    eligible = [
        player
        for player in features
        if appearances.get(player.player_id, 0) >= min_appearances
    ]
    pools: Dict[str, List[RawFeatures]] = defaultdict(list)
    for player in eligible:
        position = positions.get(player.player_id, "other")
        pools[position if per_position else "all"].append(player)

    scores: List[DefenderScore] = []
    for pool_name in sorted(pools):
        pool = pools[pool_name]
        for player, (i_v, t_v, cxt, pxt) in zip(pool, normalize_pool(pool)):
            scores.append(
                DefenderScore(
                    player_id=player.player_id,
                    position=positions.get(player.player_id, "other"),
                    interceptions=i_v,
                    tackles=t_v,
                    clearances=cxt,
                    passes=pxt,
                    score=defender_score(i_v, t_v, cxt, pxt, weights),
                    raw=player,
                )
            )
    logger.debug("Scored %d players in %d pool(s)", len(scores), len(pools))
    return sorted(scores, key=lambda entry: entry.player_id)


def rank(scores: Iterable[DefenderScore], position: Optional[str] = None) -> List[DefenderScore]:
    """Descending score, ties broken by player id; optionally one position only."""

    selected = [entry for entry in scores if position is None or entry.position == position]
    return sorted(selected, key=lambda entry: (-entry.score, entry.player_id))


def correlate_market_value(scores: Iterable[DefenderScore], market_values: Mapping[str, float]) -> TestResult:
    """Pearson r and p between scores and market values over the joined players."""

    joined = [(entry.score, market_values[entry.player_id]) for entry in scores if entry.player_id in market_values]
    if not joined:
        raise ContractViolation("No scored player has a market value")
    if len(joined) < 3:
        raise ContractViolation(f"Correlation needs at least 3 joined players, got {len(joined)}")
    x, y = zip(*joined)
    return pearson(x, y)


def _read_table(path: Path, required: Sequence[str]):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Metadata file not found: {path}")
    frame = read_csv_frame(path, dtype=str, keep_default_na=False)
    missing = [column for column in required if column not in frame.columns]
    if missing:
        raise ContractViolation(f"{path}: missing columns {missing}")
    return frame


def load_positions(path: Path) -> Dict[str, str]:
    frame = _read_table(path, ("player_id", "position"))
    positions: Dict[str, str] = {}
    for player_id, position in zip(frame["player_id"], frame["position"]):
        label = position.strip().lower().replace(" ", "_")
        if label not in POSITIONS:
            logger.warning("Unknown position %r for player %s; using 'other'", position, player_id)
            label = "other"
        positions[player_id.strip()] = label
    return positions


def load_market_values(path: Path) -> Dict[str, Tuple[str, float]]:
    """player_id -> (player_name, market value in millions)."""

    frame = _read_table(path, ("player_id", "player_name", "market_value_millions"))
    values: Dict[str, Tuple[str, float]] = {}
    for row in frame.itertuples(index=False):
        try:
            amount = float(row.market_value_millions)
        except ValueError as error:
            raise ContractViolation(f"{path}: bad market value {row.market_value_millions!r}") from error
        values[row.player_id.strip()] = (row.player_name, amount)
    return values


def load_matches(path: Path) -> Dict[str, Tuple[int, int]]:
    """player_id -> (goals conceded, appearances)."""

    frame = _read_table(path, ("player_id", "goals_conceded", "appearances"))
    matches: Dict[str, Tuple[int, int]] = {}
    for row in frame.itertuples(index=False):
        try:
            matches[row.player_id.strip()] = (int(row.goals_conceded), int(row.appearances))
        except ValueError as error:
            raise ContractViolation(f"{path}: bad match row for player {row.player_id}") from error
    return matches


SCORE_COLUMNS = (
    "player_id",
    "position",
    "interceptions",
    "tackles",
    "clearances",
    "passes",
    "score",
    "raw_interceptions",
    "raw_tackles",
    "raw_clearances",
    "raw_passes",
)


def save_scores(scores: Sequence[DefenderScore], path: Path) -> Path:
    rows = (
        (
            entry.player_id,
            entry.position,
            entry.interceptions,
            entry.tackles,
            entry.clearances,
            entry.passes,
            entry.score,
            *entry.raw.as_tuple(),
        )
        for entry in scores
    )
    return write_csv(Path(path), SCORE_COLUMNS, rows)


def load_scores(path: Path) -> List[DefenderScore]:
    frame = _read_table(path, SCORE_COLUMNS)
    scores = []
    for row in frame.itertuples(index=False):
        raw = RawFeatures(
            player_id=row.player_id,
            interceptions=float(row.raw_interceptions),
            tackles=float(row.raw_tackles),
            clearances=float(row.raw_clearances),
            passes=float(row.raw_passes),
        )
        scores.append(
            DefenderScore(
                player_id=row.player_id,
                position=row.position,
                interceptions=float(row.interceptions),
                tackles=float(row.tackles),
                clearances=float(row.clearances),
                passes=float(row.passes),
                score=float(row.score),
                raw=raw,
            )
        )
    return scores


def defender_pool(scores: Sequence[DefenderScore]) -> List[DefenderScore]:
    """Scored defenders; everyone when no player carries a defensive position."""

    defenders = [entry for entry in scores if entry.position != "other"]
    return defenders or list(scores)


def save_position_ranking(
    ranked: Sequence[DefenderScore],
    path: Path,
    metadata: Mapping[str, PlayerMetadataRow],
    with_matches: bool,
) -> Path:
    """Ranking table; GC, A and GC/A are passthrough columns when a matches file was given."""

    header = ["rank", "player_id", "player_name", "score"]
    if with_matches:
        header += ["goals_conceded", "appearances", "gc_per_appearance"]
    rows = []
    for position, entry in enumerate(ranked, start=1):
        meta = metadata.get(entry.player_id, PlayerMetadataRow())
        row = [position, entry.player_id, meta.player_name, entry.score]
        if with_matches:
            row += [meta.goals_conceded, meta.appearances, meta.goals_per_appearance]
        rows.append(row)
    return write_csv(Path(path), header, rows)
