"""Canonical action records, SPADL-format CSV ingestion and synthetic corpora."""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from daxt.errors import ContractViolation, SpadlFormatError
from daxt.utils import csv_text, ensure_directory, text_digest

logger = logging.getLogger(__name__)

PITCH_LENGTH = 105.0
PITCH_WIDTH = 68.0

ACTION_TYPES: Tuple[str, ...] = (
    "pass",
    "dribble",
    "cross",
    "shot",
    "clearance",
    "interception",
    "tackle",
    "other",
)
MOVING_TYPES = frozenset({"pass", "dribble", "cross", "clearance"})
DEFENSIVE_TYPES = frozenset({"interception", "tackle"})

SPADL_COLUMNS: Tuple[str, ...] = (
    "game_id",
    "period",
    "time_seconds",
    "team_id",
    "player_id",
    "start_x",
    "start_y",
    "end_x",
    "end_y",
    "result_id",
    "type_name",
    "player_name",
)
_NUMERIC_COLUMNS = ("period", "time_seconds", "start_x", "start_y", "end_x", "end_y", "result_id")


@dataclass(frozen=True)
class Action:
    """One SPADL-style event, in the acting team's attacking frame."""

    game_id: str
    period: int
    time_seconds: float
    team_id: str
    player_id: str
    start_x: float
    start_y: float
    end_x: float
    end_y: float
    action_type: str
    result: str
    player_name: str = ""
    type_name: str = ""
    input_index: int = field(default=-1, compare=False)
    clamped: bool = field(default=False, compare=False)

    @property
    def success(self) -> bool:
        return self.result == "success"

    @property
    def is_moving(self) -> bool:
        return self.action_type in MOVING_TYPES

    @property
    def is_defensive(self) -> bool:
        return self.action_type in DEFENSIVE_TYPES

    @property
    def valuable(self) -> bool:
        """Successful moving action, i.e. one that carries an xT value."""
        return self.success and self.is_moving


@dataclass(frozen=True)
class GameStream:
    """All actions of one game in stream order, both teams interleaved."""

    game_id: str
    actions: Tuple[Action, ...]
    team_ids: Tuple[str, ...]

    def __post_init__(self) -> None:
        missing = {action.team_id for action in self.actions} - set(self.team_ids)
        if missing:
            raise ContractViolation(f"Game {self.game_id}: team ids {sorted(missing)} absent from metadata.")

    @classmethod
    def from_actions(cls, game_id: str, actions: Iterable[Action]) -> "GameStream":
        """Sort stably by (period, time) and record team metadata in first-seen order."""

        ordered = list(actions)
        indexed = [
            action if action.input_index >= 0 else _with_index(action, index)
            for index, action in enumerate(ordered)
        ]
        indexed.sort(key=lambda action: (action.period, action.time_seconds))
        teams: List[str] = []
        for action in indexed:
            if action.team_id not in teams:
                teams.append(action.team_id)
        return cls(game_id=str(game_id), actions=tuple(indexed), team_ids=tuple(teams))

    def __len__(self) -> int:
        return len(self.actions)


def _with_index(action: Action, index: int) -> Action:
    return replace(action, input_index=index)


@dataclass
class Diagnostics:
    """Counts reported by ingestion and :func:`validate_stream`."""

    out_of_order: int = 0
    unknown_type: int = 0
    clamped: int = 0
    zero_length: int = 0
    rejected_rows: int = 0

    def merge(self, other: "Diagnostics") -> "Diagnostics":
        return Diagnostics(
            out_of_order=self.out_of_order + other.out_of_order,
            unknown_type=self.unknown_type + other.unknown_type,
            clamped=self.clamped + other.clamped,
            zero_length=self.zero_length + other.zero_length,
            rejected_rows=self.rejected_rows + other.rejected_rows,
        )

    @property
    def total(self) -> int:
        return self.out_of_order + self.unknown_type + self.clamped + self.zero_length + self.rejected_rows

    def summary(self) -> str:
        return (
            f"out_of_order={self.out_of_order} unknown_type={self.unknown_type} "
            f"clamped={self.clamped} zero_length={self.zero_length} rejected_rows={self.rejected_rows}"
        )


def normalize_type(type_name: str) -> str:
    name = str(type_name).strip().lower()
    return name if name in ACTION_TYPES else "other"


def _clamp(value: float, upper: float) -> Tuple[float, bool]:
    if value < 0.0:
        return 0.0, True
    if value > upper:
        return upper, True
    return value, False


def read_spadl_csv(path: Path) -> Tuple[List[GameStream], Diagnostics]:
    """Parse a SPADL-format CSV into games plus ingestion diagnostics."""

    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"SPADL file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError as error:
        raise SpadlFormatError(f"{path}: header row missing") from error
    for column in SPADL_COLUMNS:
        if column not in frame.columns:
            raise SpadlFormatError(f"{path}: missing required column '{column}'")

    diagnostics = Diagnostics()
    if frame.empty:
        return [], diagnostics

    numeric = {
        column: pd.to_numeric(frame[column].str.strip(), errors="coerce") for column in _NUMERIC_COLUMNS
    }
    valid = np.ones(len(frame), dtype=bool)
    for series in numeric.values():
        valid &= np.isfinite(series.to_numpy(dtype=float))
    period = numeric["period"].to_numpy(dtype=float)
    valid &= (period == 1.0) | (period == 2.0)
    diagnostics.rejected_rows = int((~valid).sum())

    by_game: Dict[str, List[Action]] = {}
    for row_index in np.flatnonzero(valid):
        start_x, cx1 = _clamp(float(numeric["start_x"].iat[row_index]), PITCH_LENGTH)
        start_y, cy1 = _clamp(float(numeric["start_y"].iat[row_index]), PITCH_WIDTH)
        end_x, cx2 = _clamp(float(numeric["end_x"].iat[row_index]), PITCH_LENGTH)
        end_y, cy2 = _clamp(float(numeric["end_y"].iat[row_index]), PITCH_WIDTH)
        time_seconds, ct = _clamp(float(numeric["time_seconds"].iat[row_index]), math.inf)
        clamped = cx1 or cy1 or cx2 or cy2 or ct
        type_name = frame["type_name"].iat[row_index].strip()
        game_id = frame["game_id"].iat[row_index].strip()
        actions = by_game.setdefault(game_id, [])
        actions.append(
            Action(
                game_id=game_id,
                period=int(numeric["period"].iat[row_index]),
                time_seconds=time_seconds,
                team_id=frame["team_id"].iat[row_index].strip(),
                player_id=frame["player_id"].iat[row_index].strip(),
                start_x=start_x,
                start_y=start_y,
                end_x=end_x,
                end_y=end_y,
                action_type=normalize_type(type_name),
                result="success" if int(numeric["result_id"].iat[row_index]) == 1 else "fail",
                player_name=frame["player_name"].iat[row_index],
                type_name=type_name,
                input_index=len(actions),
                clamped=clamped,
            )
        )

    games = [GameStream.from_actions(game_id, actions) for game_id, actions in by_game.items()]
    for game in games:
        diagnostics = diagnostics.merge(validate_stream(game))
    return games, diagnostics


def parse_spadl_csv(path: Path) -> List[GameStream]:
    """Parse a SPADL-format CSV; diagnostics are logged to standard error."""

    games, diagnostics = read_spadl_csv(path)
    level = logging.WARNING if diagnostics.total else logging.INFO
    logger.log(level, "Parsed %d games from %s (%s)", len(games), path, diagnostics.summary())
    return games


def spadl_text(games: Sequence[GameStream]) -> str:
    """Canonical CSV form of *games*."""

    rows = (
        (
            action.game_id,
            action.period,
            float(action.time_seconds),
            action.team_id,
            action.player_id,
            float(action.start_x),
            float(action.start_y),
            float(action.end_x),
            float(action.end_y),
            1 if action.success else 0,
            action.type_name or action.action_type,
            action.player_name,
        )
        for game in games
        for action in game.actions
    )
    return csv_text(SPADL_COLUMNS, rows)


def write_spadl_csv(games: Sequence[GameStream], path: Path) -> Path:
    path = Path(path)
    ensure_directory(path.parent)
    path.write_text(spadl_text(games), encoding="utf-8")
    return path


def corpus_fingerprint(games: Sequence[GameStream]) -> str:
    return text_digest(spadl_text(games))


def _time_inversions(actions: Sequence[Action]) -> int:
    """Pairs whose (period, time) key decreases in input order.

    Input order is ``input_index`` when every action carries one, otherwise
    the order of *actions* itself. Equal keys are not inversions.
    """

    positions = np.arange(len(actions))
    if all(action.input_index >= 0 for action in actions):
        positions = np.argsort([action.input_index for action in actions], kind="stable")
    period = np.array([actions[i].period for i in positions], dtype=np.int64)
    time = np.array([actions[i].time_seconds for i in positions], dtype=float)
    later = (period[:, None] > period[None, :]) | (
        (period[:, None] == period[None, :]) & (time[:, None] > time[None, :])
    )
    return int(np.triu(later, k=1).sum())


def validate_stream(game: GameStream) -> Diagnostics:
    """Report stream anomalies; never raises."""

    report = Diagnostics()
    if not game.actions:
        report.zero_length = 1
        return report
    report.out_of_order = _time_inversions(game.actions)
    report.unknown_type = sum(
        1 for action in game.actions if action.type_name and action.type_name.strip().lower() not in ACTION_TYPES
    )
    report.clamped = sum(1 for action in game.actions if action.clamped)
    return report


# ---------------------------------------------------------------------------
# Synthetic corpus
# ---------------------------------------------------------------------------

ROLE_BY_SLOT: Tuple[str, ...] = (
    "goalkeeper",
    "center_back",
    "center_back",
    "full_back",
    "full_back",
    "defensive_midfielder",
    "defensive_midfielder",
    "attacker",
    "attacker",
    "attacker",
    "attacker",
)
_ROLE_WEIGHTS: Mapping[str, Tuple[float, float, float]] = {
    # own third, middle third, final third
    "goalkeeper": (0.12, 0.0, 0.0),
    "center_back": (0.30, 0.10, 0.02),
    "full_back": (0.22, 0.18, 0.12),
    "defensive_midfielder": (0.20, 0.30, 0.12),
    "attacker": (0.06, 0.22, 0.30),
}
_POSITION_OF_ROLE = {
    "center_back": "center_back",
    "full_back": "full_back",
    "defensive_midfielder": "defensive_midfielder",
}


@dataclass(frozen=True)
class SyntheticSettings:
    """Behaviour knobs of the synthetic league."""

    n_teams: int = 20
    period_seconds: float = 2700.0
    other_rate: float = 0.02
    dribble_rate: float = 0.25
    clearance_rate: float = 0.30
    clearance_zone_x: float = 18.0
    cross_rate: float = 0.35
    box_pass_rate: float = 0.40
    interception_rate: float = 0.60
    tackle_rate: float = 0.07
    tackle_after_failed_dribble: float = 0.5
    shot_scale: float = 1.0
    goal_scale: float = 0.5
    shot_range: float = 25.0
    completion_band: Tuple[float, float] = (0.55, 0.95)
    shot_share_band: Tuple[float, float] = (0.003, 0.05)


@dataclass(frozen=True)
class CorpusStatistics:
    n_actions: int
    completion_rate: float
    shot_share: float
    type_counts: Mapping[str, int]

    def within_bands(self, settings: SyntheticSettings) -> bool:
        low_c, high_c = settings.completion_band
        low_s, high_s = settings.shot_share_band
        return low_c <= self.completion_rate <= high_c and low_s <= self.shot_share <= high_s


def corpus_statistics(games: Sequence[GameStream]) -> CorpusStatistics:
    """Completion rate of moving actions, shot share and type frequencies."""

    counts: Counter = Counter()
    moving = completed = 0
    for game in games:
        for action in game.actions:
            counts[action.action_type] += 1
            if action.is_moving:
                moving += 1
                completed += action.success
    total = sum(counts.values())
    return CorpusStatistics(
        n_actions=total,
        completion_rate=completed / moving if moving else 0.0,
        shot_share=counts["shot"] / total if total else 0.0,
        type_counts=dict(counts),
    )


@dataclass(frozen=True)
class _Player:
    player_id: str
    team_id: str
    role: str
    quality: float


def _league(rng: np.random.Generator, settings: SyntheticSettings) -> Dict[str, List[_Player]]:
    league: Dict[str, List[_Player]] = {}
    for team_index in range(settings.n_teams):
        team_id = str(101 + team_index)
        league[team_id] = [
            _Player(
                player_id=f"{team_id}{slot:02d}",
                team_id=team_id,
                role=ROLE_BY_SLOT[slot],
                quality=float(rng.uniform(0.0, 1.0)),
            )
            for slot in range(len(ROLE_BY_SLOT))
        ]
    return league


def _distance_to_goal(x: float, y: float) -> float:
    return math.hypot(PITCH_LENGTH - x, PITCH_WIDTH / 2.0 - y)


def _in_box(x: float, y: float) -> bool:
    return x >= 88.5 and 13.84 <= y <= 54.16


def _mirror(x: float, y: float) -> Tuple[float, float]:
    return PITCH_LENGTH - x, PITCH_WIDTH - y


def _on_pitch(x: float, y: float) -> Tuple[float, float]:
    return (
        round(min(max(x, 0.0), PITCH_LENGTH), 4),
        round(min(max(y, 0.0), PITCH_WIDTH), 4),
    )


class _MatchSimulator:
    """Possession-alternating chain for one game."""

    def __init__(
        self,
        game_id: str,
        home: List[_Player],
        away: List[_Player],
        rng: np.random.Generator,
        settings: SyntheticSettings,
    ):
        self.game_id = game_id
        self.rosters = {home[0].team_id: home, away[0].team_id: away}
        self.teams = (home[0].team_id, away[0].team_id)
        self.rng = rng
        self.settings = settings
        self.actions: List[Action] = []
        self.time = 0.0
        self.period = 1

    def run(self) -> GameStream:
        for period, kickoff in ((1, self.teams[0]), (2, self.teams[1])):
            self.period = period
            self.time = 0.0
            team, x, y = kickoff, 52.5, 34.0
            while self.time < self.settings.period_seconds:
                team, x, y = self._step(team, x, y)
        return GameStream(game_id=self.game_id, actions=tuple(self.actions), team_ids=self.teams)

    def _opponent(self, team: str) -> str:
        return self.teams[1] if team == self.teams[0] else self.teams[0]

    def _pick_player(self, team: str, x: float) -> _Player:
        third = 0 if x < 35.0 else (1 if x < 70.0 else 2)
        roster = self.rosters[team]
        weights = np.array([_ROLE_WEIGHTS[player.role][third] for player in roster])
        index = int(self.rng.choice(len(roster), p=weights / weights.sum()))
        return roster[index]

    def _emit(
        self,
        team: str,
        player: _Player,
        action_type: str,
        start: Tuple[float, float],
        end: Tuple[float, float],
        success: bool,
    ) -> None:
        self.time = round(self.time + float(self.rng.uniform(0.5, 4.5)), 1)
        sx, sy = _on_pitch(*start)
        ex, ey = _on_pitch(*end)
        self.actions.append(
            Action(
                game_id=self.game_id,
                period=self.period,
                time_seconds=self.time,
                team_id=team,
                player_id=player.player_id,
                start_x=sx,
                start_y=sy,
                end_x=ex,
                end_y=ey,
                action_type=action_type,
                result="success" if success else "fail",
                player_name=f"Player {player.player_id}",
                type_name=action_type,
                input_index=len(self.actions),
            )
        )

    def _turnover(self, team: str, x: float, y: float) -> Tuple[str, float, float]:
        mx, my = _on_pitch(*_mirror(x, y))
        return self._opponent(team), mx, my

    def _defensive_action(self, team: str, kind: str, x: float, y: float, success: bool) -> Tuple[str, float, float]:
        """Opponent of *team* performs *kind* at the attacker-frame point (x, y)."""

        defender_team = self._opponent(team)
        dx, dy = _mirror(x, y)
        defender = self._pick_player(defender_team, dx)
        self._emit(defender_team, defender, kind, (dx, dy), (dx, dy), success)
        if success:
            return defender_team, *_on_pitch(dx, dy)
        return team, x, y

    def _step(self, team: str, x: float, y: float) -> Tuple[str, float, float]:
        rng, settings = self.rng, self.settings
        player = self._pick_player(team, x)

        if rng.random() < settings.other_rate:
            self._emit(team, player, "other", (x, y), (x, y), True)
            return team, x, y

        distance = _distance_to_goal(x, y)
        shot_probability = min(0.9, settings.shot_scale * math.exp(-distance / 10.0)) if distance <= settings.shot_range else 0.0
        if rng.random() < shot_probability:
            goal = rng.random() < min(0.9, settings.goal_scale * math.exp(-distance / 9.0))
            self._emit(team, player, "shot", (x, y), (PITCH_LENGTH, 34.0 + float(rng.normal(0.0, 2.0))), goal)
            if goal:
                return self._opponent(team), 52.5, 34.0
            return self._opponent(team), 6.0, 34.0

        if x < settings.clearance_zone_x and rng.random() < settings.clearance_rate:
            end = _on_pitch(x + float(rng.uniform(30.0, 55.0)), float(rng.uniform(5.0, 63.0)))
            success = rng.random() < 0.45
            self._emit(team, player, "clearance", (x, y), end, success)
            return (team, *end) if success else self._turnover(team, *end)

        if x > 78.0 and abs(y - 34.0) > 16.0 and rng.random() < settings.cross_rate:
            end = _on_pitch(float(rng.uniform(92.0, 102.0)), 34.0 + float(rng.normal(0.0, 6.0)))
            success = rng.random() < 0.30
            self._emit(team, player, "cross", (x, y), end, success)
            if success:
                return (team, *end)
            if rng.random() < settings.interception_rate:
                return self._defensive_action(team, "interception", *end, True)
            return self._turnover(team, *end)

        if rng.random() < settings.dribble_rate:
            if rng.random() < settings.tackle_rate:
                return self._defensive_action(team, "tackle", x, y, rng.random() < 0.85)
            toward = 1.0 if x > 70.0 else 0.0
            end = _on_pitch(
                x + float(rng.normal(4.0, 3.0)),
                y + float(rng.normal(toward * (34.0 - y) * 0.2, 3.0)),
            )
            success = rng.random() < 0.86
            self._emit(team, player, "dribble", (x, y), end, success)
            if success:
                return (team, *end)
            if rng.random() < settings.tackle_after_failed_dribble:
                return self._defensive_action(team, "tackle", *end, True)
            return self._turnover(team, *end)

        if x > 70.0 and rng.random() < settings.box_pass_rate:
            end = _on_pitch(float(rng.uniform(89.0, 102.0)), 34.0 + float(rng.normal(0.0, 7.0)))
        elif x > 70.0:
            end = _on_pitch(x + float(rng.normal(4.0, 8.0)), y + float(rng.normal(0.0, 12.0)))
        else:
            end = _on_pitch(x + float(rng.normal(9.0, 9.0)), y + float(rng.normal(0.0, 12.0)))
        length = math.hypot(end[0] - x, end[1] - y)
        success_probability = 0.93 - 0.004 * length - (0.15 if _in_box(*end) else 0.0)
        success_probability += 0.06 * (player.quality - 0.5)
        success = rng.random() < min(0.97, max(0.35, success_probability))
        self._emit(team, player, "pass", (x, y), end, success)
        if success:
            return (team, *end)
        if rng.random() < settings.interception_rate:
            share = float(rng.uniform(0.4, 0.9))
            return self._defensive_action(team, "interception", x + share * (end[0] - x), y + share * (end[1] - y), True)
        return self._turnover(team, *end)


def generate_synthetic_corpus(
    n_games: int,
    seed: int,
    settings: Optional[SyntheticSettings] = None,
) -> List[GameStream]:
    """Deterministic synthetic league corpus; identical (n_games, seed) give identical output."""

    if n_games < 1:
        raise ContractViolation("n_games must be at least 1")
    settings = settings or SyntheticSettings()
    rng = np.random.default_rng(seed % 2**64)
    league = _league(rng, settings)
    team_ids = sorted(league)
    games: List[GameStream] = []
    for index in range(n_games):
        home_index, away_index = rng.choice(len(team_ids), size=2, replace=False)
        simulator = _MatchSimulator(
            game_id=str(index + 1),
            home=league[team_ids[int(home_index)]],
            away=league[team_ids[int(away_index)]],
            rng=rng,
            settings=settings,
        )
        games.append(simulator.run())
    logger.debug("Generated %d synthetic games (seed=%d)", n_games, seed)
    return games


@dataclass(frozen=True)
class PlayerMetadata:
    player_id: str
    player_name: str
    position: str
    market_value_millions: float


def synthetic_player_metadata(seed: int, settings: Optional[SyntheticSettings] = None) -> List[PlayerMetadata]:
    """Positions and market values of the synthetic league generated with *seed*."""

    settings = settings or SyntheticSettings()
    league = _league(np.random.default_rng(seed % 2**64), settings)
    noise = np.random.default_rng((seed + 1) % 2**64)
    base = {"goalkeeper": 8.0, "center_back": 15.0, "full_back": 12.0, "defensive_midfielder": 14.0, "attacker": 20.0}
    entries: List[PlayerMetadata] = []
    for team_id in sorted(league):
        for player in league[team_id]:
            value = base[player.role] + 40.0 * player.quality + float(noise.normal(0.0, 6.0))
            entries.append(
                PlayerMetadata(
                    player_id=player.player_id,
                    player_name=f"Player {player.player_id}",
                    position=_POSITION_OF_ROLE.get(player.role, "other"),
                    market_value_millions=round(max(0.5, value), 2),
                )
            )
    return entries
