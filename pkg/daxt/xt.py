"""Expected Threat grid model: zone statistics, value iteration and action values."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from daxt.errors import ContractViolation, NotValuableError
from daxt.events import PITCH_LENGTH, PITCH_WIDTH, Action, GameStream
from daxt.scheduler import ChunkScheduler, Task
from daxt.utils import chunked, ensure_directory, read_csv_frame, write_csv, write_json

logger = logging.getLogger(__name__)

N_COLS = 16
N_ROWS = 12
N_ZONES = N_COLS * N_ROWS


def zone_of(x: float, y: float) -> Tuple[int, int]:
    """Grid cell (col, row) containing pitch point (x, y)."""

    if not (0.0 <= x <= PITCH_LENGTH and 0.0 <= y <= PITCH_WIDTH):
        raise ContractViolation(f"Point ({x}, {y}) lies outside the pitch.")
    col = min(int(math.floor(x / PITCH_LENGTH * N_COLS)), N_COLS - 1)
    row = min(int(math.floor(y / PITCH_WIDTH * N_ROWS)), N_ROWS - 1)
    return col, row


def zone_index(x: float, y: float) -> int:
    col, row = zone_of(x, y)
    return col * N_ROWS + row


def zone_indices(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorized :func:`zone_index`; inputs must already lie on the pitch."""

    cols = np.minimum(np.floor(np.asarray(x, dtype=float) / PITCH_LENGTH * N_COLS), N_COLS - 1)
    rows = np.minimum(np.floor(np.asarray(y, dtype=float) / PITCH_WIDTH * N_ROWS), N_ROWS - 1)
    return cols.astype(np.int64) * N_ROWS + rows.astype(np.int64)


@dataclass
class GridCounts:
    """Raw per-zone counts; merging is associative so games can be counted in chunks."""

    shots: np.ndarray
    goals: np.ndarray
    moves: np.ndarray
    transitions: np.ndarray

    @classmethod
    def empty(cls, n_zones: int = N_ZONES) -> "GridCounts":
        return cls(
            shots=np.zeros(n_zones, dtype=np.int64),
            goals=np.zeros(n_zones, dtype=np.int64),
            moves=np.zeros(n_zones, dtype=np.int64),
            transitions=np.zeros((n_zones, n_zones), dtype=np.int64),
        )

    def merge(self, other: "GridCounts") -> "GridCounts":
        return GridCounts(
            shots=self.shots + other.shots,
            goals=self.goals + other.goals,
            moves=self.moves + other.moves,
            transitions=self.transitions + other.transitions,
        )

    @property
    def successful_moves(self) -> np.ndarray:
        return self.transitions.sum(axis=1)


def count_game(game: GameStream) -> GridCounts:
    counts = GridCounts.empty()
    if not game.actions:
        return counts
    types = np.array([action.action_type for action in game.actions])
    success = np.array([action.success for action in game.actions], dtype=bool)
    start = zone_indices(
        np.array([action.start_x for action in game.actions]),
        np.array([action.start_y for action in game.actions]),
    )
    end = zone_indices(
        np.array([action.end_x for action in game.actions]),
        np.array([action.end_y for action in game.actions]),
    )
    is_shot = types == "shot"
    is_move = np.isin(types, ["pass", "dribble", "cross", "clearance"])
    np.add.at(counts.shots, start[is_shot], 1)
    np.add.at(counts.goals, start[is_shot & success], 1)
    np.add.at(counts.moves, start[is_move], 1)
    moved = is_move & success
    np.add.at(counts.transitions, (start[moved], end[moved]), 1)
    return counts


def count_actions(games: Sequence[GameStream]) -> GridCounts:
    counts = GridCounts.empty()
    for game in games:
        counts = counts.merge(count_game(game))
    return counts


def _count_chunk(task: Task[List[GameStream]], slot: int) -> GridCounts:
    return count_actions(task.payload)


@dataclass(frozen=True, eq=False)
class GridModel:
    """Per-zone shoot/score/move probabilities and the move transition matrix."""

    s: np.ndarray
    g: np.ndarray
    m: np.ndarray
    T: np.ndarray
    n_cols: int = N_COLS
    n_rows: int = N_ROWS
    counts: Optional[GridCounts] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        n = self.n_cols * self.n_rows
        for name in ("s", "g", "m"):
            if getattr(self, name).shape != (n,):
                raise ContractViolation(f"GridModel.{name} must have shape ({n},)")
        if self.T.shape != (n, n):
            raise ContractViolation(f"GridModel.T must have shape ({n}, {n})")

    @property
    def n_zones(self) -> int:
        return self.n_cols * self.n_rows

    @classmethod
    def from_counts(cls, counts: GridCounts) -> "GridModel":
        shots = counts.shots.astype(float)
        attempts = shots + counts.moves
        s = np.divide(shots, attempts, out=np.zeros_like(shots), where=attempts > 0)
        m = np.where(attempts > 0, 1.0 - s, 0.0)
        g = np.divide(counts.goals.astype(float), shots, out=np.zeros_like(shots), where=shots > 0)
        successes = counts.successful_moves.astype(float)
        T = np.divide(
            counts.transitions.astype(float),
            successes[:, None],
            out=np.zeros(counts.transitions.shape),
            where=successes[:, None] > 0,
        )
        return cls(s=s, g=g, m=m, T=T, counts=counts)

    def check_invariants(self, atol: float = 1e-12) -> None:
        """Raise :class:`ContractViolation` when a probability constraint fails."""

        for name in ("s", "g", "m", "T"):
            values = getattr(self, name)
            if not np.all(np.isfinite(values)) or values.min() < 0.0 or values.max() > 1.0:
                raise ContractViolation(f"GridModel.{name} has entries outside [0, 1].")
        observed = (self.s + self.m) > 0
        if not np.allclose((self.s + self.m)[observed], 1.0, atol=atol):
            raise ContractViolation("s + m must equal 1 on observed zones.")
        rows = self.T.sum(axis=1)
        if not np.all((np.abs(rows - 1.0) <= atol) | (rows == 0.0)):
            raise ContractViolation("Transition rows must sum to 1 or 0.")


def fit_grid(games: Sequence[GameStream], *, workers: int = 1, chunk_size: int = 16) -> GridModel:
    """Estimate the grid model from *games*.

    Counts are gathered per chunk of games (optionally on several workers) and
    merged in chunk order.
    """

    if not games or not any(game.actions for game in games):
        raise ContractViolation("Cannot fit an xT grid on an empty corpus.")
    tasks = [
        Task(name=f"grid-{index}", payload=chunk)
        for index, chunk in enumerate(chunked(games, chunk_size))
    ]
    counts = GridCounts.empty()
    for _, _, partial in ChunkScheduler(workers).dispatch(tasks, _count_chunk):
        counts = counts.merge(partial)
    if counts.shots.sum() == 0:
        logger.warning("Corpus holds no shots; every xT value will be 0.")
    if counts.transitions.sum() == 0:
        logger.warning("Corpus holds no successful moves; transition matrix is empty.")
    model = GridModel.from_counts(counts)
    logger.debug(
        "Fitted grid: %d shots, %d goals, %d moves (%d successful)",
        counts.shots.sum(),
        counts.goals.sum(),
        counts.moves.sum(),
        counts.transitions.sum(),
    )
    return model


@dataclass(frozen=True, eq=False)
class XTSurface:
    """Fixed-point xT value per zone (flat index ``col * n_rows + row``)."""

    values: np.ndarray
    iterations_used: int
    final_residual: float
    converged: bool = True
    tol: float = 1e-6
    n_cols: int = N_COLS
    n_rows: int = N_ROWS
    fingerprint: str = ""

    def grid(self) -> np.ndarray:
        """Values as an (n_cols, n_rows) array."""
        return self.values.reshape(self.n_cols, self.n_rows)

    def value_at(self, x: float, y: float) -> float:
        col, row = zone_of(x, y)
        return float(self.values[col * self.n_rows + row])


def solve_xt(model: GridModel, tol: float = 1e-6, max_iter: int = 100) -> XTSurface:
    """Synchronous value iteration from zero until the per-zone change drops below *tol*."""

    if tol <= 0:
        raise ContractViolation("tol must be positive")
    if max_iter < 1:
        raise ContractViolation("max_iter must be >= 1")
    payoff = model.s * model.g
    values = np.zeros(model.n_zones)
    residual = math.inf
    iterations = 0
    converged = False
    while iterations < max_iter:
        updated = payoff + model.m * (model.T @ values)
        residual = float(np.max(np.abs(updated - values)))
        values = updated
        iterations += 1
        if residual < tol:
            converged = True
            break
    if converged:
        logger.debug("xT converged after %d iterations (residual %.3e)", iterations, residual)
    else:
        logger.warning("xT did not converge in %d iterations (residual %.3e > tol %.1e)", iterations, residual, tol)
    return XTSurface(
        values=values,
        iterations_used=iterations,
        final_residual=residual,
        converged=converged,
        tol=tol,
        n_cols=model.n_cols,
        n_rows=model.n_rows,
    )


def bellman_residual(model: GridModel, surface: XTSurface) -> float:
    """Max |xT - (s*g + m * T xT)| over zones at *surface*."""

    values = surface.values
    return float(np.max(np.abs(values - (model.s * model.g + model.m * (model.T @ values)))))


def action_xt(surface: XTSurface, action: Action) -> float:
    """xT gained by a successful moving action (end zone minus start zone)."""

    if not action.valuable:
        raise NotValuableError(
            f"Action {action.action_type}/{action.result} in game {action.game_id} has no xT value."
        )
    return surface.value_at(action.end_x, action.end_y) - surface.value_at(action.start_x, action.start_y)


def game_action_values(game: GameStream, surface: XTSurface) -> np.ndarray:
    """f(e) for every action of *game*; NaN where the action is not valuable."""

    values = np.full(len(game.actions), np.nan)
    if not game.actions:
        return values
    valuable = np.array([action.valuable for action in game.actions], dtype=bool)
    start = zone_indices(
        np.array([action.start_x for action in game.actions]),
        np.array([action.start_y for action in game.actions]),
    )
    end = zone_indices(
        np.array([action.end_x for action in game.actions]),
        np.array([action.end_y for action in game.actions]),
    )
    delta = surface.values[end] - surface.values[start]
    values[valuable] = delta[valuable]
    return values


def save_surface(surface: XTSurface, path: Path) -> Tuple[Path, Path]:
    """Write ``col,row,xt`` CSV plus a JSON sidecar with the solve metadata."""

    path = Path(path)
    ensure_directory(path.parent)
    grid = surface.grid()
    rows = (
        (col, row, float(grid[col, row]))
        for col in range(surface.n_cols)
        for row in range(surface.n_rows)
    )
    write_csv(path, ("col", "row", "xt"), rows)
    sidecar = write_json(
        path.with_suffix(".json"),
        {
            "n_cols": surface.n_cols,
            "n_rows": surface.n_rows,
            "tol": surface.tol,
            "iterations_used": surface.iterations_used,
            "final_residual": surface.final_residual,
            "converged": surface.converged,
            "corpus_fingerprint": surface.fingerprint,
        },
    )
    return path, sidecar


def load_surface(path: Path) -> XTSurface:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"xT surface not found: {path}")
    sidecar = path.with_suffix(".json")
    meta = json.loads(sidecar.read_text(encoding="utf-8")) if sidecar.exists() else {}
    frame = read_csv_frame(path)
    n_cols = int(meta.get("n_cols", N_COLS))
    n_rows = int(meta.get("n_rows", N_ROWS))
    if len(frame) != n_cols * n_rows:
        raise ContractViolation(f"{path}: expected {n_cols * n_rows} zones, found {len(frame)}")
    grid = np.zeros((n_cols, n_rows))
    grid[frame["col"].to_numpy(dtype=int), frame["row"].to_numpy(dtype=int)] = frame["xt"].to_numpy(dtype=float)
    return XTSurface(
        values=grid.reshape(-1),
        iterations_used=int(meta.get("iterations_used", 0)),
        final_residual=float(meta.get("final_residual", 0.0)),
        converged=bool(meta.get("converged", True)),
        tol=float(meta.get("tol", 1e-6)),
        n_cols=n_cols,
        n_rows=n_rows,
        fingerprint=str(meta.get("corpus_fingerprint", "")),
    )
