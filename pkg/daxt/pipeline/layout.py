"""Run directory layout shared by every stage."""

from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, List

from daxt.config import RunConfig
from daxt.errors import MissingArtifactError
from daxt.events import GameStream, read_spadl_csv
from daxt.manifest import record_command
from daxt.utils import ensure_directory

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunLayout:
    """Artifact paths below the ``out`` directory."""

    root: Path

    @classmethod
    def of(cls, config: RunConfig) -> "RunLayout":
        return cls(Path(config.paths.out))

    def directory(self, name: str) -> Path:
        path = self.root / name
        ensure_directory(path)
        return path

    # events/
    @property
    def events(self) -> Path:
        return self.root / "events" / "events.csv"

    @property
    def diagnostics(self) -> Path:
        return self.root / "events" / "diagnostics.txt"

    @property
    def positions(self) -> Path:
        return self.root / "events" / "positions.csv"

    @property
    def market_values(self) -> Path:
        return self.root / "events" / "market_values.csv"

    # xt/
    @property
    def surface(self) -> Path:
        return self.root / "xt" / "surface.csv"

    @property
    def surface_meta(self) -> Path:
        return self.root / "xt" / "surface.json"

    # datasets/
    @property
    def training_table(self) -> Path:
        return self.root / "datasets" / "training.csv"

    @property
    def interception_table(self) -> Path:
        return self.root / "datasets" / "interceptions.csv"

    @property
    def tackle_table(self) -> Path:
        return self.root / "datasets" / "tackles.csv"

    # model/
    @property
    def model(self) -> Path:
        return self.root / "model" / "model.json"

    # valuation/
    @property
    def valued_actions(self) -> Path:
        return self.root / "valuation" / "valued_actions.csv"

    @property
    def player_stats(self) -> Path:
        return self.root / "valuation" / "player_stats.csv"

    def player_ranking(self, kind: str, measure: str) -> Path:
        return self.root / "valuation" / f"{kind}_{measure}.csv"

    def benchmark_table(self, kind: str) -> Path:
        return self.root / "valuation" / f"benchmark_{kind}s.csv"

    # scoring/
    @property
    def scores(self) -> Path:
        return self.root / "scoring" / "scores.csv"

    def position_ranking(self, position: str) -> Path:
        return self.root / "scoring" / f"ranking_{position}.csv"

    @property
    def market_correlation(self) -> Path:
        return self.root / "scoring" / "market_correlation.csv"

    # validation/
    @property
    def tests(self) -> Path:
        return self.root / "validation" / "tests.csv"

    @property
    def qq(self) -> Path:
        return self.root / "validation" / "qq.csv"

    @property
    def validation_summary(self) -> Path:
        return self.root / "validation" / "summary.json"

    # figures/, sweep/, reports/
    @property
    def figures(self) -> Path:
        return self.root / "figures"

    @property
    def sweep(self) -> Path:
        return self.root / "sweep" / "sweep_a.csv"

    @property
    def report_text(self) -> Path:
        return self.root / "reports" / "report.txt"

    @property
    def report_json(self) -> Path:
        return self.root / "reports" / "report.json"


def require(path: Path, producer: str) -> Path:
    """Return *path* if it exists, else fail naming the command that writes it."""

    if not Path(path).exists():
        raise MissingArtifactError(path, producer)
    return Path(path)


def load_events(layout: RunLayout) -> List[GameStream]:
    games, _ = read_spadl_csv(require(layout.events, "ingest` or `daxt synth"))
    return games


def finish(
    config: RunConfig,
    command: str,
    inputs: Iterable[Path],
    outputs: Iterable[Path],
) -> None:
    outputs = list(outputs)
    record_command(Path(config.paths.out), command, config=config.echo(), inputs=inputs, outputs=outputs)
    for path in outputs:
        logger.info("[%s] wrote %s", command, path)


@contextmanager
def stage(command: str) -> Iterator[None]:
    """Log the start and elapsed time of a stage."""

    logger.info("[%s] Executing", command)
    start = time.perf_counter()
    yield
    logger.info("[%s] Completed in %.1fs", command, time.perf_counter() - start)
