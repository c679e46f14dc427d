"""Event ingestion: SPADL-format CSV or a seeded synthetic league."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Sequence

from daxt.config import RunConfig
from daxt.errors import ConfigError
from daxt.events import (
    Diagnostics,
    GameStream,
    corpus_statistics,
    generate_synthetic_corpus,
    read_spadl_csv,
    synthetic_player_metadata,
    write_spadl_csv,
)
from daxt.pipeline.layout import RunLayout, finish, stage
from daxt.utils import ensure_directory, write_csv

logger = logging.getLogger(__name__)


def _write_diagnostics(path: Path, games: Sequence[GameStream], diagnostics: Diagnostics) -> Path:
    stats = corpus_statistics(games)
    lines = [
        f"games={len(games)}",
        f"actions={stats.n_actions}",
        f"out_of_order={diagnostics.out_of_order}",
        f"unknown_type={diagnostics.unknown_type}",
        f"clamped={diagnostics.clamped}",
        f"zero_length={diagnostics.zero_length}",
        f"rejected_rows={diagnostics.rejected_rows}",
        f"completion_rate={stats.completion_rate!r}",
        f"shot_share={stats.shot_share!r}",
    ]
    lines += [f"type.{name}={count}" for name, count in sorted(stats.type_counts.items())]
    ensure_directory(path.parent)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def run_ingest(config: RunConfig) -> Path:
    """Parse the configured SPADL CSV into the run's canonical events file."""

    source = config.inputs.events
    if source is None:
        raise ConfigError("ingest needs an events file (--input or the `input` config key).")
    layout = RunLayout.of(config)
    with stage("ingest"):
        games, diagnostics = read_spadl_csv(source)
        logger.log(
            logging.WARNING if diagnostics.total else logging.INFO,
            "Parsed %d games from %s (%s)",
            len(games),
            source,
            diagnostics.summary(),
        )
        outputs: List[Path] = [
            write_spadl_csv(games, layout.events),
            _write_diagnostics(layout.diagnostics, games, diagnostics),
        ]
        finish(config, "ingest", [source], outputs)
    return layout.events


def run_synth(config: RunConfig) -> Path:
    """Generate the synthetic corpus plus player positions and market values."""

    layout = RunLayout.of(config)
    with stage("synth"):
        games = generate_synthetic_corpus(config.inputs.synth_games, config.inputs.seed)
        metadata = synthetic_player_metadata(config.inputs.seed)
        stats = corpus_statistics(games)
        logger.info(
            "Synthetic corpus: %d games, %d actions, completion %.3f, shot share %.4f",
            len(games),
            stats.n_actions,
            stats.completion_rate,
            stats.shot_share,
        )
        outputs = [
            write_spadl_csv(games, layout.events),
            _write_diagnostics(layout.diagnostics, games, Diagnostics()),
            write_csv(layout.positions, ("player_id", "position"), ((m.player_id, m.position) for m in metadata)),
            write_csv(
                layout.market_values,
                ("player_id", "player_name", "market_value_millions"),
                ((m.player_id, m.player_name, m.market_value_millions) for m in metadata),
            ),
        ]
        finish(config, "synth", [], outputs)
    return layout.events
