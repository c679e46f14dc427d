"""Datasets stage: training, interception and tackle tables."""

from __future__ import annotations

from pathlib import Path

from daxt.config import RunConfig
from daxt.pipeline.layout import RunLayout, finish, load_events, require, stage
from daxt.sequences import INTERCEPTION, TACKLE, TRAINING, build_tables, save_table
from daxt.xt import load_surface


def run_datasets(config: RunConfig) -> Path:
    layout = RunLayout.of(config)
    with stage("datasets"):
        games = load_events(layout)
        surface = load_surface(require(layout.surface, "xt"))
        tables = build_tables(games, surface, config.training.a, workers=config.workers)
        outputs = [
            save_table(tables[TRAINING], layout.training_table),
            save_table(tables[INTERCEPTION], layout.interception_table),
            save_table(tables[TACKLE], layout.tackle_table),
        ]
        finish(config, "datasets", [layout.events, layout.surface], outputs)
    return layout.training_table
