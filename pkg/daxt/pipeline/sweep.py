"""Sweep stage: dataset sizes and model error for sequence lengths a = 1, 2, 3."""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import List, Sequence, Tuple

from daxt.config import RunConfig
from daxt.network import init_network, train
from daxt.pipeline.layout import RunLayout, finish, load_events, require, stage
from daxt.pipeline.training import train_config
from daxt.sequences import INTERCEPTION, TACKLE, TRAINING, build_tables
from daxt.utils import write_csv
from daxt.xt import load_surface

logger = logging.getLogger(__name__)

SWEEP_LENGTHS: Tuple[int, ...] = (1, 2, 3)
SWEEP_COLUMNS = (
    "a",
    "train_mae",
    "validation_mae",
    "baseline_mae",
    "training_rows",
    "interception_rows",
    "tackle_rows",
)


def run_sweep(config: RunConfig, lengths: Sequence[int] = SWEEP_LENGTHS) -> Path:
    layout = RunLayout.of(config)
    with stage("sweep-a"):
        games = load_events(layout)
        surface = load_surface(require(layout.surface, "xt"))
        settings = train_config(config)
        rows: List[tuple] = []
        for a in lengths:
            tables = build_tables(games, surface, a, workers=config.workers)
            training = tables[TRAINING]
            if len(training):
                model = train(init_network(a, config.inputs.seed), training, settings, fingerprint=surface.fingerprint)
                train_mae = model.history.train_mae[-1] if len(model.history) else math.nan
                validation_mae = model.history.validation_mae[-1] if len(model.history) else math.nan
                baseline = model.baseline_mae
            else:
                logger.warning("a=%d yields no training rows", a)
                train_mae = validation_mae = baseline = math.nan
            rows.append(
                (a, train_mae, validation_mae, baseline, len(training), len(tables[INTERCEPTION]), len(tables[TACKLE]))
            )
            logger.info("a=%d: %d training rows, validation MAE %.6f", a, len(training), validation_mae)
        path = write_csv(layout.sweep, SWEEP_COLUMNS, rows)
        finish(config, "sweep-a", [layout.events, layout.surface], [path])
    return path
