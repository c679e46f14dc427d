"""The full pipeline in stage order."""

from __future__ import annotations

import logging
from pathlib import Path

from daxt.config import RunConfig
from daxt.pipeline.datasets import run_datasets
from daxt.pipeline.figures import run_render
from daxt.pipeline.ingest import run_ingest, run_synth
from daxt.pipeline.ranking import run_score
from daxt.pipeline.reporting import run_report
from daxt.pipeline.surface import run_xt
from daxt.pipeline.training import run_train
from daxt.pipeline.validate import run_validate
from daxt.pipeline.valuing import run_value

logger = logging.getLogger(__name__)

STAGES = (run_xt, run_datasets, run_train, run_value, run_score, run_validate, run_render, run_report)


def run_all(config: RunConfig) -> Path:
    """Ingest the configured events (or synthesize a league) and run every later stage."""

    if config.inputs.events is not None:
        run_ingest(config)
    else:
        logger.info("No event file configured; synthesizing %d games", config.inputs.synth_games)
        run_synth(config)
    result = Path(config.paths.out)
    for runner in STAGES:
        result = runner(config)
    return result
