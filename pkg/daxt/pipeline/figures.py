"""Render stage: pitch maps for the top defender of each kind and the score/value scatter."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List

from daxt.config import RunConfig
from daxt.errors import ContractViolation
from daxt.pipeline.layout import RunLayout, finish, require, stage
from daxt.pipeline.ranking import metadata_path
from daxt.render import assign_bins, pitch_scatter_svg, scatter_regression_svg
from daxt.scoring import defender_pool, load_market_values, load_scores
from daxt.valuation import KINDS, aggregate_players, load_valued_actions

logger = logging.getLogger(__name__)


def run_render(config: RunConfig) -> Path:
    layout = RunLayout.of(config)
    with stage("render"):
        valued = load_valued_actions(require(layout.valued_actions, "value"))
        aggregation = aggregate_players(valued)
        inputs: List[Path] = [layout.valued_actions]
        outputs: List[Path] = []

        for kind in KINDS:
            population = [action.daxt for action in valued if action.kind == kind]
            ranked = aggregation.ranking(kind, "sum")
            if not population or not ranked:
                logger.warning("No %s actions to draw", kind)
                continue
            player = ranked[0].player_id
            subject = [action for action in valued if action.kind == kind and action.player_id == player]
            colors = assign_bins(population, [action.daxt for action in subject])
            target = layout.figures / f"{kind}_top_player.svg"
            pitch_scatter_svg(
                [(action.x, action.y, color) for action, color in zip(subject, colors)],
                target,
                title=f"{kind.capitalize()}s by player {player}",
            )
            outputs.append(target)

        values_file = metadata_path(config.inputs.market_values, layout.market_values)
        if layout.scores.exists() and values_file is not None:
            market = load_market_values(values_file)
            pool = [entry for entry in defender_pool(load_scores(layout.scores)) if entry.player_id in market]
            target = layout.figures / "score_vs_market_value.svg"
            try:
                scatter_regression_svg(
                    [entry.score for entry in pool],
                    [market[entry.player_id][1] for entry in pool],
                    target,
                    title="Defender score vs market value",
                )
            except ContractViolation as error:
                logger.warning("Score/value scatter skipped: %s", error)
            else:
                inputs += [layout.scores, values_file]
                outputs.append(target)
        else:
            logger.info("No scores or market values; skipping the score/value scatter")

        finish(config, "render", inputs, outputs)
    return layout.figures
