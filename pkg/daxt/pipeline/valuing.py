"""Value stage: DAxT per interception and tackle, then per-player totals."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Mapping

from daxt.config import RunConfig
from daxt.network import load_model
from daxt.pipeline.layout import RunLayout, finish, load_events, require, stage
from daxt.pipeline.ranking import metadata_path
from daxt.scoring import load_market_values, player_names
from daxt.sequences import INTERCEPTION, TACKLE, load_table
from daxt.valuation import (
    KINDS,
    PlayerAggregation,
    aggregate_players,
    benchmark_comparison,
    save_benchmark,
    save_player_stats,
    save_ranking,
    save_valued_actions,
    value_defensive_actions,
)

logger = logging.getLogger(__name__)


def _benchmark_tables(
    config: RunConfig,
    layout: RunLayout,
    aggregation: PlayerAggregation,
    names: Mapping[str, str],
    inputs: List[Path],
) -> List[Path]:
    player_id = config.scoring.benchmark
    values_file = metadata_path(config.inputs.market_values, layout.market_values)
    market = {}
    if values_file is not None:
        market = {player: value for player, (_, value) in load_market_values(values_file).items()}
        inputs.append(values_file)
    outputs = []
    for kind in KINDS:
        rows = benchmark_comparison(aggregation, player_id, kind, config.scoring.tolerance, market)
        logger.info(
            "Benchmark %s: %d players within %d %ss", player_id, len(rows), config.scoring.tolerance, kind
        )
        outputs.append(save_benchmark(rows, layout.benchmark_table(kind), names))
    return outputs


def run_value(config: RunConfig) -> Path:
    layout = RunLayout.of(config)
    with stage("value"):
        model = load_model(require(layout.model, "train"))
        interceptions = load_table(require(layout.interception_table, "datasets"), INTERCEPTION)
        tackles = load_table(require(layout.tackle_table, "datasets"), TACKLE)
        valued = value_defensive_actions(model, interceptions) + value_defensive_actions(model, tackles)
        aggregation = aggregate_players(
            valued,
            min_interceptions=config.scoring.min_interceptions,
            min_tackles=config.scoring.min_tackles,
        )
        names = player_names(load_events(layout))
        inputs = [layout.model, layout.interception_table, layout.tackle_table]
        outputs = [
            save_valued_actions(valued, layout.valued_actions),
            save_player_stats(aggregation, layout.player_stats),
        ]
        for kind in KINDS:
            for measure in ("sum", "avg"):
                outputs.append(save_ranking(aggregation, kind, measure, layout.player_ranking(kind, measure), names))
        if config.scoring.benchmark is not None:
            outputs += _benchmark_tables(config, layout, aggregation, names, inputs)
        finish(config, "value", inputs, outputs)
    return layout.valued_actions
