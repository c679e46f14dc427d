"""Score stage: defender scores, per-position rankings and market-value correlation."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from daxt.config import RunConfig
from daxt.errors import ContractViolation
from daxt.pipeline.layout import RunLayout, finish, load_events, require, stage
from daxt.scoring import (
    DefenderScore,
    PlayerMetadataRow,
    compute_cxt_pxt,
    correlate_market_value,
    count_appearances,
    defender_pool,
    load_market_values,
    load_matches,
    load_positions,
    player_names,
    rank,
    raw_features,
    save_position_ranking,
    save_scores,
    score_players,
)
from daxt.stats import TestResult
from daxt.utils import write_csv
from daxt.valuation import aggregate_players, load_valued_actions
from daxt.xt import load_surface

logger = logging.getLogger(__name__)


def metadata_path(configured: Optional[Path], fallback: Path) -> Optional[Path]:
    """The configured file, else the copy a synthetic run wrote, else nothing."""

    if configured is not None:
        return configured
    return fallback if fallback.exists() else None


def _market_correlation(scores: Sequence[DefenderScore], market: Dict[str, float]) -> Optional[TestResult]:
    pool = defender_pool(scores)
    try:
        result = correlate_market_value(pool, market)
    except ContractViolation as error:
        logger.warning("Market-value correlation skipped: %s", error)
        return None
    logger.info("Score vs market value: r=%.4f p=%.3g (n=%d)", result.statistic, result.p_value, result.n)
    return result


def run_score(config: RunConfig) -> Path:
    layout = RunLayout.of(config)
    with stage("score"):
        games = load_events(layout)
        surface = load_surface(require(layout.surface, "xt"))
        valued = load_valued_actions(require(layout.valued_actions, "value"))
        inputs: List[Path] = [layout.events, layout.surface, layout.valued_actions]

        positions_file = metadata_path(config.inputs.positions, layout.positions)
        values_file = metadata_path(config.inputs.market_values, layout.market_values)
        matches_file = config.inputs.matches
        positions = load_positions(positions_file) if positions_file else {}
        market = load_market_values(values_file) if values_file else {}
        matches = load_matches(matches_file) if matches_file else {}
        inputs += [path for path in (positions_file, values_file, matches_file) if path is not None]
        if not positions:
            logger.warning("No positions file; every player is pooled as 'other'.")

        aggregation = aggregate_players(valued)
        features = raw_features(aggregation, compute_cxt_pxt(games, surface))
        scores = score_players(
            features,
            positions,
            appearances=count_appearances(games),
            min_appearances=config.scoring.min_appearances,
            per_position=config.scoring.per_position,
            weights=config.scoring.weights,
        )

        names = player_names(games)
        metadata: Dict[str, PlayerMetadataRow] = {}
        for entry in scores:
            name, value = market.get(entry.player_id, (names.get(entry.player_id, ""), None))
            goals, played = matches.get(entry.player_id, (None, None))
            metadata[entry.player_id] = PlayerMetadataRow(
                player_name=name or names.get(entry.player_id, ""),
                market_value=value,
                goals_conceded=goals,
                appearances=played,
            )

        outputs = [save_scores(scores, layout.scores)]
        groups = sorted({entry.position for entry in scores}) if config.scoring.per_position else [None]
        for position in groups:
            ranked = rank(scores, position)
            target = layout.position_ranking(position or "all")
            outputs.append(save_position_ranking(ranked, target, metadata, with_matches=bool(matches)))

        result = _market_correlation(scores, {player: entry[1] for player, entry in market.items()})
        if result is not None:
            outputs.append(
                write_csv(
                    layout.market_correlation,
                    ("name", "statistic", "p_value", "n"),
                    [(result.name, result.statistic, result.p_value, result.n)],
                )
            )
        finish(config, "score", inputs, outputs)
    return layout.scores
