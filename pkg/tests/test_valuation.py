import math

import numpy as np
import pytest

from daxt.errors import ContractViolation
from daxt.network import TrainConfig, init_network, train
from daxt.sequences import INTERCEPTION, TACKLE, TRAINING, build_tables
from daxt.utils import read_csv_frame
from daxt.valuation import (
    ValuedAction,
    aggregate_players,
    benchmark_comparison,
    load_valued_actions,
    save_ranking,
    save_valued_actions,
    value_defensive_actions,
)


def _valued(player, kind, value, index=0):
    return ValuedAction(game_id="g", event_idx=index, player_id=player, kind=kind, x=50.0, y=34.0, daxt=value)


@pytest.fixture(scope="module")
def synthetic_valuation(synthetic_games, synthetic_surface):
    tables = build_tables(synthetic_games, synthetic_surface, 2)
    model = train(init_network(2, seed=3), tables[TRAINING], TrainConfig(epochs=2, seed=3))
    return model, tables


def test_values_are_the_model_predictions(synthetic_valuation):
    model, tables = synthetic_valuation
    valued = value_defensive_actions(model, tables[INTERCEPTION])

    assert len(valued) == len(tables[INTERCEPTION])
    np.testing.assert_array_equal([v.daxt for v in valued], model.predict(tables[INTERCEPTION].features))
    assert [v.player_id for v in valued] == list(tables[INTERCEPTION].player_ids)
    assert all(v.kind == INTERCEPTION for v in valued)


def test_value_rejects_training_tables_and_other_a(synthetic_valuation, synthetic_games, synthetic_surface):
    model, tables = synthetic_valuation
    with pytest.raises(ContractViolation):
        value_defensive_actions(model, tables[TRAINING])
    other = build_tables(synthetic_games, synthetic_surface, 3)
    with pytest.raises(ContractViolation):
        value_defensive_actions(model, other[TACKLE])


def test_player_sums_conserve_action_values(synthetic_valuation):
    model, tables = synthetic_valuation
    valued = value_defensive_actions(model, tables[INTERCEPTION]) + value_defensive_actions(model, tables[TACKLE])
    aggregation = aggregate_players(valued)

    for kind in (INTERCEPTION, TACKLE):
        total = math.fsum(v.daxt for v in valued if v.kind == kind)
        assert math.fsum(stats.total(kind) for stats in aggregation.players) == pytest.approx(total, abs=1e-9)
        assert sum(stats.count(kind) for stats in aggregation.players) == sum(v.kind == kind for v in valued)


def test_average_rankings_apply_thresholds():
    valued = [_valued("p1", INTERCEPTION, 0.1, i) for i in range(3)]
    valued += [_valued("p2", INTERCEPTION, 0.5)]
    valued += [_valued("p2", TACKLE, 0.2), _valued("p3", TACKLE, 0.4), _valued("p3", TACKLE, 0.0)]
    aggregation = aggregate_players(valued, min_interceptions=2, min_tackles=1)

    assert [s.player_id for s in aggregation.ranking(INTERCEPTION, "avg")] == ["p1"]
    assert [s.player_id for s in aggregation.ranking(TACKLE, "avg")] == ["p2", "p3"]
    assert [s.player_id for s in aggregation.ranking(INTERCEPTION, "sum")] == ["p2", "p1"]
    assert aggregation.by_player()["p1"].interception_avg == pytest.approx(0.1)
    assert aggregation.by_player()["p1"].tackle_avg == 0.0


def test_ties_rank_by_player_id():
    valued = [_valued("b", TACKLE, 0.3), _valued("a", TACKLE, 0.3)]
    aggregation = aggregate_players(valued, min_tackles=1)
    assert [s.player_id for s in aggregation.ranking(TACKLE, "sum")] == ["a", "b"]


def test_unknown_ranking_or_kind_is_rejected():
    aggregation = aggregate_players([_valued("a", TACKLE, 0.3)])
    with pytest.raises(ContractViolation):
        aggregation.ranking(TACKLE, "median")
    with pytest.raises(ContractViolation):
        aggregate_players([_valued("a", "pass", 0.1)])


def test_benchmark_comparison_window():
    valued = [_valued("ref", INTERCEPTION, 0.1, i) for i in range(10)]
    valued += [_valued("close", INTERCEPTION, 0.2, i) for i in range(12)]
    valued += [_valued("far", INTERCEPTION, 0.9, i) for i in range(30)]
    aggregation = aggregate_players(valued)
    rows = benchmark_comparison(aggregation, "ref", INTERCEPTION, tolerance=2, market_values={"close": 12.5})

    assert [row.player_id for row in rows] == ["close", "ref"]
    assert rows[0].count == 12 and rows[0].market_value == 12.5
    assert rows[1].market_value is None
    with pytest.raises(ContractViolation):
        benchmark_comparison(aggregation, "nobody", INTERCEPTION, tolerance=2)


def test_valued_actions_round_trip(tmp_path):
    valued = [_valued("007", INTERCEPTION, 0.0123, 4), _valued("p2", TACKLE, -0.002, 9)]
    loaded = load_valued_actions(save_valued_actions(valued, tmp_path / "valued.csv"))
    assert loaded == valued


def test_save_ranking_uses_names(tmp_path):
    aggregation = aggregate_players([_valued("a", TACKLE, 0.3), _valued("b", TACKLE, 0.1)])
    frame = read_csv_frame(save_ranking(aggregation, TACKLE, "sum", tmp_path / "rank.csv", {"a": "Ann"}), dtype={"player_id": str})

    assert frame["player_id"].tolist() == ["a", "b"]
    assert frame["player_name"].fillna("").tolist() == ["Ann", ""]
    assert frame["count"].tolist() == [1, 1]
