from collections import Counter, defaultdict

import numpy as np
import pytest

from daxt.errors import ContractViolation, NotValuableError
from daxt.events import Action, GameStream, generate_synthetic_corpus
from daxt.xt import (
    GridCounts,
    GridModel,
    action_xt,
    bellman_residual,
    count_game,
    fit_grid,
    game_action_values,
    load_surface,
    save_surface,
    solve_xt,
    zone_index,
    zone_of,
)


def _action(kind, start, end, success=True, team="A", time=0.0):
    return Action(
        game_id="g1",
        period=1,
        time_seconds=time,
        team_id=team,
        player_id=f"{team}9",
        start_x=start[0],
        start_y=start[1],
        end_x=end[0],
        end_y=end[1],
        action_type=kind,
        result="success" if success else "fail",
        type_name=kind,
    )


def _game(actions):
    return GameStream.from_actions(
        "g1",
        [_action(kind, start, end, success, time=float(index)) for index, (kind, start, end, success) in enumerate(actions)],
    )


def _two_zone_model():
    return GridModel(
        s=np.array([1.0, 0.0]),
        g=np.array([0.5, 0.0]),
        m=np.array([0.0, 1.0]),
        T=np.array([[0.0, 0.0], [1.0, 0.0]]),
        n_cols=2,
        n_rows=1,
    )


def _random_model(rng, n_zones=4):
    s = rng.uniform(0.2, 0.6, n_zones)
    T = rng.dirichlet(np.ones(n_zones), size=n_zones)
    return GridModel(s=s, g=rng.uniform(0.0, 1.0, n_zones), m=1.0 - s, T=T, n_cols=n_zones, n_rows=1)


@pytest.mark.parametrize(
    "point, zone",
    [((0.0, 0.0), (0, 0)), ((105.0, 68.0), (15, 11)), ((52.0588, 34.4304), (7, 6))],
)
def test_zone_of(point, zone):
    assert zone_of(*point) == zone


def test_zone_of_rejects_points_off_the_pitch():
    with pytest.raises(ContractViolation):
        zone_of(-0.1, 10.0)
    with pytest.raises(ContractViolation):
        zone_of(10.0, 68.5)


def test_fit_grid_on_shots_only():
    shots = [("shot", (100.0, 34.0), (105.0, 34.0), index == 0) for index in range(4)]
    model = fit_grid([_game(shots)])
    zone = zone_index(100.0, 34.0)

    assert model.s[zone] == 1.0
    assert model.m[zone] == 0.0
    assert model.g[zone] == 0.25
    model.check_invariants()


def test_fit_grid_on_passes_only():
    passes = [("pass", (10.0, 10.0), (60.0, 40.0), True) for _ in range(3)]
    model = fit_grid([_game(passes)])
    a, b = zone_index(10.0, 10.0), zone_index(60.0, 40.0)

    assert model.T[a, b] == 1.0
    assert model.s[a] == 0.0
    assert model.m[a] == 1.0
    assert model.T[b].sum() == 0.0


def test_failed_moves_count_toward_m_but_not_t():
    actions = [
        ("pass", (10.0, 10.0), (60.0, 40.0), True),
        ("pass", (10.0, 10.0), (90.0, 10.0), False),
        ("shot", (10.0, 10.0), (105.0, 34.0), False),
    ]
    model = fit_grid([_game(actions)])
    a = zone_index(10.0, 10.0)

    assert model.s[a] == pytest.approx(1.0 / 3.0)
    assert model.m[a] == pytest.approx(2.0 / 3.0)
    assert model.T[a, zone_index(60.0, 40.0)] == 1.0
    assert model.T[a, zone_index(90.0, 10.0)] == 0.0


def test_fit_grid_rejects_empty_corpus():
    with pytest.raises(ContractViolation):
        fit_grid([])
    with pytest.raises(ContractViolation):
        fit_grid([GameStream(game_id="g", actions=(), team_ids=())])


def test_fit_grid_matches_brute_force_counts(synthetic_games, synthetic_grid):
    shots, goals, moves = Counter(), Counter(), Counter()
    transitions = defaultdict(Counter)
    for game in synthetic_games:
        for action in game.actions:
            zone = zone_index(action.start_x, action.start_y)
            if action.action_type == "shot":
                shots[zone] += 1
                goals[zone] += action.success
            elif action.action_type in {"pass", "dribble", "cross", "clearance"}:
                moves[zone] += 1
                if action.success:
                    transitions[zone][zone_index(action.end_x, action.end_y)] += 1

    synthetic_grid.check_invariants()
    for zone in range(synthetic_grid.n_zones):
        attempts = shots[zone] + moves[zone]
        assert synthetic_grid.s[zone] == (shots[zone] / attempts if attempts else 0.0)
        assert synthetic_grid.g[zone] == (goals[zone] / shots[zone] if shots[zone] else 0.0)
        successes = sum(transitions[zone].values())
        for target, count in transitions[zone].items():
            assert synthetic_grid.T[zone, target] == count / successes


def test_fit_grid_is_independent_of_workers(synthetic_games, synthetic_grid):
    parallel = fit_grid(synthetic_games, workers=2, chunk_size=5)
    np.testing.assert_array_equal(parallel.T, synthetic_grid.T)
    np.testing.assert_array_equal(parallel.s, synthetic_grid.s)


def test_count_merge_is_associative(synthetic_games):
    first, second, third = (count_game(game) for game in synthetic_games[:3])
    left = first.merge(second).merge(third)
    right = first.merge(second.merge(third))

    for name in ("shots", "goals", "moves", "transitions"):
        np.testing.assert_array_equal(getattr(left, name), getattr(right, name))
    np.testing.assert_array_equal(GridCounts.empty().merge(first).transitions, first.transitions)


def test_solve_without_goals_is_zero_after_one_iteration():
    model = _two_zone_model()
    model = GridModel(s=model.s, g=np.zeros(2), m=model.m, T=model.T, n_cols=2, n_rows=1)
    surface = solve_xt(model)

    assert surface.iterations_used == 1
    assert np.all(surface.values == 0.0)


def test_solve_two_zone_fixed_point():
    surface = solve_xt(_two_zone_model())

    assert surface.converged
    np.testing.assert_array_equal(surface.values, [0.5, 0.5])


@pytest.mark.parametrize("seed", range(20))
def test_solve_matches_long_horizon_iteration(seed):
    model = _random_model(np.random.default_rng(seed))
    oracle = np.zeros(model.n_zones)
    for _ in range(10_000):
        oracle = model.s * model.g + model.m * (model.T @ oracle)

    surface = solve_xt(model, tol=1e-12, max_iter=10_000)
    np.testing.assert_allclose(surface.values, oracle, rtol=0.0, atol=1e-9)


def test_iterates_are_monotone_non_decreasing(synthetic_grid):
    previous = np.zeros(synthetic_grid.n_zones)
    for iterations in range(1, 8):
        current = solve_xt(synthetic_grid, tol=1e-300, max_iter=iterations).values
        assert np.all(current >= previous)
        previous = current


def test_synthetic_surface_converges_within_budget():
    model = fit_grid(generate_synthetic_corpus(50, seed=7))
    surface = solve_xt(model, tol=1e-6, max_iter=100)

    assert surface.converged
    assert surface.iterations_used <= 100
    assert bellman_residual(model, surface) <= 1e-6
    assert np.all(surface.values >= model.s * model.g)
    assert np.all((surface.values >= 0.0) & (surface.values <= 1.0))


def test_non_convergence_is_flagged_not_raised(synthetic_grid):
    surface = solve_xt(synthetic_grid, tol=1e-300, max_iter=2)
    assert not surface.converged
    assert surface.iterations_used == 2


def test_action_values(synthetic_surface):
    forward = _action("pass", (20.0, 34.0), (90.0, 34.0))
    assert action_xt(synthetic_surface, forward) > 0.0
    assert action_xt(synthetic_surface, _action("dribble", (30.0, 30.0), (30.5, 30.5))) == 0.0


@pytest.mark.parametrize("kind, success", [("pass", False), ("interception", True), ("shot", True)])
def test_action_xt_rejects_non_valuable_actions(synthetic_surface, kind, success):
    with pytest.raises(NotValuableError):
        action_xt(synthetic_surface, _action(kind, (50.0, 34.0), (60.0, 34.0), success))


def test_game_action_values_agree_with_action_xt(synthetic_games, synthetic_surface):
    game = synthetic_games[0]
    values = game_action_values(game, synthetic_surface)
    for action, value in zip(game.actions, values):
        if action.valuable:
            assert value == action_xt(synthetic_surface, action)
        else:
            assert np.isnan(value)


def test_surface_round_trip(tmp_path, synthetic_surface):
    csv_path, sidecar = save_surface(synthetic_surface, tmp_path / "surface.csv")
    loaded = load_surface(csv_path)

    assert sidecar.exists()
    np.testing.assert_array_equal(loaded.values, synthetic_surface.values)
    assert loaded.iterations_used == synthetic_surface.iterations_used
    assert loaded.converged == synthetic_surface.converged
