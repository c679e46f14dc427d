import json
import math

import numpy as np
import pytest

from daxt.errors import ContractViolation, ModelLoadError, TrainingFault
from daxt.network import (
    Network,
    TrainConfig,
    forward,
    forward_batch,
    gradient_check,
    init_network,
    load_model,
    loss_and_gradients,
    save_model,
    split_indices,
    train,
)
from daxt.sequences import TRAINING, FeatureTable, build_training_set


def _table(features, targets):
    features = np.asarray(features, dtype=float)
    n = features.shape[0]
    return FeatureTable(
        a=features.shape[1] // 3,
        kind=TRAINING,
        features=features,
        game_ids=("g",) * n,
        event_idx=np.arange(n),
        player_ids=("",) * n,
        targets=np.asarray(targets, dtype=float),
    )


def _zero_network(a=2):
    net = init_network(a, seed=0)
    return Network(
        weights=tuple(np.zeros_like(weight) for weight in net.weights),
        biases=tuple(np.zeros_like(bias) for bias in net.biases),
    )


def _naive_forward(net, row):
    hidden = list(row)
    for layer, (weight, bias) in enumerate(zip(net.weights, net.biases)):
        out = []
        for unit in range(weight.shape[0]):
            total = bias[unit]
            for index, value in enumerate(hidden):
                total += weight[unit, index] * value
            if layer < len(net.weights) - 1:
                total = total if total > 0 else math.exp(total) - 1.0
            out.append(total)
        hidden = out
    return hidden[0]


def test_init_is_deterministic_and_bounded():
    first = init_network(2, seed=1)
    second = init_network(2, seed=1)

    assert first.layer_sizes == [6, 10, 10, 10, 1]
    assert first.weights[0].shape == (10, 6)
    for left, right in zip(first.parameters(), second.parameters()):
        np.testing.assert_array_equal(left, right)
    assert np.all(np.abs(first.weights[0]) <= math.sqrt(6.0 / 16.0))
    assert all(np.all(bias == 0.0) for bias in first.biases)


def test_init_rejects_non_positive_a():
    with pytest.raises(ContractViolation):
        init_network(0, seed=1)


def test_zero_network_outputs_zero():
    assert forward(_zero_network(), [0.3, -2.0, 5.0, 1.0, 0.0, 9.0]) == 0.0


def test_single_unit_elu():
    net = Network(weights=(np.array([[1.0]]), np.array([[1.0]])), biases=(np.zeros(1), np.zeros(1)))
    assert forward(net, [-1.0]) == pytest.approx(math.exp(-1.0) - 1.0, abs=1e-15)
    assert forward(net, [2.0]) == 2.0


def test_forward_matches_naive_oracle():
    net = init_network(2, seed=11)
    rows = np.random.default_rng(3).uniform(-1.0, 2.0, size=(5, 6))
    outputs = forward_batch(net, rows)
    for row, output in zip(rows, outputs):
        assert output == pytest.approx(_naive_forward(net, row), abs=1e-12)


def test_forward_rejects_wrong_width():
    with pytest.raises(ContractViolation):
        forward(init_network(2, seed=1), [0.0, 1.0, 2.0])


def test_gradient_check_on_random_rows():
    rng = np.random.default_rng(5)
    net = init_network(2, seed=5)
    features = rng.uniform(0.0, 1.0, size=(10, 6))
    targets = rng.uniform(0.0, 1.0, size=10)

    assert gradient_check(net, features, targets) < 1e-4


def test_output_bias_gradient_of_zero_network():
    _, grads = loss_and_gradients(_zero_network(), np.ones((1, 6)), np.array([0.7]))
    assert grads[-1].tolist() == [-1.0]
    _, grads = loss_and_gradients(_zero_network(), np.ones((1, 6)), np.array([-0.7]))
    assert grads[-1].tolist() == [1.0]


def test_duplicate_rows_give_the_same_gradient():
    net = init_network(1, seed=2)
    row = np.array([[0.2, 0.4, 0.6]])
    _, single = loss_and_gradients(net, row, np.array([0.9]))
    _, doubled = loss_and_gradients(net, np.vstack([row, row]), np.array([0.9, 0.9]))
    for left, right in zip(single, doubled):
        np.testing.assert_allclose(left, right, rtol=1e-12, atol=1e-15)


def test_split_indices_partition_rows():
    train_idx, validation_idx = split_indices(100, 0.2, seed=4)
    again = split_indices(100, 0.2, seed=4)

    assert len(train_idx) == 80 and len(validation_idx) == 20
    assert sorted(np.concatenate([train_idx, validation_idx]).tolist()) == list(range(100))
    np.testing.assert_array_equal(again[0], train_idx)


def test_constant_zero_targets_are_fitted_exactly():
    rng = np.random.default_rng(0)
    table = _table(rng.uniform(0.0, 1.0, size=(64, 6)), np.zeros(64))
    model = train(init_network(2, seed=0), table, TrainConfig(epochs=5, seed=0))

    assert len(model.history) == 5
    assert model.history.validation_mae[-1] <= model.baseline_mae + 1e-6
    assert all(later <= earlier for earlier, later in zip(model.history.train_mae, model.history.train_mae[1:]))


def test_linear_target_beats_baseline():
    rng = np.random.default_rng(1)
    features = rng.uniform(0.0, 1.0, size=(1000, 3))
    table = _table(features, 0.1 * features[:, 0])
    model = train(init_network(1, seed=1), table, TrainConfig(epochs=200, seed=1))

    assert model.history.validation_mae[-1] < 0.1 * model.baseline_mae


def test_training_is_deterministic(synthetic_games, synthetic_surface):
    table = build_training_set(synthetic_games, synthetic_surface, 2)
    config = TrainConfig(epochs=3, seed=9)
    first = train(init_network(2, seed=9), table, config)
    second = train(init_network(2, seed=9), table, config)

    assert first.history.train_mae == second.history.train_mae
    assert first.history.validation_mae == second.history.validation_mae


def test_synthetic_model_beats_zero_baseline(synthetic_games, synthetic_surface):
    table = build_training_set(synthetic_games, synthetic_surface, 2)
    model = train(init_network(2, seed=7), table, TrainConfig(epochs=50, seed=7))

    assert len(model.history) == 50
    assert model.history.validation_mae[-1] < model.baseline_mae


def test_non_finite_targets_abort_training():
    rng = np.random.default_rng(2)
    targets = rng.uniform(0.0, 1.0, size=40)
    targets[::2] = np.nan
    with pytest.raises(TrainingFault, match="epoch 1"):
        train(init_network(1, seed=2), _table(rng.uniform(0.0, 1.0, size=(40, 3)), targets), TrainConfig(epochs=2, batch=40))


def test_model_round_trip_predicts_identically(tmp_path):
    rng = np.random.default_rng(6)
    table = _table(rng.uniform(0.0, 100.0, size=(120, 6)), rng.normal(0.0, 0.05, size=120))
    model = train(init_network(2, seed=6), table, TrainConfig(epochs=2, seed=6), fingerprint="abc")
    loaded = load_model(save_model(model, tmp_path / "model.json"))

    rows = rng.uniform(0.0, 100.0, size=(100, 6))
    np.testing.assert_array_equal(loaded.predict(rows), model.predict(rows))
    assert loaded.history.train_mae == model.history.train_mae
    assert loaded.fingerprint == "abc"
    np.testing.assert_array_equal(loaded.scaler.data_min, model.scaler.data_min)


def test_truncated_model_file_is_a_load_error(tmp_path):
    rng = np.random.default_rng(6)
    table = _table(rng.uniform(0.0, 1.0, size=(20, 3)), rng.uniform(0.0, 1.0, size=20))
    path = save_model(train(init_network(1, seed=0), table, TrainConfig(epochs=1)), tmp_path / "model.json")
    text = path.read_text(encoding="utf-8")
    path.write_text(text[: len(text) // 2], encoding="utf-8")

    with pytest.raises(ModelLoadError):
        load_model(path)


def test_unknown_format_version_is_a_load_error(tmp_path):
    rng = np.random.default_rng(6)
    table = _table(rng.uniform(0.0, 1.0, size=(20, 3)), rng.uniform(0.0, 1.0, size=20))
    path = save_model(train(init_network(1, seed=0), table, TrainConfig(epochs=1)), tmp_path / "model.json")
    payload = json.loads(path.read_text(encoding="utf-8"))
    payload["format_version"] = 99
    path.write_text(json.dumps(payload), encoding="utf-8")

    with pytest.raises(ModelLoadError, match="format version"):
        load_model(path)


def test_predict_rejects_feature_width_of_another_a():
    rng = np.random.default_rng(8)
    table = _table(rng.uniform(0.0, 1.0, size=(30, 9)), rng.uniform(0.0, 1.0, size=30))
    model = train(init_network(3, seed=8), table, TrainConfig(epochs=1))

    with pytest.raises(ContractViolation):
        model.predict(np.zeros((4, 6)))


def test_single_row_model_file_is_strict_json(tmp_path):
    table = _table([[0.1, 50.0, 30.0]], [0.02])
    model = train(init_network(1, seed=0), table, TrainConfig(epochs=2))
    assert math.isnan(model.baseline_mae)

    path = save_model(model, tmp_path / "model.json")

    def reject(constant):
        raise ValueError(f"non-strict JSON constant {constant}")

    payload = json.loads(path.read_text(encoding="utf-8"), parse_constant=reject)
    assert payload["baseline_mae"] is None
    assert payload["history"]["validation_mae"] == [None, None]

    loaded = load_model(path)
    assert math.isnan(loaded.baseline_mae)
    assert all(math.isnan(value) for value in loaded.history.validation_mae)
    assert loaded.history.train_mae == model.history.train_mae
