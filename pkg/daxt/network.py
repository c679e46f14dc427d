"""Multilayer perceptron regressor trained with Adadelta on the MAE loss.

Forward pass, backpropagation and the optimizer are written directly against
numpy arrays; weights are stored ``(out, in)`` so a layer computes
``h @ W.T + b``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from daxt.errors import ContractViolation, ModelLoadError, TrainingFault
from daxt.sequences import FeatureTable, Scaler, fit_scaler
from daxt.utils import write_json

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
HIDDEN_LAYERS: Tuple[int, ...] = (10, 10, 10)


def elu(z: np.ndarray) -> np.ndarray:
    return np.where(z > 0.0, z, np.expm1(np.minimum(z, 0.0)))


def elu_derivative(z: np.ndarray) -> np.ndarray:
    return np.where(z > 0.0, 1.0, np.exp(np.minimum(z, 0.0)))


@dataclass(frozen=True, eq=False)
class Network:
    """Dense ELU network with a single linear output unit."""

    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ContractViolation("Network needs one bias vector per weight matrix.")
        for index, (weight, bias) in enumerate(zip(self.weights, self.biases)):
            if weight.ndim != 2 or bias.shape != (weight.shape[0],):
                raise ContractViolation(f"Layer {index}: weight {weight.shape} and bias {bias.shape} disagree.")
            if index and weight.shape[1] != self.weights[index - 1].shape[0]:
                raise ContractViolation(f"Layer {index} input width does not match layer {index - 1} output.")
        if self.weights[-1].shape[0] != 1:
            raise ContractViolation("Output layer must have a single unit.")

    @property
    def layer_sizes(self) -> List[int]:
        return [int(self.weights[0].shape[1])] + [int(weight.shape[0]) for weight in self.weights]

    @property
    def n_inputs(self) -> int:
        return int(self.weights[0].shape[1])

    def parameters(self) -> List[np.ndarray]:
        """Parameter arrays in (W0, b0, W1, b1, ...) order; shared, not copied."""

        params: List[np.ndarray] = []
        for weight, bias in zip(self.weights, self.biases):
            params.extend((weight, bias))
        return params

    def copy(self) -> "Network":
        return Network(
            weights=tuple(weight.copy() for weight in self.weights),
            biases=tuple(bias.copy() for bias in self.biases),
            seed=self.seed,
        )

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(param)) for param in self.parameters())


def init_network(a: int, seed: int, hidden: Sequence[int] = HIDDEN_LAYERS) -> Network:
    """Glorot-uniform weights, zero biases; deterministic per (a, seed)."""

    if a < 1:
        raise ContractViolation(f"a must be >= 1, got {a}")
    rng = np.random.default_rng(seed)
    sizes = [3 * a, *hidden, 1]
    weights = []
    biases = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Network(weights=tuple(weights), biases=tuple(biases), seed=seed)


def _check_width(net: Network, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=float)
    if features.ndim == 1:
        features = features.reshape(1, -1)
    if features.ndim != 2 or features.shape[1] != net.n_inputs:
        raise ContractViolation(f"Network expects {net.n_inputs} features, got {features.shape[-1]}")
    return features


def forward_batch(net: Network, features: np.ndarray) -> np.ndarray:
    hidden = _check_width(net, features)
    for weight, bias in zip(net.weights[:-1], net.biases[:-1]):
        hidden = elu(hidden @ weight.T + bias)
    return (hidden @ net.weights[-1].T + net.biases[-1])[:, 0]


def forward(net: Network, features: Sequence[float]) -> float:
    features = np.asarray(features, dtype=float)
    if features.ndim != 1:
        raise ContractViolation("forward takes a single feature row")
    return float(forward_batch(net, features)[0])


def loss_and_gradients(net: Network, features: np.ndarray, targets: np.ndarray) -> Tuple[float, List[np.ndarray]]:
    """Batch MAE and its gradient for every parameter (same order as ``parameters()``).

    The subgradient of ``|r|`` at ``r == 0`` is taken as 0.
    """

    features = _check_width(net, features)
    targets = np.asarray(targets, dtype=float).reshape(-1)
    n = features.shape[0]
    if n == 0 or targets.shape[0] != n:
        raise ContractViolation("Loss needs a non-empty batch with one target per row.")

    activations = [features]
    pre_activations = []
    for weight, bias in zip(net.weights[:-1], net.biases[:-1]):
        z = activations[-1] @ weight.T + bias
        pre_activations.append(z)
        activations.append(elu(z))
    output = (activations[-1] @ net.weights[-1].T + net.biases[-1])[:, 0]
    residual = output - targets
    loss = float(np.mean(np.abs(residual)))

    delta = (np.sign(residual) / n)[:, None]
    grads: List[np.ndarray] = []
    for layer in range(len(net.weights) - 1, -1, -1):
        grads.append(delta.sum(axis=0))
        grads.append(delta.T @ activations[layer])
        if layer:
            delta = (delta @ net.weights[layer]) * elu_derivative(pre_activations[layer - 1])
    grads.reverse()
    return loss, grads


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch: int = 32
    rho: float = 0.95
    eps: float = 1e-7
    split: float = 0.2
    seed: int = 0
    learning_rate: float = 1.0

    def as_dict(self) -> Dict[str, Any]:
        return {
            "epochs": self.epochs,
            "batch": self.batch,
            "rho": self.rho,
            "eps": self.eps,
            "split": self.split,
            "seed": self.seed,
            "learning_rate": self.learning_rate,
        }


class Adadelta:
    """Per-parameter Adadelta accumulators."""

    def __init__(self, params: Sequence[np.ndarray], rho: float = 0.95, eps: float = 1e-7, learning_rate: float = 1.0):
        self.rho = rho
        self.eps = eps
        self.learning_rate = learning_rate
        self._grad_sq = [np.zeros_like(param) for param in params]
        self._step_sq = [np.zeros_like(param) for param in params]

    def step(self, params: Sequence[np.ndarray], grads: Sequence[np.ndarray]) -> None:
        rho, eps = self.rho, self.eps
        for param, grad, grad_sq, step_sq in zip(params, grads, self._grad_sq, self._step_sq):
            grad_sq *= rho
            grad_sq += (1.0 - rho) * grad * grad
            update = np.sqrt(step_sq + eps) / np.sqrt(grad_sq + eps) * grad
            param -= self.learning_rate * update
            step_sq *= rho
            step_sq += (1.0 - rho) * update * update


def split_indices(n: int, split: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Seeded shuffle of ``range(n)`` cut into (train, validation)."""

    if n < 1:
        raise ContractViolation("Cannot split an empty table.")
    order = np.random.default_rng(seed).permutation(n)
    n_validation = int(round(n * split))
    if n >= 2:
        n_validation = min(max(n_validation, 1), n - 1)
    else:
        n_validation = 0
    return order[n_validation:], order[:n_validation]


@dataclass(frozen=True)
class History:
    """Per-epoch MAE in original xT units."""

    train_mae: Tuple[float, ...] = ()
    validation_mae: Tuple[float, ...] = ()

    def __len__(self) -> int:
        return len(self.train_mae)


@dataclass(frozen=True, eq=False)
class TrainedModel:
    network: Network
    scaler: Scaler
    a: int
    history: History = field(default_factory=History)
    fingerprint: str = ""
    baseline_mae: float = math.nan
    seed: int = 0
    training: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.scaler.n_columns != 3 * self.a + 1:
            raise ContractViolation(f"Scaler has {self.scaler.n_columns} columns; expected {3 * self.a + 1}.")
        if self.network.n_inputs != 3 * self.a:
            raise ContractViolation(f"Network takes {self.network.n_inputs} inputs; expected {3 * self.a}.")

    def predict(self, features: np.ndarray) -> np.ndarray:
        """Unscaled feature rows in, predicted xT in original units out."""

        features = np.asarray(features, dtype=float)
        if features.ndim == 1:
            features = features.reshape(1, -1)
        if features.shape[1] != 3 * self.a:
            raise ContractViolation(f"Model was trained with a={self.a} ({3 * self.a} features); got {features.shape[1]}.")
        if features.shape[0] == 0:
            return np.zeros(0)
        scaled = self.scaler.transform_features(features)
        return np.asarray(self.scaler.inverse_transform_target(forward_batch(self.network, scaled)), dtype=float)


def _mae(predictions: np.ndarray, targets: np.ndarray) -> float:
    if targets.size == 0:
        return math.nan
    return float(np.mean(np.abs(predictions - targets)))


def train(
    net: Network,
    table: FeatureTable,
    config: TrainConfig = TrainConfig(),
    *,
    scaler: Optional[Scaler] = None,
    fingerprint: str = "",
) -> TrainedModel:
    """Fit *net* (a copy) on *table* by mini-batch Adadelta; deterministic per ``config.seed``.

    The scaler is fitted on the training table when not supplied.
    """

    if not len(table) or table.targets is None:
        raise ContractViolation("Training needs a non-empty table with targets.")
    if table.a * 3 != net.n_inputs:
        raise ContractViolation(f"Table has a={table.a} but the network takes {net.n_inputs} inputs.")
    scaler = scaler or fit_scaler(table)
    inputs = scaler.transform_features(table.features)
    scaled_targets = scaler.transform_target(table.targets)
    targets = np.asarray(table.targets, dtype=float)

    train_idx, validation_idx = split_indices(len(table), config.split, config.seed)
    rng = np.random.default_rng([config.seed, 1])
    net = net.copy()
    params = net.parameters()
    optimizer = Adadelta(params, rho=config.rho, eps=config.eps, learning_rate=config.learning_rate)

    def evaluate(indices: np.ndarray) -> float:
        if indices.size == 0:
            return math.nan
        predicted = np.asarray(scaler.inverse_transform_target(forward_batch(net, inputs[indices])), dtype=float)
        return _mae(predicted, targets[indices])

    train_history: List[float] = []
    validation_history: List[float] = []
    for epoch in range(1, config.epochs + 1):
        order = train_idx[rng.permutation(train_idx.size)]
        for batch_number, start in enumerate(range(0, order.size, config.batch), start=1):
            batch = order[start : start + config.batch]
            loss, grads = loss_and_gradients(net, inputs[batch], scaled_targets[batch])
            if not math.isfinite(loss):
                raise TrainingFault(f"Non-finite loss at epoch {epoch}, batch {batch_number}.")
            optimizer.step(params, grads)
            if not net.all_finite():
                raise TrainingFault(f"Non-finite parameters at epoch {epoch}, batch {batch_number}.")
        train_history.append(evaluate(train_idx))
        validation_history.append(evaluate(validation_idx))
        logger.debug(
            "epoch %d/%d train_mae=%.6f validation_mae=%.6f",
            epoch,
            config.epochs,
            train_history[-1],
            validation_history[-1],
        )

    baseline = _mae(np.zeros(validation_idx.size), targets[validation_idx])
    logger.info(
        "Trained a=%d on %d rows: validation MAE %.6f vs zero baseline %.6f",
        table.a,
        train_idx.size,
        validation_history[-1] if validation_history else math.nan,
        baseline,
    )
    return TrainedModel(
        network=net,
        scaler=scaler,
        a=table.a,
        history=History(train_mae=tuple(train_history), validation_mae=tuple(validation_history)),
        fingerprint=fingerprint,
        baseline_mae=baseline,
        seed=config.seed,
        training=config.as_dict(),
    )


def gradient_check(net: Network, features: np.ndarray, targets: np.ndarray, h: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    Parameters whose ±h perturbation flips the sign of any residual sit on the
    MAE kink and are skipped.
    """

    features = _check_width(net, features)
    targets = np.asarray(targets, dtype=float).reshape(-1)
    trial = net.copy()
    _, analytic = loss_and_gradients(trial, features, targets)

    def residual_signs() -> Tuple[float, np.ndarray]:
        residual = forward_batch(trial, features) - targets
        return float(np.mean(np.abs(residual))), np.sign(residual)

    worst = 0.0
    for param, grad in zip(trial.parameters(), analytic):
        flat = param.reshape(-1)
        flat_grad = grad.reshape(-1)
        for index in range(flat.size):
            original = flat[index]
            flat[index] = original + h
            loss_plus, signs_plus = residual_signs()
            flat[index] = original - h
            loss_minus, signs_minus = residual_signs()
            flat[index] = original
            if np.any(signs_plus != signs_minus) or np.any(signs_plus == 0.0):
                continue
            numeric = (loss_plus - loss_minus) / (2.0 * h)
            exact = float(flat_grad[index])
            scale = max(abs(exact), abs(numeric), 1e-6)
            worst = max(worst, abs(exact - numeric) / scale)
    return worst


def _array_payload(array: np.ndarray) -> List[Any]:
    return array.tolist()


def _optional_float(value: float) -> Optional[float]:
    """Non-finite values are stored as JSON null."""
    return float(value) if math.isfinite(value) else None


def _read_float(value: Any) -> float:
    return math.nan if value is None else float(value)


def save_model(model: TrainedModel, path: Path) -> Path:
    """Self-describing JSON document; floats are written in round-trip form."""

    payload = {
        "format_version": FORMAT_VERSION,
        "a": model.a,
        "layer_sizes": model.network.layer_sizes,
        "weights": [_array_payload(weight) for weight in model.network.weights],
        "biases": [_array_payload(bias) for bias in model.network.biases],
        "scaler": {
            "data_min": _array_payload(model.scaler.data_min),
            "data_max": _array_payload(model.scaler.data_max),
        },
        "history": {
            "train_mae": [_optional_float(value) for value in model.history.train_mae],
            "validation_mae": [_optional_float(value) for value in model.history.validation_mae],
        },
        "baseline_mae": _optional_float(model.baseline_mae),
        "corpus_fingerprint": model.fingerprint,
        "seed": model.seed,
        "training": model.training,
    }
    return write_json(Path(path), payload)


def load_model(path: Path) -> TrainedModel:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Model file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as error:
        raise ModelLoadError(f"{path}: model file is corrupted ({error})") from error
    if not isinstance(payload, dict):
        raise ModelLoadError(f"{path}: model file does not hold a JSON object")
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelLoadError(f"{path}: format version {version!r} is not supported (expected {FORMAT_VERSION})")
    try:
        a = int(payload["a"])
        weights = tuple(np.array(weight, dtype=float) for weight in payload["weights"])
        biases = tuple(np.array(bias, dtype=float) for bias in payload["biases"])
        network = Network(weights=weights, biases=biases, seed=int(payload["seed"]))
        if network.layer_sizes != [int(size) for size in payload["layer_sizes"]]:
            raise ModelLoadError(f"{path}: layer sizes disagree with the stored weights")
        scaler = Scaler.from_bounds(payload["scaler"]["data_min"], payload["scaler"]["data_max"])
        history = History(
            train_mae=tuple(_read_float(value) for value in payload["history"]["train_mae"]),
            validation_mae=tuple(_read_float(value) for value in payload["history"]["validation_mae"]),
        )
        return TrainedModel(
            network=network,
            scaler=scaler,
            a=a,
            history=history,
            fingerprint=str(payload.get("corpus_fingerprint", "")),
            baseline_mae=_read_float(payload["baseline_mae"]),
            seed=int(payload["seed"]),
            training=dict(payload.get("training", {})),
        )
    except ModelLoadError:
        raise
    except (KeyError, TypeError, ValueError) as error:
        raise ModelLoadError(f"{path}: model file is incomplete ({error})") from error
