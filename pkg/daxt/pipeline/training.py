"""Train stage: fit the network on the training table."""

from __future__ import annotations

from pathlib import Path

from daxt.config import RunConfig
from daxt.errors import ContractViolation
from daxt.network import TrainConfig, init_network, save_model, train
from daxt.pipeline.layout import RunLayout, finish, require, stage
from daxt.sequences import TRAINING, load_table
from daxt.xt import load_surface


def train_config(config: RunConfig) -> TrainConfig:
    settings = config.training
    return TrainConfig(
        epochs=settings.epochs,
        batch=settings.batch,
        rho=settings.rho,
        eps=settings.eps,
        split=settings.split,
        seed=config.inputs.seed,
    )


def run_train(config: RunConfig) -> Path:
    layout = RunLayout.of(config)
    with stage("train"):
        table = load_table(require(layout.training_table, "datasets"), TRAINING)
        if table.a != config.training.a:
            raise ContractViolation(
                f"Training table was built with a={table.a}; rerun `daxt datasets` for a={config.training.a}."
            )
        surface = load_surface(require(layout.surface, "xt"))
        net = init_network(table.a, config.inputs.seed)
        model = train(net, table, train_config(config), fingerprint=surface.fingerprint)
        path = save_model(model, layout.model)
        finish(config, "train", [layout.training_table], [path])
    return path
