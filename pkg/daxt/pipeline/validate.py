"""Validate stage: residual statistics of the trained model on its train/validation split."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from daxt.config import RunConfig
from daxt.errors import ContractViolation
from daxt.network import load_model, split_indices
from daxt.pipeline.layout import RunLayout, finish, require, stage
from daxt.sequences import TRAINING, load_table
from daxt.stats import validation_report
from daxt.utils import write_csv, write_json

logger = logging.getLogger(__name__)


def run_validate(config: RunConfig) -> Path:
    layout = RunLayout.of(config)
    with stage("validate"):
        model = load_model(require(layout.model, "train"))
        table = load_table(require(layout.training_table, "datasets"), TRAINING)
        if table.a != model.a:
            raise ContractViolation(f"Training table has a={table.a} but the model was trained with a={model.a}.")
        split = float(model.training.get("split", config.training.split))
        train_idx, test_idx = split_indices(len(table), split, model.seed)
        predictions = model.predict(table.features)
        residuals = table.targets - predictions
        report = validation_report(
            residuals[train_idx],
            residuals[test_idx],
            predictions[test_idx],
            table.targets[test_idx],
        )
        for test in report.tests:
            logger.info("%s statistic=%.6g p=%.4g n=%d", test.name, test.statistic, test.p_value, test.n)

        tests_path = write_csv(
            layout.tests,
            ("name", "statistic", "p_value", "n"),
            [(test.name, test.statistic, test.p_value, test.n) for test in report.tests],
        )
        qq_path = write_csv(layout.qq, ("theoretical", "observed"), report.qq)
        summary_path = write_json(
            layout.validation_summary,
            {
                "a": model.a,
                "train_rows": int(np.size(train_idx)),
                "test_rows": int(np.size(test_idx)),
                "mae": report.mae,
                "zero_baseline_mae": report.baseline_mae,
                "within_bound": report.within_bound,
                "fraction_within": report.within_fraction,
            },
        )
        finish(config, "validate", [layout.model, layout.training_table], [tests_path, qq_path, summary_path])
    return tests_path
