"""xT stage: fit the grid model and solve for the threat surface."""

from __future__ import annotations

import dataclasses
from pathlib import Path

from daxt.config import RunConfig
from daxt.events import corpus_fingerprint
from daxt.pipeline.layout import RunLayout, finish, load_events, stage
from daxt.xt import fit_grid, save_surface, solve_xt


def run_xt(config: RunConfig) -> Path:
    layout = RunLayout.of(config)
    with stage("xt"):
        games = load_events(layout)
        model = fit_grid(games, workers=config.workers)
        model.check_invariants()
        surface = solve_xt(model, tol=config.xt.tol, max_iter=config.xt.max_iter)
        surface = dataclasses.replace(surface, fingerprint=corpus_fingerprint(games))
        csv_path, sidecar = save_surface(surface, layout.surface)
        finish(config, "xt", [layout.events], [csv_path, sidecar])
    return csv_path
