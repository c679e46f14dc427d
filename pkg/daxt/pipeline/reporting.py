"""Reporting stage - assembles a human readable summary of a run."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, List

from daxt.config import RunConfig
from daxt.network import load_model
from daxt.pipeline.layout import RunLayout, finish, require, stage
from daxt.scoring import load_scores, rank
from daxt.utils import read_csv_frame, write_json
from daxt.valuation import KINDS

TOP_N = 5


def _top_players(layout: RunLayout) -> Dict[str, List[Dict[str, Any]]]:
    tables: Dict[str, List[Dict[str, Any]]] = {}
    for kind in KINDS:
        path = layout.player_ranking(kind, "sum")
        if path.exists():
            frame = read_csv_frame(path, dtype={"player_id": str, "player_name": str}, keep_default_na=False)
            tables[kind] = [
                {
                    "player_id": row["player_id"],
                    "player_name": row["player_name"],
                    "value": float(row["value"]),
                    "count": int(row["count"]),
                }
                for row in frame.head(TOP_N).to_dict("records")
            ]
    if layout.scores.exists():
        tables["score"] = [
            {"player_id": entry.player_id, "position": entry.position, "value": entry.score}
            for entry in rank(load_scores(layout.scores))[:TOP_N]
        ]
    return tables


def _validation(layout: RunLayout) -> Dict[str, Any]:
    if not layout.validation_summary.exists():
        return {}
    data = json.loads(layout.validation_summary.read_text(encoding="utf-8"))
    if layout.tests.exists():
        frame = read_csv_frame(layout.tests)
        data["tests"] = [
            {
                "name": row["name"],
                "statistic": float(row["statistic"]),
                "p_value": float(row["p_value"]),
                "n": int(row["n"]),
            }
            for row in frame.to_dict("records")
        ]
    return data


def run_report(config: RunConfig) -> Path:
    """Generate report files from the surface, model and downstream tables."""

    layout = RunLayout.of(config)
    with stage("report"):
        surface = json.loads(require(layout.surface_meta, "xt").read_text(encoding="utf-8"))
        model = load_model(require(layout.model, "train"))
        data = {
            "surface": {key: surface[key] for key in ("iterations_used", "final_residual", "converged", "tol")},
            "model": {
                "a": model.a,
                "epochs": len(model.history),
                "train_mae": model.history.train_mae[-1] if len(model.history) else None,
                "validation_mae": model.history.validation_mae[-1] if len(model.history) else None,
                "zero_baseline_mae": model.baseline_mae,
            },
            "top_players": _top_players(layout),
            "validation": _validation(layout),
        }

        report_json = write_json(layout.report_json, data)

        lines: List[str] = []
        lines.append("DAxT Report")
        lines.append("===========")
        lines.append(
            f"xT surface: {surface['iterations_used']} iterations, "
            f"residual {surface['final_residual']:.3e} ({'converged' if surface['converged'] else 'NOT converged'})"
        )
        summary = data["model"]
        if summary["validation_mae"] is not None:
            lines.append(
                f"Model a={model.a}: validation MAE {summary['validation_mae']:.6f} "
                f"vs zero baseline {model.baseline_mae:.6f}"
            )
        lines.append("")

        for kind, entries in data["top_players"].items():
            lines.append(f"Top {kind}:")
            if not entries:
                lines.append("  No players ranked.")
            for position, entry in enumerate(entries, start=1):
                label = entry.get("player_name") or entry["player_id"]
                lines.append(f"  {position}. {label} -> {entry['value']:.6f}")
            lines.append("")

        validation = data["validation"]
        if validation:
            lines.append(
                f"Validation: MAE {validation['mae']:.6f}, "
                f"{validation['fraction_within'] * 100:.1f}% of residuals within ±{validation['within_bound']}"
            )
            for test in validation.get("tests", []):
                lines.append(f"  {test['name']}: statistic {test['statistic']:.4f}, p {test['p_value']:.4g}")
            lines.append("")

        report_txt = layout.report_text
        report_txt.write_text("\n".join(lines).rstrip() + "\n", encoding="utf-8")
        finish(config, "report", [layout.surface_meta, layout.model], [report_txt, report_json])
    return report_txt
