"""Top-level pipeline orchestration helpers."""

from .chain import run_all
from .datasets import run_datasets
from .figures import run_render
from .ingest import run_ingest, run_synth
from .ranking import run_score
from .reporting import run_report
from .surface import run_xt
from .sweep import run_sweep
from .training import run_train
from .validate import run_validate
from .valuing import run_value

__all__ = [
    "run_ingest",
    "run_synth",
    "run_xt",
    "run_datasets",
    "run_train",
    "run_value",
    "run_score",
    "run_validate",
    "run_render",
    "run_sweep",
    "run_report",
    "run_all",
]
