"""Accessible singularities, local indices, the alpha-test and blow-up pipelines."""

from __future__ import annotations

from .core import (
    ALL_POSITIVE,
    MIXED,
    NON_INTEGER,
    AlphaTestResult,
    DivisorChart,
    LocalIndexResult,
    RowSolution,
    SingularityError,
    SingularPoint,
    alpha_test,
    charpoly,
    classify_ratios,
    find_accessible_singularities,
    is_divisor_form,
    local_index,
    ratios,
    rational_roots,
    solve_row_pair,
    split_over_q,
)
from .pipeline import PipelineResult, Step, StepRecord, load_script, run_pipeline, run_script

__all__ = [
    "ALL_POSITIVE", "MIXED", "NON_INTEGER", "AlphaTestResult", "DivisorChart", "LocalIndexResult",
    "RowSolution", "SingularityError", "SingularPoint", "alpha_test", "charpoly", "classify_ratios",
    "find_accessible_singularities", "is_divisor_form", "local_index", "ratios", "rational_roots",
    "solve_row_pair", "split_over_q", "PipelineResult", "Step", "StepRecord", "load_script",
    "run_pipeline", "run_script",
]
