from .common import Counters, SolveReport, TraceRow
from .sublinear import solve_sublinear, default_sublinear_kind
from .vr import (inner_loop, solve_vr, truncate, relaxed_oracle_value,
                 default_vr_kind)
from .strongly_monotone import solve_strongly_monotone, composite_gap
from .mirror_prox import solve_mirror_prox

__all__ = [
    "Counters", "SolveReport", "TraceRow",
    "solve_sublinear", "default_sublinear_kind",
    "inner_loop", "solve_vr", "truncate", "relaxed_oracle_value",
    "default_vr_kind",
    "solve_strongly_monotone", "composite_gap",
    "solve_mirror_prox",
]
