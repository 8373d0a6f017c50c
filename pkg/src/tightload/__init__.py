"""Exact tightness, loading injections and espousal for row-finite matrices."""

from .loader import (
    DiagonalizationTrace,
    Injection,
    construct_injection_finite,
    construct_injection_lazy,
    proudly_diagonalize,
    verify_injection,
    verify_trace,
)
from .matching import (
    BipartiteGraph,
    LazyGraph,
    espouse_lazy,
    find_impediment,
    find_ps_obstruction_finite,
    graph_from_matrix,
    is_critical_wave_finite,
    ps_step,
)
from .matrices import (
    Exhausted,
    FiniteMatrix,
    Found,
    LazyMatrix,
    NotTight,
    Tight,
    express_unit_vector,
    is_tight,
    left_inverse,
    stubborn_search_lazy,
)
from .numerics import SparseVector, parse_rational

__version__ = "0.1.0"

__all__ = [
    "BipartiteGraph",
    "DiagonalizationTrace",
    "Exhausted",
    "FiniteMatrix",
    "Found",
    "Injection",
    "LazyGraph",
    "LazyMatrix",
    "NotTight",
    "SparseVector",
    "Tight",
    "construct_injection_finite",
    "construct_injection_lazy",
    "espouse_lazy",
    "express_unit_vector",
    "find_impediment",
    "find_ps_obstruction_finite",
    "graph_from_matrix",
    "is_critical_wave_finite",
    "is_tight",
    "left_inverse",
    "parse_rational",
    "proudly_diagonalize",
    "ps_step",
    "stubborn_search_lazy",
    "verify_injection",
    "verify_trace",
]
