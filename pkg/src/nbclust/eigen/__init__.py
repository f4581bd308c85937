"""Eigensolvers: dense oracles, thick-restart Arnoldi and bulk heuristics."""

from .arnoldi import SolverOpts, topk_eigs
from .bulk import real_eigs_outside_bulk
from .dense import ConvergenceError, dense_spectrum, dense_symmetric_spectrum, eigvals
from .result import EigenResult, is_real, order_by

__all__ = [
    "ConvergenceError",
    "EigenResult",
    "SolverOpts",
    "dense_spectrum",
    "dense_symmetric_spectrum",
    "eigvals",
    "is_real",
    "order_by",
    "real_eigs_outside_bulk",
    "topk_eigs",
]
