"""Dense eigensolvers used as oracles on small operators."""

from __future__ import annotations

import numpy as np

from ..operators import OperatorHandle
from . import _dense
from .result import EigenResult, order_by

DENSE_MAX_DIM = 5000


class ConvergenceError(RuntimeError):
    """QR iteration failed to deflate an active block."""


def _as_matrix(op) -> tuple[np.ndarray, str, bool]:
    if isinstance(op, OperatorHandle):
        return op.to_dense(DENSE_MAX_DIM), op.kind, op.transposed
    a = np.array(op, dtype=float, order="C")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    return a, "matrix", False


def _hqr_values(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    if n == 0:
        return np.zeros(0, dtype=complex)
    if n == 1:
        return np.array([a[0, 0]], dtype=complex)
    h, _ = _dense.hessenberg(np.ascontiguousarray(a), False)
    wr, wi, status, nn, lo = _dense.hqr(h, 30 * n)
    if status:
        raise ConvergenceError(
            f"QR iteration did not converge within {30 * n} sweeps; "
            f"stuck on active block rows {lo}..{nn} of {n}"
        )
    return wr + 1j * wi


def eigvals(a: np.ndarray) -> np.ndarray:
    """All eigenvalues of a real square matrix (unsorted).

    Eigenvalues exposed by zero rows/columns are read off exactly; the rest
    come from Hessenberg reduction and Francis double-shift QR.
    """
    a = np.ascontiguousarray(a, dtype=float)
    iso, active = _dense.isolate(a)
    known = a[iso, iso].astype(complex)
    sub = np.ascontiguousarray(a[np.ix_(active, active)])
    return np.concatenate([known, _hqr_values(sub)])


def eigvecs(a: np.ndarray, values: np.ndarray, iters: int = 3) -> np.ndarray:
    """Unit eigenvectors for the given eigenvalues by inverse iteration."""
    n = a.shape[0]
    h, q = _dense.hessenberg(np.ascontiguousarray(a, dtype=float), True)
    out = np.empty((n, len(values)), dtype=complex)
    for i, mu in enumerate(values):
        y = _dense.hess_inverse_iteration(h, complex(mu), iters)
        x = q @ y
        out[:, i] = _fix_phase(x)
    return out


def _fix_phase(x: np.ndarray) -> np.ndarray:
    """Unit norm, largest entry real positive (removes the arbitrary phase)."""
    x = x / np.linalg.norm(x)
    k = int(np.argmax(np.abs(x)))
    return x * (abs(x[k]) / x[k])


def dense_spectrum(op, vectors: bool = False, deflate: bool = True) -> EigenResult:
    """Full spectrum of an operator or matrix (dimension at most 5000).

    Operators carrying an exact structural deflation (the vertex-pair
    reduction does) have those eigenvalues removed before QR.  Eigenvectors,
    when requested, are computed on the full matrix.
    """
    if isinstance(op, OperatorHandle) and deflate and op.deflation is not None and not vectors:
        known, reduced = op.deflation()
        a = reduced.to_dense(DENSE_MAX_DIM)
        vals = np.concatenate([known, eigvals(a)])
        kind, transposed = op.kind, op.transposed
        full = None
    else:
        full, kind, transposed = _as_matrix(op)
        vals = eigvals(full)
    # exact conjugate pairs keep order deterministic
    vals = np.where(np.abs(vals.imag) == 0, vals.real + 0j, vals)
    idx = order_by(vals, "LM")
    vals = vals[idx]
    vecs = res = None
    if vectors:
        vecs = eigvecs(full, vals)
        res = np.linalg.norm(full @ vecs - vecs * vals, axis=0)
    return EigenResult(
        values=vals,
        vectors=vecs,
        residuals=res,
        converged=np.ones(vals.size, dtype=bool),
        iterations=1,
        kind=kind,
        transposed=transposed,
    )


def dense_symmetric_spectrum(matrix, vectors: bool = False, rel_tol: float = 1e-14, max_sweeps: int = 100):
    """Eigenvalues (descending) of a symmetric matrix by cyclic Jacobi.

    With ``vectors=True`` returns ``(values, vectors)`` with eigenvectors as
    columns in the same order.
    """
    a = np.array(matrix, dtype=float, order="C")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(np.abs(a).max(initial=0.0), 1.0)
    if np.abs(a - a.T).max(initial=0.0) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric to 1e-12")
    w, v, _ = _dense.jacobi(a, rel_tol, max_sweeps, vectors)
    idx = np.argsort(-w, kind="stable")
    if vectors:
        return w[idx], v[:, idx]
    return w[idx]
