"""Thick-restart Arnoldi for a few extreme eigenpairs of a real operator.

The Krylov decomposition ``A V = V H + v_{p} h^T`` is kept in real
arithmetic.  At each restart the wanted Ritz vectors are folded into a real
orthonormal basis (real and imaginary parts of each conjugate pair span the
pair's 2-d invariant subspace of ``H``), so the restarted decomposition stays
exact up to rounding and the Rayleigh quotient becomes a general small matrix
rather than a Hessenberg one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..operators import OperatorHandle
from .dense import _fix_phase, eigvals as dense_eigvals, eigvecs as dense_eigvecs
from .result import EigenResult, order_by

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOpts:
    k: int = 2
    tol: float = 1e-8
    max_iter: int = 300
    ncv: Optional[int] = None  # subspace dimension, default max(10k, 20)
    seed: int = 0
    which: str = "LM"  # LM: modulus, LR: largest real part, SR: smallest real part

    def subspace(self, dim: int) -> int:
        p = self.ncv if self.ncv is not None else max(10 * self.k, 20)
        if p < 2 * self.k + 2 and p < dim:
            raise ValueError(f"subspace dimension {p} must be at least 2k+2 = {2 * self.k + 2}")
        return min(p, dim)


def _orthogonalize(V: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Classical Gram-Schmidt with one reorthogonalization pass."""
    h = V.T @ w
    w = w - V @ h
    h2 = V.T @ w
    w = w - V @ h2
    return w, h + h2


def _real_basis(Y: np.ndarray, vals: np.ndarray, idx: list[int]) -> np.ndarray:
    cols = []
    for i in idx:
        if vals[i].imag == 0:
            cols.append(Y[:, i].real)
        elif vals[i].imag > 0 or not any(np.isclose(vals[j], np.conj(vals[i])) for j in idx):
            cols.append(Y[:, i].real)
            cols.append(Y[:, i].imag)
    q, r = np.linalg.qr(np.stack(cols, axis=1))
    keep = np.abs(np.diag(r)) > 1e-12 * max(1.0, np.abs(np.diag(r)).max())
    return q[:, keep]


def _pick(vals: np.ndarray, which: str, k: int) -> int:
    """Number of leading entries to take so conjugate pairs are not split."""
    k = min(k, vals.size)
    if k < vals.size and vals[k - 1].imag != 0 and np.isclose(vals[k], np.conj(vals[k - 1])):
        k += 1
    return k


def topk_eigs(op: OperatorHandle, opts: SolverOpts = SolverOpts()) -> EigenResult:
    """Leading eigenpairs of ``op`` by thick-restart Arnoldi.

    Returns the ``k`` wanted pairs (one more if the k-th is half of a complex
    pair) with true residuals ``||A x - mu x||``; pairs above ``tol`` after
    ``max_iter`` restarts are flagged in ``converged``.  Deterministic given
    ``opts.seed``.
    """
    n = op.dim
    k = opts.k
    if k < 1:
        raise ValueError("k must be at least 1")
    if k >= n:
        raise ValueError(f"k={k} must be smaller than the dimension {n}")
    p = opts.subspace(n)
    keep_target = min(2 * k, p - 2) if p < n else p
    rng = np.random.default_rng(opts.seed)
    V = np.zeros((n, p + 1), order="F")
    H = np.zeros((p + 1, p))
    v0 = rng.standard_normal(n)
    V[:, 0] = v0 / np.linalg.norm(v0)
    j0 = 0
    matvecs = 0
    it = 0
    vals = Y = None
    scale = 1.0
    while True:
        for j in range(j0, p):
            w = op.apply(V[:, j])
            matvecs += 1
            w, h = _orthogonalize(V[:, : j + 1], w)
            beta = float(np.linalg.norm(w))
            H[: j + 1, j] = h
            scale = max(scale, float(np.abs(h).max(initial=0.0)))
            if beta <= 1e-13 * scale:
                # invariant subspace: continue from a fresh orthogonal direction
                H[j + 1, j] = 0.0
                if j + 1 < n:
                    w, _ = _orthogonalize(V[:, : j + 1], rng.standard_normal(n))
                    V[:, j + 1] = w / np.linalg.norm(w)
            else:
                H[j + 1, j] = beta
                V[:, j + 1] = w / beta
        it += 1
        Hm = H[:p, :p]
        vals = dense_eigvals(Hm)
        vals = np.where(vals.imag == 0, vals.real + 0j, vals)
        order = order_by(vals, opts.which)
        vals = vals[order]
        kk = _pick(vals, opts.which, k)
        Y = dense_eigvecs(Hm, vals[: max(kk, min(keep_target, vals.size))])
        est = np.abs(H[p, :] @ Y[:, :kk]) if p < n else np.zeros(kk)
        if np.all(est <= 0.5 * opts.tol) or it >= opts.max_iter or p >= n:
            break
        keep = _pick(vals, opts.which, max(keep_target, kk))
        keep = min(keep, p - 1)
        if keep < vals.size and vals[keep - 1].imag != 0 and np.isclose(vals[keep], np.conj(vals[keep - 1])):
            keep -= 1
        Yk = Y if Y.shape[1] >= keep else dense_eigvecs(Hm, vals[:keep])
        Q = _real_basis(Yk, vals, list(range(keep)))
        keep = Q.shape[1]
        Vnew = V[:, :p] @ Q
        Hnew = np.zeros_like(H)
        Hnew[:keep, :keep] = Q.T @ Hm @ Q
        Hnew[keep, :keep] = H[p, :] @ Q
        V[:, :keep] = Vnew
        V[:, keep] = V[:, p]
        V[:, keep + 1 :] = 0.0
        H = Hnew
        j0 = keep
    X = V[:, :p] @ Y[:, :kk]
    vals = vals[:kk]
    vecs = np.empty_like(X, dtype=complex)
    res = np.empty(kk)
    for i in range(kk):
        x = _fix_phase(X[:, i])
        if vals[i].imag == 0:
            x = x.real.astype(complex)
            x /= np.linalg.norm(x)
        ax = op.apply(x.real) + 1j * op.apply(x.imag)
        matvecs += 2
        res[i] = np.linalg.norm(ax - vals[i] * x)
        vecs[:, i] = x
    converged = res <= opts.tol
    if not converged.all():
        log.info("topk_eigs: %d of %d pairs unconverged after %d restarts", int((~converged).sum()), kk, it)
    return EigenResult(
        values=vals,
        vectors=vecs,
        residuals=res,
        converged=converged,
        iterations=it,
        matvecs=matvecs,
        kind=op.kind,
        transposed=op.transposed,
        which=opts.which,
    )
