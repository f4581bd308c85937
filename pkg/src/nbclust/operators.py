"""Matrix-free graph operators and closed-form spectral predictions.

Every operator is an :class:`OperatorHandle` whose ``apply`` accepts a vector
or a ``(dim, k)`` block of vectors.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .graph import Graph, LabeledGraph, SbmParams, two_core

log = logging.getLogger(__name__)

KINDS = (
    "B_edge",
    "B_prime",
    "adjacency",
    "laplacian",
    "random_walk",
    "modularity",
    "weighted_B",
)
CLASSICAL = ("adjacency", "laplacian", "random_walk", "modularity")

Apply = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class OperatorHandle:
    dim: int
    apply: Apply
    apply_transpose: Apply
    kind: str
    graph: Optional[Graph] = None
    transposed: bool = False
    symmetric: bool = False
    # exact structural deflation: () -> (known eigenvalues, reduced operator)
    deflation: Optional[Callable[[], tuple[np.ndarray, "OperatorHandle"]]] = field(
        default=None, repr=False
    )

    def __matmul__(self, x):
        return self.apply(x)

    @property
    def T(self) -> "OperatorHandle":
        deflation = None
        if self.deflation is not None:
            inner = self.deflation

            def transposed_deflation():
                known, reduced = inner()
                return known, reduced.T

            deflation = transposed_deflation

        return OperatorHandle(
            self.dim,
            self.apply_transpose,
            self.apply,
            self.kind,
            self.graph,
            not self.transposed,
            self.symmetric,
            deflation,
        )

    def to_dense(self, max_dim: int = 5000) -> np.ndarray:
        if self.dim > max_dim:
            raise ValueError(f"refusing to materialize a {self.dim}-dimensional operator")
        return np.ascontiguousarray(self.apply(np.eye(self.dim)), dtype=float)


def _empty_op(kind: str, g: Graph) -> OperatorHandle:
    zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))  # noqa: E731
    return OperatorHandle(0, zero, zero, kind, g)


def build_b(g: Graph) -> OperatorHandle:
    """Non-backtracking operator on the ``2m`` directed edges.

    ``(B x)[u->v] = sum_{x in N(v)} x[v->x] - x[v->u]``: one pass over the
    out-edge sums plus a reverse-edge correction.
    """
    out_sum = g.incidence_out()
    in_sum = g.incidence_in()
    dst, src, rev = g.dst, g.src, g.rev

    def apply(x):
        x = np.asarray(x, dtype=float)
        return (out_sum @ x)[dst] - x[rev]

    def apply_t(y):
        y = np.asarray(y, dtype=float)
        return (in_sum @ y)[src] - y[rev]

    return OperatorHandle(g.n_directed, apply, apply_t, "B_edge", g)


def build_weighted_b(g: Graph, weights) -> OperatorHandle:
    """Non-backtracking operator with entry ``s(u, v)`` on row ``u -> v``.

    ``weights`` is either a length-``m`` array aligned with ``g.edges()`` or a
    mapping ``{(u, v): s}``.  A mapping may list both orientations only if
    they agree; asymmetric weights are rejected.
    """
    uid = g.undirected_id()
    if isinstance(weights, dict):
        w_und = np.full(g.m, np.nan)
        for (u, v), s in weights.items():
            try:
                k = uid[g.edge_index(u, v)]
            except KeyError:
                raise ValueError(f"weight given for non-edge ({u}, {v})") from None
            if not np.isnan(w_und[k]) and w_und[k] != s:
                raise ValueError(f"asymmetric weights on edge ({u}, {v})")
            w_und[k] = float(s)
        if np.isnan(w_und).any():
            u, v = g.edges()[np.flatnonzero(np.isnan(w_und))[0]]
            raise ValueError(f"missing weight for edge ({u}, {v})")
    else:
        w_und = np.asarray(weights, dtype=float)
        if w_und.shape != (g.m,):
            raise ValueError(f"expected {g.m} weights, got shape {w_und.shape}")
        if not np.isfinite(w_und).all():
            raise ValueError("weights must be finite")
    w = w_und[uid]
    out_sum = g.incidence_out()
    in_sum = g.incidence_in()
    dst, src, rev = g.dst, g.src, g.rev

    def apply(x):
        x = np.asarray(x, dtype=float)
        y = (out_sum @ x)[dst] - x[rev]
        return y * (w if y.ndim == 1 else w[:, None])

    def apply_t(y):
        y = np.asarray(y, dtype=float)
        wy = y * (w if y.ndim == 1 else w[:, None])
        return (in_sum @ wy)[src] - wy[rev]

    return OperatorHandle(g.n_directed, apply, apply_t, "weighted_B", g)


def _b_prime_apply(g: Graph):
    n = g.n
    a = g.adjacency()
    dm1 = (g.degrees - 1).astype(float)

    def apply(z):
        z = np.asarray(z, dtype=float)
        x, y = z[:n], z[n:]
        scale = dm1 if z.ndim == 1 else dm1[:, None]
        return np.concatenate([scale * y, a @ y - x])

    def apply_t(z):
        z = np.asarray(z, dtype=float)
        x, y = z[:n], z[n:]
        scale = dm1 if z.ndim == 1 else dm1[:, None]
        return np.concatenate([-y, scale * x + a @ y])

    return apply, apply_t


def build_b_prime(g: Graph, deflate: bool = True) -> OperatorHandle:
    """The ``2n x 2n`` block matrix ``[[0, D - I], [-I, A]]``.

    Its eigenvalues are the roots of ``det(mu^2 I - mu A + D - I)``.  The
    handle carries an exact structural deflation used by the dense solver:
    deleting a leaf multiplies that determinant by ``mu^2`` and an isolated
    vertex contributes ``mu^2 - 1``, so peeling to the 2-core removes the
    defective zero eigenvalues that dangling trees produce.
    """
    apply, apply_t = _b_prime_apply(g)

    def deflation():
        core = two_core(g)
        peeled = g.n - int(core.sum())
        sub, _ = g.subgraph(core)
        iso = sub.degrees == 0
        n_iso = int(iso.sum())
        if n_iso:
            sub, _ = sub.subgraph(~iso)
        known = np.concatenate([np.zeros(2 * peeled), np.tile([1.0, -1.0], n_iso)])
        return known.astype(complex), build_b_prime(sub, deflate=False)

    return OperatorHandle(2 * g.n, apply, apply_t, "B_prime", g, deflation=deflation if deflate else None)


def classical_operator(g: Graph, kind: str) -> OperatorHandle:
    """Adjacency ``A``, Laplacian ``D - A``, random walk ``D^-1 A`` or
    modularity ``A - d d^T / 2m``, all matrix-free."""
    a = g.adjacency()
    d = g.degrees.astype(float)

    def col(v, x):
        return v if x.ndim == 1 else v[:, None]

    if kind == "adjacency":
        f = lambda x: a @ np.asarray(x, dtype=float)  # noqa: E731
        return OperatorHandle(g.n, f, f, kind, g, symmetric=True)
    if kind == "laplacian":

        def lap(x):
            x = np.asarray(x, dtype=float)
            return col(d, x) * x - a @ x

        return OperatorHandle(g.n, lap, lap, kind, g, symmetric=True)
    if kind == "random_walk":
        if (d == 0).any():
            v = int(np.flatnonzero(d == 0)[0])
            raise ValueError(f"random-walk operator undefined: vertex {v} is isolated")
        inv = 1.0 / d

        def rw(x):
            x = np.asarray(x, dtype=float)
            return col(inv, x) * (a @ x)

        def rw_t(y):
            y = np.asarray(y, dtype=float)
            return a @ (col(inv, y) * y)

        return OperatorHandle(g.n, rw, rw_t, kind, g)
    if kind == "modularity":
        two_m = 2.0 * g.m
        if two_m == 0:
            raise ValueError("modularity matrix undefined on an empty graph")

        def mod(x):
            x = np.asarray(x, dtype=float)
            return a @ x - np.multiply.outer(d, d @ x) / two_m

        return OperatorHandle(g.n, mod, mod, kind, g, symmetric=True)
    raise ValueError(f"unknown classical operator {kind!r}")


def sparse_b(g: Graph) -> sp.csr_matrix:
    """Sparse matrix of the non-backtracking operator (``2m x 2m``)."""
    deg = g.degrees
    counts = deg[g.dst]  # row u->v has d_v entries before removing v->u
    rows = np.repeat(np.arange(g.n_directed), counts)
    starts = g.indptr[g.dst]
    offs = np.arange(rows.size) - np.repeat(np.cumsum(counts) - counts, counts)
    cols = np.repeat(starts, counts) + offs
    keep = cols != g.rev[rows]
    return sp.csr_matrix(
        (np.ones(int(keep.sum())), (rows[keep], cols[keep])), shape=(g.n_directed,) * 2
    )


def walk_gram_trace(g: Graph, r: int) -> float:
    """Exact ``tr(B^r (B^r)^T)``, the squared Frobenius norm of ``B^r``."""
    if r < 0:
        raise ValueError("r must be non-negative")
    b = sparse_b(g)
    p = sp.identity(g.n_directed, format="csr")
    for _ in range(r):
        p = p @ b
    return float(p.multiply(p).sum())


def hutchinson_trace(op: OperatorHandle, probes: int, seed) -> tuple[float, float]:
    """Rademacher trace estimate of ``op`` and its standard error."""
    rng = np.random.default_rng(seed)
    z = rng.choice([-1.0, 1.0], size=(op.dim, probes))
    samples = np.einsum("ij,ij->j", z, op.apply(z))
    return float(samples.mean()), float(samples.std(ddof=1) / np.sqrt(probes)) if probes > 1 else 0.0


# ---------------------------------------------------------------------------
# closed forms


def semicircle_density(lam, c: float):
    """Semicircle density of radius ``2 sqrt(c)``, zero outside."""
    lam = np.asarray(lam, dtype=float)
    return np.sqrt(np.clip(4.0 * c - lam * lam, 0.0, None)) / (2.0 * np.pi * c)


@dataclass(frozen=True)
class SpectralPrediction:
    c: float
    group_degrees: np.ndarray
    uniform_degrees: bool
    T: np.ndarray
    T_eigenvalues: np.ndarray
    mu_c: Optional[float]
    lambda_c: Optional[float]
    bulk_radius: float
    detectable: Optional[bool]

    @property
    def nu(self) -> float:
        """Leading (largest-modulus) eigenvalue of the group matrix ``T``."""
        return float(self.T_eigenvalues[np.argmax(np.abs(self.T_eigenvalues))])


def group_matrix(params: SbmParams) -> np.ndarray:
    """``T_ab = n_a (c_ab / c - 1)``."""
    c = params.mean_degree
    if c == 0:
        return np.zeros((params.q, params.q))
    return params.group_fracs[:, None] * (params.affinity / c - 1.0)


def predict(params: SbmParams) -> SpectralPrediction:
    """Closed-form leading eigenvalues and detectability for a block model.

    With uniform group degrees the community eigenvalues of the
    non-backtracking operator are ``c * nu`` for the nonzero eigenvalues
    ``nu`` of ``T``; the informative one is detectable when it exceeds the
    bulk radius ``sqrt(c)`` in modulus.  For non-uniform group degrees the
    per-group degrees are reported and the closed forms are left as None.
    """
    from .eigen import dense_symmetric_spectrum

    c = params.mean_degree
    cg = params.group_degrees
    uniform = bool(np.allclose(cg, cg[0], rtol=1e-12, atol=1e-12))
    t = group_matrix(params)
    # T = diag(n) S with S symmetric: same spectrum as diag(sqrt n) S diag(sqrt n)
    s = np.sqrt(params.group_fracs)
    sym = s[:, None] * (t / np.where(params.group_fracs > 0, params.group_fracs, 1.0)[:, None]) * s[None, :]
    sym = 0.5 * (sym + sym.T)
    nus = dense_symmetric_spectrum(sym)
    radius = float(np.sqrt(c))
    mu_c = lam_c = detectable = None
    if not uniform:
        log.warning("non-uniform group degrees %s: closed forms inapplicable", cg)
    else:
        tv = params.two_valued
        if tv is not None and params.q > 1 and np.allclose(params.group_fracs, 1.0 / params.q):
            c_in, c_out = tv
            mu_c = (c_in - c_out) / params.q
            detectable = abs(c_in - c_out) > params.q * radius
        else:
            nu = float(nus[np.argmax(np.abs(nus))]) if nus.size else 0.0
            mu_c = c * nu
            detectable = abs(mu_c) > radius
        lam_c = mu_c + c / mu_c if mu_c != 0 else None
    return SpectralPrediction(
        c=c,
        group_degrees=cg,
        uniform_degrees=uniform,
        T=t,
        T_eigenvalues=nus,
        mu_c=mu_c,
        lambda_c=lam_c,
        bulk_radius=radius,
        detectable=detectable,
    )


# ---------------------------------------------------------------------------
# reconstruction vectors


@dataclass(frozen=True)
class ReconstructionVector:
    r: int
    mu: float
    vertex_values: np.ndarray
    edge_values: np.ndarray
    correlation: float


def reconstruction_vector(lg: LabeledGraph, r: int, mu: float, edges: bool = True) -> ReconstructionVector:
    """Distance-``r`` label sums scaled by ``mu**-r``.

    ``vertex_values[v]`` sums the spins of vertices at graph distance exactly
    ``r`` from ``v``; ``edge_values[u->v]`` is the incoming message: it sums
    ``spin[w]`` over directed edges ``w -> x`` from which ``u -> v`` is
    reached in ``r - 1`` non-backtracking steps, i.e. the spins at distance
    ``r`` from v behind u.  For ``r = 0`` it is ``spin[v] / deg(v)``.  On
    tree-like neighbourhoods the incoming sums at v reproduce
    ``vertex_values[v]``.
    """
    from ._kernels import distance_shell_sums, edge_shell_sums

    if r < 0:
        raise ValueError("r must be non-negative")
    if mu == 0:
        raise ValueError("mu must be nonzero")
    g = lg.graph
    sigma = lg.spins.astype(float)
    scale = float(mu) ** (-r)
    f, reached = distance_shell_sums(g.indptr, g.dst, sigma, r)
    if not reached:
        warnings.warn(f"no vertex pair at distance {r}; returning zeros", stacklevel=2)
    f = f * scale
    gv = np.zeros(g.n_directed)
    if edges:
        gv = edge_shell_sums(g.indptr, g.dst, g.src, g.rev, sigma, r) * scale
    corr = float(f @ sigma / g.n) if g.n else 0.0
    return ReconstructionVector(r, float(mu), f, gv, corr)
