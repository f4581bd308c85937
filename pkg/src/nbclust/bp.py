"""Belief propagation for the sparse block model and its linearisation.

Messages live on directed edges: ``eta[e]`` for ``e = v->w`` is v's group
distribution computed without w.  The update is

    eta_{v->w}(a) ∝ n_a exp(-h_a) prod_{u in N(v), u != w} sum_b c_ab eta_{u->v}(b)

with the external field ``h_a = (1/n) sum_v sum_b c_ab psi_v(b)`` standing in
for the weak pull of all non-neighbours.  Two equal groups give the familiar
two-state form; the q-group version is the standard product over neighbours.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .cluster import Labeling
from .graph import Graph, SbmParams, make_rng
from .operators import build_b, predict

NOISE = 1e-3


@dataclass(frozen=True)
class BpOpts:
    max_sweeps: int = 500
    tol: float = 1e-6  # on the largest change of any message entry
    damping: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")
        if self.max_sweeps < 0:
            raise ValueError("max_sweeps must be non-negative")


@dataclass
class BpState:
    messages: np.ndarray  # (2m, q), rows on the simplex
    field: np.ndarray  # (q,)
    params: SbmParams


@dataclass
class BpResult:
    marginals: np.ndarray
    labeling: Labeling
    converged: bool
    sweeps: int
    state: BpState
    max_change: float


def _affinity(params: SbmParams) -> np.ndarray:
    return np.ascontiguousarray(params.affinity, dtype=float)


def external_field(params: SbmParams, marginals: np.ndarray) -> np.ndarray:
    """``h_a = (1/n) sum_v sum_b c_ab psi_v(b)`` from vertex marginals."""
    return _affinity(params) @ marginals.sum(0) / params.n


def _log_fracs(params: SbmParams) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(params.group_fracs)


def initial_messages(g: Graph, params: SbmParams, seed) -> np.ndarray:
    rng = make_rng(seed)
    eta = params.group_fracs[None, :] + NOISE * rng.uniform(-1.0, 1.0, (g.n_directed, params.q))
    eta = np.clip(eta, 0.0, None)
    return eta / eta.sum(1, keepdims=True)


def marginals(g: Graph, params: SbmParams, eta: np.ndarray, field: np.ndarray) -> np.ndarray:
    """``psi_v(a) ∝ n_a exp(-h_a) prod_{u in N(v)} sum_b c_ab eta_{u->v}(b)``."""
    return _kernels.bp_marginals(g.indptr, g.rev, eta, _affinity(params), _log_fracs(params) - field)


def bp_run(
    g: Graph,
    params: SbmParams,
    opts: BpOpts = BpOpts(),
    initial: np.ndarray | None = None,
) -> BpResult:
    """Asynchronous BP over vertices in a freshly shuffled order each sweep.

    Visiting v rebuilds all of v's outgoing messages and moves the field by
    v's change of marginal, so the field tracks the marginals continuously.
    It is recomputed from scratch at the end of every sweep to shed
    rounding drift.  Returns marginals, argmax labels (ties to the lowest
    group), a convergence flag and the number of sweeps performed.

    ``initial`` replaces the seeded starting messages (rows are
    renormalised); the random stream is consumed identically either way, so
    the visiting orders depend only on ``opts.seed``.
    """
    if g.n != params.n:
        raise ValueError(f"graph has {g.n} vertices but params describe {params.n}")
    rng = make_rng(opts.seed)
    c = _affinity(params)
    log_fracs = _log_fracs(params)
    eta = initial_messages(g, params, rng.integers(2**63))
    if initial is not None:
        init = np.array(initial, dtype=float)
        if init.shape != eta.shape or (init < 0).any() or not np.isfinite(init).all():
            raise ValueError(f"initial messages must be a non-negative array of shape {eta.shape}")
        eta = init / init.sum(1, keepdims=True)
    field = external_field(params, np.tile(params.group_fracs, (g.n, 1)))
    psi = marginals(g, params, eta, field)
    field = external_field(params, psi)
    converged = False
    change = np.inf
    sweeps = 0
    while sweeps < opts.max_sweeps:
        order = rng.permutation(g.n).astype(np.int64)
        change = _kernels.bp_sweep(g.indptr, g.dst, g.rev, eta, psi, field, c, log_fracs, order, opts.damping)
        sweeps += 1
        psi = marginals(g, params, eta, field)
        field = external_field(params, psi)
        if change < opts.tol:
            converged = True
            break
    psi = marginals(g, params, eta, field)
    labels = Labeling(psi.argmax(1), params.q)
    return BpResult(psi, labels, converged, sweeps, BpState(eta, field, params), float(change))


def message_map(g: Graph, params: SbmParams, eta: np.ndarray, field: np.ndarray) -> np.ndarray:
    """One synchronous application of the BP update to every message."""
    c = _affinity(params)
    inc = np.log(np.maximum(eta @ c, _kernels.UNDERFLOW))  # row f: log sum_b c_ab eta_f(b)
    at_vertex = np.zeros((g.n, params.q))
    np.add.at(at_vertex, g.dst, inc)
    logs = (_log_fracs(params) - field)[None, :] + at_vertex[g.src] - inc[g.rev]
    logs -= logs.max(1, keepdims=True)
    out = np.exp(logs)
    return out / out.sum(1, keepdims=True)


def linearization_check(g: Graph, params: SbmParams, step: float = 1e-5) -> float:
    """Largest entry of ``|J - ratio * B^T|`` at the uniform fixed point.

    ``J`` is the central-difference Jacobian of the two-group message map in
    the coordinates ``eta_e(0)``, ``ratio = (c_in - c_out) / (c_in + c_out)``.
    A message on ``v->w`` depends on those arriving at v, so ``J`` is the
    transpose of the edge operator; conjugating by the edge reversal gives
    the operator itself, and the two comparisons are the same number.
    """
    if params.q != 2 or not np.allclose(params.group_fracs, 0.5):
        raise ValueError("the linearisation check is defined for two equal groups")
    if g.n_directed > 400:
        raise ValueError("linearisation check is meant for small graphs (2m <= 400)")
    c_in, c_out = params.affinity[0, 0], params.affinity[0, 1]
    if not np.isclose(params.affinity[1, 1], c_in):
        raise ValueError("the linearisation check needs c_11 = c_22")
    ratio = (c_in - c_out) / (c_in + c_out)
    ne = g.n_directed
    base = np.full((ne, 2), 0.5)
    field = external_field(params, np.full((g.n, 2), 0.5))
    jac = np.zeros((ne, ne))
    for f in range(ne):
        plus, minus = base.copy(), base.copy()
        plus[f] = (0.5 + step, 0.5 - step)
        minus[f] = (0.5 - step, 0.5 + step)
        jac[:, f] = (message_map(g, params, plus, field)[:, 0] - message_map(g, params, minus, field)[:, 0]) / (2 * step)
    if ne == 0:
        return 0.0
    b = build_b(g).to_dense(400)
    return float(np.abs(jac - ratio * b.T).max())


def stability_product(params: SbmParams, mu2: float) -> float:
    """``nu * mu2`` with ``nu`` the largest-modulus eigenvalue of the group matrix."""
    return float(predict(params).nu * mu2)


def stability_criterion(params: SbmParams, mu2: float) -> bool:
    """True when the uniform BP fixed point is unstable (``nu * mu2 > 1``)."""
    return stability_product(params, mu2) > 1.0
