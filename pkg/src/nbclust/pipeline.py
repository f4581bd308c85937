"""End-to-end spectral clustering with the non-backtracking or a classical operator.

Conventions for picking eigenvectors (recorded in every result's ``meta``):

* ``nb``: left eigenvectors of the vertex-pair reduction, leading one dropped,
  the next ``q-1`` real eigenvalues by modulus kept.  If fewer are real, the
  real parts of the next complex ones fill the gap and ``meta["fallback"]``
  is set.
* ``adjacency``: 2nd through q-th largest eigenvalues.
* ``modularity``: the ``q-1`` largest eigenvalues.
* ``laplacian``: the ``q`` smallest eigenvalues of ``D - A``.
* ``random_walk``: 2nd through q-th largest eigenvalues of ``D^-1 A`` on the
  non-isolated vertices; isolated vertices get label 0.

Two groups are split by sign when a single column is used; otherwise k-means.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .cluster import Labeling, VertexEmbedding, embed, kmeans, sign_labels
from .eigen import EigenResult, SolverOpts, is_real, topk_eigs
from .graph import Graph, derive_seed
from .operators import CLASSICAL, OperatorHandle, build_b, build_b_prime, classical_operator

ALGORITHMS = ("nb",) + CLASSICAL


@dataclass(frozen=True)
class ClusterConfig:
    source: str = "vertex_space"  # or edge_space (eigenvectors of B itself)
    restarts: int = 10
    tol: float = 1e-8
    max_iter: int = 300
    ncv: Optional[int] = None
    shift: float = 1e-3  # shift for the inverted Laplacian-type operators


@dataclass
class ClusterResult:
    labeling: Labeling
    embedding: VertexEmbedding
    eig: EigenResult
    meta: dict = field(default_factory=dict)


def _shift_invert(matrix: sp.spmatrix, shift: float, kind: str, g: Graph) -> OperatorHandle:
    """``(matrix + shift I)^-1`` through a sparse LU factorisation."""
    n = matrix.shape[0]
    # symmetric minimum-degree ordering keeps the fill-in several times lower
    lu = splu(
        sp.csc_matrix(matrix + shift * sp.identity(n)),
        permc_spec="MMD_AT_PLUS_A",
        options={"SymmetricMode": True},
    )
    solve = lambda x: lu.solve(np.asarray(x, dtype=float))  # noqa: E731
    return OperatorHandle(n, solve, solve, kind, g, symmetric=True)


def _nb_columns(eig: EigenResult, q: int) -> tuple[list[int], bool]:
    reals = [i for i in range(1, len(eig)) if is_real(eig.values[i])]
    cols = reals[: q - 1]
    if len(cols) == q - 1:
        return cols, False
    rest = [i for i in range(1, len(eig)) if i not in cols]
    return cols + rest[: q - 1 - len(cols)], True


def _labels(emb: VertexEmbedding, q: int, seed, restarts: int) -> tuple[Labeling, str]:
    if q == 2 and emb.dim == 1:
        return sign_labels(emb), "sign"
    return kmeans(emb, q, seed=seed, restarts=restarts), "kmeans"


def _nb(g: Graph, q: int, seed: int, cfg: ClusterConfig):
    k = q + 1
    opts = SolverOpts(k=k, tol=cfg.tol, max_iter=cfg.max_iter, ncv=cfg.ncv, seed=seed)
    if cfg.source == "vertex_space":
        op = build_b_prime(g).T
        label = "left eigenvectors of the vertex-pair reduction"
    else:
        op = build_b(g).T
        label = "left eigenvectors of the edge operator, summed over incoming edges"
    eig = topk_eigs(op, opts)
    cols, fallback = _nb_columns(eig, q)
    if fallback:
        eig.vectors[:, cols] = eig.vectors[:, cols].real
    emb = embed(eig, cfg.source, cols, g)
    return eig, emb, {"vectors": label, "which": "LM", "fallback": fallback, "columns": cols}


def _classical(g: Graph, q: int, kind: str, seed: int, cfg: ClusterConfig):
    opts = dict(tol=cfg.tol, max_iter=cfg.max_iter, ncv=cfg.ncv, seed=seed)
    meta: dict = {"fallback": False}
    keep = None
    if kind == "adjacency":
        eig = topk_eigs(classical_operator(g, kind), SolverOpts(k=q, which="LR", **opts))
        cols = list(range(1, q))
        meta.update(vectors="2nd..q-th largest eigenvalues", which="LR")
    elif kind == "modularity":
        eig = topk_eigs(classical_operator(g, kind), SolverOpts(k=q - 1, which="LR", **opts))
        cols = list(range(q - 1))
        meta.update(vectors="q-1 largest eigenvalues", which="LR")
    elif kind == "laplacian":
        lap = sp.diags(g.degrees.astype(float)) - g.adjacency()
        op = _shift_invert(lap, cfg.shift, kind, g)
        eig = topk_eigs(op, SolverOpts(k=q, which="LR", **opts))
        eig.values = 1.0 / eig.values - cfg.shift
        cols = list(range(q))
        meta.update(vectors="q smallest eigenvalues (shift-invert)", which="SR")
    elif kind == "random_walk":
        keep = g.degrees > 0
        sub, _ = g.subgraph(keep)
        scale = 1.0 / np.sqrt(sub.degrees.astype(float))
        norm_lap = sp.identity(sub.n) - sp.diags(scale) @ sub.adjacency() @ sp.diags(scale)
        eig = topk_eigs(_shift_invert(norm_lap, cfg.shift, kind, sub), SolverOpts(k=q, which="LR", **opts))
        eig.values = 1.0 - (1.0 / eig.values - cfg.shift)
        # right eigenvectors of D^-1 A from those of the symmetric normalisation
        vecs = eig.vectors * scale[:, None]
        eig.vectors = vecs / np.linalg.norm(vecs, axis=0)
        cols = list(range(1, q))
        meta.update(vectors="2nd..q-th largest eigenvalues (shift-invert, non-isolated vertices)", which="LR")
    else:
        raise ValueError(f"unknown algorithm {kind!r}; expected one of {ALGORITHMS}")
    pts = np.stack([eig.vectors[:, i].real for i in cols], axis=1)
    pts /= np.where(np.linalg.norm(pts, axis=0) > 0, np.linalg.norm(pts, axis=0), 1.0)
    if keep is not None:
        full = np.zeros((g.n, pts.shape[1]))
        full[keep] = pts
        pts = full
    emb = VertexEmbedding(pts)
    meta["columns"] = cols
    return eig, emb, meta


def spectral_cluster(
    g: Graph,
    q: int,
    kind: str = "nb",
    seed: int = 0,
    config: ClusterConfig = ClusterConfig(),
) -> ClusterResult:
    """Cluster ``g`` into ``q`` groups from the spectrum of one operator."""
    if q < 2:
        raise ValueError("q must be at least 2")
    if g.m == 0:
        raise ValueError("cannot cluster a graph without edges")
    solver_seed = derive_seed(seed, 0)
    if kind == "nb":
        eig, emb, meta = _nb(g, q, solver_seed, config)
    else:
        eig, emb, meta = _classical(g, q, kind, solver_seed, config)
    labeling, method = _labels(emb, q, derive_seed(seed, 1), config.restarts)
    meta.update(
        algorithm=kind,
        q=q,
        seed=seed,
        labelling=method,
        embedding="per-column unit norm, no degree weighting",
        eigenvalues=[complex(eig.values[i]) for i in meta["columns"]],
        converged=bool(np.all(eig.converged[meta["columns"]])) if eig.converged is not None else True,
    )
    return ClusterResult(labeling, emb, eig, meta)
