"""From eigenvectors to group labels: embeddings, sign split, k-means, overlap."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .eigen.result import EigenResult
from .graph import Graph, make_rng

SOURCES = ("edge_space", "vertex_space")


@dataclass(frozen=True)
class VertexEmbedding:
    """Row v holds the coordinates of vertex v, one column per eigenvector."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise ValueError("embedding needs at least one column")
        if not np.isfinite(pts).all():
            raise ValueError("embedding has non-finite entries")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __neg__(self) -> "VertexEmbedding":
        return VertexEmbedding(-self.points)


@dataclass(frozen=True)
class Labeling:
    labels: np.ndarray
    q: int

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int64)
        if lab.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if lab.size and (lab.min() < 0 or lab.max() >= self.q):
            raise ValueError(f"labels must lie in 0..{self.q - 1}")
        object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.labels.size


def _real_columns(eig: EigenResult, columns) -> np.ndarray:
    if eig.vectors is None:
        raise ValueError("eigen result carries no vectors")
    out = []
    for i in columns:
        v = eig.vectors[:, i]
        if np.linalg.norm(v.imag) > 1e-6 * np.linalg.norm(v):
            raise ValueError(f"eigenvector {i} is complex (eigenvalue {eig.values[i]:.6g}); cannot embed")
        out.append(v.real)
    return np.stack(out, axis=1)


def embed(
    eig: EigenResult,
    source: str,
    columns,
    graph: Graph | None = None,
) -> VertexEmbedding:
    """Vertex coordinates from selected eigenvectors, each column unit norm.

    ``edge_space`` vectors live on directed edges.  Left eigenvectors (a
    result computed on the transposed operator) are summed over the edges
    entering each vertex; right eigenvectors are summed over the edges
    leaving it, which is the same vertex vector up to scale.
    ``vertex_space`` vectors come from the transposed vertex-pair operator and
    the first ``n`` coordinates are used as they are.
    """
    if source not in SOURCES:
        raise ValueError(f"source must be one of {SOURCES}")
    if isinstance(columns, int):
        columns = [columns]
    cols = _real_columns(eig, list(columns))
    if source == "edge_space":
        if graph is None:
            raise ValueError("edge_space embedding needs the graph")
        if cols.shape[0] != graph.n_directed:
            raise ValueError("vectors do not live on the directed edges of this graph")
        inc = graph.incidence_in() if eig.transposed else graph.incidence_out()
        f = inc @ cols
    else:
        if cols.shape[0] % 2:
            raise ValueError("vertex_space vectors must have even length 2n")
        f = cols[: cols.shape[0] // 2]
    norms = np.linalg.norm(f, axis=0)
    norms[norms == 0] = 1.0
    return VertexEmbedding(f / norms)


def sign_labels(emb: VertexEmbedding) -> Labeling:
    """Two groups by sign; exact zeros go to group 0."""
    if emb.dim != 1:
        raise ValueError("sign labelling needs a one-column embedding")
    return Labeling((emb.points[:, 0] < 0).astype(np.int64), 2)


@dataclass
class KMeansFit:
    labeling: Labeling
    centers: np.ndarray
    objective: float
    history: list


def _sq_dist(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    return (x * x).sum(1)[:, None] - 2.0 * x @ c.T + (c * c).sum(1)[None, :]


def _plus_plus(x: np.ndarray, q: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = [x[rng.integers(n)]]
    d2 = ((x - centers[0]) ** 2).sum(1)
    for _ in range(1, q):
        total = d2.sum()
        i = rng.choice(n, p=d2 / total) if total > 0 else rng.integers(n)
        centers.append(x[i])
        d2 = np.minimum(d2, ((x - x[i]) ** 2).sum(1))
    return np.array(centers)


def _lloyd(x, centers, max_iter, rel_tol):
    history = []
    prev = np.inf
    for _ in range(max_iter):
        d = np.maximum(_sq_dist(x, centers), 0.0)
        lab = d.argmin(1)
        obj = float(d[np.arange(x.shape[0]), lab].sum())
        history.append(obj)
        # a center that lost all points keeps its position
        for a in range(centers.shape[0]):
            sel = lab == a
            if sel.any():
                centers[a] = x[sel].mean(0)
        if np.isfinite(prev) and prev - obj <= rel_tol * prev:
            break
        prev = obj
    d = np.maximum(_sq_dist(x, centers), 0.0)
    lab = d.argmin(1)
    return lab, centers, float(d[np.arange(x.shape[0]), lab].sum()), history


def kmeans_fit(
    emb: VertexEmbedding,
    q: int,
    seed=0,
    restarts: int = 10,
    max_iter: int = 300,
    rel_tol: float = 1e-10,
) -> KMeansFit:
    """k-means++ seeding and Lloyd iterations; the best of ``restarts`` runs."""
    x = emb.points
    if q < 2:
        raise ValueError("k-means needs q >= 2")
    if x.shape[0] < q:
        raise ValueError(f"{x.shape[0]} points cannot form {q} clusters")
    distinct = np.unique(x, axis=0).shape[0]
    if distinct < q:
        raise ValueError(f"only {distinct} distinct points for {q} clusters")
    rng = make_rng(seed)
    best = None
    for _ in range(restarts):
        lab, centers, obj, hist = _lloyd(x, _plus_plus(x, q, rng), max_iter, rel_tol)
        if best is None or obj < best.objective:
            best = KMeansFit(Labeling(lab, q), centers, obj, hist)
    return best


def kmeans(emb: VertexEmbedding, q: int, seed=0, restarts: int = 10) -> Labeling:
    return kmeans_fit(emb, q, seed, restarts).labeling


def confusion(truth: Labeling, pred: Labeling) -> np.ndarray:
    if truth.n != pred.n:
        raise ValueError(f"label vectors differ in length ({truth.n} vs {pred.n})")
    q = max(truth.q, pred.q)
    mat = np.zeros((q, q), dtype=np.int64)
    np.add.at(mat, (truth.labels, pred.labels), 1)
    return mat


def overlap(truth: Labeling, pred: Labeling) -> float:
    """Agreement above chance, maximised over relabellings of ``pred``.

    ``(best fraction agreeing - 1/q) / (1 - 1/q)``; all q! permutations are
    tried for q <= 8, an optimal assignment on the confusion matrix otherwise.
    """
    mat = confusion(truth, pred)
    q = mat.shape[0]
    n = truth.n
    if n == 0:
        raise ValueError("empty labelling")
    if q == 1:
        return 1.0
    if q <= 8:
        rows = np.arange(q)
        hits = max(int(mat[rows, list(p)].sum()) for p in itertools.permutations(range(q)))
    else:
        r, c = linear_sum_assignment(-mat)
        hits = int(mat[r, c].sum())
    chance = 1.0 / q
    return (hits / n - chance) / (1.0 - chance)
