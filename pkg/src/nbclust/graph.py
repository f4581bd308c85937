"""Simple undirected graphs with a canonical directed-edge index, plus
random generators with planted group labels and edge-list I/O.

Directed edges are stored in CSR order: the out-edges of vertex ``v`` occupy
positions ``indptr[v]:indptr[v + 1]`` and are sorted by head.  Edge ``e`` runs
``src[e] -> dst[e]`` and ``rev[e]`` is the index of its reverse.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

log = logging.getLogger(__name__)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple graph on vertices ``0..n-1``."""

    n: int
    indptr: np.ndarray
    dst: np.ndarray
    src: np.ndarray
    rev: np.ndarray

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build from an iterable/array of undirected ``(u, v)`` pairs.

        Raises ``ValueError`` on self-loops, duplicate edges or ids outside
        ``0..n-1``.
        """
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValueError(f"vertex id out of range 0..{n - 1}")
        loops = np.flatnonzero(e[:, 0] == e[:, 1])
        if loops.size:
            raise ValueError(f"self-loop at vertex {e[loops[0], 0]}")
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        key = lo * n + hi
        uniq, counts = np.unique(key, return_counts=True)
        if uniq.size != key.size:
            k = uniq[np.argmax(counts > 1)]
            raise ValueError(f"duplicate edge ({k // n}, {k % n})")
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        # reverse of (u -> v) is (v -> u): locate it inside v's sorted out-list
        rev = np.empty(src.size, dtype=np.int64)
        if src.size:
            dkey = src * n + dst
            rev[:] = np.searchsorted(dkey, dst * n + src)
        return cls(
            n=int(n),
            indptr=_frozen(indptr),
            dst=_frozen(dst.astype(np.int64)),
            src=_frozen(src.astype(np.int64)),
            rev=_frozen(rev),
        )

    @property
    def m(self) -> int:
        return self.dst.size // 2

    @property
    def n_directed(self) -> int:
        return self.dst.size

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        return self.dst[self.indptr[v] : self.indptr[v + 1]]

    def edge_index(self, u: int, v: int) -> int:
        """Index of the directed edge ``u -> v``; ``KeyError`` if absent."""
        lo, hi = self.indptr[u], self.indptr[u + 1]
        i = lo + int(np.searchsorted(self.dst[lo:hi], v))
        if i >= hi or self.dst[i] != v:
            raise KeyError((u, v))
        return int(i)

    def endpoints(self, e: int) -> tuple[int, int]:
        return int(self.src[e]), int(self.dst[e])

    def edges(self) -> np.ndarray:
        """Undirected edges as an ``(m, 2)`` array with ``u < v``, sorted."""
        fwd = self.src < self.dst
        return np.stack([self.src[fwd], self.dst[fwd]], axis=1)

    def undirected_id(self) -> np.ndarray:
        """Map each directed edge to the row of its pair in :meth:`edges`."""
        fwd = self.src < self.dst
        uid = np.empty(self.n_directed, dtype=np.int64)
        uid[fwd] = np.arange(int(fwd.sum()))
        uid[~fwd] = uid[self.rev[~fwd]]
        return uid

    def adjacency(self) -> sp.csr_matrix:
        data = np.ones(self.n_directed)
        return sp.csr_matrix((data, self.dst, self.indptr), shape=(self.n, self.n))

    def incidence_out(self) -> sp.csr_matrix:
        """``n x 2m`` matrix summing a directed-edge vector over out-edges."""
        cols = np.arange(self.n_directed)
        return sp.csr_matrix(
            (np.ones(self.n_directed), cols, self.indptr), shape=(self.n, self.n_directed)
        )

    def incidence_in(self) -> sp.csr_matrix:
        """``n x 2m`` matrix summing a directed-edge vector over in-edges."""
        # in-edges of v are exactly the reverses of v's out-edges
        return sp.csr_matrix(
            (np.ones(self.n_directed), self.rev, self.indptr), shape=(self.n, self.n_directed)
        )

    def subgraph(self, keep: np.ndarray) -> tuple["Graph", np.ndarray]:
        """Induced subgraph on the vertices flagged by boolean ``keep``.

        Returns the subgraph and the original ids of its vertices.
        """
        keep = np.asarray(keep, dtype=bool)
        ids = np.flatnonzero(keep)
        new_id = np.full(self.n, -1, dtype=np.int64)
        new_id[ids] = np.arange(ids.size)
        e = self.edges()
        ok = keep[e[:, 0]] & keep[e[:, 1]]
        return Graph.from_edges(ids.size, new_id[e[ok]]), ids

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges(), other.edges())

    def __hash__(self) -> int:
        return hash((self.n, self.edges().tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    graph: Graph
    labels: np.ndarray
    q: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.shape != (self.graph.n,):
            raise ValueError("labels must have one entry per vertex")
        if labels.size and (labels.min() < 0 or labels.max() >= self.q):
            raise ValueError(f"labels must lie in 0..{self.q - 1}")
        object.__setattr__(self, "labels", _frozen(labels.copy()))

    @property
    def spins(self) -> np.ndarray:
        """Two-group labels as +1 / -1 (group 0 is +1)."""
        if self.q != 2:
            raise ValueError("spins are defined for q=2 only")
        return 1 - 2 * self.labels


@dataclass(frozen=True)
class SbmParams:
    """Sparse block model: edge probability ``affinity[a, b] / n``."""

    n: int
    group_fracs: np.ndarray
    affinity: np.ndarray

    def __post_init__(self):
        fr = np.asarray(self.group_fracs, dtype=float).ravel()
        c = np.atleast_2d(np.asarray(self.affinity, dtype=float))
        if c.shape != (fr.size, fr.size):
            raise ValueError("affinity must be q x q with q = len(group_fracs)")
        if not np.allclose(c, c.T, rtol=0, atol=0):
            raise ValueError("affinity must be symmetric")
        if (c < 0).any() or (fr < 0).any():
            raise ValueError("affinity and group fractions must be non-negative")
        if abs(fr.sum() - 1.0) > 1e-12:
            raise ValueError(f"group fractions sum to {fr.sum()}, not 1")
        object.__setattr__(self, "group_fracs", _frozen(fr))
        object.__setattr__(self, "affinity", _frozen(c))

    @property
    def q(self) -> int:
        return self.group_fracs.size

    @classmethod
    def planted(cls, n: int, q: int, c_in: float, c_out: float) -> "SbmParams":
        """Equal groups, ``c_in`` on the diagonal and ``c_out`` elsewhere."""
        c = np.full((q, q), float(c_out))
        np.fill_diagonal(c, float(c_in))
        return cls(n, np.full(q, 1.0 / q), c)

    @classmethod
    def from_gap(cls, n: int, q: int, c: float, gap: float) -> "SbmParams":
        """Equal groups with mean degree ``c`` and ``c_in - c_out = gap``."""
        c_out = c - gap / q
        return cls.planted(n, q, c_out + gap, c_out)

    @classmethod
    def from_ratio(cls, n: int, q: int, c: float, ratio: float) -> "SbmParams":
        """Equal groups with mean degree ``c`` and ``c_out / c_in = ratio``."""
        c_in = q * c / (1.0 + (q - 1) * ratio)
        return cls.planted(n, q, c_in, ratio * c_in)

    @property
    def group_degrees(self) -> np.ndarray:
        """Expected degree of each group, ``c_a = sum_b c_ab n_b``."""
        return self.affinity @ self.group_fracs

    @property
    def mean_degree(self) -> float:
        return float(self.group_fracs @ self.group_degrees)

    @property
    def two_valued(self) -> tuple[float, float] | None:
        """``(c_in, c_out)`` when the affinity has that form, else None."""
        c = self.affinity
        d = np.diag(c)
        off = c[~np.eye(self.q, dtype=bool)]
        if np.all(d == d[0]) and (off.size == 0 or np.all(off == off[0])):
            return float(d[0]), float(off[0]) if off.size else float(d[0])
        return None


@dataclass(frozen=True)
class DegreeSeqParams:
    """Two equal groups sharing one degree distribution.

    ``tilde_c_in / 2`` and ``tilde_c_out / 2`` are the mean numbers of onward
    edges into a vertex's own group and into the other group.
    """

    n: int
    degree_dist: Sequence[tuple[int, float]]
    tilde_c_in: float
    tilde_c_out: float

    def __post_init__(self):
        ks = np.array([k for k, _ in self.degree_dist], dtype=np.int64)
        ps = np.array([p for _, p in self.degree_dist], dtype=float)
        if (ks < 0).any() or (ps < 0).any():
            raise ValueError("degrees and probabilities must be non-negative")
        if abs(ps.sum() - 1.0) > 1e-12:
            raise ValueError("degree distribution must sum to 1")
        if not np.isfinite((ks**2 * ps).sum()):
            raise ValueError("degree distribution needs a finite second moment")

    @property
    def branching_ratio(self) -> float:
        ks = np.array([k for k, _ in self.degree_dist], dtype=float)
        ps = np.array([p for _, p in self.degree_dist], dtype=float)
        return float((ks * (ks - 1) * ps).sum() / (ks * ps).sum())


def make_rng(seed) -> np.random.Generator:
    """Seedable PCG64 generator; accepts ints, SeedSequences or Generators."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(seed: int, *keys: int) -> int:
    """Independent child seed for task ``keys`` of a run seeded with ``seed``."""
    ss = np.random.SeedSequence([int(seed), *[int(k) for k in keys]])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def _unrank_pairs(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map ranks ``t`` of unordered pairs ``i < j`` (colex order) to ``(i, j)``."""
    j = np.floor((1.0 + np.sqrt(1.0 + 8.0 * t.astype(float))) / 2.0).astype(np.int64)
    # float rounding can be off by one in either direction
    j -= (j * (j - 1) // 2) > t
    j += ((j + 1) * j // 2) <= t
    i = t - j * (j - 1) // 2
    return i, j


def sbm_sample(params: SbmParams, seed) -> LabeledGraph:
    """Sample a graph from the sparse block model.

    Each vertex joins group ``a`` with probability ``n_a``.  For every block
    pair the edge count is binomial over the available vertex pairs and the
    edges are a uniform sample of distinct pairs, which reproduces per-pair
    Bernoulli sampling exactly in O(m) time.
    """
    n, q = params.n, params.q
    if (params.affinity > n).any():
        raise ValueError("affinity entries above n give edge probabilities > 1")
    rng = make_rng(seed)
    labels = rng.choice(q, size=n, p=params.group_fracs)
    members = [np.flatnonzero(labels == a) for a in range(q)]
    chunks = []
    for a in range(q):
        for b in range(a, q):
            p = params.affinity[a, b] / n
            sa, sb = members[a].size, members[b].size
            npairs = sa * (sa - 1) // 2 if a == b else sa * sb
            if p == 0.0 or npairs == 0:
                continue
            k = rng.binomial(npairs, min(p, 1.0))
            if k == 0:
                continue
            t = rng.choice(npairs, size=k, replace=False)
            if a == b:
                i, j = _unrank_pairs(t)
                chunks.append(np.stack([members[a][i], members[a][j]], axis=1))
            else:
                chunks.append(np.stack([members[a][t // sb], members[b][t % sb]], axis=1))
    edges = np.concatenate(chunks) if chunks else np.zeros((0, 2), dtype=np.int64)
    return LabeledGraph(Graph.from_edges(n, edges), labels, q)


def degree_stats(g: Graph) -> tuple[float, float]:
    """Mean degree ``2m/n`` and branching ratio ``<k^2>/<k> - 1``."""
    if g.m == 0:
        raise ValueError("degree statistics need at least one edge")
    d = g.degrees.astype(float)
    return 2.0 * g.m / g.n, float((d * d).sum() / d.sum() - 1.0)


def _allocate(size: int, probs: np.ndarray) -> np.ndarray:
    """Largest-remainder split of ``size`` items by ``probs``."""
    raw = size * probs
    base = np.floor(raw).astype(np.int64)
    short = size - base.sum()
    if short:
        base[np.argsort(-(raw - base), kind="stable")[:short]] += 1
    return base


def config_model_sample(params: DegreeSeqParams, seed, max_rewire: int = 10_000) -> LabeledGraph:
    """Two-group configuration model with planted bipartition.

    Degrees follow ``degree_dist`` in each group (largest-remainder
    allocation).  Stubs are split into cross-group and within-group stubs with
    cross probability ``tilde_c_out / (tilde_c_in + tilde_c_out)`` and matched
    uniformly.  Self-loops and repeated edges are removed by degree- and
    group-preserving double-edge swaps.
    """
    ctilde = params.branching_ratio
    target = 0.5 * (params.tilde_c_in + params.tilde_c_out)
    if abs(target - ctilde) > 0.02 * max(ctilde, 1e-300):
        raise ValueError(
            f"(tilde_c_in + tilde_c_out)/2 = {target:g} does not match the "
            f"branching ratio {ctilde:g} of the degree distribution"
        )
    rng = make_rng(seed)
    n = params.n
    ks = np.array([k for k, _ in params.degree_dist], dtype=np.int64)
    ps = np.array([p for _, p in params.degree_dist], dtype=float)
    perm = rng.permutation(n)
    sizes = (n // 2, n - n // 2)
    groups = (perm[: sizes[0]], perm[sizes[0] :])
    labels = np.zeros(n, dtype=np.int64)
    labels[groups[1]] = 1
    stubs = []
    for verts in groups:
        deg = np.repeat(ks, _allocate(verts.size, ps))
        rng.shuffle(deg)
        stubs.append(rng.permutation(np.repeat(verts, deg)))
    s0, s1 = stubs[0].size, stubs[1].size
    if (s0 + s1) % 2:
        raise ValueError("total number of half-edges is odd")
    p_out = params.tilde_c_out / (params.tilde_c_in + params.tilde_c_out)
    k = int(rng.binomial(s0, p_out)) if p_out > 0 else 0
    k = min(k, s0, s1)
    if (s0 - k) % 2:
        if p_out == 0:
            raise ValueError("odd half-edge count within a group with no cross edges")
        k = k - 1 if k > 0 else k + 1
    if k > min(s0, s1):
        raise ValueError("cannot balance cross-group half-edges")
    cross = np.stack([stubs[0][:k], stubs[1][:k]], axis=1)
    inner = [st[k:].reshape(-1, 2) for st in stubs]
    classes = [inner[0], inner[1], cross]
    edges = _rewire(classes, n, rng, max_rewire)
    return LabeledGraph(Graph.from_edges(n, edges), labels, 2)


def _rewire(classes: list[np.ndarray], n: int, rng: np.random.Generator, max_tries: int) -> np.ndarray:
    """Remove loops and multi-edges by double-edge swaps inside each class."""
    classes = [c.copy() for c in classes]
    counts: dict[int, int] = {}

    def key(u, v):
        return min(u, v) * n + max(u, v)

    for c in classes:
        for u, v in c:
            counts[key(u, v)] = counts.get(key(u, v), 0) + 1

    def bad(u, v):
        return u == v or counts[key(u, v)] > 1

    tries = 0
    for ci, c in enumerate(classes):
        cross = ci == 2
        for i in range(len(c)):
            while bad(*c[i]):
                tries += 1
                if tries > max_tries:
                    raise RuntimeError("rewiring did not remove all loops/multi-edges")
                j = int(rng.integers(len(c)))
                if j == i:
                    continue
                a, b = c[i]
                x, y = c[j]
                # cross edges keep (group0, group1) orientation
                if cross or rng.random() < 0.5:
                    new1, new2 = (a, y), (x, b)
                else:
                    new1, new2 = (a, x), (b, y)
                if new1[0] == new1[1] or new2[0] == new2[1]:
                    continue
                k1, k2 = key(*new1), key(*new2)
                if k1 == k2 or counts.get(k1, 0) or counts.get(k2, 0):
                    continue
                for kk in (key(a, b), key(x, y)):
                    counts[kk] -= 1
                counts[k1] = 1
                counts[k2] = 1
                c[i], c[j] = new1, new2
    return np.concatenate(classes) if classes else np.zeros((0, 2), dtype=np.int64)


@dataclass(frozen=True)
class Component:
    kind: str  # "tree" | "unicyclic" | "multicyclic"
    n_vertices: int
    n_edges: int


def component_census(g: Graph) -> list[Component]:
    """Classify connected components by cycle rank, largest first."""
    ncomp, comp = connected_components(g.adjacency(), directed=False)
    nv = np.bincount(comp, minlength=ncomp)
    ne = np.bincount(comp[g.src], minlength=ncomp) // 2
    out = []
    for v, e in zip(nv, ne):
        kind = "tree" if e == v - 1 else "unicyclic" if e == v else "multicyclic"
        out.append(Component(kind, int(v), int(e)))
    out.sort(key=lambda c: (-c.n_vertices, -c.n_edges, c.kind))
    return out


def two_core(g: Graph) -> np.ndarray:
    """Boolean mask of vertices left after repeatedly deleting leaves."""
    deg = g.degrees.copy()
    alive = np.ones(g.n, dtype=bool)
    stack = list(np.flatnonzero(deg == 1))
    while stack:
        v = stack.pop()
        if not alive[v] or deg[v] != 1:
            continue
        alive[v] = False
        deg[v] = 0
        for u in g.neighbors(v):
            if alive[u]:
                deg[u] -= 1
                if deg[u] == 1:
                    stack.append(u)
    return alive


# ---------------------------------------------------------------------------
# text formats

_N_HINT = "# n="


def _parse_line(line: str, lineno: int, path) -> list[str] | None:
    s = line.strip()
    if not s or s.startswith("#"):
        return None
    toks = s.split()
    if len(toks) not in (2, 3):
        raise ValueError(f"{path}:{lineno}: expected 'u v' or 'u v weight', got {s!r}")
    return toks


def load_edge_list(path, n: int | None = None, with_weights: bool = False):
    """Read an undirected edge list.

    Lines are ``u v`` (optionally ``u v weight``) with non-negative integer
    ids; ``#`` lines are comments.  Vertices are ``0..max_id`` unless ``n`` is
    given or the file carries a ``# n=<count>`` header as written by
    :func:`write_edge_list`.  With ``with_weights`` returns ``(graph,
    weights)`` where ``weights`` follows ``graph.edges()`` order.
    """
    us, vs, ws, lines = [], [], [], []
    hint = None
    seen: dict[tuple[int, int], int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.startswith(_N_HINT):
                hint = int(line[len(_N_HINT) :].split()[0])
            toks = _parse_line(line, lineno, path)
            if toks is None:
                continue
            try:
                u, v = int(toks[0]), int(toks[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer vertex id in {line.strip()!r}") from None
            if u < 0 or v < 0:
                raise ValueError(f"{path}:{lineno}: negative vertex id")
            if u == v:
                raise ValueError(f"{path}:{lineno}: self-loop at vertex {u}")
            k = (min(u, v), max(u, v))
            if k in seen:
                raise ValueError(f"{path}:{lineno}: duplicate edge {k} (first on line {seen[k]})")
            seen[k] = lineno
            us.append(u)
            vs.append(v)
            if len(toks) == 3:
                ws.append(float(toks[2]))
            elif with_weights:
                raise ValueError(f"{path}:{lineno}: missing weight")
            lines.append(lineno)
    top = max(max(us, default=-1), max(vs, default=-1)) + 1
    size = n if n is not None else max(top, hint or 0)
    if size < top:
        raise ValueError(f"vertex id {top - 1} exceeds n={size}")
    g = Graph.from_edges(size, np.stack([us, vs], axis=1) if us else np.zeros((0, 2)))
    if not with_weights:
        return g
    edges = g.edges()
    order = np.lexsort((np.maximum(us, vs), np.minimum(us, vs))) if us else np.zeros(0, int)
    weights = np.asarray(ws, dtype=float)[order]
    assert len(weights) == len(edges)
    return g, weights


def reindex_edge_list(path):
    """Read an edge list with arbitrary integer ids, compacting them.

    Returns the graph on ``0..k-1`` and the original id of each vertex.
    """
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            toks = _parse_line(line, lineno, path)
            if toks is not None:
                pairs.append((int(toks[0]), int(toks[1])))
    raw = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    ids, inv = np.unique(raw, return_inverse=True)
    return Graph.from_edges(ids.size, inv.reshape(-1, 2)), ids


def write_edge_list(g: Graph, path, weights: Iterable[float] | None = None) -> None:
    """Write ``u v`` lines sorted by ``(u, v)`` after a ``# n=`` header."""
    e = g.edges()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{_N_HINT}{g.n} m={g.m}\n")
        if weights is None:
            fh.writelines(f"{u} {v}\n" for u, v in e)
        else:
            w = np.asarray(list(weights), dtype=float)
            fh.writelines(f"{u} {v} {x:.17g}\n" for (u, v), x in zip(e, w))


def load_labels(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        vals = [int(s) for s in (ln.strip() for ln in fh) if s and not s.startswith("#")]
    return np.asarray(vals, dtype=np.int64)


def write_labels(labels, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(f"{int(x)}\n" for x in labels)
