"""Compiled inner loops: distance shells and belief-propagation sweeps."""

import numpy as np
from numba import njit


@njit(cache=True)
def distance_shell_sums(indptr, dst, sigma, r):
    """For each v, sum sigma[u] over vertices u at graph distance exactly r."""
    n = indptr.size - 1
    out = np.zeros(n)
    stamp = np.full(n, -1, dtype=np.int64)
    frontier = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    reached = r == 0
    for v in range(n):
        if r == 0:
            out[v] = sigma[v]
            continue
        stamp[v] = v
        frontier[0] = v
        nf = 1
        for _ in range(r):
            nn = 0
            for i in range(nf):
                x = frontier[i]
                for k in range(indptr[x], indptr[x + 1]):
                    y = dst[k]
                    if stamp[y] != v:
                        stamp[y] = v
                        nxt[nn] = y
                        nn += 1
            frontier, nxt = nxt, frontier
            nf = nn
            if nf == 0:
                break
        if nf:
            reached = True
        s = 0.0
        for i in range(nf):
            s += sigma[frontier[i]]
        out[v] = s
    return out, reached


@njit(cache=True)
def edge_shell_sums(indptr, dst, src, rev, sigma, r):
    """Incoming-message shell sums on directed edges.

    For edge e = u->v, sums sigma[src[e']] over directed edges e' from which
    e is reached in exactly r-1 non-backtracking steps (shortest), i.e. the
    spins at distance r from v on u's side of a locally tree-like graph.
    For r = 0 the value is sigma[v] / deg(v), so incoming sums give sigma.
    """
    ne = dst.size
    out = np.zeros(ne)
    if r == 0:
        for e in range(ne):
            v = dst[e]
            out[e] = sigma[v] / (indptr[v + 1] - indptr[v])
        return out
    stamp = np.full(ne, -1, dtype=np.int64)
    frontier = np.empty(ne, dtype=np.int64)
    nxt = np.empty(ne, dtype=np.int64)
    for e in range(ne):
        stamp[e] = e
        frontier[0] = e
        nf = 1
        for _ in range(r - 1):
            nn = 0
            for i in range(nf):
                f = frontier[i]
                u = src[f]
                v = dst[f]
                # predecessors of u->v are y->u with y != v
                for k in range(indptr[u], indptr[u + 1]):
                    if dst[k] == v:
                        continue
                    p = rev[k]
                    if stamp[p] != e:
                        stamp[p] = e
                        nxt[nn] = p
                        nn += 1
            frontier, nxt = nxt, frontier
            nf = nn
            if nf == 0:
                break
        s = 0.0
        for i in range(nf):
            s += sigma[src[frontier[i]]]
        out[e] = s
    return out


UNDERFLOW = 1e-280


@njit(cache=True)
def _edge_logs(eta, affinity, f, out):
    """out[a] = log sum_b c_ab eta[f, b], floored at the underflow guard."""
    q = affinity.shape[0]
    for a in range(q):
        s = 0.0
        for b in range(q):
            s += affinity[a, b] * eta[f, b]
        out[a] = np.log(max(s, UNDERFLOW))


@njit(cache=True)
def _softmax(logs, out):
    top = -np.inf
    for a in range(logs.size):
        if logs[a] > top:
            top = logs[a]
    z = 0.0
    for a in range(logs.size):
        out[a] = np.exp(logs[a] - top)
        z += out[a]
    for a in range(logs.size):
        out[a] /= z


@njit(cache=True)
def bp_sweep(indptr, dst, rev, eta, psi, field, affinity, log_frac, order, damping):
    """One asynchronous pass over the vertices listed in ``order``.

    At each vertex v every outgoing message ``eta[v->w]`` is rebuilt from the
    messages arriving at v from all neighbours except w, then v's marginal
    ``psi[v]`` is refreshed and the external ``field`` moved by v's share
    ``c (psi_new - psi_old) / n``.  Returns the largest message change.
    """
    n = indptr.size - 1
    q = affinity.shape[0]
    maxdeg = 0
    for v in range(n):
        maxdeg = max(maxdeg, indptr[v + 1] - indptr[v])
    inc = np.empty((max(maxdeg, 1), q))
    total = np.empty(q)
    logs = np.empty(q)
    new = np.empty(q)
    worst = 0.0
    for idx in range(order.size):
        v = order[idx]
        lo = indptr[v]
        hi = indptr[v + 1]
        for a in range(q):
            total[a] = log_frac[a] - field[a]
        for k in range(lo, hi):
            _edge_logs(eta, affinity, rev[k], inc[k - lo])
            for a in range(q):
                total[a] += inc[k - lo, a]
        for k in range(lo, hi):
            for a in range(q):
                logs[a] = total[a] - inc[k - lo, a]
            _softmax(logs, new)
            for a in range(q):
                x = new[a]
                if damping > 0.0:
                    x = damping * eta[k, a] + (1.0 - damping) * x
                d = abs(x - eta[k, a])
                if d > worst:
                    worst = d
                eta[k, a] = x
        _softmax(total, new)
        for a in range(q):
            s = 0.0
            for b in range(q):
                s += affinity[a, b] * (new[b] - psi[v, b])
            field[a] += s / n
        for a in range(q):
            psi[v, a] = new[a]
    return worst


@njit(cache=True)
def bp_marginals(indptr, rev, eta, affinity, log_prior):
    n = indptr.size - 1
    q = affinity.shape[0]
    psi = np.empty((n, q))
    logs = np.empty(q)
    lf = np.empty(q)
    for v in range(n):
        for a in range(q):
            logs[a] = log_prior[a]
        for k in range(indptr[v], indptr[v + 1]):
            _edge_logs(eta, affinity, rev[k], lf)
            for a in range(q):
                logs[a] += lf[a]
        _softmax(logs, psi[v])
    return psi
