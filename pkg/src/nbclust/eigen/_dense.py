"""Compiled dense eigenvalue kernels.

Householder reduction to upper Hessenberg form, the Francis implicit
double-shift QR iteration (eigenvalues only), inverse iteration on the
Hessenberg form for eigenvectors, permutation isolation of eigenvalues, and
cyclic Jacobi for symmetric matrices.
"""

import numpy as np
from numba import njit

EPS = np.finfo(np.float64).eps


@njit(cache=True)
def isolate(a):
    """Split off eigenvalues exposed by zero rows/columns.

    Repeatedly removes an index whose row or column is zero off the diagonal
    within the still-active index set; the matrix is then block triangular
    under a permutation, so the removed diagonal entries are eigenvalues.
    Returns (isolated indices, active mask).
    """
    n = a.shape[0]
    active = np.ones(n, dtype=np.bool_)
    rowcnt = np.zeros(n, dtype=np.int64)
    colcnt = np.zeros(n, dtype=np.int64)
    for i in range(n):
        for j in range(n):
            if i != j and a[i, j] != 0.0:
                rowcnt[i] += 1
                colcnt[j] += 1
    stack = np.empty(2 * n + 2, dtype=np.int64)
    top = 0
    for i in range(n):
        if rowcnt[i] == 0 or colcnt[i] == 0:
            stack[top] = i
            top += 1
    iso = np.empty(n, dtype=np.int64)
    niso = 0
    while top > 0:
        top -= 1
        i = stack[top]
        if not active[i]:
            continue
        active[i] = False
        iso[niso] = i
        niso += 1
        for j in range(n):
            if not active[j] or j == i:
                continue
            if a[j, i] != 0.0:
                rowcnt[j] -= 1
                if rowcnt[j] == 0 and top < stack.size:
                    stack[top] = j
                    top += 1
            if a[i, j] != 0.0:
                colcnt[j] -= 1
                if colcnt[j] == 0 and top < stack.size:
                    stack[top] = j
                    top += 1
        if top >= stack.size - 1:
            # compact: keep only active candidates
            k = 0
            for t in range(top):
                if active[stack[t]]:
                    stack[k] = stack[t]
                    k += 1
            top = k
    return iso[:niso], active


@njit(cache=True)
def hessenberg(a, want_q):
    """Householder reduction of a copy of ``a``; returns (H, Q) with
    ``a = Q H Q^T`` (Q is 0x0 unless requested)."""
    n = a.shape[0]
    h = a.copy()
    q = np.eye(n) if want_q else np.empty((0, 0))
    v = np.empty(n)
    tmp = np.empty(n)
    for k in range(n - 2):
        alpha = 0.0
        for i in range(k + 1, n):
            alpha += h[i, k] * h[i, k]
        if alpha == 0.0:
            continue
        alpha = np.sqrt(alpha)
        if h[k + 1, k] > 0:
            alpha = -alpha
        m = n - k - 1
        for i in range(m):
            v[i] = h[k + 1 + i, k]
        v[0] -= alpha
        vn = 0.0
        for i in range(m):
            vn += v[i] * v[i]
        if vn == 0.0:
            continue
        beta = 2.0 / vn
        # left: rows k+1.., columns k..
        for j in range(k, n):
            tmp[j] = 0.0
        for i in range(m):
            vi = v[i]
            for j in range(k, n):
                tmp[j] += vi * h[k + 1 + i, j]
        for i in range(m):
            vi = beta * v[i]
            for j in range(k, n):
                h[k + 1 + i, j] -= vi * tmp[j]
        # right: all rows, columns k+1..
        for i in range(n):
            s = 0.0
            for j in range(m):
                s += h[i, k + 1 + j] * v[j]
            s *= beta
            for j in range(m):
                h[i, k + 1 + j] -= s * v[j]
        if want_q:
            for i in range(n):
                s = 0.0
                for j in range(m):
                    s += q[i, k + 1 + j] * v[j]
                s *= beta
                for j in range(m):
                    q[i, k + 1 + j] -= s * v[j]
        h[k + 1, k] = alpha
        for i in range(k + 2, n):
            h[i, k] = 0.0
    return h, q


@njit(cache=True)
def hqr(h, max_sweeps):
    """Francis double-shift QR on an upper Hessenberg matrix (destroyed).

    Returns (wr, wi, status, nn, l): status 0 on success, otherwise 1 with
    the active block ``l..nn`` that failed to deflate.
    """
    n = h.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = 0.0
    for i in range(n):
        for j in range(max(i - 1, 0), n):
            anorm += abs(h[i, j])
    nn = n - 1
    t = 0.0
    sweeps = 0
    p = q = r = s = w = x = y = z = 0.0
    while nn >= 0:
        its = 0
        while True:
            l = 0
            for ll in range(nn, 0, -1):
                s = abs(h[ll - 1, ll - 1]) + abs(h[ll, ll])
                if s == 0.0:
                    s = anorm
                if abs(h[ll, ll - 1]) <= EPS * s:
                    h[ll, ll - 1] = 0.0
                    l = ll
                    break
            x = h[nn, nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                its = 0
            else:
                y = h[nn - 1, nn - 1]
                w = h[nn, nn - 1] * h[nn - 1, nn]
                if l == nn - 1:
                    p = 0.5 * (y - x)
                    q = p * p + w
                    z = np.sqrt(abs(q))
                    x += t
                    if q >= 0.0:
                        z = p + (z if p >= 0 else -z)
                        wr[nn - 1] = x + z
                        wr[nn] = x + z
                        if z != 0.0:
                            wr[nn] = x - w / z
                        wi[nn - 1] = 0.0
                        wi[nn] = 0.0
                    else:
                        wr[nn - 1] = x + p
                        wr[nn] = x + p
                        wi[nn - 1] = z
                        wi[nn] = -z
                    nn -= 2
                    its = 0
                else:
                    if sweeps >= max_sweeps:
                        return wr, wi, 1, nn, l
                    if its > 0 and its % 10 == 0:
                        # exceptional shift
                        t += x
                        for i in range(nn + 1):
                            h[i, i] -= x
                        s = abs(h[nn, nn - 1]) + abs(h[nn - 1, nn - 2])
                        x = 0.75 * s
                        y = x
                        w = -0.4375 * s * s
                    its += 1
                    sweeps += 1
                    m = nn - 2
                    while m >= l:
                        z = h[m, m]
                        r = x - z
                        s = y - z
                        p = (r * s - w) / h[m + 1, m] + h[m, m + 1]
                        q = h[m + 1, m + 1] - z - r - s
                        r = h[m + 2, m + 1]
                        s = abs(p) + abs(q) + abs(r)
                        p /= s
                        q /= s
                        r /= s
                        if m == l:
                            break
                        u = abs(h[m, m - 1]) * (abs(q) + abs(r))
                        v = abs(p) * (abs(h[m - 1, m - 1]) + abs(z) + abs(h[m + 1, m + 1]))
                        if u <= EPS * v:
                            break
                        m -= 1
                    for i in range(m + 2, nn + 1):
                        h[i, i - 2] = 0.0
                        if i != m + 2:
                            h[i, i - 3] = 0.0
                    for k in range(m, nn):
                        if k != m:
                            p = h[k, k - 1]
                            q = h[k + 1, k - 1]
                            r = 0.0
                            if k != nn - 1:
                                r = h[k + 2, k - 1]
                            x = abs(p) + abs(q) + abs(r)
                            if x != 0.0:
                                p /= x
                                q /= x
                                r /= x
                        s = np.sqrt(p * p + q * q + r * r)
                        if p < 0:
                            s = -s
                        if s != 0.0:
                            if k == m:
                                if l != m:
                                    h[k, k - 1] = -h[k, k - 1]
                            else:
                                h[k, k - 1] = -s * x
                            p += s
                            x = p / s
                            y = q / s
                            z = r / s
                            q /= p
                            r /= p
                            for j in range(k, nn + 1):
                                p = h[k, j] + q * h[k + 1, j]
                                if k != nn - 1:
                                    p += r * h[k + 2, j]
                                    h[k + 2, j] -= p * z
                                h[k + 1, j] -= p * y
                                h[k, j] -= p * x
                            mmin = nn if nn < k + 3 else k + 3
                            for i in range(l, mmin + 1):
                                p = x * h[i, k] + y * h[i, k + 1]
                                if k != nn - 1:
                                    p += z * h[i, k + 2]
                                    h[i, k + 2] -= p * r
                                h[i, k + 1] -= p * q
                                h[i, k] -= p
            if nn < 0 or l >= nn - 1:
                break
    return wr, wi, 0, -1, -1


@njit(cache=True)
def hess_inverse_iteration(h, mu, iters):
    """Eigenvector of Hessenberg ``h`` for (complex) eigenvalue ``mu``.

    LU with adjacent-row pivoting of ``h - mu I``; near-zero pivots are
    replaced by ``eps * ||h||`` so the solve amplifies the eigendirection.
    """
    n = h.shape[0]
    norm = 0.0
    for i in range(n):
        for j in range(n):
            norm = max(norm, abs(h[i, j]))
    if norm == 0.0:
        norm = 1.0
    tiny = EPS * norm
    m = np.empty((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            m[i, j] = h[i, j]
        m[i, i] -= mu
    piv = np.zeros(n, dtype=np.bool_)
    lmul = np.zeros(n, dtype=np.complex128)
    for k in range(n - 1):
        if abs(m[k + 1, k]) > abs(m[k, k]):
            piv[k] = True
            for j in range(k, n):
                tmp = m[k, j]
                m[k, j] = m[k + 1, j]
                m[k + 1, j] = tmp
        if abs(m[k, k]) < tiny:
            m[k, k] = tiny
        f = m[k + 1, k] / m[k, k]
        lmul[k] = f
        for j in range(k + 1, n):
            m[k + 1, j] -= f * m[k, j]
        m[k + 1, k] = 0.0
    if abs(m[n - 1, n - 1]) < tiny:
        m[n - 1, n - 1] = tiny
    x = np.ones(n, dtype=np.complex128) / np.sqrt(n)
    for _ in range(iters):
        for k in range(n - 1):
            if piv[k]:
                tmp = x[k]
                x[k] = x[k + 1]
                x[k + 1] = tmp
            x[k + 1] -= lmul[k] * x[k]
        for i in range(n - 1, -1, -1):
            s = x[i]
            for j in range(i + 1, n):
                s -= m[i, j] * x[j]
            x[i] = s / m[i, i]
        nrm = 0.0
        for i in range(n):
            nrm += x[i].real * x[i].real + x[i].imag * x[i].imag
        nrm = np.sqrt(nrm)
        for i in range(n):
            x[i] /= nrm
    return x


@njit(cache=True)
def jacobi(a, rel_tol, max_sweeps, want_vectors):
    """Cyclic Jacobi rotations; stops when the off-diagonal Frobenius norm
    drops below ``rel_tol`` times the total.  Returns (eigvals, V, sweeps)."""
    n = a.shape[0]
    a = a.copy()
    v = np.eye(n) if want_vectors else np.empty((0, 0))
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += a[i, j] * a[i, j]
    sweep = 0
    while sweep < max_sweeps:
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += a[i, j] * a[i, j]
        if off <= rel_tol * rel_tol * total or off == 0.0:
            break
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                g = 100.0 * abs(apq)
                app = a[p, p]
                aqq = a[q, q]
                if sweep > 4 and abs(app) + g == abs(app) and abs(aqq) + g == abs(aqq):
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                hdiff = aqq - app
                if abs(hdiff) + g == abs(hdiff):
                    t = apq / hdiff
                else:
                    theta = 0.5 * hdiff / apq
                    t = 1.0 / (abs(theta) + np.sqrt(1.0 + theta * theta))
                    if theta < 0:
                        t = -t
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                if want_vectors:
                    for k in range(n):
                        vkp = v[k, p]
                        vkq = v[k, q]
                        v[k, p] = c * vkp - s * vkq
                        v[k, q] = s * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i]
    return w, v, sweep
