"""Compiled inner loops.  All arrays are int64 / float64 and indexed in lex order."""
import numpy as np
from numba import njit


@njit(cache=True)
def parents(deg):
    n1 = deg.size
    par = np.empty(n1, np.int64)
    par[0] = -1
    stack = np.empty(n1, np.int64)
    left = np.empty(n1, np.int64)
    top = 0
    stack[0] = 0
    left[0] = deg[0]
    for i in range(1, n1):
        while left[top] == 0:
            top -= 1
        par[i] = stack[top]
        left[top] -= 1
        top += 1
        stack[top] = i
        left[top] = deg[i]
    return par


@njit(cache=True)
def depths(par):
    d = np.zeros(par.size, np.int64)
    for i in range(1, par.size):
        d[i] = d[par[i]] + 1
    return d


@njit(cache=True)
def subtree_sizes(par):
    size = np.ones(par.size, np.int64)
    for i in range(par.size - 1, 0, -1):
        size[par[i]] += size[i]
    return size


@njit(cache=True)
def child_rank(par):
    """Position of each vertex among its siblings (0 = first child)."""
    n1 = par.size
    rank = np.zeros(n1, np.int64)
    seen = np.zeros(n1, np.int64)
    for i in range(1, n1):
        p = par[i]
        rank[i] = seen[p]
        seen[p] += 1
    return rank


@njit(cache=True)
def contour_vertices(par):
    """Lex indices of the 2n+1 vertices visited by the contour walk."""
    n1 = par.size
    out = np.empty(2 * n1 - 1, np.int64)
    out[0] = 0
    k = 1
    cur = 0
    for v in range(1, n1):
        p = par[v]
        while cur != p:
            cur = par[cur]
            out[k] = cur
            k += 1
        out[k] = v
        k += 1
        cur = v
    while cur != 0:
        cur = par[cur]
        out[k] = cur
        k += 1
    return out


@njit(cache=True)
def height_via_records(W):
    n1 = W.size - 1
    H = np.zeros(n1, np.int64)
    for j in range(n1):
        run_min = W[j]
        c = 0
        for k in range(j - 1, -1, -1):
            # run_min = min W[k+1..j]
            if W[k] <= run_min:
                c += 1
            if W[k] < run_min:
                run_min = W[k]
        H[j] = c
    return H


@njit(cache=True)
def mirror_degrees(deg, par):
    n1 = deg.size
    # children lists in original order via CSR
    start = np.zeros(n1 + 1, np.int64)
    for i in range(n1):
        start[i + 1] = start[i] + deg[i]
    kids = np.empty(max(n1 - 1, 1), np.int64)
    fill = start[:-1].copy()
    for i in range(1, n1):
        p = par[i]
        kids[fill[p]] = i
        fill[p] += 1
    out = np.empty(n1, np.int64)
    stack = np.empty(n1, np.int64)
    top = 0
    stack[0] = 0
    k = 0
    while top >= 0:
        v = stack[top]
        top -= 1
        out[k] = deg[v]
        k += 1
        # pushing in original order pops the last child first
        for c in range(start[v], start[v + 1]):
            top += 1
            stack[top] = kids[c]
    return out


@njit(cache=True)
def positions(par, Y):
    S = np.empty(Y.size, np.float64)
    S[0] = 0.0
    for i in range(1, Y.size):
        S[i] = S[par[i]] + Y[i]
    return S


@njit(cache=True)
def has_stacked_big(par, big):
    """True if some vertex flagged big has a flagged strict ancestor."""
    n1 = par.size
    above = np.zeros(n1, np.bool_)  # some strict ancestor (non-root) is big
    for i in range(1, n1):
        p = par[i]
        above[i] = above[p] or (p != 0 and big[p])
        if big[i] and above[i]:
            return True
    return False


@njit(cache=True)
def inversion_count(par, size, labels):
    """Ancestor/descendant pairs (u above v) with labels[u] > labels[v].

    Fenwick tree over labels of the current ancestor stack; because lex order
    is a preorder, the ancestors of v are exactly the vertices u < v whose
    subtree interval [u, u+size[u]) still contains v.
    """
    n1 = par.size
    tree = np.zeros(n1 + 1, np.int64)
    stack = np.empty(n1, np.int64)
    top = -1
    total = 0
    active = 0
    for v in range(n1):
        while top >= 0 and stack[top] + size[stack[top]] <= v:
            u = stack[top]
            top -= 1
            i = labels[u] + 1
            while i <= n1:
                tree[i] -= 1
                i += i & -i
            active -= 1
        # count active labels <= labels[v]
        i = labels[v] + 1
        le = 0
        while i > 0:
            le += tree[i]
            i -= i & -i
        total += active - le
        i = labels[v] + 1
        while i <= n1:
            tree[i] += 1
            i += i & -i
        active += 1
        top += 1
        stack[top] = v
    return total


@njit(cache=True)
def inversion_count_naive(par, labels):
    total = 0
    for v in range(1, par.size):
        u = par[v]
        while u >= 0:
            if labels[u] > labels[v]:
                total += 1
            u = par[u]
    return total


@njit(cache=True)
def sparse_osc(H, lengths):
    """max over windows of each length w of (max - min) of H on w+1 points."""
    n1 = H.size
    out = np.zeros(lengths.size, np.float64)
    lo = H.astype(np.float64).copy()
    hi = lo.copy()
    span = 1  # lo[i] = min H[i : i + span]
    for q in range(lengths.size):
        w = lengths[q] + 1
        while 2 * span <= w:
            for i in range(n1 - 2 * span + 1):
                a = lo[i + span]
                if a < lo[i]:
                    lo[i] = a
                b = hi[i + span]
                if b > hi[i]:
                    hi[i] = b
            span *= 2
        best = 0.0
        off = w - span
        for i in range(n1 - w + 1):
            mn = min(lo[i], lo[i + off])
            mx = max(hi[i], hi[i + off])
            if mx - mn > best:
                best = mx - mn
        out[q] = best
    return out


@njit(cache=True)
def first_ladder_times(steps, horizon, out):
    """Fill ``out`` with tau_1 = inf{k >= 1 : S_k >= 0}, censored at ``horizon``
    (value horizon + 1), consuming ``steps`` as one long stream.

    Returns (filled, consumed).  Each walk starts fresh; if the stream runs out
    mid-walk, that walk is abandoned and ``consumed`` marks its start.
    """
    k = 0
    pos = 0
    m = steps.size
    while k < out.size:
        start = pos
        s = 0
        t = 0
        done = False
        while pos < m:
            s += steps[pos]
            pos += 1
            t += 1
            if s >= 0:
                out[k] = t
                done = True
                break
            if t >= horizon:
                out[k] = horizon + 1
                done = True
                break
        if not done:
            return k, start
        k += 1
    return k, pos


@njit(cache=True)
def max_first_child_fraction(par, rank, window):
    """Max over vertices v at depth >= window of the first-child fraction on
    the last ``window`` edges of the root-to-v path."""
    n1 = par.size
    best = 0.0
    if window <= 0:
        return best
    d = np.zeros(n1, np.int64)
    cnt = np.zeros(n1, np.int64)  # first children among the last `window` vertices on path
    path = np.empty(n1 + 1, np.int64)
    first = np.zeros(n1, np.int64)
    for i in range(1, n1):
        first[i] = 1 if rank[i] == 0 else 0
    top = 0
    path[0] = 0
    for v in range(1, n1):
        p = par[v]
        d[v] = d[p] + 1
        while path[top] != p:
            top -= 1
        top += 1
        path[top] = v
        c = cnt[p] + first[v]
        if d[v] > window:
            c -= first[path[top - window]]
        cnt[v] = c
        if d[v] >= window:
            f = c / window
            if f > best:
                best = f
    return best
