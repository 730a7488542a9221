"""Compiled tree growth and traversal kernels.

A tree is grown over ``samples`` (row indices, repeats allowed for
bootstrap draws) with a parallel weight array. Each column's sample slots
are sorted once per tree; a split stable-partitions every column's sorted
slot list, so each node sees its rows in sorted order without re-sorting.
``min_leaf`` counts rows, not weight.
"""
import numpy as np
from numba import njit

TOL = 1e-12


@njit(cache=True)
def _gini(counts, total):
    if total <= 0.0:
        return 0.0
    s = 0.0
    for c in range(counts.shape[0]):
        p = counts[c] / total
        s += p * p
    return 1.0 - s


@njit(cache=True)
def _sse(sw, s, ss):
    if sw <= 0.0:
        return 0.0
    v = ss - s * s / sw
    return v if v > 0.0 else 0.0


@njit(cache=True)
def _scan_class(X, y, w, samples, srt, f, start, end, n_classes, total, W, min_leaf, random_mode, uf, left, right):
    """Best cut of column ``f`` for a Gini node whose slots ``srt[start:end]``
    are sorted by that column; returns (impurity, threshold), impurity inf
    when no admissible cut exists."""
    n = end - start
    best_imp = np.inf
    best_t = 0.0
    lo = X[samples[srt[start]], f]
    hi = X[samples[srt[end - 1]], f]
    left[:] = 0.0
    if random_mode:
        t = lo + uf * (hi - lo)
        nl = 0
        for p in range(start, end):
            slot = srt[p]
            if X[samples[slot], f] > t:
                break
            left[y[samples[slot]]] += w[slot]
            nl += 1
        if nl < min_leaf or n - nl < min_leaf or nl == 0 or nl == n:
            return best_imp, best_t
        WL = left.sum()
        for c in range(n_classes):
            right[c] = total[c] - left[c]
        return (WL * _gini(left, WL) + (W - WL) * _gini(right, W - WL)) / W, t
    # running sums of squared class weights give each child's weighted Gini
    # as W_child - sq_child / W_child in O(1) per step
    sq_l = 0.0
    sq_r = 0.0
    for c in range(n_classes):
        right[c] = total[c]
        sq_r += total[c] * total[c]
    WL = 0.0
    for p in range(start, end - 1):
        slot = srt[p]
        c = y[samples[slot]]
        wi = w[slot]
        sq_l += (2.0 * left[c] + wi) * wi
        sq_r -= (2.0 * right[c] - wi) * wi
        left[c] += wi
        right[c] -= wi
        WL += wi
        nl = p - start + 1
        v0 = X[samples[slot], f]
        v1 = X[samples[srt[p + 1]], f]
        if v1 - v0 <= TOL or nl < min_leaf:
            continue
        if n - nl < min_leaf:
            break
        WR = W - WL
        imp = 0.0
        if WL > 0.0:
            imp += WL - sq_l / WL
        if WR > 0.0:
            imp += WR - sq_r / WR
        imp /= W
        if imp < best_imp - TOL:
            best_imp = imp
            best_t = 0.5 * (v0 + v1)
    return best_imp, best_t


@njit(cache=True)
def _scan_reg(X, y, w, samples, srt, f, start, end, W, S1, S2, min_leaf, random_mode, uf):
    """Variance analogue of ``_scan_class``."""
    n = end - start
    best_imp = np.inf
    best_t = 0.0
    lo = X[samples[srt[start]], f]
    hi = X[samples[srt[end - 1]], f]
    wl = 0.0
    sl = 0.0
    ssl = 0.0
    if random_mode:
        t = lo + uf * (hi - lo)
        nl = 0
        for p in range(start, end):
            slot = srt[p]
            if X[samples[slot], f] > t:
                break
            yi = y[samples[slot]]
            wl += w[slot]
            sl += w[slot] * yi
            ssl += w[slot] * yi * yi
            nl += 1
        if nl < min_leaf or n - nl < min_leaf or nl == 0 or nl == n:
            return best_imp, best_t
        return (_sse(wl, sl, ssl) + _sse(W - wl, S1 - sl, S2 - ssl)) / W, t
    for p in range(start, end - 1):
        slot = srt[p]
        yi = y[samples[slot]]
        wl += w[slot]
        sl += w[slot] * yi
        ssl += w[slot] * yi * yi
        nl = p - start + 1
        v0 = X[samples[slot], f]
        v1 = X[samples[srt[p + 1]], f]
        if v1 - v0 <= TOL or nl < min_leaf:
            continue
        if n - nl < min_leaf:
            break
        imp = (_sse(wl, sl, ssl) + _sse(W - wl, S1 - sl, S2 - ssl)) / W
        if imp < best_imp - TOL:
            best_imp = imp
            best_t = 0.5 * (v0 + v1)
    return best_imp, best_t


@njit(cache=True)
def apply_tree(X, feature, threshold, left, right):
    """Leaf index reached by every row of X."""
    out = np.empty(X.shape[0], dtype=np.int64)
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


@njit(cache=True)
def grow(X, G, y_cls, y_reg, samples, w, n_classes, max_depth, min_split, min_leaf, n_try, random_mode, seed):
    """Grow a whole tree depth-first.

    ``G[f]`` lists all rows of X sorted by column f (shared by every tree
    of an ensemble). ``n_classes > 0`` grows a Gini tree on ``y_cls``;
    otherwise a variance tree on ``y_reg``. ``max_depth < 0`` means unlimited. Columns are visited
    in a random order (when ``n_try < m``) and the search stops after
    ``n_try`` non-constant columns; the first strictly better cut wins.
    ``random_mode`` draws one threshold per column uniformly between the
    node's min and max. Randomness comes from numba's generator seeded with
    ``seed``. Returns node arrays and the per-column impurity decrease.
    """
    np.random.seed(seed)
    m = X.shape[1]
    N = samples.shape[0]
    cap = 2 * N + 1
    width = n_classes if n_classes > 0 else 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros((cap, width))
    importances = np.zeros(m)

    # slots of every row, then each column's slots in sorted row order
    n_rows = X.shape[0]
    first = np.zeros(n_rows + 1, dtype=np.int64)
    for i in range(N):
        first[samples[i] + 1] += 1
    for r in range(n_rows):
        first[r + 1] += first[r]
    fill = first[:-1].copy()
    by_row = np.empty(N, dtype=np.int64)
    for i in range(N):
        by_row[fill[samples[i]]] = i
        fill[samples[i]] += 1
    S = np.empty((m, N), dtype=np.int64)
    for f in range(m):
        p = 0
        for q in range(n_rows):
            r = G[f, q]
            for k in range(first[r], first[r + 1]):
                S[f, p] = by_row[k]
                p += 1
    goes_left = np.zeros(N, dtype=np.bool_)
    tmp = np.empty(N, dtype=np.int64)
    counts = np.zeros(max(n_classes, 1))
    lbuf = np.zeros(max(n_classes, 1))
    rbuf = np.zeros(max(n_classes, 1))
    order = np.arange(m)
    u = np.zeros(m)

    # stack of (start, end, depth, parent, is_right)
    stack = np.empty((cap, 5), dtype=np.int64)
    stack[0, 0] = 0
    stack[0, 1] = N
    stack[0, 2] = 0
    stack[0, 3] = -1
    stack[0, 4] = 0
    top = 1
    n_nodes = 0
    while top > 0:
        top -= 1
        start = stack[top, 0]
        end = stack[top, 1]
        depth = stack[top, 2]
        parent = stack[top, 3]
        node = n_nodes
        n_nodes += 1
        if parent >= 0:
            if stack[top, 4] == 1:
                right[parent] = node
            else:
                left[parent] = node

        W = 0.0
        S1 = 0.0
        S2 = 0.0
        if n_classes > 0:
            counts[:] = 0.0
            for p in range(start, end):
                slot = S[0, p]
                counts[y_cls[samples[slot]]] += w[slot]
            W = counts.sum()
            imp = _gini(counts, W)
            for c in range(n_classes):
                value[node, c] = counts[c] / W
        else:
            for p in range(start, end):
                slot = S[0, p]
                v = y_reg[samples[slot]]
                W += w[slot]
                S1 += w[slot] * v
                S2 += w[slot] * v * v
            imp = _sse(W, S1, S2) / W
            value[node, 0] = S1 / W
        n_node = end - start
        if (max_depth >= 0 and depth >= max_depth) or n_node < min_split or n_node < 2 * min_leaf or imp <= TOL:
            continue

        if n_try < m:
            order = np.random.permutation(m)
        if random_mode:
            for j in range(m):
                u[j] = np.random.random()
        best_f = -1
        best_t = 0.0
        best_imp = np.inf
        visited = 0
        for oi in range(m):
            if visited >= n_try:
                break
            f = order[oi]
            srt = S[f]
            if X[samples[srt[end - 1]], f] - X[samples[srt[start]], f] <= TOL:
                continue
            visited += 1
            if n_classes > 0:
                fi, ft = _scan_class(X, y_cls, w, samples, srt, f, start, end, n_classes, counts, W,
                                     min_leaf, random_mode, u[f], lbuf, rbuf)
            else:
                fi, ft = _scan_reg(X, y_reg, w, samples, srt, f, start, end, W, S1, S2, min_leaf, random_mode, u[f])
            if fi < best_imp - TOL:
                best_imp = fi
                best_f = f
                best_t = ft
        # zero-gain cuts are still taken (XOR-like targets need them)
        if best_f < 0:
            continue
        feature[node] = best_f
        threshold[node] = best_t
        importances[best_f] += W * max(imp - best_imp, 0.0)

        nl = 0
        for p in range(start, end):
            slot = S[0, p]
            gl = X[samples[slot], best_f] <= best_t
            goes_left[slot] = gl
            if gl:
                nl += 1
        for f in range(m):
            a = start
            b = start + nl
            for p in range(start, end):
                slot = S[f, p]
                if goes_left[slot]:
                    tmp[a] = slot
                    a += 1
                else:
                    tmp[b] = slot
                    b += 1
            for p in range(start, end):
                S[f, p] = tmp[p]
        mid = start + nl
        # right pushed first so the left subtree is numbered first
        stack[top, 0] = mid
        stack[top, 1] = end
        stack[top, 2] = depth + 1
        stack[top, 3] = node
        stack[top, 4] = 1
        top += 1
        stack[top, 0] = start
        stack[top, 1] = mid
        stack[top, 2] = depth + 1
        stack[top, 3] = node
        stack[top, 4] = 0
        top += 1
    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        value[:n_nodes].copy(),
        importances,
    )
