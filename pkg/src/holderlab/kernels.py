"""Hot loops, each with a numba-compiled and a pure-numpy implementation.

The public wrappers dispatch on ``_accel.USE_NUMBA``; both variants are importable
directly so tests and the benchmark can compare them.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import USE_NUMBA, njit

BK_ALPHA = (1.0 + math.sqrt(17.0)) / 8.0


# ---------------------------------------------------------------------------
# Windowed Bunch-Kaufman LDL^T inertia
#
# The matrix (CSR, both triangles, already permuted to bandwidth b) is streamed
# through a circular dense window of W = 2b+2 rows. Symmetric interchanges are
# only made with rows whose entries are all inside the window, which keeps the
# elimination exact while bounding memory by W^2.
# ---------------------------------------------------------------------------


@njit
def _classify(val, tol):
    if abs(val) <= tol:
        return 0
    return -1 if val < 0 else 1


@njit
def _swap_slots(F, ext, p, q, W):
    sp, sq = p % W, q % W
    for j in range(W):
        t = F[sp, j]
        F[sp, j] = F[sq, j]
        F[sq, j] = t
    for i in range(W):
        t = F[i, sp]
        F[i, sp] = F[i, sq]
        F[i, sq] = t
    t2 = ext[p]
    ext[p] = ext[q]
    ext[q] = t2


@njit
def _clear_slot(F, s, W):
    for j in range(W):
        F[s, j] = 0.0
        F[j, s] = 0.0


@njit
def _load_row(F, indptr, indices, data, row, lo, W):
    sr = row % W
    for q in range(indptr[row], indptr[row + 1]):
        j = indices[q]
        if lo <= j <= row:
            F[sr, j % W] = data[q]
            F[j % W, sr] = data[q]


@njit
def _bk_inertia_numba(indptr, indices, data, n, W, tol):
    F = np.zeros((W, W))
    ext = np.empty(n, np.int64)
    for i in range(n):
        e = i
        for q in range(indptr[i], indptr[i + 1]):
            if indices[q] > e:
                e = indices[q]
        ext[i] = e
    loaded = min(n, W)
    for i in range(loaded):
        _load_row(F, indptr, indices, data, i, 0, W)
    stats = np.zeros(7, np.int64)  # neg, zero, pos, degenerate, constrained, two_by_two, max_front
    sl = np.empty(W, np.int64)
    ss = np.empty(W, np.int64)
    lu = np.empty(W)
    lv = np.empty(W)
    k = 0
    while k < n:
        end = loaded - 1
        sk = k % W
        akk = abs(F[sk, sk])
        colmax = 0.0
        imax = -1
        colmax_a = 0.0
        imax_a = -1
        for i in range(k + 1, ext[k] + 1):
            v = abs(F[i % W, sk])
            if v > colmax:
                colmax = v
                imax = i
            if v > colmax_a and ext[i] <= end:
                colmax_a = v
                imax_a = i
        step = 1
        if akk <= tol and colmax <= tol:
            stats[1] += 1
            if colmax > 0.0:
                stats[3] = 1
            _clear_slot(F, sk, W)
            k += 1
            while loaded < n and loaded < k + W:
                _load_row(F, indptr, indices, data, loaded, k, W)
                loaded += 1
            continue
        if akk < BK_ALPHA * colmax:
            if imax_a < 0:
                stats[4] += 1
            else:
                if imax_a != imax:
                    stats[4] += 1
                r = imax_a
                sr = r % W
                rowmax = 0.0
                for j in range(k, ext[r] + 1):
                    if j != r:
                        v = abs(F[j % W, sr])
                        if v > rowmax:
                            rowmax = v
                if akk * rowmax >= BK_ALPHA * colmax_a * colmax_a:
                    pass
                elif abs(F[sr, sr]) >= BK_ALPHA * rowmax:
                    _swap_slots(F, ext, k, r, W)
                else:
                    if r != k + 1:
                        _swap_slots(F, ext, k + 1, r, W)
                    step = 2
        if step == 1:
            d = F[sk, sk]
            c = _classify(d, tol)
            if c < 0:
                stats[0] += 1
            elif c > 0:
                stats[2] += 1
            else:
                stats[1] += 1
            cnt = 0
            mx = k
            for i in range(k + 1, ext[k] + 1):
                v = F[i % W, sk]
                if v != 0.0:
                    sl[cnt] = i
                    lu[cnt] = v
                    cnt += 1
                    mx = i
            if c != 0:
                for a in range(cnt):
                    ss[a] = sl[a] % W
                for a in range(cnt):
                    sa = ss[a]
                    fa = lu[a] / d
                    for b in range(cnt):
                        F[sa, ss[b]] -= fa * lu[b]
                for a in range(cnt):
                    if ext[sl[a]] < mx:
                        ext[sl[a]] = mx
            elif cnt > 0:
                stats[3] = 1
            if cnt > stats[6]:
                stats[6] = cnt
            _clear_slot(F, sk, W)
        else:
            s0, s1 = sk, (k + 1) % W
            a11, a21, a22 = F[s0, s0], F[s1, s0], F[s1, s1]
            tr = 0.5 * (a11 + a22)
            disc = math.sqrt(0.25 * (a11 - a22) ** 2 + a21 * a21)
            for ev in (tr - disc, tr + disc):
                c = _classify(ev, tol)
                if c < 0:
                    stats[0] += 1
                elif c > 0:
                    stats[2] += 1
                else:
                    stats[1] += 1
            stats[5] += 1
            det = a11 * a22 - a21 * a21
            top = max(ext[k], ext[k + 1])
            cnt = 0
            mx = k + 1
            for i in range(k + 2, top + 1):
                u = F[i % W, s0]
                v = F[i % W, s1]
                if u != 0.0 or v != 0.0:
                    sl[cnt] = i
                    lu[cnt] = u
                    lv[cnt] = v
                    cnt += 1
                    mx = i
            for a in range(cnt):
                ss[a] = sl[a] % W
            for a in range(cnt):
                sa = ss[a]
                w0 = (a22 * lu[a] - a21 * lv[a]) / det
                w1 = (-a21 * lu[a] + a11 * lv[a]) / det
                for b in range(cnt):
                    F[sa, ss[b]] -= w0 * lu[b] + w1 * lv[b]
            for a in range(cnt):
                if ext[sl[a]] < mx:
                    ext[sl[a]] = mx
            if cnt > stats[6]:
                stats[6] = cnt
            _clear_slot(F, s0, W)
            _clear_slot(F, s1, W)
        k += step
        while loaded < n and loaded < k + W:
            _load_row(F, indptr, indices, data, loaded, k, W)
            loaded += 1
    return stats


def _bk_inertia_numpy(indptr, indices, data, n, W, tol):
    """Same algorithm with vectorised window updates."""
    F = np.zeros((W, W))
    row_of = np.repeat(np.arange(n), np.diff(indptr))
    ext = np.maximum(np.arange(n), np.zeros(n, dtype=np.int64))
    np.maximum.at(ext, row_of, indices)
    loaded = min(n, W)

    def load(row, lo):
        cols = indices[indptr[row]:indptr[row + 1]]
        vals = data[indptr[row]:indptr[row + 1]]
        sel = (cols >= lo) & (cols <= row)
        F[row % W, cols[sel] % W] = vals[sel]
        F[cols[sel] % W, row % W] = vals[sel]

    def swap(p, q):
        sp, sq = p % W, q % W
        F[[sp, sq], :] = F[[sq, sp], :]
        F[:, [sp, sq]] = F[:, [sq, sp]]
        ext[p], ext[q] = ext[q], ext[p]

    def clear(s):
        F[s, :] = 0.0
        F[:, s] = 0.0

    def classify(val):
        return 0 if abs(val) <= tol else (-1 if val < 0 else 1)

    for i in range(loaded):
        load(i, 0)
    stats = np.zeros(7, dtype=np.int64)
    k = 0
    while k < n:
        end = loaded - 1
        sk = k % W
        akk = abs(F[sk, sk])
        rows = np.arange(k + 1, ext[k] + 1)
        col = np.abs(F[rows % W, sk])
        colmax = col.max() if rows.size else 0.0
        imax = rows[np.argmax(col)] if rows.size else -1
        allowed = ext[rows] <= end
        if allowed.any() and col[allowed].max() > 0:
            colmax_a = col[allowed].max()
            imax_a = rows[allowed][np.argmax(col[allowed])]
        else:
            colmax_a, imax_a = 0.0, -1
        step = 1
        if akk <= tol and colmax <= tol:
            stats[1] += 1
            if colmax > 0:
                stats[3] = 1
            clear(sk)
            k += 1
            while loaded < n and loaded < k + W:
                load(loaded, k)
                loaded += 1
            continue
        if akk < BK_ALPHA * colmax:
            if imax_a < 0:
                stats[4] += 1
            else:
                if imax_a != imax:
                    stats[4] += 1
                r = imax_a
                sr = r % W
                jr = np.arange(k, ext[r] + 1)
                jr = jr[jr != r]
                rowmax = np.abs(F[jr % W, sr]).max() if jr.size else 0.0
                if akk * rowmax >= BK_ALPHA * colmax_a * colmax_a:
                    pass
                elif abs(F[sr, sr]) >= BK_ALPHA * rowmax:
                    swap(k, r)
                else:
                    if r != k + 1:
                        swap(k + 1, r)
                    step = 2
        if step == 1:
            d = F[sk, sk]
            c = classify(d)
            stats[{-1: 0, 0: 1, 1: 2}[c]] += 1
            rows = np.arange(k + 1, ext[k] + 1)
            u = F[rows % W, sk]
            nz = u != 0
            rows, u = rows[nz], u[nz]
            if rows.size:
                if c != 0:
                    s = rows % W
                    F[np.ix_(s, s)] -= np.outer(u / d, u)
                    ext[rows] = np.maximum(ext[rows], rows.max())
                else:
                    stats[3] = 1
            stats[6] = max(stats[6], rows.size)
            clear(sk)
        else:
            s0, s1 = sk, (k + 1) % W
            D = np.array([[F[s0, s0], F[s0, s1]], [F[s1, s0], F[s1, s1]]])
            for ev in np.linalg.eigvalsh(D):
                stats[{-1: 0, 0: 1, 1: 2}[classify(ev)]] += 1
            stats[5] += 1
            rows = np.arange(k + 2, max(ext[k], ext[k + 1]) + 1)
            U = np.stack([F[rows % W, s0], F[rows % W, s1]], axis=1)
            nz = np.any(U != 0, axis=1)
            rows, U = rows[nz], U[nz]
            if rows.size:
                s = rows % W
                a11, a21, a22 = D[0, 0], D[1, 0], D[1, 1]
                det = a11 * a22 - a21 * a21
                Dinv = np.array([[a22, -a21], [-a21, a11]]) / det
                F[np.ix_(s, s)] -= U @ Dinv @ U.T
                ext[rows] = np.maximum(ext[rows], rows.max())
            stats[6] = max(stats[6], rows.size)
            clear(s0)
            clear(s1)
        k += step
        while loaded < n and loaded < k + W:
            load(loaded, k)
            loaded += 1
    return stats


def bk_inertia_stats(indptr, indices, data, n, W, tol, use_numba=None):
    use = USE_NUMBA if use_numba is None else use_numba
    args = (np.ascontiguousarray(indptr, dtype=np.int64), np.ascontiguousarray(indices, dtype=np.int64),
            np.ascontiguousarray(data, dtype=np.float64), int(n), int(W), float(tol))
    if use:
        return _bk_inertia_numba(*args)
    return _bk_inertia_numpy(*args)


# ---------------------------------------------------------------------------
# Greedy covering over a probe grid
#
# Probe points are sorted lexicographically (x, then y) and grouped in columns of
# equal x. A segment tree keeps the largest delta among uncovered points; ties go
# to the smallest index, i.e. the lexicographically first centre.
# ---------------------------------------------------------------------------

_NEG = -np.inf
_REL_EDGE = 1e-9


@njit
def _tree_build(vals):
    size = 1
    while size < vals.size:
        size *= 2
    tv = np.full(2 * size, -np.inf)
    ti = np.full(2 * size, -1, np.int64)
    for i in range(vals.size):
        tv[size + i] = vals[i]
        ti[size + i] = i
    for p in range(size - 1, 0, -1):
        l, r = 2 * p, 2 * p + 1
        if tv[r] > tv[l]:
            tv[p], ti[p] = tv[r], ti[r]
        else:
            tv[p], ti[p] = tv[l], ti[l]
    return tv, ti, size


@njit
def _tree_kill(tv, ti, size, i):
    p = size + i
    tv[p] = -np.inf
    p //= 2
    while p >= 1:
        l, r = 2 * p, 2 * p + 1
        if tv[r] > tv[l]:
            tv[p], ti[p] = tv[r], ti[r]
        else:
            tv[p], ti[p] = tv[l], ti[l]
        p //= 2


@njit
def _col_range(col_x, lo, hi):
    return np.searchsorted(col_x, lo, side="left"), np.searchsorted(col_x, hi, side="right")


@njit
def _greedy_numba(col_x, col_start, px, py, delta, half_w, half_h, max_iter):
    tv, ti, size = _tree_build(delta)
    alive = np.ones(delta.size, np.bool_)
    out = np.empty(min(max_iter, delta.size), np.int64)
    n = 0
    while tv[1] > -np.inf:
        if n >= out.size:
            return out[:n], False
        c = ti[1]
        out[n] = c
        n += 1
        ex = _REL_EDGE * max(half_w[c], 1e-300)
        ey = _REL_EDGE * max(half_h[c], 1e-300)
        c0, c1 = _col_range(col_x, px[c] - half_w[c] - ex, px[c] + half_w[c] + ex)
        for col in range(c0, c1):
            s, e = col_start[col], col_start[col + 1]
            j0 = s + np.searchsorted(py[s:e], py[c] - half_h[c] - ey, side="left")
            j1 = s + np.searchsorted(py[s:e], py[c] + half_h[c] + ey, side="right")
            for j in range(j0, j1):
                if alive[j]:
                    alive[j] = False
                    _tree_kill(tv, ti, size, j)
    return out[:n], True


def _greedy_numpy(col_x, col_start, px, py, delta, half_w, half_h, max_iter):
    import heapq
    # (−delta, index) heap gives the same order as the segment tree
    heap = [(-float(d), int(i)) for i, d in enumerate(delta) if d > -np.inf]
    heapq.heapify(heap)
    alive = np.ones(delta.size, dtype=bool)
    out = []
    while heap:
        _, c = heapq.heappop(heap)
        if not alive[c]:
            continue
        if len(out) >= max_iter:
            return np.array(out, dtype=np.int64), False
        out.append(c)
        ex = _REL_EDGE * max(half_w[c], 1e-300)
        ey = _REL_EDGE * max(half_h[c], 1e-300)
        c0 = np.searchsorted(col_x, px[c] - half_w[c] - ex, side="left")
        c1 = np.searchsorted(col_x, px[c] + half_w[c] + ex, side="right")
        for col in range(c0, c1):
            s, e = col_start[col], col_start[col + 1]
            j0 = s + np.searchsorted(py[s:e], py[c] - half_h[c] - ey, side="left")
            j1 = s + np.searchsorted(py[s:e], py[c] + half_h[c] + ey, side="right")
            alive[j0:j1] = False
    return np.array(out, dtype=np.int64), True


def greedy_order(col_x, col_start, px, py, delta, half_w, half_h, max_iter, use_numba=None):
    """Emission order of the greedy cover (indices into the probe arrays)."""
    use = USE_NUMBA if use_numba is None else use_numba
    args = (np.ascontiguousarray(col_x, dtype=np.float64), np.ascontiguousarray(col_start, dtype=np.int64),
            np.ascontiguousarray(px, dtype=np.float64), np.ascontiguousarray(py, dtype=np.float64),
            np.ascontiguousarray(delta, dtype=np.float64), np.ascontiguousarray(half_w, dtype=np.float64),
            np.ascontiguousarray(half_h, dtype=np.float64), int(max_iter))
    if use:
        order, done = _greedy_numba(*args)
    else:
        order, done = _greedy_numpy(*args)
    return np.asarray(order), bool(done)


@njit
def _mark_numba(col_x, col_start, py, rects, covered):
    for r in range(rects.shape[0]):
        x0, x1, y0, y1 = rects[r, 0], rects[r, 1], rects[r, 2], rects[r, 3]
        ex = _REL_EDGE * (x1 - x0)
        ey = _REL_EDGE * (y1 - y0)
        c0, c1 = _col_range(col_x, x0 - ex, x1 + ex)
        for col in range(c0, c1):
            s, e = col_start[col], col_start[col + 1]
            j0 = s + np.searchsorted(py[s:e], y0 - ey, side="left")
            j1 = s + np.searchsorted(py[s:e], y1 + ey, side="right")
            for j in range(j0, j1):
                covered[j] = True


def _mark_numpy(col_x, col_start, py, rects, covered):
    for x0, x1, y0, y1 in rects:
        ex, ey = _REL_EDGE * (x1 - x0), _REL_EDGE * (y1 - y0)
        c0 = np.searchsorted(col_x, x0 - ex, side="left")
        c1 = np.searchsorted(col_x, x1 + ex, side="right")
        for col in range(c0, c1):
            s, e = col_start[col], col_start[col + 1]
            j0 = s + np.searchsorted(py[s:e], y0 - ey, side="left")
            j1 = s + np.searchsorted(py[s:e], y1 + ey, side="right")
            covered[j0:j1] = True


def mark_covered(col_x, col_start, py, rects, use_numba=None) -> np.ndarray:
    """Boolean mask of probe points inside any closed rectangle (x0, x1, y0, y1)."""
    use = USE_NUMBA if use_numba is None else use_numba
    covered = np.zeros(len(py), dtype=np.bool_)
    rects = np.ascontiguousarray(np.asarray(rects, dtype=np.float64).reshape(-1, 4))
    args = (np.ascontiguousarray(col_x, dtype=np.float64), np.ascontiguousarray(col_start, dtype=np.int64),
            np.ascontiguousarray(py, dtype=np.float64), rects, covered)
    (_mark_numba if use else _mark_numpy)(*args)
    return covered
