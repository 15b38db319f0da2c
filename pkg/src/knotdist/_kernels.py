"""
Compiled kernels for the pairwise computations on polygons.

Conventions shared by every kernel: ``V`` vertices ``(n, 3)``, ``U`` unit
edge directions, ``ell`` edge lengths, ``S`` cumulative arclength at the
vertices and ``L`` the total length. Edge ``i`` runs from ``V[i]`` to
``V[(i + 1) % n]``; a point on it is addressed by its offset ``a`` in
``[0, ell[i]]``.
"""

import math

import numpy as np
from numba import njit, prange

INF = np.inf

# status bits returned by the distortion tasks
NONCONVERGED = 1
SELF_INTERSECTION = 2


@njit(cache=True)
def _clamp01(x):
    if x < 0.0:
        return 0.0
    if x > 1.0:
        return 1.0
    return x


@njit(cache=True)
def seg_closest(px, py, pz, dx1, dy1, dz1, qx, qy, qz, dx2, dy2, dz2):
    """``(distance, s, t)`` for the closest points of ``p + s*d1`` and ``q + t*d2``, ``s, t`` in [0, 1]."""
    rx = px - qx
    ry = py - qy
    rz = pz - qz
    a = dx1 * dx1 + dy1 * dy1 + dz1 * dz1
    e = dx2 * dx2 + dy2 * dy2 + dz2 * dz2
    f = dx2 * rx + dy2 * ry + dz2 * rz
    if a <= 1e-300 and e <= 1e-300:
        s = 0.0
        t = 0.0
    elif a <= 1e-300:
        s = 0.0
        t = _clamp01(f / e)
    else:
        c = dx1 * rx + dy1 * ry + dz1 * rz
        if e <= 1e-300:
            t = 0.0
            s = _clamp01(-c / a)
        else:
            b = dx1 * dx2 + dy1 * dy2 + dz1 * dz2
            den = a * e - b * b
            if den > 0.0:
                s = _clamp01((b * f - c * e) / den)
            else:
                s = 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t = 0.0
                s = _clamp01(-c / a)
            elif t > 1.0:
                t = 1.0
                s = _clamp01((b - c) / a)
    wx = rx + s * dx1 - t * dx2
    wy = ry + s * dy1 - t * dy2
    wz = rz + s * dz1 - t * dz2
    return math.sqrt(wx * wx + wy * wy + wz * wz), s, t


@njit(cache=True)
def seg_dist(px, py, pz, dx1, dy1, dz1, qx, qy, qz, dx2, dy2, dz2):
    """Distance between the segments ``p + s*d1`` and ``q + t*d2``, ``s, t`` in [0, 1]."""
    return seg_closest(px, py, pz, dx1, dy1, dz1, qx, qy, qz, dx2, dy2, dz2)[0]


@njit(cache=True)
def edge_dist(V, i, j):
    n = V.shape[0]
    i1 = (i + 1) % n
    j1 = (j + 1) % n
    return seg_dist(V[i, 0], V[i, 1], V[i, 2],
                    V[i1, 0] - V[i, 0], V[i1, 1] - V[i, 1], V[i1, 2] - V[i, 2],
                    V[j, 0], V[j, 1], V[j, 2],
                    V[j1, 0] - V[j, 0], V[j1, 1] - V[j, 1], V[j1, 2] - V[j, 2])


@njit(cache=True)
def ratio(V, U, S, L, i, a, j, b):
    """Arc/chord ratio between offset ``a`` on edge ``i`` and offset ``b`` on edge ``j``."""
    d = abs((S[j] + b) - (S[i] + a))
    arc = min(d, L - d)
    cx = V[j, 0] + b * U[j, 0] - V[i, 0] - a * U[i, 0]
    cy = V[j, 1] + b * U[j, 1] - V[i, 1] - a * U[i, 1]
    cz = V[j, 2] + b * U[j, 2] - V[i, 2] - a * U[i, 2]
    ch = math.sqrt(cx * cx + cy * cy + cz * cz)
    if ch == 0.0:
        return INF
    return arc / ch


@njit(cache=True)
def _better(r, s, t, best, bs, bt):
    # larger ratio wins; ties go to the lexicographically smaller witness
    if r > best:
        return True
    if r == best:
        if s < bs or (s == bs and t < bt):
            return True
    return False


@njit(cache=True)
def _witness(S, i, a, j, b):
    s = S[i] + a
    t = S[j] + b
    if s <= t:
        return s, t
    return t, s


# -- vertex pairs ------------------------------------------------------------


@njit(cache=True, parallel=True)
def vertex_pairs(V, S, L):
    """
    Max arc/chord ratio over vertex pairs.

    Returns ``(value, i, j)``; ``value`` is ``-1`` when two distinct vertices
    coincide, with ``(i, j)`` the first such pair.
    """
    n = V.shape[0]
    row_best = np.full(n, -1.0)
    row_j = np.full(n, -1, dtype=np.int64)
    row_bad = np.full(n, -1, dtype=np.int64)
    for i in prange(n):
        best = -1.0
        bj = -1
        for j in range(i + 1, n):
            d = S[j] - S[i]
            arc = min(d, L - d)
            cx = V[j, 0] - V[i, 0]
            cy = V[j, 1] - V[i, 1]
            cz = V[j, 2] - V[i, 2]
            ch = math.sqrt(cx * cx + cy * cy + cz * cz)
            if ch == 0.0:
                row_bad[i] = j
                break
            r = arc / ch
            if r > best:
                best = r
                bj = j
        row_best[i] = best
        row_j[i] = bj
    best = -1.0
    bi = -1
    bj = -1
    for i in range(n):
        if row_bad[i] >= 0:
            return -1.0, i, row_bad[i]
        if row_best[i] > best:
            best = row_best[i]
            bi = i
            bj = row_j[i]
    return best, bi, bj


# -- exact supremum over one edge pair ------------------------------------------


@njit(cache=True)
def _line_best(V, U, S, L, i, j, a0, b0, a1, b1, alpha, beta_a, beta_b, best, ba, bb):
    """
    Candidates for the max of ``A/|c|`` along the parameter segment
    ``(a0, b0) -> (a1, b1)``, where ``A = alpha + beta_a*a + beta_b*b`` is the
    active arc branch. ``A/sqrt(Q)`` has at most one stationary point on a
    line and it solves a linear equation.
    """
    for k in range(3):
        if k == 0:
            tau = 0.0
        elif k == 1:
            tau = 1.0
        else:
            A0 = alpha + beta_a * a0 + beta_b * b0
            dA = beta_a * (a1 - a0) + beta_b * (b1 - b0)
            da = a1 - a0
            db = b1 - b0
            c0x = V[j, 0] + b0 * U[j, 0] - V[i, 0] - a0 * U[i, 0]
            c0y = V[j, 1] + b0 * U[j, 1] - V[i, 1] - a0 * U[i, 1]
            c0z = V[j, 2] + b0 * U[j, 2] - V[i, 2] - a0 * U[i, 2]
            c1x = db * U[j, 0] - da * U[i, 0]
            c1y = db * U[j, 1] - da * U[i, 1]
            c1z = db * U[j, 2] - da * U[i, 2]
            Q0 = c0x * c0x + c0y * c0y + c0z * c0z
            Q1 = 2.0 * (c0x * c1x + c0y * c1y + c0z * c1z)
            Q2 = c1x * c1x + c1y * c1y + c1z * c1z
            den = dA * 0.5 * Q1 - A0 * Q2
            if den == 0.0:
                continue
            tau = -(dA * Q0 - 0.5 * A0 * Q1) / den
            if not (0.0 < tau < 1.0):
                continue
        a = a0 + tau * (a1 - a0)
        b = b0 + tau * (b1 - b0)
        r = ratio(V, U, S, L, i, a, j, b)
        s, t = _witness(S, i, a, j, b)
        if best < 0.0:
            best, ba, bb = r, a, b
        else:
            s0, t0 = _witness(S, i, ba, j, bb)
            if _better(r, s, t, best, s0, t0):
                best, ba, bb = r, a, b
    return best, ba, bb


@njit(cache=True)
def _interior_best(V, U, S, L, ell, i, j, alpha, beta_a, beta_b, best, ba, bb):
    """
    Unconstrained critical point of ``A/|c|`` via the homogenised
    least-squares problem ``min |M x|`` subject to ``g.x = 1`` with
    ``x = (w, a w, b w)`` and ``w = 1/A``.
    """
    mx0 = V[j, 0] - V[i, 0]
    my0 = V[j, 1] - V[i, 1]
    mz0 = V[j, 2] - V[i, 2]
    mx1 = -U[i, 0]
    my1 = -U[i, 1]
    mz1 = -U[i, 2]
    mx2 = U[j, 0]
    my2 = U[j, 1]
    mz2 = U[j, 2]
    g00 = mx0 * mx0 + my0 * my0 + mz0 * mz0
    g01 = mx0 * mx1 + my0 * my1 + mz0 * mz1
    g02 = mx0 * mx2 + my0 * my2 + mz0 * mz2
    g11 = mx1 * mx1 + my1 * my1 + mz1 * mz1
    g12 = mx1 * mx2 + my1 * my2 + mz1 * mz2
    g22 = mx2 * mx2 + my2 * my2 + mz2 * mz2
    c00 = g11 * g22 - g12 * g12
    c01 = g02 * g12 - g01 * g22
    c02 = g01 * g12 - g02 * g11
    c11 = g00 * g22 - g02 * g02
    c12 = g01 * g02 - g00 * g12
    c22 = g00 * g11 - g01 * g01
    det = g00 * c00 + g01 * c01 + g02 * c02
    if not (det > 1e-14 * g00 * g11 * g22):
        return best, ba, bb
    y0 = c00 * alpha + c01 * beta_a + c02 * beta_b
    y1 = c01 * alpha + c11 * beta_a + c12 * beta_b
    y2 = c02 * alpha + c12 * beta_a + c22 * beta_b
    if not (y0 > 0.0):
        return best, ba, bb
    a = y1 / y0
    b = y2 / y0
    if a < 0.0 or a > ell[i] or b < 0.0 or b > ell[j]:
        return best, ba, bb
    r = ratio(V, U, S, L, i, a, j, b)
    s, t = _witness(S, i, a, j, b)
    s0, t0 = _witness(S, i, ba, j, bb)
    if _better(r, s, t, best, s0, t0):
        return r, a, b
    return best, ba, bb


@njit(cache=True)
def _side(V, U, S, L, i, j, D0, kappa, a0, b0, a1, b1, best, ba, bb):
    # split a side of the parameter rectangle where the shorter arc switches
    g0 = (b0 - a0) - kappa
    g1 = (b1 - a1) - kappa
    taus = np.empty(3)
    taus[0] = 0.0
    m = 1
    if (g0 < 0.0 < g1) or (g1 < 0.0 < g0):
        taus[1] = g0 / (g0 - g1)
        m = 2
    taus[m] = 1.0
    for k in range(m):
        t0 = taus[k]
        t1 = taus[k + 1]
        pa0 = a0 + t0 * (a1 - a0)
        pb0 = b0 + t0 * (b1 - b0)
        pa1 = a0 + t1 * (a1 - a0)
        pb1 = b0 + t1 * (b1 - b0)
        dmid = D0 + 0.5 * (pb0 + pb1) - 0.5 * (pa0 + pa1)
        if dmid <= 0.5 * L:
            best, ba, bb = _line_best(V, U, S, L, i, j, pa0, pb0, pa1, pb1, D0, -1.0, 1.0, best, ba, bb)
        else:
            best, ba, bb = _line_best(V, U, S, L, i, j, pa0, pb0, pa1, pb1, L - D0, 1.0, -1.0, best, ba, bb)
    return best, ba, bb


@njit(cache=True)
def pair_sup(V, U, S, L, ell, i, j):
    """
    Supremum of the arc/chord ratio over two non-adjacent edges ``i < j``.

    The ratio is quasi-concave on the parameter rectangle, so the maximum is
    an unconstrained critical point of one arc branch, a point of the line
    where the two branches meet, or a point on the rectangle boundary; each
    candidate family has a closed form. Returns ``(value, a, b)``.
    """
    la = ell[i]
    lb = ell[j]
    D0 = S[j] - S[i]
    kappa = 0.5 * L - D0
    best = -1.0
    ba = 0.0
    bb = 0.0
    best, ba, bb = _side(V, U, S, L, i, j, D0, kappa, 0.0, 0.0, la, 0.0, best, ba, bb)
    best, ba, bb = _side(V, U, S, L, i, j, D0, kappa, la, 0.0, la, lb, best, ba, bb)
    best, ba, bb = _side(V, U, S, L, i, j, D0, kappa, la, lb, 0.0, lb, best, ba, bb)
    best, ba, bb = _side(V, U, S, L, i, j, D0, kappa, 0.0, lb, 0.0, 0.0, best, ba, bb)
    # line b - a = kappa, where the arc is exactly L/2
    amin = max(0.0, -kappa)
    amax = min(la, lb - kappa)
    if amin < amax:
        best, ba, bb = _line_best(V, U, S, L, i, j, amin, amin + kappa, amax, amax + kappa,
                                  0.5 * L, 0.0, 0.0, best, ba, bb)
    # candidates are scored with the true ratio, so a point from the wrong branch is harmless
    best, ba, bb = _interior_best(V, U, S, L, ell, i, j, D0, -1.0, 1.0, best, ba, bb)
    best, ba, bb = _interior_best(V, U, S, L, ell, i, j, L - D0, 1.0, -1.0, best, ba, bb)
    return best, ba, bb


@njit(cache=True)
def corner_sup(V, U, S, L, ell, k):
    """
    Supremum over the two edges meeting at vertex ``k``: ``1/sin(theta/2)``
    for interior angle ``theta``, attained on every symmetric pair close to
    the corner. Returns ``(value, i, a, j, b)`` with a realising witness.
    """
    n = V.shape[0]
    km = (k - 1) % n
    cos_t = -(U[km, 0] * U[k, 0] + U[km, 1] * U[k, 1] + U[km, 2] * U[k, 2])
    one_minus = 1.0 - cos_t
    if one_minus <= 0.0:
        val = INF
    else:
        val = math.sqrt(2.0 / one_minus)
    x = 0.5 * min(ell[km], ell[k], 0.25 * L)
    return val, km, ell[km] - x, k, x


# -- hierarchy of edge blocks ----------------------------------------------------


@njit(cache=True)
def build_tree(V, S, L):
    """
    Binary tree over contiguous edge ranges with a bounding sphere per node.

    Returns ``(e0, e1, left, right, center, radius, arc_lo, arc_hi)``; node 0
    is the root and leaves hold a single edge.
    """
    n = V.shape[0]
    m = 2 * n
    e0 = np.empty(m, dtype=np.int64)
    e1 = np.empty(m, dtype=np.int64)
    left = np.full(m, -1, dtype=np.int64)
    right = np.full(m, -1, dtype=np.int64)
    center = np.empty((m, 3))
    radius = np.empty(m)
    arc_lo = np.empty(m)
    arc_hi = np.empty(m)
    e0[0] = 0
    e1[0] = n
    count = 1
    stack = np.empty(m, dtype=np.int64)
    stack[0] = 0
    top = 1
    while top > 0:
        top -= 1
        node = stack[top]
        lo = e0[node]
        hi = e1[node]
        mn0 = INF
        mn1 = INF
        mn2 = INF
        mx0 = -INF
        mx1 = -INF
        mx2 = -INF
        for k in range(lo, hi + 1):
            kk = k % n
            mn0 = min(mn0, V[kk, 0])
            mn1 = min(mn1, V[kk, 1])
            mn2 = min(mn2, V[kk, 2])
            mx0 = max(mx0, V[kk, 0])
            mx1 = max(mx1, V[kk, 1])
            mx2 = max(mx2, V[kk, 2])
        cx = 0.5 * (mn0 + mx0)
        cy = 0.5 * (mn1 + mx1)
        cz = 0.5 * (mn2 + mx2)
        r = 0.0
        for k in range(lo, hi + 1):
            kk = k % n
            dx = V[kk, 0] - cx
            dy = V[kk, 1] - cy
            dz = V[kk, 2] - cz
            r = max(r, math.sqrt(dx * dx + dy * dy + dz * dz))
        center[node, 0] = cx
        center[node, 1] = cy
        center[node, 2] = cz
        # pad for roundoff so the sphere stays a true enclosure
        radius[node] = r * (1.0 + 1e-12) + 1e-300
        arc_lo[node] = S[lo]
        arc_hi[node] = S[hi] if hi < n else L
        if hi - lo > 1:
            mid = (lo + hi) // 2
            for c, (clo, chi) in enumerate(((lo, mid), (mid, hi))):
                e0[count] = clo
                e1[count] = chi
                if c == 0:
                    left[node] = count
                else:
                    right[node] = count
                stack[top] = count
                top += 1
                count += 1
    return e0[:count], e1[:count], left[:count], right[:count], center[:count], radius[:count], arc_lo[:count], arc_hi[:count]


@njit(cache=True)
def _max_arc(L, dlo, dhi):
    # max of min(d, L - d) for d in [dlo, dhi]
    h = 0.5 * L
    if dlo <= h <= dhi:
        return h
    if dhi < h:
        return dhi
    return L - dlo


@njit(cache=True)
def _node_gap(center, radius, A, B):
    dx = center[A, 0] - center[B, 0]
    dy = center[A, 1] - center[B, 1]
    dz = center[A, 2] - center[B, 2]
    return math.sqrt(dx * dx + dy * dy + dz * dz) - radius[A] - radius[B]


# -- certified distortion -------------------------------------------------------------


@njit(cache=True)
def _adjacent(n, i, j):
    return j == i + 1 or (i == 0 and j == n - 1)


@njit(cache=True)
def _leaf_pair(V, U, S, L, ell, i, j, tau, tol, max_depth, cells,
               lo, ws, wt, hi, status, ncell, depth_used):
    """Certify one edge pair ``i < j``; updates and returns the running task state."""
    n = V.shape[0]
    if _adjacent(n, i, j):
        k = j if j == i + 1 else 0
        val, ei, a, ej, b = corner_sup(V, U, S, L, ell, k)
        if val == INF:
            status |= SELF_INTERSECTION
            return lo, ws, wt, hi, status, ncell, depth_used
        r = ratio(V, U, S, L, ei, a, ej, b)
        s, t = _witness(S, ei, a, ej, b)
        if _better(r, s, t, lo, ws, wt):
            lo, ws, wt = r, s, t
        hi = max(hi, val, r)
        return lo, ws, wt, hi, status, ncell, depth_used
    i1 = (i + 1) % n
    j1 = (j + 1) % n
    D0 = S[j] - S[i]
    la = ell[i]
    lb = ell[j]
    dist = edge_dist(V, i, j)
    ncell += 1
    if dist <= 0.0:
        status |= SELF_INTERSECTION
        return lo, ws, wt, hi, status, ncell, depth_used
    bound = _max_arc(L, D0 - la, D0 + lb) / dist
    if bound <= tau:
        hi = max(hi, bound)
        return lo, ws, wt, hi, status, ncell, depth_used
    ex, ea, eb = pair_sup(V, U, S, L, ell, i, j)
    s, t = _witness(S, i, ea, j, eb)
    if _better(ex, s, t, lo, ws, wt):
        lo, ws, wt = ex, s, t
    thr = max(tau, ex * (1.0 + tol))
    if bound <= thr:
        hi = max(hi, bound)
        return lo, ws, wt, hi, status, ncell, depth_used
    # depth-first refinement of the parameter rectangle
    cells[0, 0] = 0.0
    cells[0, 1] = la
    cells[0, 2] = 0.0
    cells[0, 3] = lb
    cells[0, 4] = 0.0
    top = 1
    while top > 0:
        top -= 1
        a0 = cells[top, 0]
        a1 = cells[top, 1]
        b0 = cells[top, 2]
        b1 = cells[top, 3]
        dep = cells[top, 4] + 1.0
        split_a = (a1 - a0) >= (b1 - b0)
        for c in range(2):
            if split_a:
                am = 0.5 * (a0 + a1)
                ca0 = a0 if c == 0 else am
                ca1 = am if c == 0 else a1
                cb0 = b0
                cb1 = b1
            else:
                bm = 0.5 * (b0 + b1)
                ca0 = a0
                ca1 = a1
                cb0 = b0 if c == 0 else bm
                cb1 = bm if c == 0 else b1
            d = seg_dist(V[i, 0] + ca0 * U[i, 0], V[i, 1] + ca0 * U[i, 1], V[i, 2] + ca0 * U[i, 2],
                         (ca1 - ca0) * U[i, 0], (ca1 - ca0) * U[i, 1], (ca1 - ca0) * U[i, 2],
                         V[j, 0] + cb0 * U[j, 0], V[j, 1] + cb0 * U[j, 1], V[j, 2] + cb0 * U[j, 2],
                         (cb1 - cb0) * U[j, 0], (cb1 - cb0) * U[j, 1], (cb1 - cb0) * U[j, 2])
            ncell += 1
            cb = _max_arc(L, D0 + cb0 - ca1, D0 + cb1 - ca0) / d if d > 0.0 else INF
            if cb <= thr:
                hi = max(hi, cb)
            elif dep >= max_depth:
                hi = max(hi, cb)
                status |= NONCONVERGED
                depth_used = max(depth_used, int(dep))
            else:
                cells[top, 0] = ca0
                cells[top, 1] = ca1
                cells[top, 2] = cb0
                cells[top, 3] = cb1
                cells[top, 4] = dep
                top += 1
                depth_used = max(depth_used, int(dep))
    return lo, ws, wt, hi, status, ncell, depth_used


@njit(cache=True)
def _run_task(V, U, S, L, ell, e0, e1, left, right, center, radius, arc_lo, arc_hi,
              A0, B0, tau, tol, max_depth):
    """Depth-first branch and bound over node pairs below ``(A0, B0)``."""
    n = V.shape[0]
    lo = -1.0
    ws = 0.0
    wt = 0.0
    hi = 1.0
    status = 0
    ncell = 0
    depth_used = 0
    cells = np.empty((max_depth + 4, 5))
    stack = np.empty((256, 2), dtype=np.int64)
    stack[0, 0] = A0
    stack[0, 1] = B0
    top = 1
    while top > 0:
        top -= 1
        A = stack[top, 0]
        B = stack[top, 1]
        if A == B:
            if left[A] < 0:
                i = e0[A]
                s, t = _witness(S, i, 0.0, i, 0.5 * ell[i])
                if _better(1.0, s, t, lo, ws, wt):
                    lo, ws, wt = 1.0, s, t
                continue
            l = left[A]
            r = right[A]
            stack[top, 0] = l
            stack[top, 1] = l
            stack[top + 1, 0] = l
            stack[top + 1, 1] = r
            stack[top + 2, 0] = r
            stack[top + 2, 1] = r
            top += 3
            continue
        if e0[A] > e0[B]:
            A, B = B, A
        gap = _node_gap(center, radius, A, B)
        if gap > 0.0:
            bound = _max_arc(L, arc_lo[B] - arc_hi[A], arc_hi[B] - arc_lo[A]) / gap
            if bound <= tau:
                hi = max(hi, bound)
                continue
        la = left[A] < 0
        lb = left[B] < 0
        if la and lb:
            lo, ws, wt, hi, status, ncell, depth_used = _leaf_pair(
                V, U, S, L, ell, e0[A], e0[B], tau, tol, max_depth, cells,
                lo, ws, wt, hi, status, ncell, depth_used)
            continue
        if lb or (not la and radius[A] >= radius[B]):
            stack[top, 0] = left[A]
            stack[top, 1] = B
            stack[top + 1, 0] = right[A]
            stack[top + 1, 1] = B
        else:
            stack[top, 0] = A
            stack[top, 1] = left[B]
            stack[top + 1, 0] = A
            stack[top + 1, 1] = right[B]
        top += 2
    return lo, ws, wt, hi, status, ncell, depth_used


@njit(cache=True, parallel=True)
def run_tasks(V, U, S, L, ell, e0, e1, left, right, center, radius, arc_lo, arc_hi,
              tasks, tau, tol, max_depth):
    m = tasks.shape[0]
    out_lo = np.empty(m)
    out_s = np.empty(m)
    out_t = np.empty(m)
    out_hi = np.empty(m)
    out_status = np.empty(m, dtype=np.int64)
    out_cells = np.empty(m, dtype=np.int64)
    out_depth = np.empty(m, dtype=np.int64)
    for k in prange(m):
        lo, ws, wt, hi, st, nc, dep = _run_task(V, U, S, L, ell, e0, e1, left, right, center,
                                                 radius, arc_lo, arc_hi, tasks[k, 0], tasks[k, 1],
                                                 tau, tol, max_depth)
        out_lo[k] = lo
        out_s[k] = ws
        out_t[k] = wt
        out_hi[k] = hi
        out_status[k] = st
        out_cells[k] = nc
        out_depth[k] = dep
    return out_lo, out_s, out_t, out_hi, out_status, out_cells, out_depth


@njit(cache=True)
def split_tasks(e0, left, right, target):
    """Expand the root self-pair breadth-first into at least ``target`` node pairs."""
    cur = np.empty((1, 2), dtype=np.int64)
    cur[0, 0] = 0
    cur[0, 1] = 0
    while cur.shape[0] < target:
        nxt = np.empty((4 * cur.shape[0], 2), dtype=np.int64)
        m = 0
        grew = False
        for k in range(cur.shape[0]):
            A = cur[k, 0]
            B = cur[k, 1]
            if A == B and left[A] >= 0:
                nxt[m, 0] = left[A]
                nxt[m, 1] = left[A]
                nxt[m + 1, 0] = left[A]
                nxt[m + 1, 1] = right[A]
                nxt[m + 2, 0] = right[A]
                nxt[m + 2, 1] = right[A]
                m += 3
                grew = True
            elif A != B and left[A] >= 0 and left[B] >= 0:
                nxt[m, 0] = left[A]
                nxt[m, 1] = left[B]
                nxt[m + 1, 0] = left[A]
                nxt[m + 1, 1] = right[B]
                nxt[m + 2, 0] = right[A]
                nxt[m + 2, 1] = left[B]
                m += 3
                nxt[m, 0] = right[A]
                nxt[m, 1] = right[B]
                m += 1
                grew = True
            else:
                nxt[m, 0] = A
                nxt[m, 1] = B
                m += 1
        if not grew:
            break
        cur = nxt[:m].copy()
    return cur


# -- minimum distance between non-adjacent edges -----------------------------------


@njit(cache=True)
def min_self_distance(V, e0, left, right, center, radius):
    """Returns ``(distance, i, j)``; ``inf`` if no non-adjacent pair exists."""
    n = V.shape[0]
    best = INF
    bi = -1
    bj = -1
    if n > 3:
        for i in range(n):
            j = (i + 2) % n
            d = edge_dist(V, i, j)
            a, b = (i, j) if i < j else (j, i)
            if d < best or (d == best and (a < bi or (a == bi and b < bj))):
                best = d
                bi = a
                bj = b
    stack = np.empty((256, 2), dtype=np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    top = 1
    while top > 0:
        top -= 1
        A = stack[top, 0]
        B = stack[top, 1]
        if A == B:
            if left[A] < 0:
                continue
            l = left[A]
            r = right[A]
            stack[top, 0] = l
            stack[top, 1] = l
            stack[top + 1, 0] = l
            stack[top + 1, 1] = r
            stack[top + 2, 0] = r
            stack[top + 2, 1] = r
            top += 3
            continue
        if _node_gap(center, radius, A, B) > best:
            continue
        la = left[A] < 0
        lb = left[B] < 0
        if la and lb:
            i = min(e0[A], e0[B])
            j = max(e0[A], e0[B])
            if _adjacent(n, i, j):
                continue
            d = edge_dist(V, i, j)
            if d < best or (d == best and (i < bi or (i == bi and j < bj))):
                best = d
                bi = i
                bj = j
            continue
        if lb or (not la and radius[A] >= radius[B]):
            stack[top, 0] = left[A]
            stack[top, 1] = B
            stack[top + 1, 0] = right[A]
            stack[top + 1, 1] = B
        else:
            stack[top, 0] = A
            stack[top, 1] = left[B]
            stack[top + 1, 0] = A
            stack[top + 1, 1] = right[B]
        top += 2
    return best, bi, bj


# -- writhe and linking ---------------------------------------------------------------


@njit(cache=True)
def _unit_cross(ax, ay, az, bx, by, bz):
    cx = ay * bz - az * by
    cy = az * bx - ax * bz
    cz = ax * by - ay * bx
    nn = math.sqrt(cx * cx + cy * cy + cz * cz)
    if nn == 0.0:
        return 0.0, 0.0, 0.0, False
    return cx / nn, cy / nn, cz / nn, True


@njit(cache=True)
def _asin(x):
    return math.asin(min(1.0, max(-1.0, x)))


@njit(cache=True)
def solid_angle(p1, p2, p3, p4):
    """
    Signed solid angle subtended by segment pair ``p1->p2``, ``p3->p4``
    (Klenin & Langowski); its sum over pairs, divided by ``4 pi``, is the
    Gauss double integral.
    """
    r13x = p3[0] - p1[0]
    r13y = p3[1] - p1[1]
    r13z = p3[2] - p1[2]
    r14x = p4[0] - p1[0]
    r14y = p4[1] - p1[1]
    r14z = p4[2] - p1[2]
    r23x = p3[0] - p2[0]
    r23y = p3[1] - p2[1]
    r23z = p3[2] - p2[2]
    r24x = p4[0] - p2[0]
    r24y = p4[1] - p2[1]
    r24z = p4[2] - p2[2]
    n1x, n1y, n1z, ok1 = _unit_cross(r13x, r13y, r13z, r14x, r14y, r14z)
    n2x, n2y, n2z, ok2 = _unit_cross(r14x, r14y, r14z, r24x, r24y, r24z)
    n3x, n3y, n3z, ok3 = _unit_cross(r24x, r24y, r24z, r23x, r23y, r23z)
    n4x, n4y, n4z, ok4 = _unit_cross(r23x, r23y, r23z, r13x, r13y, r13z)
    if not (ok1 and ok2 and ok3 and ok4):
        return 0.0
    om = (_asin(n1x * n2x + n1y * n2y + n1z * n2z) + _asin(n2x * n3x + n2y * n3y + n2z * n3z)
          + _asin(n3x * n4x + n3y * n4y + n3z * n4z) + _asin(n4x * n1x + n4y * n1y + n4z * n1z))
    r12x = p2[0] - p1[0]
    r12y = p2[1] - p1[1]
    r12z = p2[2] - p1[2]
    r34x = p4[0] - p3[0]
    r34y = p4[1] - p3[1]
    r34z = p4[2] - p3[2]
    # sign of (r34 x r12) . r13
    sx = r34y * r12z - r34z * r12y
    sy = r34z * r12x - r34x * r12z
    sz = r34x * r12y - r34y * r12x
    sg = sx * r13x + sy * r13y + sz * r13z
    if sg > 0.0:
        return om
    if sg < 0.0:
        return -om
    return 0.0


@njit(cache=True, parallel=True)
def writhe_rows(V):
    """Per-row sums ``sum_{j > i} Omega_ij`` over non-adjacent edge pairs."""
    n = V.shape[0]
    rows = np.zeros(n)
    for i in prange(n):
        acc = 0.0
        p1 = V[i]
        p2 = V[(i + 1) % n]
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            acc += solid_angle(p1, p2, V[j], V[(j + 1) % n])
        rows[i] = acc
    return rows


@njit(cache=True, parallel=True)
def linking_rows(V, W):
    n = V.shape[0]
    m = W.shape[0]
    rows = np.zeros(n)
    for i in prange(n):
        acc = 0.0
        p1 = V[i]
        p2 = V[(i + 1) % n]
        for j in range(m):
            acc += solid_angle(p1, p2, W[j], W[(j + 1) % m])
        rows[i] = acc
    return rows


@njit(cache=True, parallel=True)
def far_self_distance(V, S, L, gap):
    """Minimum distance over edge pairs whose arclength gap (end to start, either way round) exceeds ``gap``."""
    n = V.shape[0]
    rows = np.full(n, np.inf)
    for i in prange(n):
        acc = np.inf
        end_i = S[i + 1] if i + 1 < n else L
        for j in range(i + 1, n):
            end_j = S[j + 1] if j + 1 < n else L
            if S[j] - end_i <= gap or L - end_j + S[i] <= gap:
                continue
            d = edge_dist(V, i, j)
            if d < acc:
                acc = d
        rows[i] = acc
    return rows.min()


# -- elementary moves ----------------------------------------------------------------------


@njit(cache=True)
def _dot(ax, ay, az, bx, by, bz):
    return ax * bx + ay * by + az * bz


@njit(cache=True)
def _seg_tri_dist(p, q, A, B, C):
    """Distance between segment ``pq`` and the closed triangle ``ABC``."""
    ex1 = B[0] - A[0]
    ey1 = B[1] - A[1]
    ez1 = B[2] - A[2]
    ex2 = C[0] - A[0]
    ey2 = C[1] - A[1]
    ez2 = C[2] - A[2]
    nx = ey1 * ez2 - ez1 * ey2
    ny = ez1 * ex2 - ex1 * ez2
    nz = ex1 * ey2 - ey1 * ex2
    nn = math.sqrt(nx * nx + ny * ny + nz * nz)
    best = seg_dist(p[0], p[1], p[2], q[0] - p[0], q[1] - p[1], q[2] - p[2],
                    A[0], A[1], A[2], ex1, ey1, ez1)
    best = min(best, seg_dist(p[0], p[1], p[2], q[0] - p[0], q[1] - p[1], q[2] - p[2],
                              A[0], A[1], A[2], ex2, ey2, ez2))
    best = min(best, seg_dist(p[0], p[1], p[2], q[0] - p[0], q[1] - p[1], q[2] - p[2],
                              B[0], B[1], B[2], C[0] - B[0], C[1] - B[1], C[2] - B[2]))
    scale = max(abs(ex1), abs(ey1), abs(ez1), abs(ex2), abs(ey2), abs(ez2))
    if nn <= 1e-14 * scale * scale:
        return best
    nx /= nn
    ny /= nn
    nz /= nn
    d00 = _dot(ex1, ey1, ez1, ex1, ey1, ez1)
    d01 = _dot(ex1, ey1, ez1, ex2, ey2, ez2)
    d11 = _dot(ex2, ey2, ez2, ex2, ey2, ez2)
    den = d00 * d11 - d01 * d01
    hp = _dot(p[0] - A[0], p[1] - A[1], p[2] - A[2], nx, ny, nz)
    hq = _dot(q[0] - A[0], q[1] - A[1], q[2] - A[2], nx, ny, nz)
    for k in range(3):
        if k == 0:
            x = p[0]
            y = p[1]
            z = p[2]
            h = hp
        elif k == 1:
            x = q[0]
            y = q[1]
            z = q[2]
            h = hq
        else:
            if (hp > 0.0 and hq > 0.0) or (hp < 0.0 and hq < 0.0) or hp == hq:
                continue
            lam = hp / (hp - hq)
            x = p[0] + lam * (q[0] - p[0])
            y = p[1] + lam * (q[1] - p[1])
            z = p[2] + lam * (q[2] - p[2])
            h = 0.0
        wx = x - h * nx - A[0]
        wy = y - h * ny - A[1]
        wz = z - h * nz - A[2]
        d20 = _dot(wx, wy, wz, ex1, ey1, ez1)
        d21 = _dot(wx, wy, wz, ex2, ey2, ez2)
        v = (d11 * d20 - d01 * d21) / den
        w = (d00 * d21 - d01 * d20) / den
        if v >= 0.0 and w >= 0.0 and v + w <= 1.0:
            best = min(best, abs(h))
    return best


@njit(cache=True)
def _enters_corner(W, A, X, Y):
    """
    Whether segment ``A -> W`` meets triangle ``A X Y`` anywhere besides ``A``.

    Off the triangle's plane the segment leaves ``A`` immediately; in the
    plane it meets the triangle iff its direction lies in the corner cone.
    Near-coplanar cases count as meeting, which keeps the test conservative.
    """
    ex1 = X[0] - A[0]
    ey1 = X[1] - A[1]
    ez1 = X[2] - A[2]
    ex2 = Y[0] - A[0]
    ey2 = Y[1] - A[1]
    ez2 = Y[2] - A[2]
    wx = W[0] - A[0]
    wy = W[1] - A[1]
    wz = W[2] - A[2]
    nx = ey1 * ez2 - ez1 * ey2
    ny = ez1 * ex2 - ex1 * ez2
    nz = ex1 * ey2 - ey1 * ex2
    nn = math.sqrt(nx * nx + ny * ny + nz * nz)
    lw = math.sqrt(wx * wx + wy * wy + wz * wz)
    l1 = math.sqrt(ex1 * ex1 + ey1 * ey1 + ez1 * ez1)
    l2 = math.sqrt(ex2 * ex2 + ey2 * ey2 + ez2 * ez2)
    if nn <= 1e-12 * l1 * l2:
        # degenerate triangle: a segment from A; reject only an overlapping direction
        for k in range(2):
            if k == 0:
                ex, ey, ez, le = ex1, ey1, ez1, l1
            else:
                ex, ey, ez, le = ex2, ey2, ez2, l2
            if le > 0.0 and _dot(ex, ey, ez, wx, wy, wz) >= (1.0 - 1e-12) * le * lw:
                return True
        return False
    if abs(_dot(nx, ny, nz, wx, wy, wz)) > 1e-10 * nn * lw:
        return False
    d00 = _dot(ex1, ey1, ez1, ex1, ey1, ez1)
    d01 = _dot(ex1, ey1, ez1, ex2, ey2, ez2)
    d11 = _dot(ex2, ey2, ez2, ex2, ey2, ez2)
    d20 = _dot(wx, wy, wz, ex1, ey1, ez1)
    d21 = _dot(wx, wy, wz, ex2, ey2, ez2)
    den = d00 * d11 - d01 * d01
    v = (d11 * d20 - d01 * d21) / den
    w = (d00 * d21 - d01 * d20) / den
    tol = -1e-10
    return v >= tol * lw and w >= tol * lw


@njit(cache=True)
def isotopy_move_ok(V, idx, P, margin):
    """
    Whether moving vertex ``idx`` to ``P`` is an elementary triangle move.

    The triangles ``(V[idx-1], V[idx], P)`` and ``(V[idx], V[idx+1], P)``
    must miss every other edge, and the two new edges must stay farther than
    ``margin`` from every edge they are not adjacent to.
    """
    n = V.shape[0]
    im = (idx - 1) % n
    ip = (idx + 1) % n
    A = V[im]
    B = V[idx]
    C = V[ip]
    prev_e = (im - 1) % n  # edge ending at A
    next_e = ip            # edge starting at C
    for k in range(n):
        if k == im or k == idx:
            continue
        p = V[k]
        q = V[(k + 1) % n]
        # triangle (A, B, P)
        if k == prev_e:
            if _enters_corner(p, A, B, P):
                return False
        elif k == next_e and n == 3:
            pass
        else:
            if _seg_tri_dist(p, q, A, B, P) <= 0.0:
                return False
        # triangle (B, C, P)
        if k == next_e:
            if _enters_corner(q, C, B, P):
                return False
        elif k == prev_e and n == 3:
            pass
        else:
            if _seg_tri_dist(p, q, B, C, P) <= 0.0:
                return False
    for k in range(n):
        if k == im or k == idx:
            continue
        p = V[k]
        q = V[(k + 1) % n]
        if k != prev_e:
            d = seg_dist(A[0], A[1], A[2], P[0] - A[0], P[1] - A[1], P[2] - A[2],
                         p[0], p[1], p[2], q[0] - p[0], q[1] - p[1], q[2] - p[2])
            if d <= margin:
                return False
        if k != next_e:
            d = seg_dist(P[0], P[1], P[2], C[0] - P[0], C[1] - P[1], C[2] - P[2],
                         p[0], p[1], p[2], q[0] - p[0], q[1] - p[1], q[2] - p[2])
            if d <= margin:
                return False
    return True


# -- annealing ------------------------------------------------------------------------


@njit(cache=True)
def vertex_pairs_seq(V):
    """Sequential :func:`vertex_pairs` computing arclengths itself; for the annealing loop."""
    n = V.shape[0]
    S = np.empty(n)
    S[0] = 0.0
    for k in range(1, n):
        d = V[k] - V[k - 1]
        S[k] = S[k - 1] + math.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
    d = V[0] - V[n - 1]
    L = S[n - 1] + math.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
    best = -1.0
    bi = 0
    bj = 0
    for i in range(n):
        for j in range(i + 1, n):
            dd = S[j] - S[i]
            arc = min(dd, L - dd)
            cx = V[j, 0] - V[i, 0]
            cy = V[j, 1] - V[i, 1]
            cz = V[j, 2] - V[i, 2]
            ch = math.sqrt(cx * cx + cy * cy + cz * cz)
            if ch == 0.0:
                return INF, i, j
            r = arc / ch
            if r > best:
                best = r
                bi = i
                bj = j
    return best, bi, bj


@njit(cache=True)
def fast_pairs_seq(V):
    """
    Lower estimate for the annealing loop: the larger of the vertex-pair
    maximum and the ratio at the closest points of every non-adjacent edge
    pair. The second term sees strands approaching mid-edge, which vertex
    pairs miss. Returns ``(value, i, j)`` with vertex indices near the pair.
    """
    n = V.shape[0]
    best, bi, bj = vertex_pairs_seq(V)
    if best == INF:
        return best, bi, bj
    S = np.empty(n + 1)
    S[0] = 0.0
    for k in range(n):
        d = V[(k + 1) % n] - V[k]
        S[k + 1] = S[k] + math.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
    L = S[n]
    for i in range(n):
        i1 = (i + 1) % n
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            j1 = (j + 1) % n
            d, a, b = seg_closest(V[i, 0], V[i, 1], V[i, 2],
                                  V[i1, 0] - V[i, 0], V[i1, 1] - V[i, 1], V[i1, 2] - V[i, 2],
                                  V[j, 0], V[j, 1], V[j, 2],
                                  V[j1, 0] - V[j, 0], V[j1, 1] - V[j, 1], V[j1, 2] - V[j, 2])
            if d == 0.0:
                return INF, i, j
            dd = (S[j] + b * (S[j + 1] - S[j])) - (S[i] + a * (S[i + 1] - S[i]))
            r = min(dd, L - dd) / d
            if r > best:
                best = r
                bi = i if a < 0.5 else i1
                bj = j if b < 0.5 else j1
    return best, bi, bj


@njit(cache=True)
def _no_spike(V, k):
    n = V.shape[0]
    a = V[(k - 1) % n]
    b = V[k]
    c = V[(k + 1) % n]
    u = b - a
    w = c - b
    lu = math.sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2])
    lw = math.sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2])
    if lu == 0.0 or lw == 0.0:
        return False
    return 1.0 + (u[0] * w[0] + u[1] * w[1] + u[2] * w[2]) / (lu * lw) > 1e-9


@njit(cache=True)
def anneal_chunk(V, f, wi, wj, temp, step, cooling, margin, window, rand, best_V, best_f):
    """
    Run ``rand.shape[0]`` Metropolis steps in place on ``V``.

    Each row of ``rand`` holds, in order, the witness-bias draw, the vertex
    draw, three normal displacement components and the acceptance draw.
    Returns the updated ``(f, wi, wj, temp, best_f, accepted, rejected)``.
    """
    n = V.shape[0]
    acc = 0
    rej = 0
    P = np.empty(3)
    old = np.empty(3)
    for it in range(rand.shape[0]):
        r = rand[it]
        if r[0] < 0.5:
            # near the witness pair: one of its ends, offset by up to `window`
            m = int(r[1] * 2 * (2 * window + 1))
            end = wi if m % 2 == 0 else wj
            idx = (end + m // 2 - window) % n
        else:
            idx = min(int(r[1] * n), n - 1)
        for c in range(3):
            P[c] = V[idx, c] + step * r[2 + c]
        ok = isotopy_move_ok(V, idx, P, margin)
        if ok:
            for c in range(3):
                old[c] = V[idx, c]
                V[idx, c] = P[c]
            ok = _no_spike(V, idx) and _no_spike(V, (idx - 1) % n) and _no_spike(V, (idx + 1) % n)
            if ok:
                g, gi, gj = fast_pairs_seq(V)
                dlt = (g - f) / f
                if dlt <= 0.0 or r[5] < math.exp(-dlt / temp):
                    f = g
                    wi = gi
                    wj = gj
                    acc += 1
                    if f < best_f:
                        best_f = f
                        best_V[:, :] = V
                else:
                    ok = False
            if not ok:
                for c in range(3):
                    V[idx, c] = old[c]
        if not ok:
            rej += 1
        temp *= cooling
    return f, wi, wj, temp, best_f, acc, rej
