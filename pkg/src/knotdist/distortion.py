"""
Distortion of closed polygons
=============================

The distortion of a closed curve is the supremum, over all pairs of points,
of the shorter arclength between them divided by their Euclidean distance.
For a polygon the supremum is often attained in edge interiors (on a square
it sits at opposite edge midpoints), so vertex sampling only gives a lower
estimate. :func:`distortion_certified` encloses the true value.

The certified search runs in two phases:

1. an exhaustive vertex-pair pass, plus exact solves on the edges around the
   best vertex pair, fixes a pruning threshold ``tau``;
2. a depth-first branch and bound over pairs of edge blocks. A block pair
   is discarded when ``max arc / min distance`` cannot exceed ``tau``; a
   surviving pair of single edges gets its exact supremum from a closed form
   and is then subdivided until every piece's bound is below
   ``max(tau, (1 + rel_tol) * exact)``.

Block pairs are independent work items and every threshold is fixed before
they run, so the bracket is bit-identical for any number of threads.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass

import numba
import numpy as np

from . import _kernels as K
from .curve import PolygonalCurve
from .errors import DegenerateCurveError, DomainError, SelfIntersectionError

# work items handed to the parallel loop; fixed so results never depend on thread count
_N_TASKS = 256


@dataclass(frozen=True)
class DistortionBracket:
    """
    Certified enclosure ``lo <= distortion <= hi``.

    ``witness`` is a pair of arclength positions whose ratio equals ``lo``.
    ``converged`` is False when some cell hit ``max_depth`` before its bound
    fell under the threshold; ``hi`` still bounds the distortion then.
    """

    lo: float
    hi: float
    witness: tuple[float, float]
    refinement_depth: int
    converged: bool = True
    rel_tol: float = 0.0
    cells: int = 0

    @property
    def width(self) -> float:
        return (self.hi - self.lo) / self.lo

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi


@contextlib.contextmanager
def _threads(jobs):
    if jobs is None:
        yield
        return
    old = numba.get_num_threads()
    numba.set_num_threads(max(1, min(int(jobs), numba.config.NUMBA_NUM_THREADS)))
    try:
        yield
    finally:
        numba.set_num_threads(old)


def _arrays(curve: PolygonalCurve):
    return curve.vertices, curve.directions, curve.cum_arclength, curve.length, curve.edge_lengths


def distortion_vertex_pairs(curve: PolygonalCurve) -> tuple[float, tuple[int, int]]:
    """
    Max arc/chord ratio over all vertex pairs, a lower estimate of the distortion.

    Returns the value and the lexicographically first vertex pair attaining it.
    """
    V, _, S, L, _ = _arrays(curve)
    val, i, j = K.vertex_pairs(V, S, L)
    if val < 0:
        raise DegenerateCurveError(f"vertices {i} and {j} coincide")
    return float(val), (int(i), int(j))


def ratio_at(curve: PolygonalCurve, s: float, t: float) -> float:
    """Arc/chord ratio between arclength positions ``s`` and ``t``."""
    p, q = curve.point_at(np.array([s, t]))
    d = abs(s - t) % curve.length
    arc = min(d, curve.length - d)
    chord = float(np.linalg.norm(q - p))
    return np.inf if chord == 0 else arc / chord


def edge_pair_sup(curve: PolygonalCurve, i: int, j: int) -> tuple[float, tuple[float, float]]:
    """
    Exact supremum of the ratio over edges ``i`` and ``j`` with its witness.

    Adjacent edges give ``1/sin(theta/2)`` for the interior angle ``theta``.
    """
    V, U, S, L, ell = _arrays(curve)
    n = curve.n
    i, j = sorted((int(i) % n, int(j) % n))
    if i == j:
        return 1.0, (float(S[i]), float(S[i] + 0.5 * ell[i]))
    if j == i + 1 or (i == 0 and j == n - 1):
        k = j if j == i + 1 else 0
        val, ei, a, ej, b = K.corner_sup(V, U, S, L, ell, k)
        s, t = sorted((S[ei] + a, S[ej] + b))
        return float(val), (float(s), float(t))
    val, a, b = K.pair_sup(V, U, S, L, ell, i, j)
    return float(val), (float(S[i] + a), float(S[j] + b))


def distortion_certified(curve: PolygonalCurve, rel_tol: float = 1e-6, max_depth: int = 64,
                         jobs: int | None = None) -> DistortionBracket:
    """
    Certified bracket for the distortion of ``curve``.

    Parameters
    ----------
    curve : PolygonalCurve
    rel_tol : float
        Target relative width ``(hi - lo) / lo``.
    max_depth : int
        Maximum number of halvings of an edge-pair cell.
    jobs : int, optional
        Worker threads; the result does not depend on it.

    Raises
    ------
    SelfIntersectionError
        Two non-adjacent edges touch (or the polygon doubles back at a vertex).
    """
    if not rel_tol > 0:
        raise DomainError("rel_tol must be positive")
    V, U, S, L, ell = _arrays(curve)
    with _threads(jobs):
        v0, vi, vj = K.vertex_pairs(V, S, L)
        if v0 < 0:
            raise SelfIntersectionError(f"vertices {vi} and {vj} coincide")
        lo = float(v0)
        ws, wt = float(S[vi]), float(S[vj])
        # exact solves around the best vertex pair sharpen the threshold
        n = curve.n
        for ei in ((vi - 1) % n, vi):
            for ej in ((vj - 1) % n, vj):
                a, b = sorted((ei, ej))
                if a == b or b == a + 1 or (a == 0 and b == n - 1):
                    continue
                if K.edge_dist(V, a, b) <= 0.0:
                    raise SelfIntersectionError(f"edges {a} and {b} intersect")
                val, pa, pb = K.pair_sup(V, U, S, L, ell, a, b)
                s, t = sorted((S[a] + pa, S[b] + pb))
                if K._better(val, s, t, lo, ws, wt):
                    lo, ws, wt = float(val), float(s), float(t)
        tau = lo * (1.0 + rel_tol)
        tree = K.build_tree(V, S, L)
        e0, e1, left, right, center, radius, arc_lo, arc_hi = tree
        tasks = K.split_tasks(e0, left, right, _N_TASKS)
        out = K.run_tasks(V, U, S, L, ell, e0, e1, left, right, center, radius, arc_lo, arc_hi,
                          tasks, tau, rel_tol, max_depth)
    t_lo, t_s, t_t, t_hi, t_status, t_cells, t_depth = out
    if np.any(t_status & K.SELF_INTERSECTION):
        raise SelfIntersectionError("curve is not embedded: distortion is infinite")
    for k in range(len(t_lo)):
        if t_lo[k] > 0 and K._better(t_lo[k], t_s[k], t_t[k], lo, ws, wt):
            lo, ws, wt = float(t_lo[k]), float(t_s[k]), float(t_t[k])
    hi = max(float(t_hi.max()), lo)
    return DistortionBracket(
        lo=lo,
        hi=hi,
        witness=(ws, wt),
        refinement_depth=int(t_depth.max()),
        converged=not bool(np.any(t_status & K.NONCONVERGED)),
        rel_tol=rel_tol,
        cells=int(t_cells.sum()),
    )


def min_self_distance(curve: PolygonalCurve) -> float:
    """Minimum distance between edges that share no vertex; 0 if the polygon self-intersects."""
    return min_self_distance_pair(curve)[0]


def min_self_distance_pair(curve: PolygonalCurve) -> tuple[float, tuple[int, int]]:
    V, _, S, L, _ = _arrays(curve)
    e0, e1, left, right, center, radius, _, _ = K.build_tree(V, S, L)
    d, i, j = K.min_self_distance(V, e0, left, right, center, radius)
    return float(d), (int(i), int(j))
