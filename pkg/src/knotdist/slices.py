"""
Box slices and crossing counts
==============================

The box gauge ``g(v) = max(|x'|, 2^(-1/3) |y'|, 2^(-2/3) |z'|)`` in posed
coordinates ``v' = R (v - c)`` has ``Box(r) = {g < r}``. It is 1-Lipschitz,
so the crossing counts of its level sets integrate to at most the length
of the curve (coarea).

Along an edge each weighted coordinate is affine, so ``g`` restricted to an
edge is a maximum of three convex piecewise-affine functions: convex, with
kinks only where a coordinate vanishes or two weighted coordinates tie in
absolute value. Splitting every edge at those (at most nine) parameters
gives pieces on which ``g`` is exactly affine, and every count, variation
and length below is computed from the pieces without sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .curve import PolygonalCurve
from .errors import BoundViolationError, DegenerateLevelError, DomainError

WEIGHTS = np.array([1.0, 2.0 ** (-1.0 / 3.0), 2.0 ** (-2.0 / 3.0)])
DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class BoxGauge:
    center: np.ndarray
    rotation: np.ndarray

    def __init__(self, center=(0.0, 0.0, 0.0), rotation=None):
        c = np.array(center, dtype=np.float64).reshape(3)
        R = np.eye(3) if rotation is None else np.array(rotation, dtype=np.float64).reshape(3, 3)
        if not np.all(np.isfinite(c)) or not np.all(np.isfinite(R)):
            raise DomainError("gauge pose must be finite")
        if np.max(np.abs(R @ R.T - np.eye(3))) > 1e-12:
            raise DomainError("gauge rotation must be orthonormal to 1e-12")
        c.flags.writeable = False
        R.flags.writeable = False
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "rotation", R)

    def local(self, v) -> np.ndarray:
        """Posed coordinates ``R (v - c)``, row-wise."""
        return (np.asarray(v, dtype=np.float64) - self.center) @ self.rotation.T


def gauge_value(g: BoxGauge, v) -> np.ndarray | float:
    """Gauge of one point or of each row of an ``(m, 3)`` array."""
    w = np.abs(g.local(v)) * WEIGHTS
    out = w.max(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class GaugeProfile:
    """
    Affine pieces of the gauge along a curve.

    Piece ``k`` lies on edge ``edge[k]`` between parameters ``lam0[k] <
    lam1[k]`` (fractions of the edge) with gauge ``g0[k]`` to ``g1[k]``
    and length ``length[k]``.
    """

    edge: np.ndarray
    lam0: np.ndarray
    lam1: np.ndarray
    g0: np.ndarray
    g1: np.ndarray
    length: np.ndarray
    vertex_values: np.ndarray

    @property
    def lo(self):
        return np.minimum(self.g0, self.g1)

    @property
    def hi(self):
        return np.maximum(self.g0, self.g1)


def gauge_profile(curve: PolygonalCurve, g: BoxGauge) -> GaugeProfile:
    A = g.local(curve.vertices) * WEIGHTS
    D = (np.roll(A, -1, axis=0) - A)
    n = curve.n
    cands = [np.zeros(n), np.ones(n)]
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(3):
            cands.append(-A[:, k] / D[:, k])
        for i, j in ((0, 1), (0, 2), (1, 2)):
            # a_i + t d_i = +-(a_j + t d_j)
            cands.append((A[:, j] - A[:, i]) / (D[:, i] - D[:, j]))
            cands.append(-(A[:, j] + A[:, i]) / (D[:, i] + D[:, j]))
    lam = np.column_stack(cands)
    inner = lam[:, 2:]
    lam[:, 2:] = np.where(np.isfinite(inner) & (inner > 0.0) & (inner < 1.0), inner, 1.0)
    lam.sort(axis=1)
    vals = np.abs(A[:, None, :] + lam[:, :, None] * D[:, None, :]).max(axis=2)
    l0, l1 = lam[:, :-1], lam[:, 1:]
    keep = l1 > l0
    rows = np.broadcast_to(np.arange(n)[:, None], l0.shape)
    ell = curve.edge_lengths
    return GaugeProfile(
        edge=rows[keep],
        lam0=l0[keep],
        lam1=l1[keep],
        g0=vals[:, :-1][keep],
        g1=vals[:, 1:][keep],
        length=((l1 - l0) * ell[:, None])[keep],
        vertex_values=vals[:, 0].copy(),
    )


def _check_level(profile: GaugeProfile, level: float):
    tol = DEGENERATE_TOL * abs(level)
    if np.any(np.abs(profile.vertex_values - level) <= tol):
        raise DegenerateLevelError(f"a vertex lies on the level set g = {level}; jitter the level")
    # an interior kink touching the level is a tangency, equally non-transversal
    if np.any(np.abs(profile.g1 - level) <= tol):
        raise DegenerateLevelError(f"the curve is tangent to the level set g = {level}; jitter the level")


def _counts(profile: GaugeProfile, levels: np.ndarray) -> np.ndarray:
    # pieces with lo < r < hi; flat pieces never count at a generic level
    lo = np.sort(profile.lo)
    hi = np.sort(profile.hi)
    return np.searchsorted(lo, levels, side="left") - np.searchsorted(hi, levels, side="right")


def count_crossings(curve: PolygonalCurve, g: BoxGauge, level: float, profile: GaugeProfile | None = None) -> int:
    """
    Transversal crossings of ``curve`` with ``{g = level}``.

    Raises
    ------
    DegenerateLevelError
        A vertex or kink lies within ``1e-12 level`` of the level set.
    """
    if not level > 0:
        raise DomainError("level must be positive")
    prof = gauge_profile(curve, g) if profile is None else profile
    _check_level(prof, level)
    return int(_counts(prof, np.array([float(level)]))[0])


def gauge_variation(curve: PolygonalCurve, g: BoxGauge, interval=(0.0, math.inf),
                    profile: GaugeProfile | None = None) -> float:
    """
    Total variation of ``clamp(g(curve), a, b)``, equal to the integral of
    the crossing count over levels in ``(a, b)``.
    """
    a, b = interval
    if not (0.0 <= a < b):
        raise DomainError(f"need 0 <= a < b, got ({a}, {b})")
    prof = gauge_profile(curve, g) if profile is None else profile
    return float(np.sum(np.abs(np.clip(prof.g1, a, b) - np.clip(prof.g0, a, b))))


def length_inside(curve: PolygonalCurve, g: BoxGauge, radius: float, profile: GaugeProfile | None = None) -> float:
    """Length of ``curve`` inside ``Box(radius)``."""
    prof = gauge_profile(curve, g) if profile is None else profile
    lo, hi = prof.lo, prof.hi
    span = hi - lo
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(span > 0, np.clip((radius - lo) / span, 0.0, 1.0), (lo < radius).astype(float))
    return float(np.sum(frac * prof.length))


def crossing_integral(curve: PolygonalCurve, g: BoxGauge, interval, profile: GaugeProfile | None = None) -> float:
    """``int_a^b count_crossings dr`` by the midpoint rule on count-constant intervals."""
    a, b = interval
    prof = gauge_profile(curve, g) if profile is None else profile
    lv = _breakpoints(prof, a, b)
    mids = 0.5 * (lv[1:] + lv[:-1])
    return float(np.sum(_counts(prof, mids) * np.diff(lv)))


def _breakpoints(prof: GaugeProfile, a, b):
    pts = np.concatenate([prof.g0, prof.g1])
    pts = pts[(pts > a) & (pts < b)]
    return np.unique(np.concatenate([[a], pts, [b]]))


def _scan(breaks, count_fn):
    mids = 0.5 * (breaks[1:] + breaks[:-1])
    ok = np.diff(breaks) > 0
    mids = mids[ok]
    if mids.size == 0:
        raise DegenerateLevelError("no admissible level in the interval")
    counts = count_fn(mids)
    k = int(np.argmin(counts))  # first minimum, so ties go to the lowest level
    return float(mids[k]), int(counts[k])


def find_good_radius(curve: PolygonalCurve, g: BoxGauge, epsilon: float, delta_hi: float,
                     profile: GaugeProfile | None = None) -> tuple[float, int]:
    """
    Level ``r1`` in ``(1, 1 + epsilon)`` with the fewest shell crossings.

    Counts are constant between consecutive piece-end gauge values, so
    scanning one midpoint per interval finds the true minimum. Because the
    minimum is at most the average, it satisfies ``count <= 10 (1 + 1/eps)
    delta_hi`` whenever the curve's length inside ``Box(1 + eps)`` is at
    most ``10 (1 + eps) delta_hi``; that is asserted.

    Raises
    ------
    BoundViolationError
        The count exceeds the proven bound although its hypothesis holds.
    """
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    prof = gauge_profile(curve, g) if profile is None else profile
    r1, count = _scan(_breakpoints(prof, 1.0, 1.0 + epsilon), lambda r: _counts(prof, r))
    if length_inside(curve, g, 1.0 + epsilon, prof) <= 10.0 * (1.0 + epsilon) * delta_hi:
        bound = 10.0 * (1.0 + 1.0 / epsilon) * delta_hi
        if count > bound:
            raise BoundViolationError(f"shell count {count} exceeds {bound}")
    return r1, count


def _plane_segments(curve: PolygonalCurve, g: BoxGauge, r1: float, prof: GaugeProfile):
    # inside Box(r1) each edge is one sub-segment (g is convex along it); return its z' range
    inside = prof.lo < r1
    lam_a = np.full(curve.n, np.inf)
    lam_b = np.full(curve.n, -np.inf)
    e = prof.edge[inside]
    g0, g1 = prof.g0[inside], prof.g1[inside]
    l0, l1 = prof.lam0[inside], prof.lam1[inside]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(g1 != g0, (r1 - g0) / (g1 - g0), 0.0)
    a = np.where(g0 < r1, l0, l0 + np.clip(t, 0, 1) * (l1 - l0))
    b = np.where(g1 < r1, l1, l0 + np.clip(t, 0, 1) * (l1 - l0))
    np.minimum.at(lam_a, e, a)
    np.maximum.at(lam_b, e, b)
    has = lam_b > lam_a
    loc = g.local(curve.vertices)
    z = loc[:, 2]
    dz = np.roll(z, -1) - z
    za = z[has] + lam_a[has] * dz[has]
    zb = z[has] + lam_b[has] * dz[has]
    return za, zb


def find_good_plane(curve: PolygonalCurve, g: BoxGauge, r1: float, epsilon: float, delta_hi: float,
                    profile: GaugeProfile | None = None) -> tuple[float, int]:
    """
    Offset ``s1`` in ``(-epsilon, epsilon)`` where the posed plane ``{z' = s1}``
    meets the part of ``curve`` in ``Box(r1)`` the fewest times.

    Interval midpoints avoid the finitely many offsets through a vertex or
    through a point of the curve on the shell. The minimum obeys ``count <=
    5 (1 + 1/eps) delta_hi`` under the same length hypothesis as
    :func:`find_good_radius`.
    """
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    prof = gauge_profile(curve, g) if profile is None else profile
    za, zb = _plane_segments(curve, g, r1, prof)
    lo = np.sort(np.minimum(za, zb))
    hi = np.sort(np.maximum(za, zb))

    def counts(s):
        return np.searchsorted(lo, s, side="left") - np.searchsorted(hi, s, side="right")

    pts = np.concatenate([za, zb])
    pts = pts[(pts > -epsilon) & (pts < epsilon)]
    breaks = np.unique(np.concatenate([[-epsilon], pts, [epsilon]]))
    s1, count = _scan(breaks, counts)
    if length_inside(curve, g, r1, prof) <= 10.0 * (1.0 + epsilon) * delta_hi:
        bound = 5.0 * (1.0 + 1.0 / epsilon) * delta_hi
        if count > bound:
            raise BoundViolationError(f"disk count {count} exceeds {bound}")
    return s1, count


def contraction_radius(epsilon: float) -> float:
    """Size of the box congruent to each half-box: ``2^(-1/3) (1 + eps) + eps / 2``."""
    return 2.0 ** (-1.0 / 3.0) * (1.0 + epsilon) + 0.5 * epsilon


def score_constant(epsilon) -> Fraction:
    """``20 (1 + 1/eps)``, exactly; 160 at ``eps = 1/7``."""
    e = Fraction(epsilon)
    return 20 * (1 + 1 / e)


@dataclass(frozen=True)
class SliceReport:
    epsilon: float
    r1: float
    s1: float
    count_shell: int
    count_disk: int
    score: int
    certified_bounds: tuple[float, float, float]
    contraction_radius: float
    length_in_box: float
    obstruction: int | None = None

    @property
    def contraction_applies(self) -> bool | None:
        """True when ``score < I``, the hypothesis for shrinking the box."""
        if self.obstruction is None:
            return None
        return self.score < self.obstruction


def double_bubble_report(curve: PolygonalCurve, g: BoxGauge, epsilon: float, delta_hi: float,
                         obstruction: int | None = None) -> SliceReport:
    """Good radius, good plane and the resulting double-bubble score with its bounds."""
    prof = gauge_profile(curve, g)
    r1, cs = find_good_radius(curve, g, epsilon, delta_hi, prof)
    s1, cd = find_good_plane(curve, g, r1, epsilon, delta_hi, prof)
    k = 1.0 + 1.0 / epsilon
    return SliceReport(
        epsilon=float(epsilon),
        r1=r1,
        s1=s1,
        count_shell=cs,
        count_disk=cd,
        score=cs + 2 * cd,
        certified_bounds=(10.0 * k * delta_hi, 5.0 * k * delta_hi, 20.0 * k * delta_hi),
        contraction_radius=contraction_radius(epsilon),
        length_in_box=length_inside(curve, g, 1.0 + epsilon, prof),
        obstruction=obstruction,
    )


def fit_gauge(curve: PolygonalCurve, extent: float = 1.0) -> tuple[BoxGauge, float]:
    """
    Axis-aligned gauge at the curve's centroid and the scale factor that
    makes the curve's largest gauge value equal ``extent``.
    """
    g = BoxGauge(curve.centroid())
    gmax = float(np.max(gauge_value(g, curve.vertices)))
    return g, extent / gmax
