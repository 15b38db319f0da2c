"""
Explicit knot embeddings
========================

Torus knots on a torus of revolution, (p, q)-cables of arbitrary polygonal
knots, and the writhe and rotation-minimising frames that the cable framing
needs.

Winding convention: ``p`` multiplies the longitudinal angle (around the core
circle) and ``q`` the meridional angle (around the tube), both for torus
knots and for cables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .curve import PolygonalCurve, regular_polygon
from .distortion import DistortionBracket, distortion_certified, min_self_distance
from .errors import DomainError, LinkError, ResolutionError, SelfIntersectionError, TubeRadiusError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TorusParams:
    R: float
    r: float
    p: int
    q: int
    n: int

    def __post_init__(self):
        if not (self.R > self.r > 0):
            raise DomainError(f"need R > r > 0, got R={self.R}, r={self.r}")
        if self.p < 1 or self.q < 1:
            raise DomainError("p and q must be >= 1")
        if math.gcd(self.p, self.q) != 1:
            raise LinkError(f"gcd({self.p}, {self.q}) != 1: this is a link, not a knot")
        if self.n < 3:
            raise DomainError("n must be >= 3")


def circle(n: int, radius: float = 1.0) -> PolygonalCurve:
    """Regular ``n``-gon inscribed in a circle in the xy-plane."""
    return regular_polygon(n, radius)


def torus_knot(params: TorusParams) -> PolygonalCurve:
    """
    Standard T(p, q) on the torus of revolution with radii ``R > r``.

    Vertex ``k`` sits at angle ``t = 2 pi k / n`` on
    ``((R + r cos qt) cos pt, (R + r cos qt) sin pt, r sin qt)``.

    Raises
    ------
    LinkError
        ``gcd(p, q) != 1``.
    ResolutionError
        ``n`` is too small for the polygon to be embedded.
    """
    R, r, p, q, n = params.R, params.r, params.p, params.q, params.n
    t = TWO_PI * np.arange(n) / n
    rad = R + r * np.cos(q * t)
    pts = np.column_stack([rad * np.cos(p * t), rad * np.sin(p * t), r * np.sin(q * t)])
    try:
        curve = PolygonalCurve(pts)
    except ValueError as exc:
        raise ResolutionError(f"n={n} too small for T({p},{q}): {exc}") from exc
    if min_self_distance(curve) <= 1e-9 * curve.length:
        raise ResolutionError(f"n={n} too small for T({p},{q}): polygon self-intersects")
    return curve


def torus_residual(curve: PolygonalCurve, R: float, r: float) -> np.ndarray:
    """``(sqrt(x^2 + y^2) - R)^2 + z^2 - r^2`` per vertex; zero on the torus."""
    v = curve.vertices
    return (np.hypot(v[:, 0], v[:, 1]) - R) ** 2 + v[:, 2] ** 2 - r * r


def optimize_aspect(p: int, q: int, n: int, ratio_range=None, rel_tol: float = 1e-4,
                    grid: int = 7, iterations: int = 16):
    """
    Search the aspect ratio ``R/r`` (with ``r = 1``) minimising the certified
    upper bound on the distortion of T(p, q).

    A coarse log-spaced grid (always including ``R/r = 2`` when it lies in
    range) picks a bracket, which golden-section search then refines. The
    best evaluated point is returned, so the result never exceeds any grid
    value. Default range is ``[1.2, 4 max(p, q)]``.

    Returns
    -------
    best_ratio, best_distortion : float
        ``best_distortion`` is the certified ``hi`` at ``best_ratio``.
    """
    if math.gcd(p, q) != 1:
        raise LinkError(f"gcd({p}, {q}) != 1")
    lo, hi = ratio_range if ratio_range is not None else (1.2, 4.0 * max(p, q))
    if not (1.0 < lo < hi):
        raise DomainError(f"aspect range must satisfy 1 < lo < hi, got ({lo}, {hi})")
    cache: dict[float, float] = {}

    def f(x):
        if x not in cache:
            try:
                curve = torus_knot(TorusParams(x, 1.0, p, q, n))
                cache[x] = distortion_certified(curve, rel_tol).hi
            except (ResolutionError, SelfIntersectionError):
                cache[x] = math.inf
        return cache[x]

    xs = list(np.geomspace(lo, hi, grid))
    if lo < 2.0 < hi:
        xs.append(2.0)
    xs = sorted(float(x) for x in xs)
    vals = [f(x) for x in xs]
    k = int(np.argmin(vals))
    a = xs[max(k - 1, 0)]
    b = xs[min(k + 1, len(xs) - 1)]
    g = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - g * (b - a)
    d = a + g * (b - a)
    for _ in range(iterations):
        if f(c) <= f(d):
            b, d = d, c
            c = b - g * (b - a)
        else:
            a, c = c, d
            d = a + g * (b - a)
    best = min(cache, key=lambda x: (cache[x], x))
    return best, cache[best]


def writhe(curve: PolygonalCurve) -> float:
    """
    Writhe of a closed polygon: the Gauss double integral evaluated exactly
    per edge pair as a signed solid angle.

    Raises
    ------
    SelfIntersectionError
        Non-adjacent edges closer than ``1e-9 L``.
    """
    if min_self_distance(curve) <= 1e-9 * curve.length:
        raise SelfIntersectionError("writhe is undefined for a self-intersecting curve")
    rows = K.writhe_rows(np.ascontiguousarray(curve.vertices))
    return float(np.sum(rows)) / TWO_PI


def linking_number(a: PolygonalCurve, b: PolygonalCurve) -> float:
    """Gauss linking integral of two disjoint closed polygons (an integer up to roundoff)."""
    rows = K.linking_rows(np.ascontiguousarray(a.vertices), np.ascontiguousarray(b.vertices))
    return float(np.sum(rows)) / (2.0 * TWO_PI)


@dataclass(frozen=True)
class FrameField:
    """
    Discrete rotation-minimising frame.

    Row ``i`` belongs to vertex ``i`` and is perpendicular to the direction
    of the outgoing edge ``i``. ``holonomy`` is the rotation about the first
    tangent that carries the frame transported once around the curve back
    onto the initial frame.
    """

    tangents: np.ndarray
    normals: np.ndarray
    binormals: np.ndarray
    holonomy: float


def _rotate(v, axis, angle):
    # Rodrigues; axis rows are unit vectors
    c = np.cos(angle)[..., None]
    s = np.sin(angle)[..., None]
    dot = np.einsum("ij,ij->i", axis, v)[:, None]
    return v * c + np.cross(axis, v) * s + axis * dot * (1.0 - c)


def _initial_normal(u_prev, u0):
    w = u_prev - u0
    w = w - np.dot(w, u0) * u0
    nw = np.linalg.norm(w)
    if nw < 1e-9:
        e = np.eye(3)[int(np.argmin(np.abs(u0)))]
        w = e - np.dot(e, u0) * u0
        nw = np.linalg.norm(w)
    return w / nw


def rmf_frame(curve: PolygonalCurve) -> FrameField:
    """
    Rotation-minimising frame by double reflection.

    For edge tangents the double reflection (first across the bisector plane
    of consecutive vertices, then across the plane that maps the reflected
    tangent onto the next one) is exactly the minimal rotation between
    consecutive edge directions.
    """
    U = curve.directions
    n = curve.n
    N = np.empty((n, 3))
    N[0] = _initial_normal(U[-1], U[0])
    for i in range(n):
        r = N[i]
        t0 = U[i]
        t1 = U[(i + 1) % n]
        # the bisector reflection of an edge direction has normal along the edge itself
        rl = r - 2.0 * np.dot(t0, r) * t0
        tl = -t0
        v2 = t1 - tl
        c2 = np.dot(v2, v2)
        nxt = rl - (2.0 / c2) * np.dot(v2, rl) * v2 if c2 > 0 else rl
        nxt -= np.dot(nxt, t1) * t1
        nxt /= np.linalg.norm(nxt)
        if i + 1 < n:
            N[i + 1] = nxt
        else:
            closing = nxt
    B = np.cross(U, N)
    # transported frame vs initial: holonomy rotates the former onto the latter
    ang = math.atan2(float(np.dot(np.cross(closing, N[0]), U[0])), float(np.dot(closing, N[0])))
    return FrameField(tangents=U.copy(), normals=N, binormals=B, holonomy=ang)


@dataclass(frozen=True)
class CableParams:
    base: PolygonalCurve
    p: int
    q: int
    rho: float
    n: int

    def __post_init__(self):
        if self.p < 1:
            raise DomainError("p must be >= 1")
        if math.gcd(self.p, abs(self.q)) != 1:
            raise LinkError(f"gcd({self.p}, {self.q}) != 1: this is a link, not a knot")
        if not self.rho > 0:
            raise DomainError("rho must be positive")
        if self.n < 3:
            raise DomainError("n must be >= 3")


def seifert_twist(curve: PolygonalCurve, frame: FrameField | None = None) -> float:
    """
    Total rotation about the tangent, spread uniformly over arclength, that
    turns the rotation-minimising frame into the Seifert framing.

    The rotation must cancel the holonomy, which fixes it modulo 2 pi; the
    writhe picks the branch whose push-off has linking number zero.
    """
    frame = rmf_frame(curve) if frame is None else frame
    wr = writhe(curve)
    h = frame.holonomy
    # closing needs h + 2 pi k; zero linking needs about -2 pi Wr
    k = round((-TWO_PI * wr - h) / TWO_PI)
    return h + TWO_PI * k


def _vertex_normals(curve: PolygonalCurve, frame: FrameField) -> tuple[np.ndarray, np.ndarray]:
    # normal at each vertex half-way between the incoming and outgoing edge frames,
    # plus an extra row for vertex 0 reached at the end of the loop
    U = curve.directions
    N = frame.normals
    n = curve.n
    axis = np.cross(np.roll(U, 1, axis=0), U)
    sin_t = np.linalg.norm(axis, axis=1)
    ang = np.arctan2(sin_t, np.einsum("ij,ij->i", np.roll(U, 1, axis=0), U))
    axis = np.where(sin_t[:, None] > 1e-15, axis / np.maximum(sin_t, 1e-300)[:, None], 0.0)
    out = np.empty((n + 1, 3))
    out[1:n] = _rotate(N[: n - 1], axis[1:], 0.5 * ang[1:])
    out[0] = _rotate(N[0:1], axis[0:1], -0.5 * ang[0:1])[0]
    # transport edge n-1 into vertex 0: equals out[0] rotated by the holonomy
    out[n] = _rotate(N[n - 1 : n], axis[0:1], 0.5 * ang[0:1])[0]
    tv = np.roll(U, 1, axis=0) + U
    tv /= np.linalg.norm(tv, axis=1)[:, None]
    return out, np.vstack([tv, tv[:1]])


def tube_margin(curve: PolygonalCurve, rho: float) -> float:
    """
    Self-distance of ``curve`` ignoring edge pairs less than ``pi rho`` apart
    along the curve.

    Nearby edges of a finely sampled polygon are always about an edge length
    apart, so the plain self-distance says nothing about whether a tube of
    radius ``rho`` fits. The local (curvature) constraint is left to the
    embedding check on the output.
    """
    S = np.ascontiguousarray(curve.cum_arclength)
    return float(K.far_self_distance(curve.vertices, S, curve.length, math.pi * rho))


def curvature_radius(curve: PolygonalCurve) -> float:
    """
    Smallest discrete bending radius ``min(l_in, l_out) / (2 sin(theta / 2))``
    over vertices with turning angle ``theta``; exact for a regular polygon
    on its circumcircle. A tube wider than this folds over itself.
    """
    U = curve.directions
    ell = curve.edge_lengths
    cos_t = np.clip(np.einsum("ij,ij->i", np.roll(U, 1, axis=0), U), -1.0, 1.0)
    half = np.sin(0.5 * np.arccos(cos_t))
    short = np.minimum(ell, np.roll(ell, 1))
    with np.errstate(divide="ignore"):
        return float(np.min(np.where(half > 0, 0.5 * short / half, np.inf)))


def cable(params: CableParams) -> PolygonalCurve:
    """
    The (p, q)-cable of ``params.base``: ``p`` turns along the base and ``q``
    turns around it, measured against the Seifert framing.

    Sample ``k`` sits at base arclength ``u = k p L / n``, offset by ``rho``
    at meridional angle ``2 pi q u / (p L)`` in the Seifert-corrected frame
    ``(nu, nu x T)``. On a counter-clockwise planar circle this is the
    discretised :func:`torus_knot`.

    Raises
    ------
    TubeRadiusError
        ``rho`` is at least half the base's self-distance (see
        :func:`tube_margin`) or its smallest bending radius, or the output
        polygon is not embedded.
    """
    base, p, q, rho, n = params.base, params.p, params.q, params.rho, params.n
    margin = tube_margin(base, rho)
    if not rho < 0.5 * margin:
        raise TubeRadiusError(f"rho={rho} must be below half the base self-distance {0.5 * margin:.6g}")
    bend = curvature_radius(base)
    if not rho < bend:
        raise TubeRadiusError(f"rho={rho} must be below the base's smallest bending radius {bend:.6g}")
    frame = rmf_frame(base)
    twist = seifert_twist(base, frame)
    L = base.length
    m = base.n
    Nv, Tv = _vertex_normals(base, frame)
    S = np.append(base.cum_arclength, L)
    # twist the vertex frames; afterwards row m agrees with row 0
    Nv = _rotate(Nv, Tv, twist * S / L)

    u = p * L * np.arange(n) / n
    k, off = base.locate(u)
    lam = (off / base.edge_lengths[k])[:, None]
    T = base.directions[k]
    nrm = (1.0 - lam) * Nv[k] + lam * Nv[k + 1]
    nrm -= np.einsum("ij,ij->i", nrm, T)[:, None] * T
    nrm /= np.linalg.norm(nrm, axis=1)[:, None]
    other = np.cross(nrm, T)
    theta = TWO_PI * q * u / (p * L)
    pts = base.point_at(u) + rho * (np.cos(theta)[:, None] * nrm + np.sin(theta)[:, None] * other)
    try:
        out = PolygonalCurve(pts)
    except ValueError as exc:
        raise TubeRadiusError(f"cable polygon degenerate: {exc}") from exc
    if min_self_distance(out) <= 1e-9 * out.length:
        raise TubeRadiusError("cable polygon self-intersects; reduce rho or raise n")
    return out


def measure(curve: PolygonalCurve, rel_tol: float = 1e-6) -> DistortionBracket:
    """Shorthand for :func:`distortion_certified`."""
    return distortion_certified(curve, rel_tol)
