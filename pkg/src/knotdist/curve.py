"""
Closed polygonal space curves
=============================

:class:`PolygonalCurve` is the geometric object every other module works on.
It stores the vertex array together with the cached edge data (unit
directions, lengths, cumulative arclength) that the compiled kernels consume.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import DegenerateCurveError, DomainError

# 1 + cos(turning angle) below this means the polygon doubles back on itself.
_SPIKE_TOL = 1e-12


class PolygonalCurve:
    """
    A closed polygon in R^3; the last vertex connects back to the first.

    Parameters
    ----------
    vertices : array-like
        ``(n, 3)`` vertex coordinates, ``n >= 3``. The closing edge is
        implicit, so the first vertex must not be repeated at the end.

    Raises
    ------
    DegenerateCurveError
        Non-finite coordinates, consecutive repeated vertices or a spike
        (an edge folding straight back along its predecessor).
    """

    __slots__ = ("_v", "_u", "_ell", "_s", "_length")

    def __init__(self, vertices):
        v = np.array(vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise DegenerateCurveError(f"vertices must have shape (n, 3), got {v.shape}")
        if v.shape[0] < 3:
            raise DegenerateCurveError("a closed polygon needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise DegenerateCurveError("vertex coordinates must be finite")
        edges = np.roll(v, -1, axis=0) - v
        ell = np.sqrt(np.einsum("ij,ij->i", edges, edges))
        if np.any(ell <= 0.0):
            k = int(np.argmin(ell))
            raise DegenerateCurveError(f"zero-length edge {k} (vertices {k} and {(k + 1) % len(v)} coincide)")
        u = edges / ell[:, None]
        turn = np.einsum("ij,ij->i", np.roll(u, 1, axis=0), u)
        if np.any(1.0 + turn < _SPIKE_TOL):
            k = int(np.argmin(turn))
            raise DegenerateCurveError(f"polygon folds back on itself at vertex {k}")
        s = np.empty(len(v))
        s[0] = 0.0
        np.cumsum(ell[:-1], out=s[1:])
        for arr in (v, u, ell, s):
            arr.flags.writeable = False
        self._v = v
        self._u = u
        self._ell = ell
        self._s = s
        self._length = float(s[-1] + ell[-1])

    # -- cached data -------------------------------------------------------

    @property
    def vertices(self) -> np.ndarray:
        return self._v

    @property
    def n(self) -> int:
        return self._v.shape[0]

    def __len__(self):
        return self.n

    @property
    def directions(self) -> np.ndarray:
        """Unit direction of edge ``i`` (from vertex ``i`` to ``i + 1``)."""
        return self._u

    @property
    def edge_lengths(self) -> np.ndarray:
        return self._ell

    @property
    def cum_arclength(self) -> np.ndarray:
        """Arclength from vertex 0 to vertex ``i``; starts at 0."""
        return self._s

    @property
    def length(self) -> float:
        return self._length

    def __repr__(self):
        return f"PolygonalCurve(n={self.n}, length={self._length:.6g})"

    def __eq__(self, other):
        if not isinstance(other, PolygonalCurve):
            return NotImplemented
        return self._v.shape == other._v.shape and bool(np.array_equal(self._v, other._v))

    __hash__ = None

    # -- evaluation --------------------------------------------------------

    def locate(self, s):
        """
        Edge index and offset along that edge for arclength position(s) ``s``.

        ``s`` is taken modulo the total length.
        """
        s = np.mod(np.asarray(s, dtype=np.float64), self._length)
        k = np.searchsorted(self._s, s, side="right") - 1
        k = np.clip(k, 0, self.n - 1)
        return k, s - self._s[k]

    def point_at(self, s) -> np.ndarray:
        """Position(s) on the polygon at arclength ``s``."""
        k, off = self.locate(s)
        return self._v[k] + off[..., None] * self._u[k]

    # -- rigid motions and similar ------------------------------------------

    def translated(self, offset) -> PolygonalCurve:
        return PolygonalCurve(self._v + np.asarray(offset, dtype=np.float64))

    def scaled(self, factor: float, center=None) -> PolygonalCurve:
        c = np.zeros(3) if center is None else np.asarray(center, dtype=np.float64)
        return PolygonalCurve(c + factor * (self._v - c))

    def rotated(self, rotation) -> PolygonalCurve:
        return PolygonalCurve(self._v @ np.asarray(rotation, dtype=np.float64).T)

    def mirrored(self, axis: int = 2) -> PolygonalCurve:
        v = self._v.copy()
        v[:, axis] *= -1.0
        return PolygonalCurve(v)

    def reversed(self) -> PolygonalCurve:
        return PolygonalCurve(self._v[::-1])

    def centroid(self) -> np.ndarray:
        """Arclength-weighted centroid of the polygon."""
        mids = self._v + 0.5 * self._ell[:, None] * self._u
        return (self._ell[:, None] * mids).sum(axis=0) / self._length


def arc_distance(curve: PolygonalCurve, s: float, t: float) -> float:
    """
    Length of the shorter of the two arcs between positions ``s`` and ``t``.

    Both positions must lie in ``[0, L]``.
    """
    L = curve.length
    if not (0.0 <= s <= L and 0.0 <= t <= L):
        raise DomainError(f"arclength positions must lie in [0, {L}], got {s}, {t}")
    d = abs(s - t)
    return min(d, L - d)


def resample(curve: PolygonalCurve, n: int) -> PolygonalCurve:
    """
    ``n`` points at uniform arclength spacing along ``curve``, starting at vertex 0.

    The new vertices lie on the old polygon, so the result is never longer.
    """
    if n < 3:
        raise DomainError(f"resample needs n >= 3, got {n}")
    s = curve.length * np.arange(n) / n
    k, off = curve.locate(s)
    # positions that land within roundoff of an old vertex snap onto it
    ell = curve.edge_lengths[k]
    close = np.isclose(off, ell, rtol=0.0, atol=1e-13 * curve.length)
    k = np.where(close, (k + 1) % curve.n, k)
    off = np.where(close, 0.0, off)
    pts = curve.vertices[k] + off[:, None] * curve.directions[k]
    return PolygonalCurve(pts)


def perturb(curve: PolygonalCurve, amplitude: float, seed: int) -> PolygonalCurve:
    """
    Displace every vertex by an independent random vector of norm at most ``amplitude``.

    Displacements are uniform in the ball and fully determined by ``seed``.
    """
    if amplitude < 0:
        raise DomainError("amplitude must be non-negative")
    if amplitude == 0:
        return PolygonalCurve(curve.vertices)
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(curve.n, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    radius = amplitude * rng.random(curve.n) ** (1.0 / 3.0)
    return PolygonalCurve(curve.vertices + radius[:, None] * d)


# -- curve file format ------------------------------------------------------


def dumps_curve(curve: PolygonalCurve) -> str:
    """Serialise to the text curve format with 17 significant digits per coordinate."""
    rows = ",\n".join(
        "    [" + ", ".join(_fmt(x) for x in row) + "]" for row in curve.vertices
    )
    return '{\n  "closed": true,\n  "vertices": [\n' + rows + "\n  ]\n}\n"


def _fmt(x: float) -> str:
    text = format(float(x), ".17g")
    if "e" not in text and "." not in text and "n" not in text:
        text += ".0"
    return text


def loads_curve(text: str) -> PolygonalCurve:
    """
    Parse the text curve format.

    Raises
    ------
    ValueError
        Malformed document; ``json.JSONDecodeError`` (a ``ValueError``)
        carries the line and column.
    DegenerateCurveError
        The vertex list violates the polygon invariants.
    """
    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise ValueError("curve document must be an object")
    if doc.get("closed") is not True:
        raise ValueError('curve document must declare "closed": true')
    verts = doc.get("vertices")
    if not isinstance(verts, list) or not all(
        isinstance(p, list) and len(p) == 3 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in p)
        for p in verts
    ):
        raise ValueError('"vertices" must be an array of [x, y, z] number triples')
    return PolygonalCurve(verts)


def read_curve(path) -> PolygonalCurve:
    return loads_curve(Path(path).read_text())


def write_curve(curve: PolygonalCurve, path) -> None:
    Path(path).write_text(dumps_curve(curve))


def regular_polygon(n: int, radius: float = 1.0) -> PolygonalCurve:
    """Regular ``n``-gon in the xy-plane, vertex 0 on the positive x-axis."""
    if n < 3:
        raise DomainError("a polygon needs n >= 3")
    t = 2.0 * math.pi * np.arange(n) / n
    return PolygonalCurve(np.column_stack([radius * np.cos(t), radius * np.sin(t), np.zeros(n)]))
