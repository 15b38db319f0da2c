"""
Torus arithmetic and distortion floors
======================================

The explicit upper-bound term ``min |xp| + |yq|`` over ``xp + yq = 1``,
intersection numbers of simple loops on a torus, and every lower bound on
distortion that applies to a given knot descriptor.

Rational floors are kept as :class:`fractions.Fraction` and compared with
a measured value without rounding; the two transcendental floors are
compared in double precision.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

from .distortion import DistortionBracket
from .errors import DomainError

GROMOV = math.pi / 2.0
DENNE_SULLIVAN = 5.0 * math.pi / 3.0
# the constant in both torus-knot and cable floors
FLOOR_CONSTANT = 160


def _coprime(p: int, q: int):
    if p < 1 or q < 1:
        raise DomainError(f"need p, q >= 1, got ({p}, {q})")
    if math.gcd(p, q) != 1:
        raise DomainError(f"gcd({p}, {q}) != 1")


def extended_gcd(a: int, b: int) -> tuple[int, int, int]:
    """``(g, x, y)`` with ``a x + b y = g = gcd(a, b)``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        k, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - k * x1
        y0, y1 = y1, y0 - k * y1
    return a, x0, y0


def bezout_min(p: int, q: int) -> int:
    """
    Minimum of ``|x p| + |y q|`` over integers with ``x p + y q = 1``.

    All solutions are ``(x0 + q t, y0 - p t)``; the objective is convex in
    ``t`` and its minimiser satisfies ``|t| <= |x0|/q + |y0|/p + 1``, so a
    scan of that window is exact.
    """
    _coprime(p, q)
    _, x0, y0 = extended_gcd(p, q)
    span = abs(x0) // q + abs(y0) // p + 2
    return min(abs((x0 + q * t) * p) + abs((y0 - p * t) * q) for t in range(-span, span + 1))


@dataclass(frozen=True)
class TorusClass:
    """Homology class ``a`` longitudes plus ``b`` meridians on a torus."""

    a: int
    b: int

    def __post_init__(self):
        if self.a == 0 and self.b == 0:
            raise DomainError("(0, 0) is not a loop class")

    @property
    def primitive(self) -> bool:
        return math.gcd(abs(self.a), abs(self.b)) == 1


LONGITUDE = TorusClass(1, 0)
MERIDIAN = TorusClass(0, 1)


def intersection_number(c1: TorusClass, c2: TorusClass) -> int:
    """Minimal geometric intersection of two simple loop classes: ``|a1 b2 - b1 a2|``."""
    for c in (c1, c2):
        if not c.primitive:
            raise DomainError(f"class ({c.a}, {c.b}) is not primitive, so not a simple loop")
    return abs(c1.a * c2.b - c1.b * c2.a)


def obstruction_standard_torus(p: int, q: int) -> int:
    """
    Least intersection of ``(p, q)`` with a loop bounding a disk off the
    standard torus. Only the longitude (outside) and meridian (inside)
    bound such disks, so this is ``min(p, q)``.
    """
    _coprime(p, q)
    return min(intersection_number(c, TorusClass(p, q)) for c in (LONGITUDE, MERIDIAN))


# -- knot descriptors and floors --------------------------------------------


@dataclass(frozen=True)
class KnotDescriptor:
    """
    What is known about a curve's knot type.

    ``kind`` is one of ``torus``, ``cable``, ``nontrivial``, ``unknown``.
    A cable is always taken to be of a nontrivial base knot.
    """

    kind: str
    p: int | None = None
    q: int | None = None

    def __post_init__(self):
        if self.kind == "torus":
            if self.p is None or self.q is None:
                raise DomainError("torus descriptor needs p and q")
            _coprime(self.p, self.q)
        elif self.kind == "cable":
            if self.p is None or self.p < 1:
                raise DomainError("cable descriptor needs p >= 1")
        elif self.kind in ("nontrivial", "unknown"):
            if self.p is not None or self.q is not None:
                raise DomainError(f"{self.kind} descriptor takes no parameters")
        else:
            raise DomainError(f"unknown descriptor kind {self.kind!r}")

    @property
    def nontrivial(self) -> bool:
        if self.kind == "torus":
            return min(self.p, self.q) >= 2
        return self.kind in ("cable", "nontrivial")

    def __str__(self):
        if self.kind == "torus":
            return f"torus({self.p},{self.q})"
        if self.kind == "cable":
            return f"cable({self.p})" if self.q is None else f"cable({self.p},{self.q})"
        return self.kind


_DESCRIPTOR = re.compile(r"^\s*(torus|cable|nontrivial|unknown)\s*(?:\(\s*([^)]*?)\s*\))?\s*$")


def parse_descriptor(text) -> KnotDescriptor:
    """
    Parse ``torus(p,q)``, ``cable(p)`` (or ``cable(p,q)``), ``nontrivial`` or ``unknown``.

    Raises
    ------
    DomainError
        Malformed text or invalid parameters.
    """
    if isinstance(text, KnotDescriptor):
        return text
    m = _DESCRIPTOR.match(str(text))
    if not m:
        raise DomainError(f"cannot parse knot descriptor {text!r}")
    kind, args = m.group(1), m.group(2)
    nums = []
    if args:
        try:
            nums = [int(a) for a in args.split(",")]
        except ValueError:
            raise DomainError(f"non-integer parameter in {text!r}") from None
    expected = {"torus": (2,), "cable": (1, 2), "nontrivial": (0,), "unknown": (0,)}[kind]
    if len(nums) not in expected:
        raise DomainError(f"{kind} takes {' or '.join(map(str, expected))} parameters, got {len(nums)}")
    return KnotDescriptor(kind, *nums)


@dataclass(frozen=True)
class Floor:
    name: str
    exact: Fraction | None
    value: float

    def below_or_at(self, x: float) -> bool:
        """``floor <= x``, exactly when the floor is rational."""
        if self.exact is not None:
            return self.exact <= Fraction(x)
        return self.value <= x


def lower_bound(descriptor) -> list[Floor]:
    """Every proven distortion floor applicable to ``descriptor``."""
    d = parse_descriptor(descriptor)
    floors = [Floor("ratio", Fraction(1), 1.0), Floor("gromov", None, GROMOV)]
    if d.nontrivial:
        floors.append(Floor("denne_sullivan", None, DENNE_SULLIVAN))
    if d.kind == "torus":
        f = Fraction(min(d.p, d.q), FLOOR_CONSTANT)
        floors.append(Floor("torus_min_pq", f, float(f)))
    elif d.kind == "cable":
        f = Fraction(d.p, FLOOR_CONSTANT)
        floors.append(Floor("cable_p", f, float(f)))
    return floors


def dominant_floor(descriptor) -> Floor:
    """The largest applicable floor."""
    return max(lower_bound(descriptor), key=lambda f: f.value)


@dataclass(frozen=True)
class BoundsReport:
    """
    Applicable floors against a measured bracket.

    ``passed`` is True iff the certified upper end ``hi`` reaches every
    floor; only then is a bracket consistent with the proven bounds.
    """

    descriptor: KnotDescriptor
    floors: tuple[Floor, ...]
    measured: DistortionBracket | None
    passed: bool | None

    def margins(self) -> list[tuple[str, float]]:
        """``hi - floor`` for every floor; negative means violated."""
        if self.measured is None:
            return []
        return [(f.name, self.measured.hi - f.value) for f in self.floors]

    @property
    def max_floor(self) -> Floor:
        return max(self.floors, key=lambda f: f.value)


def check_bounds(descriptor, measured: DistortionBracket | None) -> BoundsReport:
    d = parse_descriptor(descriptor)
    floors = tuple(lower_bound(d))
    passed = None if measured is None else all(f.below_or_at(measured.hi) for f in floors)
    return BoundsReport(d, floors, measured, passed)


def sharpness_ratio(p: int, q: int, measured_hi: Real) -> float:
    """``measured_hi / bezout_min(p, q)``: the empirical constant in the upper bound."""
    return float(measured_hi) / bezout_min(p, q)
