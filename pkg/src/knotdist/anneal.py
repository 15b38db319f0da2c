"""
Distortion minimisation by elementary moves
===========================================

Simulated annealing over single-vertex moves. A move is only proposed to
the Metropolis rule after it has been checked to be an elementary triangle
move (the two swept triangles miss the rest of the polygon), so the knot
type never changes. The hot loop scores curves by a cheap lower estimate
(vertex pairs plus closest points of edge pairs); the best curve so far
is certified exactly every ``certify_every`` steps and at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .curve import PolygonalCurve
from .distortion import DistortionBracket, distortion_certified, distortion_vertex_pairs, min_self_distance
from .errors import DomainError, SelfIntersectionError


def is_isotopy_move(curve: PolygonalCurve, index: int, new_vertex, margin: float = 0.0) -> bool:
    """
    Whether moving vertex ``index`` to ``new_vertex`` is an elementary triangle move.

    True iff the triangles ``(v[i-1], v[i], new)`` and ``(v[i], v[i+1], new)``
    meet no edge other than the four incident to the moved vertex (beyond
    the shared corners), and both new edges stay more than ``margin`` from
    every edge they are not adjacent to.
    """
    n = curve.n
    if not -n <= index < n:
        raise DomainError(f"vertex index {index} out of range for n={n}")
    P = np.asarray(new_vertex, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(P)):
        raise DomainError("new vertex must be finite")
    return bool(K.isotopy_move_ok(np.ascontiguousarray(curve.vertices), index % n, P, float(margin)))


def objective(curve: PolygonalCurve, mode: str = "exact", rel_tol: float = 1e-6) -> float:
    """
    ``exact``: certified upper end ``hi``; ``vertex_fast``: vertex-pair maximum.

    A self-intersecting curve scores ``inf``.
    """
    try:
        if mode == "exact":
            return distortion_certified(curve, rel_tol).hi
        if mode == "vertex_fast":
            # vertex pairs alone cannot see two edges crossing mid-span
            if min_self_distance(curve) <= 0.0:
                return math.inf
            return distortion_vertex_pairs(curve)[0]
    except (SelfIntersectionError, ValueError):
        return math.inf
    raise DomainError(f"unknown objective mode {mode!r}")


@dataclass(frozen=True)
class AnnealConfig:
    """
    Parameters
    ----------
    iterations : int
    initial_amplitude : float
        Proposal step as a fraction of the mean edge length. The step
        shrinks with the square root of the temperature, down to 5% of
        its initial size.
    cooling : float
        Per-iteration temperature factor in ``(0, 1)``.
    seed : int
    certify_every : int
        Steps between exact certifications of the best curve.
    rel_tol : float
        Bracket width for certification.
    initial_temperature : float
        Metropolis temperature for relative objective changes.
    witness_window : int
        Witness-biased moves pick a vertex within this many steps of either
        end of the current witness pair.
    """

    iterations: int = 10_000
    initial_amplitude: float = 0.25
    cooling: float = 0.999
    seed: int = 0
    certify_every: int = 1000
    rel_tol: float = 1e-6
    initial_temperature: float = 1e-2
    witness_window: int = 2

    def __post_init__(self):
        if self.iterations < 1:
            raise DomainError("iterations must be >= 1")
        if not 0.0 < self.cooling < 1.0:
            raise DomainError("cooling must lie in (0, 1)")
        if self.certify_every < 1:
            raise DomainError("certify_every must be >= 1")
        if not self.initial_amplitude > 0 or not self.initial_temperature > 0:
            raise DomainError("amplitude and temperature must be positive")
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be positive")


@dataclass(frozen=True)
class MinimizeReport:
    """
    ``history`` holds the certified ``hi`` of the best curve after each
    certification, starting from the input; it never increases.
    """

    initial: DistortionBracket
    final: DistortionBracket
    accepted: int
    rejected: int
    history: tuple[float, ...]
    curve: PolygonalCurve
    config: AnnealConfig = field(repr=False)


def anneal(curve: PolygonalCurve, config: AnnealConfig = AnnealConfig()) -> MinimizeReport:
    """
    Anneal ``curve`` towards lower distortion within its isotopy class.

    Deterministic for a given ``config.seed``. The returned curve is the
    certified best seen, so ``final.hi <= initial.hi``; in the worst case it
    is the input.
    """
    rng = np.random.default_rng(config.seed)
    initial = distortion_certified(curve, config.rel_tol)
    V = np.array(curve.vertices)
    V.flags.writeable = True
    n = curve.n
    mean_edge = curve.length / n
    margin = 1e-6 * mean_edge
    f, wi, wj = K.fast_pairs_seq(V)
    best_V = V.copy()
    best_fast = f
    cert_curve, cert = curve, initial
    history = [initial.hi]
    temp = config.initial_temperature
    accepted = rejected = 0
    done = 0
    while done < config.iterations:
        m = min(config.certify_every, config.iterations - done)
        rand = np.empty((m, 6))
        rand[:, :2] = rng.random((m, 2))
        rand[:, 2:5] = rng.normal(size=(m, 3))
        rand[:, 5] = rng.random(m)
        scale = max(math.sqrt(temp / config.initial_temperature), 0.05)
        step = config.initial_amplitude * mean_edge * scale
        f, wi, wj, temp, best_fast, a, r = K.anneal_chunk(
            V, f, wi, wj, temp, step, config.cooling, margin, config.witness_window, rand, best_V, best_fast)
        accepted += a
        rejected += r
        done += m
        cand = PolygonalCurve(best_V)
        if not cand == cert_curve:
            b = distortion_certified(cand, config.rel_tol)
            if b.hi < cert.hi:
                cert_curve, cert = cand, b
        history.append(cert.hi)
    return MinimizeReport(
        initial=initial,
        final=cert,
        accepted=accepted,
        rejected=rejected,
        history=tuple(history),
        curve=cert_curve,
        config=config,
    )
