import math

import numpy as np
import pytest

from knotdist.anneal import AnnealConfig, anneal, is_isotopy_move, objective
from knotdist.bounds import check_bounds
from knotdist.curve import PolygonalCurve, perturb, regular_polygon
from knotdist.distortion import distortion_certified, min_self_distance
from knotdist.errors import DomainError
from knotdist.knots import TorusParams, torus_knot

from oracles import move_sweeps_strand, random_fourier_curve

HALF_PI = math.pi / 2
FIVE_PI_3 = 5 * math.pi / 3


class TestMoves:
    def test_outward_convex(self):
        c = regular_polygon(12)
        assert is_isotopy_move(c, 3, 1.05 * c.vertices[3])

    def test_zero_move(self, trefoil):
        for i in (0, 77, 599):
            assert is_isotopy_move(trefoil, i, trefoil.vertices[i])

    def test_drag_through_strand(self, trefoil):
        # closest approach between far-apart strands; push vertex i past vertex j
        V = trefoil.vertices
        n = trefoil.n
        d = np.linalg.norm(V[:, None] - V[None], axis=2)
        gap = np.abs(np.arange(n)[:, None] - np.arange(n)[None])
        d[np.minimum(gap, n - gap) < 20] = np.inf
        i, j = np.unravel_index(np.argmin(d), d.shape)
        target = V[j] + 0.5 * (V[j] - V[i])
        assert move_sweeps_strand(trefoil, i, target)
        assert not is_isotopy_move(trefoil, i, target)

    def test_agrees_with_triangle_oracle(self, rng):
        c = random_fourier_curve(rng, 30, noise=0.05)
        scale = c.length / c.n
        agree = 0
        for _ in range(400):
            i = int(rng.integers(c.n))
            new = c.vertices[i] + rng.normal(size=3) * scale * rng.choice([0.3, 3.0, 10.0])
            ok = is_isotopy_move(c, i, new)
            if move_sweeps_strand(c, i, new):
                assert not ok
            else:
                agree += ok
        assert agree > 50

    def test_domain(self, square):
        with pytest.raises(DomainError):
            is_isotopy_move(square, 4, [0, 0, 0])
        with pytest.raises(DomainError):
            is_isotopy_move(square, 0, [np.inf, 0, 0])


class TestObjective:
    def test_square(self, square):
        assert objective(square) == pytest.approx(2.0, abs=1e-12)

    def test_circle(self):
        assert objective(regular_polygon(256)) == pytest.approx(HALF_PI, abs=2e-3)

    def test_fast_below_exact(self, rng):
        for _ in range(10):
            c = random_fourier_curve(rng, int(rng.integers(6, 80)), noise=0.05)
            assert objective(c, "vertex_fast") <= objective(c, "exact")

    def test_self_intersection_is_infinite(self):
        fig8 = PolygonalCurve([[0, 0, 0], [1, 1, 0], [1, 0, 0], [0, 1, 0]])
        assert objective(fig8) == math.inf
        assert objective(fig8, "vertex_fast") == math.inf

    def test_bad_mode(self, square):
        with pytest.raises(DomainError):
            objective(square, "slow")


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(iterations=0), dict(cooling=1.0), dict(cooling=0.0),
                                    dict(certify_every=0), dict(initial_amplitude=0.0), dict(rel_tol=0.0)])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            AnnealConfig(**kw)


def assert_report(rep, descriptor):
    h = rep.history
    assert all(b <= a for a, b in zip(h, h[1:]))
    assert h[0] == rep.initial.hi and h[-1] == rep.final.hi
    assert rep.final.hi <= rep.initial.hi
    assert rep.accepted + rep.rejected == rep.config.iterations
    assert min_self_distance(rep.curve) > 0
    assert distortion_certified(rep.curve, rep.config.rel_tol).hi == rep.final.hi
    assert check_bounds(descriptor, rep.final).passed


class TestAnneal:
    def test_perturbed_circle(self):
        start = perturb(regular_polygon(64), 0.1, 1)
        rep = anneal(start, AnnealConfig(iterations=10_000, seed=0))
        assert_report(rep, "unknown")
        assert HALF_PI <= rep.final.hi <= 1.05 * HALF_PI
        assert rep.final.hi < rep.initial.hi

    def test_deterministic(self):
        start = perturb(regular_polygon(40), 0.1, 2)
        cfg = AnnealConfig(iterations=3000, seed=11, certify_every=500)
        a, b = anneal(start, cfg), anneal(start, cfg)
        assert a.history == b.history and (a.accepted, a.rejected) == (b.accepted, b.rejected)
        assert a.curve == b.curve
        c = anneal(start, AnnealConfig(iterations=3000, seed=12, certify_every=500))
        assert c.curve != a.curve

    def test_trefoil_keeps_floor(self):
        start = torus_knot(TorusParams(2.0, 0.5, 2, 3, 120))
        rep = anneal(start, AnnealConfig(iterations=20_000, cooling=0.9998, certify_every=2000, seed=3))
        assert_report(rep, "torus(2,3)")
        assert rep.final.hi >= FIVE_PI_3

    def test_torus_3_4_keeps_floor(self):
        start = torus_knot(TorusParams(2.0, 0.7, 3, 4, 160))
        rep = anneal(start, AnnealConfig(iterations=5000, certify_every=1000, seed=5))
        assert_report(rep, "torus(3,4)")

    def test_one_iteration(self, square):
        rep = anneal(square, AnnealConfig(iterations=1, seed=0))
        assert_report(rep, "unknown")
        assert len(rep.history) == 2
