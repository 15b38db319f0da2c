import math
from fractions import Fraction

import numpy as np
import pytest

from knotdist.curve import PolygonalCurve
from knotdist.distortion import distortion_certified
from knotdist.errors import DegenerateLevelError, DomainError
from knotdist.knots import TorusParams, circle, torus_knot
from knotdist.slices import (BoxGauge, contraction_radius, count_crossings, double_bubble_report, find_good_plane,
                             find_good_radius, fit_gauge, gauge_value, gauge_variation, length_inside,
                             score_constant, crossing_integral)

from conftest import random_rotation
from oracles import box_crossing_integral, box_crossings, random_fourier_curve

ID = BoxGauge()
EPS = 1 / 7
RECT = PolygonalCurve([[-2, -0.01, 0], [2, -0.01, 0], [2, 0.01, 0], [-2, 0.01, 0]])


def random_gauge(rng):
    return BoxGauge(0.3 * rng.normal(size=3), random_rotation(rng))


class TestGauge:
    def test_axis_points(self):
        assert gauge_value(ID, [1, 0, 0]) == 1.0
        assert gauge_value(ID, [0, 2 ** (1 / 3), 0]) == pytest.approx(1.0, rel=1e-15)
        assert gauge_value(ID, [0, 0, -2 ** (2 / 3)]) == pytest.approx(1.0, rel=1e-15)

    def test_homogeneous_and_lipschitz(self, rng):
        for _ in range(50):
            g = BoxGauge(rotation=random_rotation(rng))
            u, v = rng.normal(size=(2, 3))
            lam = rng.uniform(0.01, 100)
            assert gauge_value(g, lam * u) == pytest.approx(lam * gauge_value(g, u), rel=1e-14)
            assert abs(gauge_value(g, u) - gauge_value(g, v)) <= np.linalg.norm(u - v) * (1 + 1e-14)

    def test_rotation_check(self):
        with pytest.raises(DomainError):
            BoxGauge(rotation=[[1, 0, 0], [0, 1, 0], [0, 0, 1 + 1e-9]])
        with pytest.raises(DomainError):
            BoxGauge(center=[0, np.nan, 0])


class TestCrossings:
    def test_rectangle(self):
        assert count_crossings(RECT, ID, 1.0) == 4

    def test_far_circle(self):
        # gauge on the radius-3 circle is at least 3 * 2^(-1/3) > 1
        assert count_crossings(circle(400, 3.0), ID, 1.0) == 0

    def test_even_and_matches_roots(self, rng):
        for _ in range(40):
            c = random_fourier_curve(rng, int(rng.integers(8, 60)), noise=0.05)
            g = random_gauge(rng)
            for r in rng.uniform(0.05, 1.5, size=5):
                k = count_crossings(c, g, r)
                assert k % 2 == 0
                assert k == box_crossings(c, g.center, g.rotation, [r])[0]

    def test_degenerate_level(self):
        with pytest.raises(DegenerateLevelError):
            count_crossings(RECT, ID, 2.0)
        with pytest.raises(DomainError):
            count_crossings(RECT, ID, 0.0)

    def test_variation_rectangle(self):
        v = gauge_variation(RECT, ID, (0.02, 2.0))
        assert v == pytest.approx(4 * 1.98, rel=1e-12)
        assert v <= RECT.length

    def test_variation_outside_range(self):
        assert gauge_variation(circle(100, 3.0), ID, (0.1, 1.0)) == 0.0

    def test_length_inside(self):
        assert length_inside(RECT, ID, 1.0) == pytest.approx(4.0, rel=1e-12)
        assert length_inside(RECT, ID, 10.0) == pytest.approx(RECT.length, rel=1e-14)


def test_coarea(rng):
    for _ in range(200):
        c = random_fourier_curve(rng, int(rng.integers(8, 40)), noise=0.05)
        for _ in range(5):
            g = random_gauge(rng)
            a, b = rng.uniform(0.0, 0.4), rng.uniform(0.8, 2.0)
            v = gauge_variation(c, g, (a, b))
            assert v == pytest.approx(box_crossing_integral(c, g.center, g.rotation, a, b), rel=1e-9, abs=1e-12)
            assert v == pytest.approx(crossing_integral(c, g, (a, b)), rel=1e-12, abs=1e-14)
            assert gauge_variation(c, g) <= c.length * (1 + 1e-12)


class TestGoodSlices:
    def test_far_circle(self):
        r1, k = find_good_radius(circle(200, 3.0), ID, EPS, 2.0)
        assert k == 0 and 1 < r1 < 1 + EPS

    def test_rectangle(self):
        r1, k = find_good_radius(RECT, ID, EPS, 2.0)
        assert k == 4 and 4 <= 80 * 2.0
        s1, kd = find_good_plane(RECT, ID, r1, EPS, 2.0)
        assert kd == 0 and -EPS < s1 < EPS and s1 != 0.0

    def test_plane_misses_offset_curve(self):
        c = circle(100, 0.5).translated([0, 0, 0.5])
        s1, k = find_good_plane(c, ID, 1.05, EPS, 2.0)
        assert k == 0

    def test_minimum_over_levels(self, rng):
        c = random_fourier_curve(rng, 50, noise=0.05).scaled(0.9)
        r1, k = find_good_radius(c, ID, EPS, 1e3)
        grid = box_crossings(c, ID.center, ID.rotation, np.linspace(1, 1 + EPS, 2003)[1:-1])
        assert k == grid.min()


@pytest.fixture(scope="module")
def slice_fixtures():
    trefoil = torus_knot(TorusParams(2.0, 0.5, 2, 3, 600)).scaled(1 / 3, center=[0, 0, 0])
    t34 = torus_knot(TorusParams(2.0, 0.5, 3, 4, 800))
    g, s = fit_gauge(t34, 0.9)
    out = [(trefoil, ID), (t34.scaled(s, center=g.center), g)]
    return [(c, g, distortion_certified(c, 1e-6).hi) for c, g in out]


def test_pipeline_bounds(slice_fixtures):
    for c, g, dhi in slice_fixtures:
        rep = double_bubble_report(c, g, EPS, dhi, obstruction=2)
        assert 1 < rep.r1 < 1 + EPS and -EPS < rep.s1 < EPS
        assert rep.count_shell <= 80 * dhi
        assert rep.count_disk <= 40 * dhi
        assert rep.score == rep.count_shell + 2 * rep.count_disk <= 160 * dhi
        assert rep.certified_bounds == pytest.approx((80 * dhi, 40 * dhi, 160 * dhi), rel=1e-12)


def test_far_curve_report():
    rep = double_bubble_report(circle(100, 1.0).translated([20, 0, 0]), ID, EPS, 2.0, obstruction=2)
    assert rep.score == 0 and rep.contraction_applies is True
    assert double_bubble_report(circle(100, 3.0), ID, EPS, 2.0).contraction_applies is None


class TestConstants:
    def test_score_constant(self):
        assert 20 * (1 + 7) == 160
        assert score_constant(Fraction(1, 7)) == 160
        assert score_constant(Fraction(1, 3)) == 80

    def test_contraction_at_one_seventh(self):
        expected = 2 ** (-1 / 3) * (8 / 7) + 1 / 14
        assert contraction_radius(1 / 7) == pytest.approx(expected, abs=1e-12)
        assert contraction_radius(1 / 7) == pytest.approx(0.9785, abs=1e-4)
        assert contraction_radius(1 / 7) < 1

    def test_contraction_slack(self):
        assert all(contraction_radius(e) < 1 for e in np.linspace(1e-6, 1 / 7, 500))
        assert all(contraction_radius(e) >= 1 for e in np.linspace(0.32, 5, 500))
        # the threshold sits where 2^(-1/3)(1+e) + e/2 = 1
        root = (1 - 2 ** (-1 / 3)) / (2 ** (-1 / 3) + 0.5)
        assert contraction_radius(root) == pytest.approx(1.0, abs=1e-15)
        assert 1 / 7 < root < 0.32
