import math

import numpy as np
import pytest

from knotdist.bounds import check_bounds
from knotdist.curve import PolygonalCurve, perturb, regular_polygon
from knotdist.distortion import distortion_certified, min_self_distance
from knotdist.errors import DomainError, LinkError, ResolutionError, SelfIntersectionError, TubeRadiusError
from knotdist.knots import (CableParams, TorusParams, cable, circle, linking_number, optimize_aspect, rmf_frame,
                            seifert_twist, torus_knot, torus_residual, tube_margin, writhe, curvature_radius)

from conftest import random_rotation
from oracles import quadrature_writhe, random_fourier_curve

FIVE_PI_3 = 5 * math.pi / 3
TWO_PI = 2 * math.pi


def wrap(x):
    return (x + math.pi) % TWO_PI - math.pi


class TestTorusKnot:
    def test_on_surface(self, trefoil):
        assert np.max(np.abs(torus_residual(trefoil, 2.0, 0.5))) < 1e-12
        assert trefoil.n == 600

    def test_vertex_formula(self):
        c = torus_knot(TorusParams(3.0, 1.0, 3, 5, 50))
        t = TWO_PI * 7 / 50
        rad = 3 + math.cos(5 * t)
        np.testing.assert_allclose(c.vertices[7], [rad * math.cos(3 * t), rad * math.sin(3 * t), math.sin(5 * t)],
                                   atol=1e-15)

    def test_params_validation(self):
        with pytest.raises(LinkError):
            TorusParams(2, 0.5, 2, 4, 100)
        with pytest.raises(DomainError):
            TorusParams(0.5, 0.5, 2, 3, 100)
        with pytest.raises(DomainError):
            TorusParams(2, 0.5, 0, 1, 100)
        with pytest.raises(DomainError):
            TorusParams(2, 0.5, 2, 3, 2)

    def test_resolution_error(self):
        with pytest.raises(ResolutionError):
            torus_knot(TorusParams(2, 0.5, 2, 3, 6))

    def test_unknot_small(self):
        b = distortion_certified(torus_knot(TorusParams(2, 0.5, 1, 1, 100)), 1e-6)
        assert b.hi < 5

    @pytest.mark.parametrize("p,q", [(1, 1), (1, 4), (3, 1), (1, 7)])
    def test_unknots_respect_gromov(self, p, q):
        b = distortion_certified(torus_knot(TorusParams(2, 0.5, p, q, 50 * max(p, q))), 1e-6)
        assert b.lo >= math.pi / 2 * (1 - 1e-6)
        assert check_bounds(f"torus({p},{q})", b).passed

    def test_trefoil_denne_sullivan(self, trefoil):
        b = distortion_certified(trefoil, 1e-6)
        assert b.lo >= FIVE_PI_3

    @pytest.mark.parametrize("p,q", [(2, 3), (3, 4), (2, 5)])
    def test_refinement_converges(self, p, q):
        # n >= 300 max(p,q) / 5: doubling moves the bracket by a discretisation error below 0.2%
        n = 60 * max(p, q)
        a = distortion_certified(torus_knot(TorusParams(2, 0.5, p, q, n)), 1e-6)
        b = distortion_certified(torus_knot(TorusParams(2, 0.5, p, q, 2 * n)), 1e-6)
        assert abs(a.lo - b.lo) / b.lo < 2e-3


class TestOptimizeAspect:
    def test_dominates_ratio_two(self):
        x, best = optimize_aspect(2, 3, 300, rel_tol=1e-5)
        at2 = distortion_certified(torus_knot(TorusParams(2.0, 1.0, 2, 3, 300)), 1e-5).hi
        assert best <= at2
        assert 1.2 <= x <= 12

    def test_deterministic(self):
        assert optimize_aspect(2, 5, 200) == optimize_aspect(2, 5, 200)

    def test_floor(self):
        assert optimize_aspect(2, 5, 300)[1] >= FIVE_PI_3

    @pytest.mark.parametrize("p,q", [(2, 3), (3, 2)])
    def test_matches_dense_grid(self, p, q):
        # T(2,3) and T(3,2) are different embedding families; each search must find its own minimum
        _, best = optimize_aspect(p, q, 300, rel_tol=1e-4)
        grid = min(distortion_certified(torus_knot(TorusParams(x, 1.0, p, q, 300)), 1e-4).hi
                   for x in np.geomspace(1.2, 4 * max(p, q), 60))
        assert best <= grid * (1 + 5e-3)
        assert best >= FIVE_PI_3

    def test_errors(self):
        with pytest.raises(LinkError):
            optimize_aspect(2, 4, 100)
        with pytest.raises(DomainError):
            optimize_aspect(2, 3, 100, ratio_range=(3.0, 3.0))
        with pytest.raises(DomainError):
            optimize_aspect(2, 3, 100, ratio_range=(0.5, 3.0))


class TestWrithe:
    def test_planar_zero(self, rng):
        assert abs(writhe(regular_polygon(37))) < 1e-10
        pts = rng.normal(size=(40, 2))
        ang = np.argsort(np.arctan2(pts[:, 1], pts[:, 0]))
        star = PolygonalCurve(np.column_stack([pts[ang], np.zeros(40)]))
        assert abs(writhe(star)) < 1e-10

    def test_mirror_and_motion(self, rng, trefoil):
        w = writhe(trefoil)
        assert writhe(trefoil.mirrored()) == pytest.approx(-w, abs=1e-10)
        moved = trefoil.rotated(random_rotation(rng)).translated([1, 2, 3]).scaled(4.5)
        assert writhe(moved) == pytest.approx(w, rel=1e-10)
        assert writhe(trefoil.reversed()) == pytest.approx(w, rel=1e-10)

    def test_matches_quadrature(self, trefoil):
        assert writhe(trefoil) == pytest.approx(quadrature_writhe(trefoil), abs=1e-4)

    def test_random_curves_match_quadrature(self, rng):
        for _ in range(3):
            c = random_fourier_curve(rng, 80)
            assert writhe(c) == pytest.approx(quadrature_writhe(c), abs=1e-4)

    def test_self_intersecting(self):
        fig8 = PolygonalCurve([[0, 0, 0], [1, 1, 0], [1, 0, 0], [0, 1, 0]])
        with pytest.raises(SelfIntersectionError):
            writhe(fig8)


class TestFrame:
    def test_circle_flat(self):
        f = rmf_frame(circle(64))
        assert abs(f.holonomy) < 1e-8

    def test_orthonormal_right_handed(self, trefoil):
        f = rmf_frame(trefoil)
        T, N, B = f.tangents, f.normals, f.binormals
        for a, b in ((T, N), (T, B), (N, B)):
            assert np.max(np.abs(np.einsum("ij,ij->i", a, b))) < 1e-10
        for a in (T, N, B):
            assert np.max(np.abs(np.linalg.norm(a, axis=1) - 1)) < 1e-10
        assert np.all(np.linalg.det(np.stack([T, N, B], axis=2)) > 0)

    def test_minimal_rotation(self, rng):
        c = random_fourier_curve(rng, 50)
        f = rmf_frame(c)
        U, N = f.tangents, f.normals
        for i in range(c.n - 1):
            axis = np.cross(U[i], U[i + 1])
            s, co = np.linalg.norm(axis), U[i] @ U[i + 1]
            k = axis / s
            v = N[i]
            rot = v * co + np.cross(k, v) * s + k * (k @ v) * (1 - co)
            np.testing.assert_allclose(N[i + 1], rot, atol=1e-10)

    def test_calugareanu(self, rng):
        for _ in range(4):
            c = random_fourier_curve(rng, 70)
            h = rmf_frame(c).holonomy
            assert abs(wrap(h + TWO_PI * quadrature_writhe(c))) < 1e-3


class TestCable:
    def test_circle_cable_matches_torus_knot(self, trefoil):
        c = cable(CableParams(circle(300, 2.0), 2, 3, 0.5, 600))
        a = distortion_certified(c, 1e-6)
        b = distortion_certified(trefoil, 1e-6)
        assert abs(a.lo - b.lo) / b.lo < 0.05
        assert min_self_distance(c) > 0

    def test_pushoff_has_zero_linking(self, rng):
        for _ in range(4):
            base = random_fourier_curve(rng, 90)
            rho = 0.2 * tube_margin(base, 0.01)
            push = cable(CableParams(base, 1, 0, rho, 360))
            assert abs(linking_number(base, push)) < 1e-6

    def test_one_twist_links_once(self, rng):
        base = random_fourier_curve(rng, 90)
        push = cable(CableParams(base, 1, 1, 0.02, 720))
        assert abs(abs(linking_number(base, push)) - 1) < 1e-6

    def test_agrees_with_circle_orientation(self):
        # on the flat circle the (1,1) cable and T(1,1) wind the same way around the core
        core = circle(200, 2.0)
        a = cable(CableParams(core, 1, 1, 0.5, 400))
        b = torus_knot(TorusParams(2.0, 0.5, 1, 1, 400))
        assert linking_number(core, a) == pytest.approx(linking_number(core, b), abs=1e-6)

    def test_pushoff_distortion_close_to_base(self, rng, trefoil):
        smooth = random_fourier_curve(rng, 200)
        # the witness chord moves by up to 2 rho, so rho must also be small next to the closest strands
        for base, n in ((smooth, 800), (trefoil, 1800)):
            admissible = min(curvature_radius(base), min_self_distance(base))
            rho = min(0.05 * base.length, 0.05 * admissible)
            push = cable(CableParams(base, 1, 0, rho, n))
            a = distortion_certified(base, 1e-6).lo
            b = distortion_certified(push, 1e-6).lo
            assert abs(b - a) / a < 0.10

    def test_trefoil_cable(self, trefoil):
        try:
            c = cable(CableParams(trefoil, 2, 7, 0.1, 2400))
        except TubeRadiusError:
            pytest.fail("the trefoil's tube of radius 0.1 fits (base self-distance margin ~0.9)")
        assert min_self_distance(c) > 0
        b = distortion_certified(c, 1e-6)
        assert check_bounds("cable(2)", b).passed

    def test_curvature_radius(self, trefoil):
        assert curvature_radius(circle(100, 2.0)) == pytest.approx(2.0, rel=1e-12)
        assert 0 < curvature_radius(trefoil) < math.inf

    def test_errors(self):
        base = circle(100, 2.0)
        with pytest.raises(LinkError):
            CableParams(base, 2, 4, 0.1, 400)
        with pytest.raises(DomainError):
            CableParams(base, 2, 3, 0.0, 400)
        with pytest.raises(TubeRadiusError):
            cable(CableParams(base, 2, 3, 2.5, 400))

    def test_seifert_twist_cancels_holonomy(self, rng):
        c = random_fourier_curve(rng, 60)
        f = rmf_frame(c)
        tw = seifert_twist(c, f)
        assert abs(wrap(tw - f.holonomy)) < 1e-9
        assert tw == pytest.approx(-TWO_PI * writhe(c), abs=1e-6)

    def test_perturbed_base(self, trefoil):
        base = perturb(trefoil, 0.01, 4)
        with pytest.raises(TubeRadiusError):
            cable(CableParams(base, 3, 2, 0.08, 3600))
        c = cable(CableParams(base, 3, 2, 0.5 * curvature_radius(base), 3600))
        assert check_bounds("cable(3)", distortion_certified(c, 1e-6)).passed
