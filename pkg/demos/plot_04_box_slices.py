"""
Box slices and the double-bubble score
======================================

The anisotropic box ``{|x| < r, |y| < 2^(1/3) r, |z| < 2^(2/3) r}`` is the
sublevel set of a 1-Lipschitz gauge, so crossing counts of its boundary
integrate to at most the length of the curve. A radius in (1, 1 + eps) and
a splitting plane in (-eps, eps) with few crossings always exist; at
eps = 1/7 the resulting score is at most 160 times the distortion.
"""

from fractions import Fraction

from knotdist.distortion import distortion_certified
from knotdist.knots import TorusParams, torus_knot
from knotdist.slices import (BoxGauge, contraction_radius, count_crossings, double_bubble_report, gauge_variation,
                             score_constant)

curve = torus_knot(TorusParams(2.0, 0.5, 2, 3, 600)).scaled(1 / 3, center=[0, 0, 0])
g = BoxGauge()
print("crossings of the unit box boundary:", count_crossings(curve, g, 1.0))
print("total variation", gauge_variation(curve, g), "<= length", curve.length)

delta = distortion_certified(curve, 1e-6).hi
rep = double_bubble_report(curve, g, 1 / 7, delta, obstruction=2)
print(f"r1 = {rep.r1:.5f}, s1 = {rep.s1:.5f}")
print(f"score {rep.count_shell} + 2*{rep.count_disk} = {rep.score}, bound {rep.certified_bounds[2]:.1f}")
print("score below I = 2:", rep.contraction_applies)

print("20 (1 + 1/eps) at eps = 1/7:", score_constant(Fraction(1, 7)))
print("contraction radius at 1/7:", contraction_radius(1 / 7))
