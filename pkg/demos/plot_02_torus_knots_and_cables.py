"""
Torus knots, writhe and cables
==============================

``torus_knot`` samples T(p, q) on a torus of revolution. ``writhe`` is the
exact Gauss integral of a polygon. ``cable`` wraps a (p, q) satellite
around any base curve, using the Seifert framing, in which a q = 0 push-off
does not link the base.
"""

from knotdist.distortion import distortion_certified
from knotdist.knots import (CableParams, TorusParams, cable, circle, curvature_radius, linking_number,
                            optimize_aspect, rmf_frame, torus_knot, tube_margin, writhe)

trefoil = torus_knot(TorusParams(R=2.0, r=0.5, p=2, q=3, n=600))
print("trefoil length", trefoil.length, "writhe", writhe(trefoil))
print("mirror image writhe", writhe(trefoil.mirrored()))
print("bracket", distortion_certified(trefoil, 1e-6))

# the rotation-minimising frame closes up with holonomy -2 pi Wr (mod 2 pi)
print("frame holonomy", rmf_frame(trefoil).holonomy)

# the torus aspect ratio changes the distortion; search it
x, best = optimize_aspect(2, 3, 300)
print(f"best R/r = {x:.4f}, distortion {best:.4f}")

# a (2,3) cable of a flat circle is again a trefoil
c = cable(CableParams(circle(300, 2.0), 2, 3, 0.5, 600))
print("cable of a circle", distortion_certified(c, 1e-6).lo)

# a tube radius must fit both the far self-distance and the bending radius
print("trefoil bending radius", curvature_radius(trefoil), "far self-distance", tube_margin(trefoil, 0.1))
cab = cable(CableParams(trefoil, 2, 7, 0.1, 2400))
push = cable(CableParams(trefoil, 1, 0, 0.1, 1200))
print("(2,7) cable of the trefoil", distortion_certified(cab, 1e-6).lo)
print("push-off linking number", linking_number(trefoil, push))
