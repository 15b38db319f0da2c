"""
Certified distortion of a polygon
=================================

The distortion of a closed curve is the largest ratio of arc distance to
chord distance over all pairs of points. For a polygon the maximising pair
need not be a pair of vertices, so sampling vertices only gives a lower
estimate. ``distortion_certified`` returns a bracket ``[lo, hi]`` that is
guaranteed to contain the true value.
"""

import math

import numpy as np

from knotdist.curve import PolygonalCurve, regular_polygon
from knotdist.distortion import distortion_certified, distortion_vertex_pairs, ratio_at

# the unit square: vertex pairs see sqrt(2), opposite edge midpoints give 2
square = PolygonalCurve([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]])
print("vertex pairs:", distortion_vertex_pairs(square)[0])
b = distortion_certified(square, rel_tol=1e-6)
print(f"certified:    [{b.lo:.9f}, {b.hi:.9f}] at arclengths {b.witness}")
print("ratio at the witness:", ratio_at(square, *b.witness))

# a fine regular polygon approaches the circle's value pi/2, the smallest possible
for n in (8, 64, 1024):
    b = distortion_certified(regular_polygon(n), 1e-9)
    print(f"{n:5d}-gon: {b.lo:.9f}  (pi/2 = {math.pi / 2:.9f})")

# distortion ignores rigid motions and scale
rng = np.random.default_rng(0)
q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
moved = square.rotated(q if np.linalg.det(q) > 0 else -q).scaled(7.5).translated([1, 2, 3])
print("moved square:", distortion_certified(moved, 1e-6).lo)
