"""
Lowering distortion within a knot type
======================================

``anneal`` moves one vertex at a time, only along triangles that no other
edge pierces, so the knot type never changes. Its result is a certified
upper estimate for the least distortion of the knot type; it can never
fall below the proven floors.
"""

import math

from knotdist.anneal import AnnealConfig, anneal
from knotdist.bounds import check_bounds
from knotdist.curve import perturb, regular_polygon
from knotdist.knots import TorusParams, torus_knot

wobbly = perturb(regular_polygon(64), 0.1, seed=1)
rep = anneal(wobbly, AnnealConfig(iterations=10_000, seed=0))
print(f"circle: {rep.initial.hi:.4f} -> {rep.final.hi:.4f}  (pi/2 = {math.pi / 2:.4f})")
print("accepted", rep.accepted, "rejected", rep.rejected)

trefoil = torus_knot(TorusParams(2.0, 0.5, 2, 3, 120))
rep = anneal(trefoil, AnnealConfig(iterations=20_000, cooling=0.9998, certify_every=2000, seed=0))
print("trefoil history", [round(h, 3) for h in rep.history])
print("floors respected:", check_bounds("torus(2,3)", rep.final).passed)
