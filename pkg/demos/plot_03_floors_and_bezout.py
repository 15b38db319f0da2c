"""
Lower bounds and the Bezout term
================================

Every closed curve has distortion at least pi/2, every nontrivial knot at
least 5 pi/3, a (p, q) torus knot at least min(p, q)/160 and a p-cable at
least p/160. The upper estimate for torus knots involves
``min |xp| + |yq|`` over ``xp + yq = 1``, always at least ``max(p, q)``.
"""

from knotdist.bounds import (bezout_min, check_bounds, dominant_floor, lower_bound, obstruction_standard_torus,
                             sharpness_ratio)
from knotdist.distortion import distortion_certified
from knotdist.knots import TorusParams, torus_knot

for p, q in [(2, 3), (3, 7), (5, 8), (13, 21)]:
    print(f"bezout_min({p},{q}) = {bezout_min(p, q)}, I = {obstruction_standard_torus(p, q)}")

for d in ["unknown", "torus(2,3)", "torus(320,321)", "torus(1000,1001)", "cable(5)"]:
    print(f"{d:18s} floors:", [(f.name, round(f.value, 4)) for f in lower_bound(d)],
          "dominant:", dominant_floor(d).name)

b = distortion_certified(torus_knot(TorusParams(2.0, 0.5, 3, 4, 480)), 1e-6)
report = check_bounds("torus(3,4)", b)
print("T(3,4) hi", b.hi, "passed", report.passed)
print("margins", report.margins())
print("sharpness ratio", sharpness_ratio(3, 4, b.hi))
