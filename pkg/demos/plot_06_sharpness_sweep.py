"""
Sharpness along T(p, p+1)
=========================

For the family T(p, p+1), the Bezout term is 2p + 1. Dividing the best
measured distortion by it gives an empirical constant that stays roughly
level across the family.
"""

from knotdist.cli import SWEEP_HEADER, parse_family, sweep_rows

rows = sweep_rows(parse_family("p,p+1"), range(2, 7), aspect_search=True, rel_tol=1e-6)
col = {k: i for i, k in enumerate(SWEEP_HEADER)}
for r in rows:
    print(f"T({r[0]},{r[1]})  R/r = {r[col['R_over_r']]:.3f}  hi = {r[col['hi']]:.4f}  "
          f"bezout = {r[col['bezout_min']]}  ratio = {r[col['sharpness_ratio']]:.4f}")
ratios = [r[col["sharpness_ratio"]] for r in rows]
print("spread", max(ratios) / min(ratios))
