import math
from fractions import Fraction

import pytest

from knotdist.bounds import (DENNE_SULLIVAN, GROMOV, LONGITUDE, MERIDIAN, KnotDescriptor, TorusClass, bezout_min,
                             check_bounds, dominant_floor, extended_gcd, intersection_number, lower_bound,
                             obstruction_standard_torus, parse_descriptor, sharpness_ratio)
from knotdist.distortion import DistortionBracket
from knotdist.errors import DomainError

from oracles import brute_bezout

COPRIME_50 = [(p, q) for p in range(2, 51) for q in range(p + 1, 51) if math.gcd(p, q) == 1]


def bracket(lo, hi):
    return DistortionBracket(lo=lo, hi=hi, witness=(0.0, 0.0), refinement_depth=0)


class TestBezout:
    @pytest.mark.parametrize("p,q,expected", [(2, 3, 5), (3, 7, 13), (1, 1, 1), (1, 9, 1), (9, 1, 1)])
    def test_examples(self, p, q, expected):
        assert bezout_min(p, q) == expected

    def test_extended_gcd(self):
        for p, q in COPRIME_50[::37]:
            g, x, y = extended_gcd(p, q)
            assert g == 1 and x * p + y * q == 1

    def test_matches_brute_force(self):
        for p, q in COPRIME_50:
            b = bezout_min(p, q)
            assert b == brute_bezout(p, q)
            assert b >= max(p, q)
            assert b == bezout_min(q, p)

    @pytest.mark.parametrize("p", range(2, 7))
    def test_consecutive_family(self, p):
        assert bezout_min(p, p + 1) == 2 * p + 1

    @pytest.mark.parametrize("p,q", [(2, 4), (6, 9), (0, 3), (3, -1)])
    def test_domain(self, p, q):
        with pytest.raises(DomainError):
            bezout_min(p, q)


class TestIntersection:
    @pytest.mark.parametrize("c,expected", [(LONGITUDE, 3), (MERIDIAN, 2), (TorusClass(2, 3), 0)])
    def test_examples(self, c, expected):
        assert intersection_number(c, TorusClass(2, 3)) == expected

    def test_symmetric_and_zero_iff_equal(self):
        classes = [TorusClass(a, b) for a in range(-4, 5) for b in range(-4, 5)
                   if (a, b) != (0, 0) and math.gcd(abs(a), abs(b)) == 1]
        for c1 in classes:
            for c2 in classes:
                i = intersection_number(c1, c2)
                assert i == intersection_number(c2, c1)
                same = (c1.a, c1.b) in ((c2.a, c2.b), (-c2.a, -c2.b))
                assert (i == 0) == same

    def test_non_primitive(self):
        with pytest.raises(DomainError):
            intersection_number(TorusClass(2, 4), LONGITUDE)
        with pytest.raises(DomainError):
            TorusClass(0, 0)

    @pytest.mark.parametrize("p,q,expected", [(2, 3, 2), (1, 8, 1), (5, 7, 5), (7, 5, 5)])
    def test_obstruction(self, p, q, expected):
        assert obstruction_standard_torus(p, q) == expected

    def test_obstruction_attained(self):
        for p, q in COPRIME_50[::11]:
            vals = [intersection_number(c, TorusClass(p, q)) for c in (LONGITUDE, MERIDIAN)]
            assert obstruction_standard_torus(p, q) == min(vals)

    def test_obstruction_domain(self):
        with pytest.raises(DomainError):
            obstruction_standard_torus(4, 6)


class TestFloors:
    def test_trefoil(self):
        floors = {f.name: f for f in lower_bound("torus(2,3)")}
        assert floors["denne_sullivan"].value == pytest.approx(5.236, abs=1e-3)
        assert floors["torus_min_pq"].exact == Fraction(2, 160)
        assert floors["gromov"].value == GROMOV
        assert floors["ratio"].exact == 1

    def test_dominant(self):
        assert dominant_floor("torus(320,321)").value == DENNE_SULLIVAN
        assert {f.name: f.exact for f in lower_bound("torus(320,321)")}["torus_min_pq"] == 2
        d = dominant_floor("torus(1000,1001)")
        assert d.name == "torus_min_pq" and d.exact == Fraction(25, 4)

    @pytest.mark.parametrize("text", ["torus(1,5)", "torus(4,1)", "unknown"])
    def test_unknots_only_gromov(self, text):
        names = {f.name for f in lower_bound(text)}
        assert "denne_sullivan" not in names
        assert dominant_floor(text).value == GROMOV

    def test_cable(self):
        floors = {f.name: f for f in lower_bound("cable(3)")}
        assert floors["cable_p"].exact == Fraction(3, 160)
        assert "denne_sullivan" in floors
        assert dominant_floor("nontrivial").value == DENNE_SULLIVAN

    def test_monotone(self):
        pairs = [(1, 2), (2, 3), (3, 5), (4, 7)] + [(p, p + 1) for p in (50, 200, 400, 900)]
        for a in pairs:
            for b in pairs:
                if min(a) >= min(b):
                    fa = {f.name: f.value for f in lower_bound(f"torus{a}".replace(" ", ""))}
                    fb = {f.name: f.value for f in lower_bound(f"torus{b}".replace(" ", ""))}
                    assert set(fb) <= set(fa)
                    assert all(fa[k] >= fb[k] for k in fb)


class TestCheckBounds:
    @pytest.mark.parametrize("text,lo,hi,passed", [
        ("torus(2,3)", 5.8, 5.9, True),
        ("torus(2,3)", 1.0, 1.1, False),
        ("unknown", 1.4, 1.45, False),
        ("unknown", 1.6, 1.7, True),
        ("torus(1000,1001)", 6.0, 6.25, True),
    ])
    def test_examples(self, text, lo, hi, passed):
        r = check_bounds(text, bracket(lo, hi))
        assert r.passed is passed
        assert (min(m for _, m in r.margins()) >= 0) is passed

    def test_exact_rational_comparison(self):
        # 6.25 is exact in binary; the tiniest step below it fails
        assert check_bounds("torus(1000,1001)", bracket(6.0, 6.25)).passed
        assert not check_bounds("torus(1000,1001)", bracket(6.0, math.nextafter(6.25, 0))).passed

    def test_uses_hi(self):
        assert check_bounds("torus(2,3)", bracket(1.0, 6.0)).passed

    def test_no_measurement(self):
        r = check_bounds("torus(2,3)", None)
        assert r.passed is None and r.margins() == []
        assert r.max_floor.name == "denne_sullivan"


class TestDescriptor:
    @pytest.mark.parametrize("text,expected", [
        ("torus(2,3)", KnotDescriptor("torus", 2, 3)),
        (" torus( 3 , 4 ) ", KnotDescriptor("torus", 3, 4)),
        ("cable(4)", KnotDescriptor("cable", 4)),
        ("cable(2,7)", KnotDescriptor("cable", 2, 7)),
        ("nontrivial", KnotDescriptor("nontrivial")),
        ("unknown", KnotDescriptor("unknown")),
    ])
    def test_parse(self, text, expected):
        d = parse_descriptor(text)
        assert d == expected
        assert parse_descriptor(str(d)) == d

    @pytest.mark.parametrize("text", ["torus(2)", "torus(2,4)", "torus(a,b)", "cable()", "cable(0)",
                                      "trefoil", "unknown(1)", "torus(2,3"])
    def test_rejects(self, text):
        with pytest.raises(DomainError):
            parse_descriptor(text)


class TestSharpness:
    @pytest.mark.parametrize("p", range(2, 7))
    def test_family_denominator(self, p):
        assert sharpness_ratio(p, p + 1, 2 * p + 1) == 1.0

    def test_unknot(self):
        assert sharpness_ratio(1, 1, 1.7) == 1.7

    def test_upper_bounded_by_max(self):
        for p, q in COPRIME_50[::7]:
            assert sharpness_ratio(p, q, 10.0) <= 10.0 / max(p, q)
