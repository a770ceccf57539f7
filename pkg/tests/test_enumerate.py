from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _polytopes import random_polytope
from metasynth.enumerate import (
    EnumerationCapExceeded,
    brute_force_enumerate,
    em_feasible,
    find_integer_point,
    ip_enumerate,
    slice_at,
    unimodular_completion,
)
from metasynth.polytope import RationalPolytope


def box(lo, hi, n):
    return RationalPolytope.box([lo] * n, [hi] * n)


def test_square_nine_points():
    pts, stats = ip_enumerate(box(Fraction(-3, 2), Fraction(3, 2), 2))
    assert pts == {(x, y) for x in (-1, 0, 1) for y in (-1, 0, 1)}


def test_em_examples():
    assert em_feasible(box(Fraction(1, 10), Fraction(9, 10), 4))
    assert not em_feasible(box(Fraction(-1, 2), Fraction(1, 2), 4))


def test_empty_interior_has_no_bisections():
    pts, stats = ip_enumerate(box(Fraction(1, 10), Fraction(9, 10), 4))
    assert pts == set() and stats.bisection_count == 0


def test_unit_cube_sixteen_points():
    assert len(brute_force_enumerate(box(0, 1, 4))) == 16
    assert ip_enumerate(box(0, 1, 4))[0] == brute_force_enumerate(box(0, 1, 4))


def test_thin_slab_matches_scan_over_y():
    ratio = Fraction(665857, 470832)
    P = RationalPolytope(
        [[1, ratio], [-1, -ratio], [1, 0], [-1, 0], [0, 1], [0, -1]],
        [Fraction(300001, 10**6), Fraction(-3, 10), 1000, 1000, 1000, 1000],
    )
    want = set()
    for y in range(-1000, 1001):
        lo, hi = Fraction(3, 10) - ratio * y, Fraction(300001, 10**6) - ratio * y
        for x in range(-(-lo.numerator // lo.denominator), hi.numerator // hi.denominator + 1):
            if abs(x) <= 1000:
                want.add((x, y))
    pts, _ = ip_enumerate(P)
    assert pts == want
    interior = {p for p in want if P.contains(p, strict=True)}
    assert em_feasible(P) == (not interior)


def test_limit_truncates():
    pts, stats = ip_enumerate(box(-5, 5, 2), limit=10)
    assert len(pts) == 10 and stats.truncated


def test_brute_force_cap():
    with pytest.raises(EnumerationCapExceeded):
        brute_force_enumerate(box(-50, 50, 4), cap=1000)


@given(st.lists(st.integers(-30, 30), min_size=2, max_size=4))
def test_unimodular_completion(c):
    from math import gcd
    from functools import reduce

    g = reduce(gcd, c)
    if g == 0:
        return
    c = [x // g for x in c]
    cols = unimodular_completion(c)
    assert sum(a * b for a, b in zip(c, cols[0])) == 1
    assert all(sum(a * b for a, b in zip(c, col)) == 0 for col in cols[1:])


def test_slice_points_map_back():
    P = box(-3, 3, 3)
    Q, f = slice_at(P, (1, 2, -1), 2)
    for y in brute_force_enumerate(Q):
        x = f(y)
        assert P.contains(x) and x[0] + 2 * x[1] - x[2] == 2


@settings(max_examples=60)
@given(st.integers(0, 10**9))
def test_differential_random_polytopes(seed):
    rng = random.Random(seed)
    P = random_polytope(rng, rng.randint(1, 4))
    want = brute_force_enumerate(P)
    got, stats = ip_enumerate(P)
    assert got == want
    if P.dim > 1 and got:
        assert stats.bisection_count <= stats.branching_bound(len(got))
    interior = {p for p in want if P.contains(p, strict=True)}
    assert em_feasible(P) == (not interior)
    point = find_integer_point(P.tightened())
    assert (point is None) == (not want)
