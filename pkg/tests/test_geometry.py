from __future__ import annotations

import json
import random
from fractions import Fraction
from importlib import resources

import numpy as np
import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp

from metasynth.eisenstein import EisensteinInt
from metasynth.exprs import log3, precision
from metasynth.geometry import (
    Candidate,
    IndeterminateComparison,
    LevelMismatch,
    Meniscus,
    NotNormalized,
    QSqrt3,
    ScaledLatticeBasis,
    TwoLevelState,
    distance,
    embed,
    enclosing_polytope,
    in_meniscus,
    iota,
    iota_inverse,
    meniscus_widths,
    sqrt3_power,
)
from metasynth.search import level_candidates

ZERO = TwoLevelState.basis(0)


def _close(xs, ys, tol):
    return all(abs(x - y) < tol for x, y in zip(xs, ys))


def test_embed_examples():
    with precision(256):
        assert embed(ZERO) == [1, 0, 0, 0]
        c, s, r = mp.cos(mp.pi / 9), mp.sin(mp.pi / 9), mp.sqrt(2)
        assert _close(embed(TwoLevelState.phi()), [-c / r, s / r, c / r, s / r], mp.mpf(2) ** -250)
        plus_i = TwoLevelState.from_strings("1/sqrt(2),0", "0,1/sqrt(2)")
        assert _close(embed(plus_i), [1 / r, 0, 0, 1 / r], mp.mpf(2) ** -250)


def test_normalisation_checked():
    with pytest.raises(NotNormalized):
        TwoLevelState.from_strings("1,0", "1,0")
    s = TwoLevelState.from_strings("1,0", "1,0", check=False).normalized()
    assert abs(sum(x * x for x in embed(s)) - 1) < mp.mpf(2) ** -200


def test_levels_validated():
    with pytest.raises(ValueError):
        TwoLevelState.from_strings("1,0", "0,0", (1, 1))
    with pytest.raises(ValueError):
        TwoLevelState.from_strings("1,0", "0,0", (0, 3))


def test_distance_self_and_orthogonal():
    assert distance(ZERO, Candidate(EisensteinInt(1), EisensteinInt(0), 0)) == 0
    one = TwoLevelState.from_strings("0,0", "1,0")
    with precision(256):
        assert abs(distance(one, Candidate(EisensteinInt(1), EisensteinInt(0), 0)) - mp.sqrt(2)) < mp.mpf(10) ** -70


def test_distance_level_mismatch():
    with pytest.raises(LevelMismatch):
        distance(TwoLevelState.phi(), Candidate(EisensteinInt(1), EisensteinInt(0), 0, (0, 1)))


def _table1():
    return json.loads(resources.files("metasynth").joinpath("data/table1.json").read_text())["rows"]


@pytest.mark.parametrize("row", _table1(), ids=lambda r: f"k{r['k']}")
def test_table1_distances(row):
    src = row.get("corrected", row)
    c = Candidate(EisensteinInt.from_json(src["u"]), EisensteinInt.from_json(src["v"]), row["k"], (0, 2))
    d = distance(TwoLevelState.phi(), c, 320)
    with precision(320):
        assert abs(log3(d) - mp.mpf(row["epsilon_log3"])) < 0.05
        assert abs(row["k"] + 3 * log3(d) - mp.mpf(row["residual"])) < 0.05


def test_table1_row1_as_printed_is_far_from_printed_precision():
    row = _table1()[0]
    c = Candidate(EisensteinInt.from_json(row["u"]), EisensteinInt.from_json(row["v"]), 30, (0, 2))
    with precision(320):
        assert abs(log3(distance(TwoLevelState.phi(), c, 320)) + mp.mpf("7.574")) < 0.01


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.integers(-10, 10), st.integers(-10, 10), st.integers(-10, 10))
def test_distance_ignores_third_amplitude(seed, a, b, c):
    s = TwoLevelState.random(random.Random(seed))
    cand = Candidate(EisensteinInt(a, b), EisensteinInt(c, a), 4, s.levels)
    ref = distance(s, cand)
    assert distance(s, cand, w=EisensteinInt(b, c)) == ref
    assert distance(s, cand, w=EisensteinInt(-7, 3)) == ref


@settings(max_examples=40)
@given(st.integers(0, 10**6), st.floats(0.001, 1.4))
def test_meniscus_membership_matches_distance(seed, eps):
    rng = random.Random(seed)
    x, y = TwoLevelState.random(rng, (0, 1)), TwoLevelState.random(rng, (0, 1))
    bits = 10 * 256
    with precision(bits):
        rx, ry = x.r_vector(bits), y.r_vector(bits)
        dist = mp.sqrt(sum((a - b) ** 2 for a, b in zip(rx, ry)))
        inner = sum(a * b for a, b in zip(rx, ry))
        e = mp.mpf(eps)
        assert (dist < e) == (inner > 1 - e * e / 2)


def test_iota_roundtrip_and_basis_images():
    for k in (0, 1, 5):
        B = ScaledLatticeBasis(k)
        for i, v in enumerate(B.vectors()):
            unscaled = tuple(c * sqrt3_power(k) for c in v)
            e = tuple(int(i == j) for j in range(4))
            assert unscaled == iota(e)
    with precision(200):
        a = (3, -7, 11, 2)
        back = iota_inverse([c.mpf() for c in iota(a)])
        assert _close(back, a, mp.mpf(2) ** -190)


def test_gram_exact():
    G = ScaledLatticeBasis(0).gram()
    assert G[0][0] == QSqrt3(Fraction(1)) and G[0][1] == QSqrt3(Fraction(-1, 2))
    assert G[1][1] == QSqrt3(Fraction(1)) and G[0][2] == QSqrt3()
    G2 = ScaledLatticeBasis(2).gram()
    assert G2[0][0] == QSqrt3(Fraction(1, 9))


def test_in_meniscus_examples():
    m = Meniscus(ZERO, "0.1")
    assert not in_meniscus((0, 0, 0, 0), m, 4)
    # u = 3^(k/2), v = 0: norm(u) + norm(v) = 3^k exactly
    assert in_meniscus((9, 0, 0, 0), m, 4)
    assert not in_meniscus((9, 1, 0, 0), m, 4)


def test_in_meniscus_rounded_target_point():
    s = TwoLevelState.phi()
    m = Meniscus(s, "0.1")
    k = 40
    with precision(300):
        S = mp.sqrt(3) ** k
        # just inside the sphere so the ball test holds
        q = [x * S * (1 - mp.mpf("0.0025")) for x in embed(s, 300)]
        a = [int(mp.nint(t)) for t in iota_inverse(q)]
    assert in_meniscus(a, m, k)


def test_indeterminate_on_exact_boundary():
    m = Meniscus(ZERO, "sqrt(2/3)")
    with pytest.raises(IndeterminateComparison):
        in_meniscus((2, 0, 0, 0), m, 2)


def test_epsilon_range():
    with pytest.raises(ValueError):
        Meniscus(ZERO, "1.5")
    with pytest.raises(ValueError):
        Meniscus(ZERO, "0")


def test_polytope_first_coordinate_example():
    P = enclosing_polytope(Meniscus(ZERO, "0.1"), 0)
    lo, _ = P.width_along([1, Fraction(-1, 2), 0, 0])
    assert lo > Fraction(99, 100)


def _rational_direction(v, bits=200):
    return [mpq(int(mp.nint(x * 2**bits)), 2**bits) for x in v]


@pytest.mark.parametrize("k", [6, 12, 20])
def test_polytope_widths_close_to_meniscus(k):
    s = TwoLevelState.phi()
    m = Meniscus(s, "0.05")
    P = enclosing_polytope(m, k)
    along, across = meniscus_widths(m, k)
    with precision(400):
        p = embed(s, 400)
        # <n, iota(a)> = <J^T n, a>
        jt = lambda n: [n[0], -n[0] / 2 + mp.sqrt(3) / 2 * n[1], n[2], -n[2] / 2 + mp.sqrt(3) / 2 * n[3]]
        lo, hi = P.width_along(_rational_direction(jt(p)))
        w = mp.mpf(hi.numerator) / hi.denominator - mp.mpf(lo.numerator) / lo.denominator
        assert along <= w <= 4 * along
        assert w <= mp.sqrt(3) ** k * mp.mpf("0.05") ** 2 * (1 + mp.mpf(2) ** -10)
        o = [mp.mpf(0), 1, 0, 0]
        d = sum(x * y for x, y in zip(o, p))
        o = [x - d * y for x, y in zip(o, p)]
        n = mp.sqrt(sum(x * x for x in o))
        o = [x / n for x in o]
        lo, hi = P.width_along(_rational_direction(jt(o)))
        w = mp.mpf(hi.numerator) / hi.denominator - mp.mpf(lo.numerator) / lo.denominator
        assert across <= w <= 4 * across


@settings(max_examples=8)
@given(st.integers(0, 10**6))
def test_polytope_contains_every_meniscus_point(seed):
    rng = random.Random(seed)
    s = TwoLevelState.random(rng)
    m = Meniscus(s, "0.6")
    k = 4
    P = enclosing_polytope(m, k)
    R = 11
    g = np.arange(-R, R + 1)
    A = np.stack(np.meshgrid(g, g, g, g, indexing="ij"), -1).reshape(-1, 4)
    ball = (A[:, 0] ** 2 - A[:, 0] * A[:, 1] + A[:, 1] ** 2 + A[:, 2] ** 2 - A[:, 2] * A[:, 3] + A[:, 3] ** 2) <= 3**k
    h = np.sqrt(3) / 2
    Q = np.stack([A[:, 0] - A[:, 1] / 2, h * A[:, 1], A[:, 2] - A[:, 3] / 2, h * A[:, 3]], -1)
    proj = Q @ np.array([float(x) for x in embed(s)])
    thr = (1 - 0.36 / 2) * 9
    # floats only pre-filter; membership itself is decided exactly
    near = ball & (proj > thr - 1e-6)
    inside = [tuple(int(x) for x in a) for a in A[near] if in_meniscus(a, m, k)]
    assert inside
    assert all(P.contains(q) for q in inside)


@pytest.mark.parametrize("ell", [1, 2])
def test_convex_combinations_stay_in_scaled_meniscus(ell):
    rng = random.Random(17 + ell)
    s = TwoLevelState.random(rng)
    m = Meniscus(s, "0.3")
    for k0 in range(0, 20):
        pts, _ = level_candidates(m, k0)
        if len(pts) >= 2:
            break
    y1, y2 = pts[0], pts[-1]
    n = 3**ell
    for r in range(n + 1):
        q = tuple(r * a + (n - r) * b for a, b in zip(y1, y2))
        assert in_meniscus(q, m, k0 + 2 * ell)
