from __future__ import annotations

import itertools
import random

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mp

from metasynth.lattice import DegenerateBasis, cvp_2d, enumerate_2d, gauss_reduce, is_lll_reduced, lll_reduce


def _det(U):
    from sympy import Matrix

    return Matrix(U).det()


def _norm2(v):
    return sum(x * x for x in v)


def _shortest(basis, r=6):
    best = None
    for cs in itertools.product(range(-r, r + 1), repeat=len(basis)):
        if any(cs):
            v = [sum(c * b[i] for c, b in zip(cs, basis)) for i in range(len(basis[0]))]
            n = _norm2(v)
            best = n if best is None or n < best else best
    return best


def test_identity_is_reduced():
    I = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    B, U = lll_reduce(I)
    assert B == I and U == I


def test_skewed_2d():
    basis = [[100, 0], [99, 1]]
    B, U = lll_reduce(basis)
    assert is_lll_reduced(B)
    assert min(_norm2(b) for b in B) == _shortest(basis)


def test_scrambled_diagonal_4d():
    rng = random.Random(4)
    D = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1000]]
    U = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    for _ in range(12):
        i, j = rng.sample(range(4), 2)
        c = rng.randint(-3, 3)
        U[i] = [a + c * b for a, b in zip(U[i], U[j])]
    scrambled = [[sum(U[i][k] * D[k][j] for k in range(4)) for j in range(4)] for i in range(4)]
    B, T = lll_reduce(scrambled)
    assert abs(_det(T)) == 1
    assert sorted(_norm2(b) for b in B)[:3] == [1, 1, 1]
    assert min(_norm2(b) for b in B) == _shortest(scrambled, 3)


def test_rank_deficient():
    with pytest.raises(DegenerateBasis):
        lll_reduce([[1, 2], [2, 4]])


@given(st.lists(st.lists(st.integers(-50, 50), min_size=3, max_size=3), min_size=3, max_size=3))
def test_lll_properties(rows):
    try:
        B, U = lll_reduce(rows)
    except DegenerateBasis:
        return
    assert abs(_det(U)) == 1
    assert is_lll_reduced(B)
    assert [[sum(U[i][k] * rows[k][j] for k in range(3)) for j in range(3)] for i in range(3)] == [
        [int(x) for x in r] for r in B
    ]


def test_cvp_orthogonal_example():
    mp.prec = 128
    b1, b2 = (1 / mp.sqrt(2), 0), (0, mp.sqrt(mp.mpf(3) / 2))
    c = cvp_2d(b1, b2, (1, 1))
    best = min(
        ((a, b) for a in range(-3, 4) for b in range(-3, 4)),
        key=lambda ab: ((ab[0] * b1[0] - 1) ** 2 + (ab[1] * b2[1] - 1) ** 2, ab),
    )
    assert c == best == (1, 1)


def test_cvp_exact_lattice_point():
    assert cvp_2d((3, 1), (1, 4), (3 * 5 + 1 * -2, 1 * 5 + 4 * -2)) == (5, -2)


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6), st.integers(1, 1000))
def test_cvp_skewed_matches_exhaustive(tx, ty, skew):
    b1, b2 = (1000, 0), (500, skew)
    t = (mp.mpf(tx) / 7, mp.mpf(ty) / 3)
    c = cvp_2d(b1, b2, t)
    d = lambda ab: (ab[0] * b1[0] + ab[1] * b2[0] - t[0]) ** 2 + (ab[1] * b2[1] - t[1]) ** 2
    # exhaustive in a window around the exact real solution
    y2 = t[1] / skew
    y1 = (t[0] - y2 * 500) / 1000
    window = [(int(mp.floor(y1)) + i, int(mp.floor(y2)) + j) for i in range(-4, 5) for j in range(-4, 5)]
    assert d(c) <= min(d(w) for w in window)


def test_gauss_reduce_degenerate():
    with pytest.raises(DegenerateBasis):
        gauss_reduce((1, 2), (2, 4))


@given(st.integers(1, 30), st.integers(-20, 20), st.integers(1, 30), st.floats(0.5, 12))
def test_enumerate_2d_matches_scan(a, b, c, r):
    b1, b2 = (a, 0), (b, c)
    got = enumerate_2d(b1, b2, (mp.mpf("0.3"), mp.mpf("-0.7")), r)
    want = []
    Y = int((r + 1) / c) + 1
    X = int((r + 1 + abs(b) * Y) / a) + 1
    for x in range(-X, X + 1):
        for y in range(-Y, Y + 1):
            px, py = x * a + y * b - 0.3, y * c + 0.7
            if px * px + py * py <= r * r:
                want.append((x, y))
    assert got == sorted(want)
