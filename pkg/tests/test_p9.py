from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp

from metasynth.exprs import log3, precision
from metasynth.geometry import Candidate, Meniscus, QSqrt3, TwoLevelState, distance, in_meniscus, iota
from metasynth.norm_solver import Status, solve
from metasynth.p9 import (
    D1,
    D2,
    E,
    FRAME,
    PHI_LEVELS,
    PlaneVector,
    approximate_phi,
    best_at_level,
    cap_points,
    kernel_base,
    lift,
    p9_emulation_report,
    plane_coords,
    projected_lattice_basis,
    shifts,
    table1_fixtures,
)

PHI = TwoLevelState.phi()
coeff = st.integers(-10**6, 10**6)


def _pv(x, y, sx=0, sy=0):
    return PlaneVector(QSqrt3(Fraction(x), Fraction(sx)), QSqrt3(Fraction(y), Fraction(sy)))


B1 = _pv(1, 0)


def _log3_distance(c: Candidate):
    with precision(512):
        return log3(distance(PHI, c, 512))


def test_kernel_vectors_project_to_zero():
    zero = _pv(0, 0)
    for d in (D1, D2, E):
        assert FRAME.project(d) == zero


def test_generator_projections():
    # e1 -> -b1 and e2 -> (b1 + b2)/2: a lattice twice as dense as span(b1, b2)
    assert FRAME.project((1, 0, 0, 0)) == _pv(-1, 0)
    half = PlaneVector(QSqrt3(Fraction(1, 2), Fraction(0)), QSqrt3(Fraction(0), Fraction(1, 2)))
    assert FRAME.project((0, 1, 0, 0)) == half
    assert FRAME.project((0, 0, 1, 0)) == B1
    assert FRAME.project((0, 0, 0, 1)) == half + _pv(-1, 0)


def test_reduced_basis_spans_the_projected_lattice():
    b1, b2 = projected_lattice_basis()
    with precision(64):
        x1, y1 = b1.mpf()
        x2, y2 = b2.mpf()
        det = abs(x1 * y2 - x2 * y1)
        # covolume of span((1,0), (1/2, sqrt3/2))/sqrt 2
        assert abs(det - mp.sqrt(3) / 4) < 1e-15
        n1, n2 = x1**2 + y1**2, x2**2 + y2**2
        assert n1 <= n2
        assert abs(x1 * x2 + y1 * y2) <= n1 / 2 + 1e-15


@given(coeff, coeff, coeff, coeff)
def test_plane_coords_are_exact(a1, a2, a3, a4):
    a = (a1, a2, a3, a4)
    m, n = plane_coords(a)
    expect = PlaneVector(QSqrt3(Fraction(m) + Fraction(n, 2), Fraction(0)), QSqrt3(Fraction(0), Fraction(n, 2)))
    assert FRAME.project(a) == expect
    assert plane_coords(lift(m, n)) == (m, n)


@settings(max_examples=30)
@given(coeff, coeff, st.integers(-50, 50), st.integers(-50, 50))
def test_kernel_shifts_keep_distance(m, n, k1, k2):
    a = lift(m, n)
    b = tuple(x + k1 * d + k2 * e for x, d, e in zip(a, D1, D2))
    k = 30
    da = distance(PHI, Candidate.from_coeffs(a, k, PHI_LEVELS))
    db = distance(PHI, Candidate.from_coeffs(b, k, PHI_LEVELS))
    with precision(256):
        assert abs(da - db) < mp.mpf(2) ** -200


@settings(max_examples=30)
@given(coeff, coeff)
def test_kernel_base_shortens_without_moving_projection(m, n):
    a = lift(m, n)
    b = kernel_base(a)
    assert plane_coords(b) == (m, n)
    nb = sum(float(t.mpf()) ** 2 for t in iota(b))
    na = sum(float(t.mpf()) ** 2 for t in iota(a))
    assert nb <= na + 1e-6 * max(na, 1)


def test_shifts_order():
    got = list(shifts(9))
    assert got[0] == (0, 0)
    assert got[1:5] == [(-1, 0), (0, -1), (0, 1), (1, 0)]
    assert all(abs(x) + abs(y) == 2 for x, y in got[5:])
    assert len(set(shifts(200))) == 200
    sizes = [abs(x) + abs(y) for x, y in shifts(200)]
    assert sizes == sorted(sizes)


@pytest.mark.parametrize("k", [4, 8, 12])
def test_cap_points_match_scan(k):
    eps = 0.6
    S = math.sqrt(3) ** k
    c, s = math.cos(math.pi / 9), math.sin(math.pi / 9)
    got = set(cap_points(k, eps, 128))
    R = int(2 * S) + 3
    n, m = np.meshgrid(np.arange(-R, R + 1), np.arange(-2 * R, 2 * R + 1), indexing="ij")
    x, y = (m + n / 2) / math.sqrt(2), n * math.sqrt(3) / 2 / math.sqrt(2)
    keep = (x * c + y * s > S * (1 - eps**2 / 2)) & (x * x + y * y <= S * S)
    expect = {(int(a), int(b)) for a, b in zip(m[keep], n[keep])}
    assert got == expect


def test_cap_points_sublattice():
    full = cap_points(10, 0.5, 128)
    sub = cap_points(10, 0.5, 128, sublattice=True)
    assert set(sub) == {p for p in full if p[1] % 2 == 0}


# --- reference table ------------------------------------------------------------


@pytest.fixture(scope="module")
def rows():
    return table1_fixtures()


def test_fixture_distances(rows):
    for row in rows:
        d = _log3_distance(row.candidate())
        assert abs(d - float(row.epsilon_log3)) <= 0.05
        assert abs(row.k + 3 * d - float(row.residual)) <= 0.05
        assert -0.5 <= row.k + 3 * d <= 2


def test_printed_first_row_is_far_off(rows):
    d = _log3_distance(rows[0].candidate(corrected=False))
    assert abs(d - (-7.574)) < 0.01


def test_fixture_shifted_states_are_feasible(rows):
    for row in rows:
        for corrected in (True, False):
            c = row.shifted(corrected)
            n = c.ball_residual()
            out = solve(n)
            assert out.status is Status.SOLVED
            assert c.u.norm() + c.v.norm() + out.w.norm() == 3**row.k
            # shifting u and v by the same integer moves along D1
            with precision(512):
                assert abs(distance(PHI, c, 512) - distance(PHI, row.candidate(corrected), 512)) < mp.mpf(10) ** -100


def test_level_30_on_index2_sublattice_reproduces_first_row(rows):
    res = best_at_level(30, sublattice=True)
    assert abs(float(res.distance_log3) - float(rows[0].epsilon_log3)) <= 0.05
    assert res.u.norm() + res.v.norm() + res.w.norm() == 3**30


@pytest.mark.parametrize("i", [0, 1])
def test_best_at_level_is_no_worse_than_table(rows, i):
    row = rows[i]
    res = best_at_level(row.k)
    ours = row.k + 3 * float(res.distance_log3)
    assert ours <= float(row.residual) + 0.05


@pytest.mark.parametrize("e, k_ref", [("3^(-9.5)", 30), ("3^(-19.9)", 60)])
def test_approximate_phi(e, k_ref):
    res = approximate_phi(e)
    with precision(256):
        eps = mp.power(3, -mp.mpf(e.split("(")[1].rstrip(")")))
        assert res.distance <= eps
    assert res.k <= k_ref
    assert res.u.norm() + res.v.norm() + res.w.norm() == 3**res.k
    assert in_meniscus(Candidate(res.u, res.v, res.k).coeffs, Meniscus(PHI, e), res.k)


def test_emulation_report():
    rep = p9_emulation_report("0.05")
    k = rep["state_result"].k
    assert rep["c_phi_r_count_bound"] == k + 1
    assert rep["R_phi_r_count_bound"] == 2 * k + 3
    assert rep["R_phi_r_count_bound"] % 2 == 1
    assert "mu" in rep["mu_note"]
