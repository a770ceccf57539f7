from __future__ import annotations

import random

import pytest
from mpmath import mp

from metasynth.exprs import precision
from metasynth.householder import NotUnitary, Reflection, decompose_su3, haar_su3, unitarity_defect


def _err(U, dec):
    with precision(256):
        return mp.mnorm(dec.product() - U, 1)


def test_identity_needs_no_reflections():
    dec = decompose_su3(mp.eye(3))
    assert dec.reflections == []
    assert _err(mp.eye(3), dec) == 0


def test_r_gate_is_one_reflection_about_level_two():
    R = mp.diag([1, 1, -1])
    dec = decompose_su3(R)
    assert len(dec.reflections) == 1
    h = dec.reflections[0]
    assert h.levels[0] == 2 and h.c0 == 1 and h.c1 == 0
    assert _err(R, dec) < mp.mpf(10) ** -60


def test_reflection_is_involutive_and_unitary():
    with precision(128):
        h = Reflection((0, 2), mp.mpc(3, 4) / 5, mp.mpc(0))
        H = h.matrix()
        assert mp.mnorm(H * H - mp.eye(3), 1) < mp.mpf(10) ** -30
        assert unitarity_defect(H) < mp.mpf(10) ** -30


def test_permutation_matrix():
    # cyclic shift has det 1
    P = [[0, 0, 1], [1, 0, 0], [0, 1, 0]]
    dec = decompose_su3(P)
    assert len(dec.reflections) <= 6
    with precision(256):
        assert mp.mnorm(dec.product() - mp.matrix(P), 1) < mp.mpf(10) ** -60


@pytest.mark.parametrize("seed", range(10))
def test_haar_random(seed):
    U = haar_su3(random.Random(seed))
    with precision(256):
        assert abs(mp.det(U) - 1) < mp.mpf(10) ** -60
    dec = decompose_su3(U)
    assert len(dec.reflections) <= 6
    assert _err(U, dec) < 1e-12
    assert all(abs(abs(d) - 1) < 1e-60 for d in dec.diagonal)
    json = dec.to_json()
    assert len(json["reflections"]) == len(dec.reflections)


def test_rejects_non_unitary():
    with pytest.raises(NotUnitary):
        decompose_su3([[1, 1, 0], [0, 1, 0], [0, 0, 1]])
