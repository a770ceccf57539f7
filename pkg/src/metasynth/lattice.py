"""Lattice reduction and small-dimensional closest-vector routines."""

from __future__ import annotations

import math
from typing import Any, Sequence

from gmpy2 import mpq
from mpmath import mp

from .polytope import to_mpq


class DegenerateBasis(ValueError):
    pass


def _dot(x: Sequence, y: Sequence):
    return sum((a * b for a, b in zip(x, y)), mpq(0))


def lll_reduce(basis: Sequence[Sequence], delta=mpq(3, 4)) -> tuple[list[list[mpq]], list[list[int]]]:
    """Exact LLL on the rows of ``basis``.

    Returns ``(reduced, U)`` with ``reduced = U * basis`` and U unimodular.
    """
    B = [[to_mpq(x) for x in row] for row in basis]
    n = len(B)
    delta = to_mpq(delta)
    U = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def gram_schmidt():
        star, mu = [], [[mpq(0)] * n for _ in range(n)]
        norms = []
        for i in range(n):
            v = list(B[i])
            for j in range(i):
                mu[i][j] = _dot(B[i], star[j]) / norms[j]
                v = [a - mu[i][j] * b for a, b in zip(v, star[j])]
            nv = _dot(v, v)
            if nv == 0:
                raise DegenerateBasis("basis is not of full rank")
            star.append(v)
            norms.append(nv)
        return mu, norms

    mu, norms = gram_schmidt()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                B[k] = [a - q * b for a, b in zip(B[k], B[j])]
                U[k] = [a - q * b for a, b in zip(U[k], U[j])]
                for i in range(j + 1):
                    mu[k][i] -= q * (mu[j][i] if i < j else 1)
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            B[k], B[k - 1] = B[k - 1], B[k]
            U[k], U[k - 1] = U[k - 1], U[k]
            mu, norms = gram_schmidt()
            k = max(k - 1, 1)
    return B, [[int(x) for x in row] for row in U]


def is_lll_reduced(basis: Sequence[Sequence], delta=mpq(3, 4)) -> bool:
    B = [[to_mpq(x) for x in row] for row in basis]
    n = len(B)
    star, norms = [], []
    mu = [[mpq(0)] * n for _ in range(n)]
    for i in range(n):
        v = list(B[i])
        for j in range(i):
            mu[i][j] = _dot(B[i], star[j]) / norms[j]
            v = [a - mu[i][j] * b for a, b in zip(v, star[j])]
        star.append(v)
        norms.append(_dot(v, v))
    size = all(abs(mu[i][j]) <= mpq(1, 2) for i in range(n) for j in range(i))
    lovasz = all(norms[k] >= (to_mpq(delta) - mu[k][k - 1] ** 2) * norms[k - 1] for k in range(1, n))
    return size and lovasz


def integer_lll(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Unimodular U reducing integer rows (used for direction finding)."""
    return lll_reduce(rows)[1]


# --- two-dimensional lattices ------------------------------------------------


def _mp(x: Any) -> Any:
    if hasattr(x, "mpf"):
        return x.mpf()
    if isinstance(x, mpq):
        return mp.mpf(x.numerator) / x.denominator
    return mp.mpf(x)


def gauss_reduce(b1: Sequence, b2: Sequence) -> tuple[list, list, list[list[int]]]:
    """Lagrange-Gauss reduction; returns (r1, r2, U) with (r1, r2) = U (b1, b2)."""
    u = [_mp(x) for x in b1]
    v = [_mp(x) for x in b2]
    U = [[1, 0], [0, 1]]
    nu, nv = u[0] ** 2 + u[1] ** 2, v[0] ** 2 + v[1] ** 2
    if nu == 0 or nv == 0 or abs(u[0] * v[1] - u[1] * v[0]) <= mp.eps * nu * nv * 16:
        raise DegenerateBasis("basis vectors are linearly dependent")
    if nu > nv:
        u, v, nu, nv = v, u, nv, nu
        U = [U[1], U[0]]
    while True:
        q = int(mp.nint((u[0] * v[0] + u[1] * v[1]) / nu))
        v = [v[0] - q * u[0], v[1] - q * u[1]]
        U[1] = [U[1][0] - q * U[0][0], U[1][1] - q * U[0][1]]
        nv = v[0] ** 2 + v[1] ** 2
        if nv >= nu:
            return u, v, U
        u, v, nu, nv = v, u, nv, nu
        U = [U[1], U[0]]


def _coords(r1, r2, t):
    det = r1[0] * r2[1] - r1[1] * r2[0]
    return (t[0] * r2[1] - t[1] * r2[0]) / det, (r1[0] * t[1] - r1[1] * t[0]) / det


def _combine(U, y1: int, y2: int) -> tuple[int, int]:
    return y1 * U[0][0] + y2 * U[1][0], y1 * U[0][1] + y2 * U[1][1]


def cvp_2d(b1: Sequence, b2: Sequence, target: Sequence, radius: int = 1) -> tuple[int, int]:
    """Integer (c1, c2) minimising |c1*b1 + c2*b2 - target|.

    The basis is Gauss-reduced, the target's coordinates rounded, and the
    (2*radius+1)^2 neighbouring coefficient pairs compared. Ties go to the
    lexicographically smallest pair.
    """
    r1, r2, U = gauss_reduce(b1, b2)
    t = [_mp(x) for x in target]
    y1, y2 = _coords(r1, r2, t)
    c1, c2 = int(mp.nint(y1)), int(mp.nint(y2))
    best = None
    for d1 in range(-radius, radius + 1):
        for d2 in range(-radius, radius + 1):
            a, b = c1 + d1, c2 + d2
            px = a * r1[0] + b * r2[0] - t[0]
            py = a * r1[1] + b * r2[1] - t[1]
            key = (px * px + py * py, _combine(U, a, b))
            if best is None or key < best:
                best = key
    return best[1]


def enumerate_2d(b1: Sequence, b2: Sequence, center: Sequence, radius: Any) -> list[tuple[int, int]]:
    """All (c1, c2) with |c1*b1 + c2*b2 - center| <= radius, sorted."""
    r1, r2, U = gauss_reduce(b1, b2)
    c = [_mp(x) for x in center]
    radius = _mp(radius)
    n1 = r1[0] ** 2 + r1[1] ** 2
    mu = (r2[0] * r1[0] + r2[1] * r1[1]) / n1
    s2 = [r2[0] - mu * r1[0], r2[1] - mu * r1[1]]
    ns2 = s2[0] ** 2 + s2[1] ** 2
    t1, t2 = _coords(r1, r2, c)
    out = []
    h2 = radius / mp.sqrt(ns2)
    for y2 in range(int(mp.ceil(t2 - h2)), int(mp.floor(t2 + h2)) + 1):
        rest = radius**2 - (y2 - t2) ** 2 * ns2
        if rest < 0:
            continue
        mid = t1 - (y2 - t2) * mu
        h1 = mp.sqrt(rest / n1)
        for y1 in range(int(mp.ceil(mid - h1)), int(mp.floor(mid + h1)) + 1):
            out.append(_combine(U, y1, y2))
    return sorted(out)


def float_lll_directions(shape: Sequence[Sequence[float]], scale_bits: int = 30) -> list[list[int]]:
    """Integer directions c making c^T S c small for a PSD shape matrix S.

    The Cholesky factor is scaled to integers and LLL-reduced exactly; the
    rows of the unimodular transform are the candidate directions.
    """
    import numpy as np

    S = np.asarray(shape, dtype=float)
    n = S.shape[0]
    ridge = 1e-9 * max(float(np.trace(S)), 1e-300)
    L = np.linalg.cholesky(S + ridge * np.eye(n))
    scale = 2.0**scale_bits / max(float(np.abs(L).max()), 1e-300)
    rows = [[int(round(x * scale)) for x in L[i]] for i in range(n)]
    for i in range(n):
        if not any(rows[i]):
            rows[i][i] = 1
    try:
        return integer_lll(rows)
    except DegenerateBasis:
        return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def gcd_list(xs: Sequence[int]) -> int:
    g = 0
    for x in xs:
        g = math.gcd(g, int(x))
    return g
