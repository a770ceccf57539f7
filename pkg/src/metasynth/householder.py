"""Exact factorisation of a 3x3 unitary into two-level Householder reflections.

Reflections H = I - 2|u><u| with u supported on two levels zero out the
sub-diagonal of U one entry at a time, leaving a diagonal unitary. Diagonal
entries equal to -1 are themselves reflections about a basis vector.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Sequence

from mpmath import mp

from .exprs import precision

DEFAULT_BITS = 256
UNITARITY_TOL = 1e-10


class NotUnitary(ValueError):
    pass


@dataclass(frozen=True)
class Reflection:
    """I - 2|u><u| with u = c0|i> + c1|j> (c1 = 0 for a one-level reflection)."""

    levels: tuple[int, int]
    c0: Any
    c1: Any

    def matrix(self) -> Any:
        u = mp.matrix(3, 1)
        u[self.levels[0]] = self.c0
        u[self.levels[1]] = self.c1
        return mp.eye(3) - 2 * u * u.H

    def to_json(self) -> dict:
        return {
            "levels": list(self.levels),
            "u": [[mp.nstr(mp.re(c), 30), mp.nstr(mp.im(c), 30)] for c in (self.c0, self.c1)],
        }


@dataclass
class Decomposition:
    reflections: list[Reflection]
    diagonal: list[Any]

    def product(self) -> Any:
        M = mp.eye(3)
        for r in self.reflections:
            M = M * r.matrix()
        D = mp.diag(self.diagonal)
        return M * D

    def to_json(self) -> dict:
        return {
            "reflections": [r.to_json() for r in self.reflections],
            "diagonal": [[mp.nstr(mp.re(c), 30), mp.nstr(mp.im(c), 30)] for c in self.diagonal],
        }


def _as_matrix(U: Sequence[Sequence[Any]] | Any) -> Any:
    M = mp.matrix(3, 3)
    for i in range(3):
        for j in range(3):
            M[i, j] = mp.mpc(U[i, j] if hasattr(U, "rows") else U[i][j])
    return M


def unitarity_defect(U: Any) -> Any:
    return mp.mnorm(U.H * U - mp.eye(3), 1)


def decompose_su3(U: Any, bits: int = DEFAULT_BITS, tol: float = UNITARITY_TOL) -> Decomposition:
    """U = H_1 ... H_m * diag(d) with m <= 6."""
    with precision(bits):
        M = _as_matrix(U)
        if M.rows != 3 or M.cols != 3:
            raise NotUnitary("expected a 3x3 matrix")
        if unitarity_defect(M) > tol:
            raise NotUnitary(f"defect {mp.nstr(unitarity_defect(M), 5)} exceeds {tol}")
        small = mp.mpf(2) ** (-bits + 16)
        refl: list[Reflection] = []
        for col, row in ((0, 1), (0, 2), (1, 2)):
            x0, x1 = M[col, col], M[row, col]
            if abs(x1) <= small:
                continue
            r = mp.sqrt(abs(x0) ** 2 + abs(x1) ** 2)
            phase = x0 / abs(x0) if abs(x0) > small else mp.mpc(1)
            # v = x + phase*|x| e_col, normalised; H x = -phase*|x| e_col
            v0, v1 = x0 + phase * r, x1
            n = mp.sqrt(abs(v0) ** 2 + abs(v1) ** 2)
            h = Reflection((col, row), v0 / n, v1 / n)
            M = h.matrix() * M
            M[row, col] = 0
            refl.append(h)
        diag = [M[i, i] for i in range(3)]
        for i in range(3):
            if abs(diag[i] + 1) <= small:
                refl.append(Reflection((i, (i + 1) % 3), mp.mpc(1), mp.mpc(0)))
                diag[i] = mp.mpc(1)
        return Decomposition(refl, diag)


def haar_su3(rng: random.Random, bits: int = DEFAULT_BITS) -> Any:
    """Haar-random SU(3): Gram-Schmidt on complex Gaussian columns, det fixed to 1."""
    with precision(bits):
        cols = [[mp.mpc(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(3)] for _ in range(3)]
        basis: list[list[Any]] = []
        for c in cols:
            v = list(c)
            for b in basis:
                d = sum(mp.conj(x) * y for x, y in zip(b, v))
                v = [y - d * x for x, y in zip(b, v)]
            n = mp.sqrt(sum(abs(y) ** 2 for y in v))
            basis.append([y / n for y in v])
        M = mp.matrix(3, 3)
        for j, b in enumerate(basis):
            for i in range(3):
                M[i, j] = b[i]
        det = mp.det(M)
        root = mp.exp(mp.log(det) / 3)
        return M / root
