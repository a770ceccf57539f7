"""Exact rational H-polytopes {x : A x <= b} in dimension <= 4 and exact LP."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2
from gmpy2 import mpq, mpz

Rational = int | Fraction | mpq


class EmptyPolytope(Exception):
    """The polytope has no real points."""


class UnboundedPolytope(ValueError):
    pass


def to_mpq(x: Rational | str) -> mpq:
    if isinstance(x, str):
        return mpq(x.strip())
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def _floor(q: mpq) -> mpz:
    return gmpy2.f_div(q.numerator, q.denominator)


def _ceil(q: mpq) -> mpz:
    return gmpy2.c_div(q.numerator, q.denominator)


def _integer_row(a: Sequence[mpq], b: mpq) -> tuple[tuple[mpz, ...], mpq]:
    """Scale a row to coprime integer coefficients (b scaled alike)."""
    den = mpz(1)
    for x in a:
        den = gmpy2.lcm(den, x.denominator)
    ints = [x.numerator * (den // x.denominator) for x in a]
    g = mpz(0)
    for x in ints:
        g = gmpy2.gcd(g, x)
    if g == 0:
        return tuple(mpz(0) for _ in a), b
    return tuple(x // g for x in ints), b * den / g


class RationalPolytope:
    """Closed polytope {x in R^n : a_i . x <= b_i}.

    Rows are kept as coprime integer vectors, which makes integer rounding of
    the right-hand sides exact. The rows must positively span R^n; that is
    what keeps every nonempty instance bounded.
    """

    __slots__ = ("dim", "rows", "rhs")

    def __init__(self, rows: Iterable[Sequence[Rational | str]], rhs: Iterable[Rational | str], dim: int | None = None) -> None:
        rows = [tuple(to_mpq(x) for x in r) for r in rows]
        rhs = [to_mpq(x) for x in rhs]
        if len(rows) != len(rhs):
            raise ValueError("rows and right-hand sides differ in length")
        if dim is None:
            if not rows:
                raise ValueError("dimension needed for a polytope without constraints")
            dim = len(rows[0])
        self.dim = dim
        best: dict[tuple[mpz, ...], mpq] = {}
        infeasible = False
        for a, b in zip(rows, rhs):
            if len(a) != dim:
                raise ValueError("row length does not match dimension")
            ia, ib = _integer_row(a, b)
            if not any(ia):
                if ib < 0:
                    infeasible = True
                continue
            if ia not in best or ib < best[ia]:
                best[ia] = ib
        if infeasible:
            # canonical empty polytope: x_1 <= -1 and -x_1 <= 0
            e = tuple(mpz(1) if i == 0 else mpz(0) for i in range(dim))
            best = {e: mpq(-1), tuple(-x for x in e): mpq(0)}
            if dim == 0:
                best = {(): mpq(-1)}
        self.rows = list(best.keys())
        self.rhs = [best[a] for a in self.rows]

    # --- construction -------------------------------------------------------

    @classmethod
    def box(cls, lower: Sequence[Rational | str], upper: Sequence[Rational | str]) -> RationalPolytope:
        n = len(lower)
        rows, rhs = [], []
        for i in range(n):
            e = [0] * n
            e[i] = 1
            rows.append(e)
            rhs.append(to_mpq(upper[i]))
            rows.append([-x for x in e])
            rhs.append(-to_mpq(lower[i]))
        return cls(rows, rhs, n)

    def with_constraint(self, a: Sequence[Rational], b: Rational) -> RationalPolytope:
        return RationalPolytope(self.rows + [tuple(a)], self.rhs + [b], self.dim)

    def substitute(self, origin: Sequence[int], basis: Sequence[Sequence[int]]) -> RationalPolytope:
        """Pull back along x = origin + sum_j y_j * basis[j]."""
        m = len(basis)
        rows, rhs = [], []
        for a, b in zip(self.rows, self.rhs):
            rows.append([sum(a[i] * col[i] for i in range(self.dim)) for col in basis])
            rhs.append(b - sum(a[i] * origin[i] for i in range(self.dim)))
        return RationalPolytope(rows, rhs, m)

    def translate(self, t: Sequence[int]) -> RationalPolytope:
        """The polytope P - t."""
        rhs = [b - sum(a[i] * t[i] for i in range(self.dim)) for a, b in zip(self.rows, self.rhs)]
        return RationalPolytope(self.rows, rhs, self.dim)

    def tightened(self, strict: bool = False) -> RationalPolytope:
        """Round right-hand sides to integers without losing integer points.

        With ``strict`` the result holds exactly the integer points satisfying
        every constraint strictly.
        """
        rhs = [(_ceil(b) - 1) if strict else _floor(b) for b in self.rhs]
        return RationalPolytope(self.rows, rhs, self.dim)

    # --- queries ------------------------------------------------------------

    def contains(self, x: Sequence[Rational], strict: bool = False) -> bool:
        for a, b in zip(self.rows, self.rhs):
            s = sum(ai * xi for ai, xi in zip(a, x))
            if s > b or (strict and s == b):
                return False
        return True

    def lp_max(self, d: Sequence[Rational]) -> mpq:
        """Exact max of d.x over the polytope; raises EmptyPolytope."""
        return exact_lp_max(self.rows, self.rhs, [to_mpq(x) for x in d])

    def width_along(self, d: Sequence[Rational]) -> tuple[mpq, mpq]:
        d = [to_mpq(x) for x in d]
        hi = self.lp_max(d)
        lo = -self.lp_max([-x for x in d])
        return lo, hi

    def interval_1d(self) -> tuple[mpq, mpq] | None:
        """Exact [lo, hi] of a one-dimensional polytope, None if empty."""
        assert self.dim == 1
        lo, hi = None, None
        for (a,), b in zip(self.rows, self.rhs):
            v = b / a
            if a > 0:
                hi = v if hi is None else min(hi, v)
            else:
                lo = v if lo is None else max(lo, v)
        if lo is None or hi is None:
            raise UnboundedPolytope("one-dimensional polytope is unbounded")
        return (lo, hi) if lo <= hi else None

    def integer_range(self, d: Sequence[int] | None = None) -> tuple[int, int] | None:
        """Integer levels of d.x met by the polytope (d = e_1 in dimension 1)."""
        if d is None and self.dim == 1:
            iv = self.interval_1d()
            if iv is None:
                return None
            lo, hi = iv
        else:
            try:
                lo, hi = self.width_along(d)
            except EmptyPolytope:
                return None
        a, b = int(_ceil(lo)), int(_floor(hi))
        return (a, b) if a <= b else None

    def is_empty(self) -> bool:
        if self.dim == 0:
            return any(b < 0 for b in self.rhs)
        if self.dim == 1:
            return self.interval_1d() is None
        try:
            self.lp_max([1] + [0] * (self.dim - 1))
        except EmptyPolytope:
            return True
        return False

    def bounding_box(self) -> tuple[list[mpq], list[mpq]]:
        lo, hi = [], []
        for i in range(self.dim):
            e = [0] * self.dim
            e[i] = 1
            a, b = self.width_along(e)
            lo.append(a)
            hi.append(b)
        return lo, hi

    def is_bounded(self) -> bool:
        """Rows positively span R^n (checked by LP on the recession cone)."""
        cone = RationalPolytope(self.rows, [0] * len(self.rows), self.dim)
        box = RationalPolytope.box([-1] * self.dim, [1] * self.dim)
        both = RationalPolytope(cone.rows + box.rows, cone.rhs + box.rhs, self.dim)
        for i in range(self.dim):
            for s in (1, -1):
                e = [0] * self.dim
                e[i] = s
                if both.lp_max(e) > 0:
                    return False
        return True

    def float_rows(self) -> tuple[list[list[float]], list[float]]:
        """Rows normalised to unit length with matching offsets, as floats."""
        out_a, out_b = [], []
        for a, b in zip(self.rows, self.rhs):
            nrm = math.sqrt(sum(float(x) ** 2 for x in a))
            out_a.append([float(x) / nrm for x in a])
            out_b.append(float(b) / nrm)
        return out_a, out_b

    # --- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "dimension": self.dim,
            "constraints": [
                {"a": [str(x) for x in a], "b": _qstr(b)} for a, b in zip(self.rows, self.rhs)
            ],
        }

    @classmethod
    def from_json(cls, payload: dict) -> RationalPolytope:
        rows = [c["a"] for c in payload["constraints"]]
        rhs = [c["b"] for c in payload["constraints"]]
        return cls(rows, rhs, int(payload["dimension"]))

    def __repr__(self) -> str:
        return f"RationalPolytope(dim={self.dim}, m={len(self.rows)})"


def _qstr(q: mpq) -> str:
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


def exact_lp_max(rows: Sequence[Sequence[mpz]], rhs: Sequence[mpq], d: Sequence[mpq]) -> mpq:
    """max d.x s.t. rows.x <= rhs, exactly.

    A floating-point pass guesses the optimal basis, which is then certified
    by one exact n x n solve (primal and dual feasibility). When the guess
    cannot be certified the exact two-phase simplex decides.
    """
    n = len(d)
    if n == 0:
        if any(b < 0 for b in rhs):
            raise EmptyPolytope
        return mpq(0)
    try:
        frows, frhs = [], []
        for a, b in zip(rows, rhs):
            nrm = math.sqrt(sum(float(x) ** 2 for x in a))
            frows.append([float(x) / nrm for x in a])
            frhs.append(float(b) / nrm)
        guess = _simplex(frows, frhs, [float(x) for x in d], 0.0, 1.0, 1e-11)
    except (OverflowError, ZeroDivisionError, EmptyPolytope, UnboundedPolytope):
        guess = None
    if guess is not None:
        value = _certify(rows, rhs, d, guess)
        if value is not None:
            return value
    return _simplex(rows, rhs, d, mpq(0), mpq(1), 0)[1]


def _solve_exact(M: list[list[mpq]], v: list[mpq]) -> list[mpq] | None:
    n = len(v)
    A = [list(map(mpq, row)) + [mpq(x)] for row, x in zip(M, v)]
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            return None
        A[c], A[p] = A[p], A[c]
        piv = A[c][c]
        for r in range(c + 1, n):
            if A[r][c]:
                f = A[r][c] / piv
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    x = [mpq(0)] * n
    for r in range(n - 1, -1, -1):
        s = A[r][n] - sum(A[r][c] * x[c] for c in range(r + 1, n))
        x[r] = s / A[r][r]
    return x


def _certify(rows, rhs, d, guess) -> mpq | None:
    basis = guess[0]
    if len(basis) != len(d) or any(i < 0 for i in basis):
        return None
    AB = [list(rows[i]) for i in basis]
    y = _solve_exact([list(col) for col in zip(*AB)], list(d))
    if y is None or any(t < 0 for t in y):
        return None
    x = _solve_exact(AB, [rhs[i] for i in basis])
    if x is None:
        return None
    for a, b in zip(rows, rhs):
        if sum(ai * xi for ai, xi in zip(a, x)) > b:
            return None
    return sum((di * xi for di, xi in zip(d, x)), mpq(0))


def _simplex(rows, rhs, d, zero, one, tol):
    """Two-phase Bland simplex on the dual  min rhs.y, rows^T y = d, y >= 0.

    Generic over the number type (exact rationals with tol = 0, or floats).
    Returns (basic dual indices, optimum); basic indices >= m are leftover
    artificials. With rows positively spanning R^n the dual is always
    feasible, so an unbounded dual means the primal is empty.
    """
    m, n = len(rows), len(d)
    ncols = m + n
    T = []
    for j in range(n):
        sign = -1 if d[j] < 0 else 1
        row = [zero + sign * rows[i][j] for i in range(m)]
        row += [one if t == j else zero for t in range(n)]
        row.append(zero + sign * d[j])
        T.append(row)
    basis = [m + j for j in range(n)]

    def pivot(leave: int, enter: int) -> None:
        piv = T[leave][enter]
        T[leave] = [x / piv for x in T[leave]]
        for i in range(n):
            if i != leave and T[i][enter]:
                f = T[i][enter]
                T[i] = [x - f * y for x, y in zip(T[i], T[leave])]
        basis[leave] = enter

    def run(cost, allowed: int) -> bool:
        for _ in range(10_000):
            enter = None
            for c in range(allowed):
                if c in basis:
                    continue
                v = cost[c]
                for i, bi in enumerate(basis):
                    if T[i][c]:
                        v -= cost[bi] * T[i][c]
                if v < -tol:
                    enter = c
                    break
            if enter is None:
                return True
            best, leave = None, None
            for i in range(n):
                if T[i][enter] > tol:
                    ratio = T[i][-1] / T[i][enter]
                    if best is None or ratio < best - tol or (
                        abs(ratio - best) <= tol and basis[i] < basis[leave]
                    ):
                        best, leave = ratio, i
            if leave is None:
                return False
            pivot(leave, enter)
        raise UnboundedPolytope("simplex iteration limit")

    phase1 = [zero] * m + [one] * n
    run(phase1, ncols)
    if any(abs(T[i][-1]) > tol for i, bi in enumerate(basis) if bi >= m):
        raise UnboundedPolytope("constraint rows do not positively span the space")
    for i, bi in enumerate(basis):
        if bi >= m:
            col = next((c for c in range(m) if abs(T[i][c]) > tol and c not in basis), None)
            if col is not None:
                pivot(i, col)
    cost = [zero + b for b in rhs] + [zero] * n
    if not run(cost, m):
        raise EmptyPolytope
    value = sum((cost[bi] * T[i][-1] for i, bi in enumerate(basis)), zero)
    return list(basis), value
