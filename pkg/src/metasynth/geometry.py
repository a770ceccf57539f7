"""Real 4-space picture of two-level qutrit states.

A two-level state x0|i> + x1|j> is the unit vector
r = (Re x0, Im x0, Re x1, Im x1). An exact metaplectic state at level k
contributes the lattice point iota(a) / sqrt(3)^k with integer a, where iota
sends the Eisenstein coordinates (a1 + a2 w, a3 + a4 w) to R^4.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from mpmath import iv, mp

from .eisenstein import EisensteinInt
from .exprs import RealExpr, as_expr, bits_for_epsilon, interval_compare, precision
from .polytope import RationalPolytope

MAX_ESCALATIONS = 3


class LevelMismatch(ValueError):
    pass


class IndeterminateComparison(ArithmeticError):
    """Interval comparison stayed ambiguous after every precision escalation."""


class NotNormalized(ValueError):
    pass


# --- Q(sqrt 3) ----------------------------------------------------------------


@dataclass(frozen=True)
class QSqrt3:
    """r + s*sqrt(3) with rational r, s."""

    r: Fraction = Fraction(0)
    s: Fraction = Fraction(0)

    def __add__(self, o: QSqrt3 | int | Fraction) -> QSqrt3:
        o = _q3(o)
        return QSqrt3(self.r + o.r, self.s + o.s)

    __radd__ = __add__

    def __neg__(self) -> QSqrt3:
        return QSqrt3(-self.r, -self.s)

    def __sub__(self, o: QSqrt3 | int | Fraction) -> QSqrt3:
        return self + (-_q3(o))

    def __mul__(self, o: QSqrt3 | int | Fraction) -> QSqrt3:
        o = _q3(o)
        return QSqrt3(self.r * o.r + 3 * self.s * o.s, self.r * o.s + self.s * o.r)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.r == 0 and self.s == 0

    def mpf(self, ctx: Any = mp) -> Any:
        return ctx.mpf(self.r.numerator) / self.r.denominator + ctx.sqrt(3) * (
            ctx.mpf(self.s.numerator) / self.s.denominator
        )

    def __str__(self) -> str:
        return f"{self.r}+{self.s}*sqrt(3)"


def _q3(x: QSqrt3 | int | Fraction) -> QSqrt3:
    return x if isinstance(x, QSqrt3) else QSqrt3(Fraction(x))


def sqrt3_power(e: int) -> QSqrt3:
    """sqrt(3)^e exactly, for any integer e."""
    if e % 2 == 0:
        return QSqrt3(Fraction(3) ** (e // 2))
    return QSqrt3(Fraction(0), Fraction(3) ** ((e - 1) // 2))


def iota(a: Sequence[int]) -> tuple[QSqrt3, QSqrt3, QSqrt3, QSqrt3]:
    """Eisenstein coordinates (a1..a4) to the point of R^4 they denote."""
    a1, a2, a3, a4 = (Fraction(x) for x in a)
    return (
        QSqrt3(a1 - a2 / 2),
        QSqrt3(Fraction(0), a2 / 2),
        QSqrt3(a3 - a4 / 2),
        QSqrt3(Fraction(0), a4 / 2),
    )


def iota_inverse(q: Sequence[Any]) -> list[Any]:
    """R^4 point to (real) Eisenstein coordinates."""
    a2 = 2 * q[1] / mp.sqrt(3)
    a4 = 2 * q[3] / mp.sqrt(3)
    return [q[0] + a2 / 2, a2, q[2] + a4 / 2, a4]


# iota as a matrix acting on column vectors a: q = J a
def _iota_matrix(ctx: Any = mp) -> list[list[Any]]:
    h = ctx.sqrt(3) / 2
    z = ctx.mpf(0)
    return [
        [ctx.mpf(1), ctx.mpf(-0.5), z, z],
        [z, h, z, z],
        [z, z, ctx.mpf(1), ctx.mpf(-0.5)],
        [z, z, z, h],
    ]


@dataclass(frozen=True)
class ScaledLatticeBasis:
    """v1..v4 of the lattice E_k, exact in Q(sqrt 3)."""

    k: int

    def vectors(self) -> list[tuple[QSqrt3, ...]]:
        s = sqrt3_power(-self.k)
        return [tuple(c * s for c in iota(e)) for e in ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1))]

    def gram(self) -> list[list[QSqrt3]]:
        vs = self.vectors()
        return [[sum((x * y for x, y in zip(u, v)), QSqrt3()) for v in vs] for u in vs]

    def point(self, a: Sequence[int]) -> tuple[QSqrt3, ...]:
        s = sqrt3_power(-self.k)
        return tuple(c * s for c in iota(a))


# --- states -------------------------------------------------------------------


def _pair(text: str) -> tuple[RealExpr, RealExpr]:
    parts = _split_top(text)
    if len(parts) != 2:
        raise ValueError(f"expected 're,im', got {text!r}")
    return RealExpr(parts[0]), RealExpr(parts[1])


def _split_top(text: str) -> list[str]:
    """Split on commas that are not inside parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur.append(ch)
    out.append("".join(cur))
    return out


@dataclass(frozen=True)
class TwoLevelState:
    """x0|i> + x1|j> with (i, j) = levels; amplitudes kept as expressions."""

    x0_re: RealExpr
    x0_im: RealExpr
    x1_re: RealExpr
    x1_im: RealExpr
    levels: tuple[int, int] = (0, 1)
    precision: int = 256
    check: bool = field(default=True, compare=False)

    def __post_init__(self) -> None:
        for name in ("x0_re", "x0_im", "x1_re", "x1_im"):
            object.__setattr__(self, name, as_expr(getattr(self, name)))
        i, j = self.levels
        if {i, j} - {0, 1, 2} or i == j:
            raise ValueError(f"levels must be two distinct values from 0..2, got {self.levels}")
        object.__setattr__(self, "levels", (int(i), int(j)))
        if self.check:
            with precision(self.precision + 16):
                r = self.r_vector(self.precision + 16)
                err = abs(sum(x * x for x in r) - 1)
                if err >= mp.mpf(2) ** (-self.precision + 8):
                    raise NotNormalized(f"|x0|^2 + |x1|^2 differs from 1 by {mp.nstr(err, 5)}")

    @classmethod
    def from_strings(cls, x0: str, x1: str, levels: Sequence[int] = (0, 1), **kw: Any) -> TwoLevelState:
        (a, b), (c, d) = _pair(x0), _pair(x1)
        return cls(a, b, c, d, tuple(levels), **kw)

    @classmethod
    def basis(cls, level: int = 0, other: int | None = None) -> TwoLevelState:
        other = (level + 1) % 3 if other is None else other
        return cls(RealExpr(1), RealExpr(0), RealExpr(0), RealExpr(0), (level, other))

    @classmethod
    def phi(cls) -> TwoLevelState:
        """(-exp(-i pi/9)|0> + exp(i pi/9)|2>)/sqrt(2)."""
        return cls(
            RealExpr("-cos(pi/9)/sqrt(2)"),
            RealExpr("sin(pi/9)/sqrt(2)"),
            RealExpr("cos(pi/9)/sqrt(2)"),
            RealExpr("sin(pi/9)/sqrt(2)"),
            (0, 2),
        )

    @classmethod
    def random(cls, rng: random.Random, levels: Sequence[int] | None = None, bits: int = 256) -> TwoLevelState:
        """Haar-random two-level state (Gaussian amplitudes, normalised)."""
        with precision(bits + 32):
            xs = [mp.mpf(rng.gauss(0, 1)) for _ in range(4)]
            nrm = mp.sqrt(sum(x * x for x in xs))
            vals = [mp.nstr(x / nrm, int(bits * 0.302) + 5) for x in xs]
        if levels is None:
            levels = rng.choice(((0, 1), (0, 2), (1, 2)))
        return cls(*vals, levels=tuple(levels), precision=bits)

    def normalized(self, bits: int | None = None) -> TwoLevelState:
        """The same state with amplitudes rescaled to unit norm."""
        bits = bits or self.precision + 32
        r = self.r_vector(bits)
        with precision(bits):
            nrm = mp.sqrt(sum(x * x for x in r))
            vals = [mp.nstr(x / nrm, int(bits * 0.302) + 5) for x in r]
        return TwoLevelState(*vals, levels=self.levels, precision=self.precision)

    @property
    def exprs(self) -> tuple[RealExpr, RealExpr, RealExpr, RealExpr]:
        return (self.x0_re, self.x0_im, self.x1_re, self.x1_im)

    @property
    def third_level(self) -> int:
        return ({0, 1, 2} - set(self.levels)).pop()

    def r_vector(self, bits: int | None = None) -> list[Any]:
        bits = bits or self.precision
        return [e.mpf(bits) for e in self.exprs]

    def r_interval(self, bits: int) -> list[Any]:
        return [e.interval(bits) for e in self.exprs]

    def to_json(self) -> dict:
        return {
            "x0": [self.x0_re.source, self.x0_im.source],
            "x1": [self.x1_re.source, self.x1_im.source],
            "levels": list(self.levels),
        }


def embed(s: TwoLevelState, bits: int | None = None) -> list[Any]:
    """r[s] = (Re x0, Im x0, Re x1, Im x1)."""
    return s.r_vector(bits)


@dataclass(frozen=True)
class Candidate:
    """Lattice pair (u, v) at level k; ``levels`` names where u and v sit."""

    u: EisensteinInt
    v: EisensteinInt
    k: int
    levels: tuple[int, int] | None = None

    @classmethod
    def from_coeffs(cls, a: Sequence[int], k: int, levels: tuple[int, int] | None = None) -> Candidate:
        a1, a2, a3, a4 = (int(x) for x in a)
        return cls(EisensteinInt(a1, a2), EisensteinInt(a3, a4), k, levels)

    @property
    def coeffs(self) -> tuple[int, int, int, int]:
        return (self.u.a, self.u.b, self.v.a, self.v.b)

    def ball_residual(self) -> int:
        return 3**self.k - self.u.norm() - self.v.norm()


def _projection(a: Sequence[int], p: Sequence[Any], ctx: Any) -> Any:
    q = [c.mpf(ctx) for c in iota(a)]
    return sum(x * y for x, y in zip(q, p))


def projection(s: TwoLevelState, a: Sequence[int], k: int, bits: int | None = None) -> Any:
    """<r[s], iota(a)> / sqrt(3)^k, i.e. Re<x|y> for y = (u, v)/sqrt(3)^k."""
    bits = bits or s.precision
    p = s.r_vector(bits)
    with precision(bits):
        return _projection(a, p, mp) / mp.sqrt(3) ** k


def distance(s: TwoLevelState, c: Candidate, bits: int | None = None, w: EisensteinInt | None = None) -> Any:
    """|x - y| = sqrt(2 (1 - Re<x|y>)) for y = (u|i> + v|j> + w|l>)/sqrt(3)^k.

    The third amplitude never enters: ``w`` is accepted and ignored.
    """
    if c.levels is not None and tuple(c.levels) != tuple(s.levels):
        raise LevelMismatch(f"candidate levels {c.levels} vs target levels {s.levels}")
    bits = bits or s.precision
    re = projection(s, c.coeffs, c.k, bits)
    with precision(bits):
        return mp.sqrt(max(2 * (1 - re), mp.mpf(0)))


# --- meniscus -----------------------------------------------------------------


@dataclass(frozen=True)
class Meniscus:
    """M_eps(p) = {q : |q| <= 1, <q, p> > 1 - eps^2/2} around p = r[target]."""

    target: TwoLevelState
    epsilon: RealExpr

    def __post_init__(self) -> None:
        object.__setattr__(self, "epsilon", as_expr(self.epsilon))
        e = float(self.epsilon.mpf(64))
        if not 0 < e < math.sqrt(2):
            raise ValueError(f"epsilon must lie in (0, sqrt 2), got {e}")

    @property
    def bits(self) -> int:
        return bits_for_epsilon(float(self.epsilon.mpf(64)))

    @property
    def eps_float(self) -> float:
        return float(self.epsilon.mpf(64))

    def threshold(self, k: int, ctx: Any = mp) -> Any:
        """(1 - eps^2/2) * sqrt(3)^k evaluated in ``ctx``."""
        e = self.epsilon.evaluate(ctx)
        return (1 - e * e / 2) * ctx.sqrt(3) ** k


def in_meniscus(a: Sequence[int], m: Meniscus, k: int, bits: int | None = None) -> bool:
    """Exact ball test plus interval-checked strict projection test."""
    a1, a2, a3, a4 = (int(x) for x in a)
    if EisensteinInt(a1, a2).norm() + EisensteinInt(a3, a4).norm() > 3**k:
        return False
    bits = bits or m.bits
    for _ in range(MAX_ESCALATIONS + 1):
        with precision(bits + k):
            p = m.target.r_interval(bits + k)
            lhs = _projection((a1, a2, a3, a4), p, iv)
            verdict = interval_compare(lhs, m.threshold(k, iv))
        if verdict is not None:
            return verdict
        bits *= 2
    raise IndeterminateComparison(f"membership of {a} at k={k} undecided at {bits // 2} bits")


CUT_BITS = 24


def _orthonormal_complement(p: Sequence[Any]) -> list[list[Any]]:
    frame = [list(p)]
    order = sorted(range(4), key=lambda i: abs(p[i]))
    for i in order:
        v = [mp.mpf(int(i == j)) for j in range(4)]
        for f in frame:
            d = sum(x * y for x, y in zip(v, f))
            v = [x - d * y for x, y in zip(v, f)]
        n = mp.sqrt(sum(x * x for x in v))
        if n > mp.mpf("1e-6"):
            frame.append([x / n for x in v])
        if len(frame) == 4:
            break
    return frame[1:]


def enclosing_polytope(
    m: Meniscus, k: int, bits: int | None = None, cuts: Sequence[Sequence[int]] = ()
) -> RationalPolytope:
    """Rational polytope in Eisenstein coordinates containing iota^-1(sqrt(3)^k M).

    A box in the frame (p, q1, q2, q3): [(1 - eps^2/2) S, S] along p and
    half-width S*sqrt(eps^2 - eps^4/4) across, with S = sqrt(3)^k. Every
    half-space is rounded outward to denominator 2^bits.

    Each point in ``cuts`` adds the tangent half-space <x, iota(c)/|iota(c)|> <= S
    of the ball, which still contains the meniscus.
    """
    bits = bits or m.bits
    work = bits + 2 * k + 64
    with precision(work):
        p = m.target.r_vector(work)
        nrm = mp.sqrt(sum(x * x for x in p))
        p = [x / nrm for x in p]
        eps = m.epsilon.evaluate(mp)
        S = mp.sqrt(3) ** k
        half = S * mp.sqrt(eps**2 - eps**4 / 4)
        normals = [(p, S), ([-x for x in p], -(1 - eps**2 / 2) * S)]
        for q in _orthonormal_complement(p):
            normals.append((q, half))
            normals.append(([-x for x in q], half))
        J = _iota_matrix(mp)
        scale = mp.mpf(2) ** bits
        margin = 32 * (S + 1) / scale
        rows, rhs = [], []
        for n, beta in normals:
            g = [sum(J[r][c] * n[r] for r in range(4)) for c in range(4)]
            rows.append([int(mp.nint(x * scale)) for x in g])
            rhs.append(int(mp.ceil((beta + margin) * scale)))
        # cuts only need to be valid, so keep their coefficients short:
        # max of <g, a> over the ball is S |J^-T g|
        h = mp.sqrt(3) / 2
        for c in cuts:
            x = [t.mpf() for t in iota(c)]
            g = [int(mp.nint(v * 2**CUT_BITS)) for v in _mat_t_vec(J, x)]
            y0, y2 = mp.mpf(g[0]), mp.mpf(g[2])
            y = [y0, (g[1] + y0 / 2) / h, y2, (g[3] + y2 / 2) / h]
            rows.append(g)
            rhs.append(int(mp.ceil(S * mp.sqrt(sum(t * t for t in y)) * (1 + mp.mpf(2) ** -64))) + 1)
    return RationalPolytope(rows, rhs, 4)


def _mat_t_vec(J: list[list[Any]], x: Sequence[Any]) -> list[Any]:
    n = mp.sqrt(sum(t * t for t in x))
    return [sum(J[r][c] * x[r] for r in range(4)) / n for c in range(4)]


def meniscus_widths(m: Meniscus, k: int) -> tuple[Any, Any]:
    """Closed-form widths of sqrt(3)^k M: along p and across (full chord)."""
    with precision(m.bits + 2 * k):
        eps = m.epsilon.evaluate(mp)
        S = mp.sqrt(3) ** k
        return S * eps**2 / 2, 2 * S * mp.sqrt(eps**2 - eps**4 / 4)
