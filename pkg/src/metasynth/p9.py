"""Fast path for phi = (-exp(-i pi/9)|0> + exp(i pi/9)|2>)/sqrt(2).

r[phi] lies in the plane P spanned by p1 = (-1,0,1,0)/sqrt(2) and
p2 = (0,1,0,1)/sqrt(2). The distance to a lattice point only sees its
projection onto P, so the search is two-dimensional: find projected lattice
points in the thin cap of the disk of radius sqrt(3)^k around the direction
of phi, lift them to Z^4, then move along the kernel of the projection
(the directions d1, d2) until the leftover norm equation is solvable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Any, Iterator

from mpmath import mp

from .eisenstein import EisensteinInt
from .exprs import RealExpr, as_expr, bits_for_epsilon, log3, precision
from .geometry import Candidate, Meniscus, QSqrt3, TwoLevelState, distance, in_meniscus, iota
from .lattice import cvp_2d, enumerate_2d, gauss_reduce
from .norm_solver import Status, solve
from .search import ApproxResult, BudgetExhaustedError, SearchConfig, SearchStats, candidate_order

PHI_LEVELS = (0, 2)

# kernel of the projection onto P, in Eisenstein coordinates
D1 = (1, 0, 1, 0)
D2 = (-1, -2, 1, 2)
# D1 and E generate the whole kernel lattice; span(D1, D2) has index 2 in it
E = (0, 1, -1, -1)


@dataclass(frozen=True)
class PlaneVector:
    """(x, y)/sqrt(2) in the orthonormal frame (p1, p2); x, y exact in Q(sqrt 3)."""

    x: QSqrt3
    y: QSqrt3

    def mpf(self) -> tuple[Any, Any]:
        r = mp.sqrt(2)
        return self.x.mpf() / r, self.y.mpf() / r

    def __add__(self, o: PlaneVector) -> PlaneVector:
        return PlaneVector(self.x + o.x, self.y + o.y)

    def scale(self, c: int) -> PlaneVector:
        return PlaneVector(self.x * c, self.y * c)


@dataclass(frozen=True)
class PlaneFrame:
    p1: tuple[int, int, int, int] = (-1, 0, 1, 0)
    p2: tuple[int, int, int, int] = (0, 1, 0, 1)
    d1: tuple[int, int, int, int] = D1
    d2: tuple[int, int, int, int] = D2

    def project(self, a: tuple[int, ...]) -> PlaneVector:
        """Projection of iota(a) onto P, exact."""
        q = iota(a)
        x = sum((c * t for c, t in zip(self.p1, q)), QSqrt3())
        y = sum((c * t for c, t in zip(self.p2, q)), QSqrt3())
        return PlaneVector(x, y)


FRAME = PlaneFrame()


def projected_lattice_basis() -> tuple[PlaneVector, PlaneVector]:
    """Gauss-reduced basis of the projection of Z^4 (through iota) onto P."""
    gens = [FRAME.project(e) for e in ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1))]
    # generators 3 and 4 are -g1 and g2 - g1 up to sign, so g1, g2 generate
    b1, b2 = gens[0], gens[1]
    with precision(128):
        _, _, U = gauss_reduce(b1.mpf(), b2.mpf())
    return tuple(b1.scale(U[i][0]) + b2.scale(U[i][1]) for i in range(2))


def plane_coords(a: tuple[int, ...]) -> tuple[int, int]:
    """(m, n) with projection(a) = m*B1 + n*B2, B1 = (1,0)/sqrt 2, B2 = (1/2, sqrt3/2)/sqrt 2."""
    a1, a2, a3, a4 = a
    return (-a1 + a3 - a4, a2 + a4)


def lift(m: int, n: int) -> tuple[int, int, int, int]:
    """Canonical preimage with a3 = a4 = 0."""
    return (-m, n, 0, 0)


def _add(a, b, s=1):
    return tuple(x + s * y for x, y in zip(a, b))


def phi_state() -> TwoLevelState:
    return TwoLevelState.phi()


def is_phi(s: TwoLevelState, bits: int = 256) -> bool:
    """True when s is phi on levels (0, 2) to within 2^(16 - bits)."""
    if tuple(s.levels) != PHI_LEVELS:
        return False
    ref = phi_state().r_vector(bits)
    with precision(bits):
        return max(abs(x - y) for x, y in zip(s.r_vector(bits), ref)) < mp.mpf(2) ** (16 - bits)


def _target_dir() -> tuple[Any, Any]:
    return mp.cos(mp.pi / 9), mp.sin(mp.pi / 9)


def cap_points(k: int, eps: Any, bits: int, sublattice: bool = False) -> list[tuple[int, int]]:
    """(m, n) whose plane point z has <z, phi> > (1 - eps^2/2) S and |z| <= S.

    ``sublattice`` keeps only even n, i.e. the index-2 lattice spanned by
    (1, 0)/sqrt 2 and (0, sqrt 3)/sqrt 2.

    The strip [(1 - eps^2/2) S, S] x [-S h, S h] is mapped to the square
    [-1, 1]^2, whose disk of radius sqrt(2) is enumerated on the sheared
    lattice.
    """
    with precision(bits + 2 * k):
        c, s = _target_dir()
        S = mp.sqrt(3) ** k
        eps = mp.mpf(eps)
        delta = S * eps**2 / 2
        half = S * mp.sqrt(eps**2 - eps**4 / 4)
        r2 = mp.sqrt(2)
        B = [(1 / r2, mp.mpf(0)), (1 / (2 * r2), mp.sqrt(3) / (2 * r2))]

        def f(z):
            t = z[0] * c + z[1] * s
            o = -z[0] * s + z[1] * c
            return (t / (delta / 2), o / half)

        centre = ((S - delta / 2) / (delta / 2), mp.mpf(0))
        raw = enumerate_2d(f(B[0]), f(B[1]), centre, mp.sqrt(2) * (1 + mp.mpf(2) ** -20))
        lo = S - delta
        out = []
        for m, n in raw:
            z = (m * B[0][0] + n * B[1][0], n * B[1][1])
            t = z[0] * c + z[1] * s
            if sublattice and n % 2:
                continue
            if t > lo and z[0] ** 2 + z[1] ** 2 <= S * S:
                out.append((m, n))
    return out


def kernel_base(a: tuple[int, ...], bits: int = 128) -> tuple[int, ...]:
    """a + (kernel lattice vector) minimising the kernel component of iota(a)."""
    with precision(bits):
        q = [t.mpf() for t in iota(a)]
        r2 = mp.sqrt(2)
        k1 = (q[0] + q[2]) / r2
        k2 = (q[1] - q[3]) / r2
        # kernel lattice basis iota(D1) = (sqrt2, 0), iota(E) = (-1/sqrt2, sqrt(3/2))
        c1, c2 = cvp_2d((r2, 0), (-1 / r2, mp.sqrt(mp.mpf(3) / 2)), (-k1, -k2))
    return _add(_add(a, D1, c1), E, c2)


def shifts(limit: int) -> Iterator[tuple[int, int]]:
    """(k1, k2) ordered by |k1| + |k2|, then lexicographically."""
    count, r = 0, 0
    while True:
        ring = sorted((x, y) for x in range(-r, r + 1) for y in (r - abs(x), -(r - abs(x))))
        for pair in dict.fromkeys(ring):
            if count >= limit:
                return
            yield pair
            count += 1
        r += 1


@dataclass
class LevelOutcome:
    k: int
    cap_points: int
    result: ApproxResult | None
    exhausted: int = 0


def search_level(
    k: int, eps: Any, cfg: SearchConfig, stats: SearchStats, bits: int, sublattice: bool = False
) -> LevelOutcome:
    """Best feasible lifted candidate at level k (by projection), or None."""
    target = phi_state()
    pts = cap_points(k, eps, bits, sublattice)
    base = []
    for m, n in pts:
        a = kernel_base(lift(m, n), bits)
        base.append(Candidate.from_coeffs(a, k, PHI_LEVELS))
    exhausted = 0
    for cand in candidate_order(base, target, bits):
        stats.candidates_inspected += 1
        for k1, k2 in shifts(64 * max(k, 1)):
            a = _add(_add(cand.coeffs, D1, k1), D2, k2)
            c = Candidate.from_coeffs(a, k, PHI_LEVELS)
            n = c.ball_residual()
            if n < 0:
                continue
            stats.norm_calls += 1
            out = solve(n, cfg.norm_budget, cfg.seed)
            if out.status is Status.SOLVED:
                d = distance(target, c, 2 * bits)
                res = ApproxResult(c.u, c.v, out.w, k, PHI_LEVELS, d, stats.candidates_inspected, [], stats)
                res.notes = {"base": [str(x) for x in cand.coeffs], "shift": [k1, k2]}
                return LevelOutcome(k, len(pts), res, exhausted)
        exhausted += 1
    return LevelOutcome(k, len(pts), None, exhausted)


def approximate_phi(
    eps: RealExpr | str | float, cfg: SearchConfig | None = None, sublattice: bool = False
) -> ApproxResult:
    """Smallest k with a feasible lattice point within eps of phi."""
    cfg = cfg or SearchConfig()
    eps = as_expr(str(eps) if isinstance(eps, float) else eps)
    m = Meniscus(phi_state(), eps)
    bits = cfg.precision or bits_for_epsilon(m.eps_float)
    k_last = cfg.k_max if cfg.k_max is not None else 4 * int(log3(1 / mp.mpf(m.eps_float))) + 64
    stats = SearchStats()
    exhausted = []
    for k in range(k_last + 1):
        stats.levels_visited += 1
        with precision(bits):
            e = eps.evaluate(mp)
        out = search_level(k, e, cfg, stats, bits, sublattice)
        if out.exhausted:
            exhausted.append(k)
        if out.result is not None:
            c = Candidate(out.result.u, out.result.v, k, PHI_LEVELS)
            if not in_meniscus(c.coeffs, m, k, bits):
                raise AssertionError("lifted point left the meniscus")
            out.result.notes["levels_with_exhausted_shifts"] = exhausted
            return out.result
    raise BudgetExhaustedError(k_last, [])


def best_at_level(k: int, cfg: SearchConfig | None = None, sublattice: bool = False) -> ApproxResult:
    """Closest feasible point to phi at a fixed level k."""
    cfg = cfg or SearchConfig()
    bits = cfg.precision or 3 * k + 160
    stats = SearchStats()
    with precision(bits):
        eps = mp.mpf(3) ** (-mp.mpf(k - 3) / 3)
    while True:
        out = search_level(k, min(eps, mp.mpf("1.4")), cfg, stats, bits, sublattice)
        if out.result is not None:
            return out.result
        if eps >= mp.mpf("1.4"):
            raise ValueError(f"no feasible point at level {k}")
        eps *= 2


def reflection_bound(k: int) -> int:
    return 2 * (k + 1) + 1


def p9_emulation_report(
    eps: RealExpr | str | float, cfg: SearchConfig | None = None, sublattice: bool = False
) -> dict:
    res = approximate_phi(eps, cfg, sublattice)
    return {
        "state_result": res,
        "c_phi_r_count_bound": res.k + 1,
        "R_phi_r_count_bound": reflection_bound(res.k),
        "mu_note": (
            "The reflection R_phi = c_phi R c_phi^-1 costs at most 2*(k+1)+1 R gates; "
            "applying it to H|0> prepares the P9 magic state mu at the same precision."
        ),
    }


# --- reference data -------------------------------------------------------------


@dataclass(frozen=True)
class Table1Row:
    k: int
    u: EisensteinInt
    v: EisensteinInt
    epsilon_log3: Fraction
    residual: Fraction
    shift: int
    corrected_u: EisensteinInt | None = None
    corrected_v: EisensteinInt | None = None

    def candidate(self, corrected: bool = True) -> Candidate:
        u = self.corrected_u if corrected and self.corrected_u is not None else self.u
        v = self.corrected_v if corrected and self.corrected_v is not None else self.v
        return Candidate(u, v, self.k, PHI_LEVELS)

    def shifted(self, corrected: bool = True) -> Candidate:
        c = self.candidate(corrected)
        return Candidate(c.u + self.shift, c.v + self.shift, self.k, PHI_LEVELS)


def table1_fixtures() -> list[Table1Row]:
    data = json.loads(resources.files("metasynth").joinpath("data/table1.json").read_text())
    rows = []
    for r in data["rows"]:
        corr = r.get("corrected", {})
        rows.append(
            Table1Row(
                k=r["k"],
                u=EisensteinInt.from_json(r["u"]),
                v=EisensteinInt.from_json(r["v"]),
                epsilon_log3=Fraction(r["epsilon_log3"]),
                residual=Fraction(r["residual"]),
                shift=r["shift"],
                corrected_u=EisensteinInt.from_json(corr["u"]) if corr else None,
                corrected_v=EisensteinInt.from_json(corr["v"]) if corr else None,
            )
        )
    return rows
