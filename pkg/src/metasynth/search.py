"""Iterative search for a k-feasible lattice point near a two-level target."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from mpmath import mp

from .eisenstein import EisensteinInt
from .enumerate import EnumStats, ip_enumerate
from .exprs import RealExpr, as_expr, bits_for_epsilon, log3, precision
from .geometry import (
    Candidate,
    Meniscus,
    TwoLevelState,
    distance,
    enclosing_polytope,
    in_meniscus,
    iota_inverse,
    projection,
)
from .norm_solver import NormOutcome, classify, solve
from .numtheory import DEFAULT_BUDGET

ENUM_LIMIT = 4096
ROUNDING_EXTRA_LEVELS = 48
TOP_BISECTIONS = 24
CUT_ROUNDS = 4
TOP_CUT_ROUNDS = 1
MAX_CUTS = 32
CUTS_PER_ROUND = 8


class Mode(str, enum.Enum):
    FIRST_FEASIBLE = "first-feasible"
    MIN_K_ALL = "min-k-all"


@dataclass(frozen=True)
class SearchConfig:
    lam: float = 0.1
    mode: Mode = Mode.FIRST_FEASIBLE
    norm_budget: int = DEFAULT_BUDGET
    seed: int = 0
    precision: int | None = None
    k_max: int | None = None
    enum_limit: int = ENUM_LIMIT
    threads: int = 1

    def __post_init__(self) -> None:
        if not 0 < self.lam <= 0.75:
            raise ValueError(f"lambda must lie in (0, 3/4], got {self.lam}")
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.threads < 1:
            raise ValueError("threads must be positive")

    def to_json(self) -> dict:
        return {
            "lambda": self.lam,
            "mode": self.mode.value,
            "norm_budget": self.norm_budget,
            "seed": self.seed,
            "precision_bits": self.precision,
            "k_max": self.k_max,
            "enum_limit": self.enum_limit,
        }


@dataclass
class SearchStats:
    candidates_inspected: int = 0
    norm_calls: int = 0
    levels_visited: int = 0
    rounding_levels: int = 0
    enum: EnumStats = field(default_factory=EnumStats)

    def to_json(self) -> dict:
        return {
            "candidates_inspected": self.candidates_inspected,
            "norm_calls": self.norm_calls,
            "levels_visited": self.levels_visited,
            "rounding_levels": self.rounding_levels,
            "oracle_calls": self.enum.oracle_calls,
            "bisection_count": self.enum.bisection_count,
        }


@dataclass
class ApproxResult:
    u: EisensteinInt
    v: EisensteinInt
    w: EisensteinInt
    k: int
    levels: tuple[int, int]
    distance: Any
    candidates_inspected: int = 0
    unknown_instances: list[int] = field(default_factory=list)
    stats: SearchStats = field(default_factory=SearchStats)
    notes: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.u.norm() + self.v.norm() + self.w.norm() != 3**self.k:
            raise AssertionError("norm(u) + norm(v) + norm(w) != 3^k")

    @property
    def r_count_bound(self) -> int:
        return self.k + 1

    @property
    def depth_range(self) -> tuple[int, int, int]:
        return (2 * self.k - 1, 2 * self.k, 2 * self.k + 1)

    @property
    def distance_log3(self) -> Any:
        if self.distance == 0:
            return mp.ninf
        return log3(self.distance)

    def amplitudes(self) -> list[EisensteinInt]:
        """Unnormalised amplitudes on levels 0, 1, 2."""
        out = [EisensteinInt(0)] * 3
        i, j = self.levels
        out[i], out[j] = self.u, self.v
        out[3 - i - j] = self.w
        return out

    def to_json(self) -> dict:
        d = self.distance_log3
        return {
            "status": "ok",
            "k": self.k,
            "levels": list(self.levels),
            "u": self.u.to_json(),
            "v": self.v.to_json(),
            "w": self.w.to_json(),
            "distance": mp.nstr(self.distance, 20),
            "distance_log3": None if d == mp.ninf else mp.nstr(d, 12),
            "r_count_bound": self.r_count_bound,
            "depth_range": list(self.depth_range),
            "unknown_instances": [str(n) for n in self.unknown_instances],
            "stats": self.stats.to_json(),
            **({"notes": self.notes} if self.notes else {}),
        }


class SearchException(Exception):
    """Raised when some level holds more than eps^-lambda candidates."""

    def __init__(
        self,
        k: int,
        threshold: float,
        count: int,
        partial: list[Candidate] | None = None,
        lower_bound: bool = False,
    ) -> None:
        if lower_bound:
            msg = f"level k={k} is past the enumeration limit ({count} meniscus points verified, threshold {threshold:.4g})"
        else:
            msg = f"{count} candidates at k={k} exceed the threshold {threshold:.4g}"
        super().__init__(msg)
        self.k_at_exception = k
        self.count_threshold = threshold
        self.count = count
        self.partial = partial or []
        # set when enumeration stopped at its limit, so count is only what was seen
        self.count_is_lower_bound = lower_bound


class BudgetExhaustedError(RuntimeError):
    def __init__(self, k: int, unknown: list[int]) -> None:
        super().__init__(f"no feasible point up to k={k}; {len(unknown)} norm equations left undecided")
        self.k = k
        self.unknown_instances = unknown


# --- helpers ------------------------------------------------------------------


def enumeration_cap(eps: float) -> int:
    return math.ceil(4 * math.log(1 / eps, 3)) + 16


def candidate_order(candidates: Iterable[Candidate], target: TwoLevelState, bits: int | None = None) -> list[Candidate]:
    """Decreasing <r[candidate], r[target]>, ties by (a1, a2, a3, a4).

    Projections are compared after normalising by sqrt(3)^k, so candidates
    of different levels are ranked by precision.
    """
    cands = list(candidates)
    if len(cands) < 2:
        return cands
    bits = bits or target.precision
    # quantise below working precision so genuine ties reach the coefficient tie-break
    with precision(bits):
        scale = mp.mpf(2) ** (bits - 32)
        keyed = [(int(mp.nint(projection(target, c.coeffs, c.k, bits) * scale)), c.coeffs, c) for c in cands]
    keyed.sort(key=lambda t: (-t[0], t[1]))
    return [t[2] for t in keyed]


def level_candidates(
    m: Meniscus,
    k: int,
    limit: int | None = ENUM_LIMIT,
    stats: EnumStats | None = None,
    bits: int | None = None,
    cuts: list[tuple[int, ...]] | None = None,
    rounds: int = CUT_ROUNDS,
) -> tuple[list[tuple[int, ...]], bool]:
    """Lattice points of sqrt(3)^k M (exactly filtered); flag set if truncated.

    The enclosing box overshoots the ball near its corners. When the enumeration
    hits ``limit``, tangent half-spaces of the ball through returned outside
    points are added and the level is enumerated again, until the enumeration
    completes or reaches genuine meniscus points. Cuts depend only on the ball,
    so a caller may pass a list to share them between caps of the same level.
    """
    cuts = [] if cuts is None else cuts
    for _ in range(rounds + 1):
        P = enclosing_polytope(m, k, bits, cuts)
        pts, st = ip_enumerate(P, limit=limit)
        if stats is not None:
            stats.merge(st)
        good, bad = [], []
        for a in sorted(pts):
            (good if in_meniscus(a, m, k, bits) else bad).append(a)
        if not st.truncated or good or len(cuts) >= MAX_CUTS:
            break
        step = max(1, len(bad) // CUTS_PER_ROUND)
        cuts += bad[::step][:CUTS_PER_ROUND]
    return good, st.truncated


def top_candidates(
    m: Meniscus,
    k: int,
    want: int,
    limit: int | None = ENUM_LIMIT,
    stats: EnumStats | None = None,
    bits: int | None = None,
    cuts: list[tuple[int, ...]] | None = None,
) -> list[tuple[int, ...]]:
    """Meniscus points of largest projection when the full level is too big to enumerate.

    A thinner cap (smaller epsilon) holds exactly the points ranked first by
    candidate_order, so bisect its width until enumeration is no longer truncated.
    Lattice directions orthogonal to the target make whole families of points
    tie; thinning can then jump from too many to none, and the points found in
    the thinnest truncated cap are used instead.
    """
    bits = bits or m.bits
    with precision(bits):
        eps = m.epsilon.evaluate(mp)
    lo, hi, f = mp.mpf(0), mp.mpf(1), mp.mpf("0.5")
    best: list[tuple[int, ...]] = []
    partial: list[tuple[int, ...]] = []
    cuts = [] if cuts is None else cuts
    for _ in range(TOP_BISECTIONS):
        with precision(bits):
            sub = Meniscus(m.target, as_expr(mp.nstr(eps * f, bits // 3)))
        pts, truncated = level_candidates(sub, k, limit, stats, bits, cuts, TOP_CUT_ROUNDS)
        if truncated:
            hi, partial = f, pts or partial
        else:
            best, lo = pts, f
            if len(pts) >= want:
                break
        f = (lo + hi) / 2
    return [a for a in best or partial if in_meniscus(a, m, k, bits)]


def rounding_candidates(m: Meniscus, k: int, bits: int | None = None) -> list[tuple[int, ...]]:
    """Round sqrt(3)^k p to the lattice and keep meniscus points nearby."""
    bits = bits or m.bits
    with precision(bits + 2 * k):
        p = m.target.r_vector(bits + 2 * k)
        S = mp.sqrt(3) ** k
        a = iota_inverse([x * S for x in p])
        base = [int(mp.nint(x)) for x in a]
    out = set()
    for d1 in (-1, 0, 1):
        for d2 in (-1, 0, 1):
            for d3 in (-1, 0, 1):
                for d4 in (-1, 0, 1):
                    q = (base[0] + d1, base[1] + d2, base[2] + d3, base[3] + d4)
                    if in_meniscus(q, m, k, bits):
                        out.add(q)
    return sorted(out)


def _check(cand: Candidate, cfg: SearchConfig) -> NormOutcome:
    return solve(cand.ball_residual(), cfg.norm_budget, cfg.seed)


def _feasibility(
    cands: Sequence[Candidate], cfg: SearchConfig, stats: SearchStats, first_only: bool
) -> tuple[list[tuple[Candidate, EisensteinInt]], list[int]]:
    """Solve norm equations, easy instances first; returns successes in order.

    With ``first_only`` the scan stops at the first success of each pass.
    Selection never depends on thread scheduling: results are consumed in
    candidate order.
    """
    easy = [c for c in cands if classify(c.ball_residual()).easy]
    hard = [c for c in cands if not classify(c.ball_residual()).easy]
    found: list[tuple[Candidate, EisensteinInt]] = []
    unknown: list[int] = []
    pool = ThreadPoolExecutor(cfg.threads) if cfg.threads > 1 else None
    try:
        for group in (easy, hard):
            step = cfg.threads
            for start in range(0, len(group), step):
                chunk = group[start : start + step]
                outs = list(pool.map(lambda c: _check(c, cfg), chunk)) if pool else [_check(c, cfg) for c in chunk]
                for c, out in zip(chunk, outs):
                    stats.norm_calls += 1
                    if out.solved:
                        found.append((c, out.w))
                    elif out.unknown:
                        unknown.append(out.n)
                if first_only and found:
                    return found[:1], unknown
    finally:
        if pool:
            pool.shutdown()
    return found, unknown


def _result(target, cand, w, eps, bits, stats, unknown) -> ApproxResult:
    d = distance(target, cand, 2 * bits)
    with precision(2 * bits):
        if not d <= as_expr(eps).evaluate(mp):
            raise AssertionError(f"distance {mp.nstr(d, 10)} exceeds epsilon")
    return ApproxResult(
        cand.u, cand.v, w, cand.k, target.levels, d, stats.candidates_inspected, unknown, stats
    )


# --- iterative search --------------------------------------------------------------


def approximate_state(target: TwoLevelState, eps: RealExpr | str | float, cfg: SearchConfig | None = None) -> ApproxResult:
    cfg = cfg or SearchConfig()
    eps = as_expr(str(eps) if isinstance(eps, float) else eps)
    m = Meniscus(target, eps)
    ef = m.eps_float
    bits = cfg.precision or bits_for_epsilon(ef)
    threshold = ef ** (-cfg.lam)
    cap = enumeration_cap(ef)
    k_last = cfg.k_max if cfg.k_max is not None else cap + ROUNDING_EXTRA_LEVELS
    stats = SearchStats()
    unknown: list[int] = []
    for k in range(0, k_last + 1):
        stats.levels_visited += 1
        sample = 64 * max(k, 1)
        if k <= cap:
            cuts: list[tuple[int, ...]] = []
            pts, truncated = level_candidates(m, k, cfg.enum_limit, stats.enum, bits, cuts)
            if truncated and cfg.mode is Mode.FIRST_FEASIBLE:
                pts = top_candidates(m, k, sample, cfg.enum_limit, stats.enum, bits, cuts)
        else:
            stats.rounding_levels += 1
            pts, truncated = rounding_candidates(m, k, bits), False
        if not pts and not truncated:
            continue
        cands = candidate_order([Candidate.from_coeffs(a, k, target.levels) for a in pts], target, bits)
        too_many = truncated or len(cands) > threshold
        if cfg.mode is Mode.FIRST_FEASIBLE:
            pool = cands[:sample] if too_many else cands
            stats.candidates_inspected += len(pool)
            found, unk = _feasibility(pool, cfg, stats, first_only=True)
            unknown += unk
            if found:
                return _result(target, found[0][0], found[0][1], eps, bits, stats, unknown)
            if too_many and k <= cap:
                raise SearchException(k, threshold, len(cands), pool, lower_bound=truncated)
        else:
            if too_many and k <= cap:
                raise SearchException(k, threshold, len(cands), cands, lower_bound=truncated)
            stats.candidates_inspected += len(cands)
            found, unk = _feasibility(cands, cfg, stats, first_only=False)
            unknown += unk
            if found:
                # smallest distance; candidate_order already ranks by projection
                best = candidate_order([c for c, _ in found], target, bits)[0]
                w = next(w for c, w in found if c is best)
                return _result(target, best, w, eps, bits, stats, unknown)
    raise BudgetExhaustedError(k_last, unknown)


def reflection_budget(target: TwoLevelState, eps: RealExpr | str | float, cfg: SearchConfig | None = None) -> dict:
    res = approximate_state(target, eps, cfg)
    return {"state_result": res, "reflection_r_count_bound": 2 * (res.k + 1) + 1}
