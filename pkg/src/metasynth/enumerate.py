"""Integer points of rational polytopes in dimension <= 4.

``em_feasible`` is a Lenstra-style emptiness oracle: it slices the polytope
along a short direction of the lattice in the polytope's own metric (found by
LLL on a rounding of its vertex cloud) and recurses on the slices.
``ip_enumerate`` is the divide-and-conquer enumerator that bisects on
integer levels and calls the oracle to prune empty pieces.

Floating point only ever *guides* the search (direction and rounding
guesses); every decision about points uses exact rationals.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from gmpy2 import mpq

from .lattice import float_lll_directions, gcd_list
from .polytope import EmptyPolytope, RationalPolytope

Point = tuple[int, ...]


class EnumerationCapExceeded(RuntimeError):
    pass


@dataclass
class EnumStats:
    bisection_count: int = 0
    oracle_calls: int = 0
    max_recursion_depth: int = 0
    # widths (in units of the chosen direction) at each top-dimension bisection
    branch_widths: list[float] = field(default_factory=list)
    truncated: bool = False

    @property
    def max_width(self) -> float:
        return max(self.branch_widths, default=0.0)

    def merge(self, other: EnumStats) -> None:
        self.bisection_count += other.bisection_count
        self.oracle_calls += other.oracle_calls
        self.max_recursion_depth = max(self.max_recursion_depth, other.max_recursion_depth)
        self.branch_widths += other.branch_widths
        self.truncated |= other.truncated

    def branching_bound(self, m: int) -> int:
        """m * (ceil(log2 W) + 1) with W the largest branching width used."""
        w = self.max_width
        if w <= 0:
            return 0
        return m * (max(math.ceil(math.log2(w) - 1e-12), 0) + 1)

    def to_json(self) -> dict:
        return {
            "bisection_count": self.bisection_count,
            "oracle_calls": self.oracle_calls,
            "max_recursion_depth": self.max_recursion_depth,
            "max_width": self.max_width,
            "truncated": self.truncated,
        }


# --- affine integer maps ------------------------------------------------------


@dataclass(frozen=True)
class AffineMap:
    """x = origin + sum_j y_j * cols[j], mapping local to parent coordinates."""

    origin: tuple[int, ...]
    cols: tuple[tuple[int, ...], ...]

    @classmethod
    def identity(cls, n: int) -> AffineMap:
        return cls(tuple([0] * n), tuple(tuple(int(i == j) for i in range(n)) for j in range(n)))

    def __call__(self, y: Sequence[int]) -> Point:
        x = list(self.origin)
        for yj, col in zip(y, self.cols):
            if yj:
                for i, c in enumerate(col):
                    x[i] += yj * c
        return tuple(x)

    def then(self, outer: AffineMap) -> AffineMap:
        """Compose: local -> self's parent -> outer's parent."""
        origin = outer(self.origin)
        base = outer.origin
        cols = tuple(tuple(a - b for a, b in zip(outer(col), base)) for col in self.cols)
        return AffineMap(origin, cols)


def unimodular_completion(c: Sequence[int]) -> list[list[int]]:
    """Columns of a unimodular U with c^T U = (1, 0, ..., 0); c primitive."""
    n = len(c)
    v = [int(x) for x in c]
    cols = [[int(i == j) for i in range(n)] for j in range(n)]
    for j in range(1, n):
        if v[j] == 0:
            continue
        g, s, t = _xgcd(v[0], v[j])
        a, b = v[j] // g, v[0] // g
        c0 = [s * x + t * y for x, y in zip(cols[0], cols[j])]
        cj = [a * x - b * y for x, y in zip(cols[0], cols[j])]
        cols[0], cols[j] = c0, cj
        v[0], v[j] = g, 0
    if v[0] == -1:
        cols[0] = [-x for x in cols[0]]
    elif v[0] != 1:
        raise ValueError(f"direction {list(c)} is not primitive")
    return cols


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def slice_at(P: RationalPolytope, c: Sequence[int], level: int) -> tuple[RationalPolytope, AffineMap]:
    """Integer slice {x : c.x = level} of P in coordinates of the sublattice."""
    cols = unimodular_completion(c)
    origin = tuple(level * x for x in cols[0])
    basis = cols[1:]
    return P.substitute(origin, basis), AffineMap(origin, tuple(tuple(b) for b in basis))


# --- float shape estimates ----------------------------------------------------


def float_vertices(P: RationalPolytope) -> np.ndarray:
    """Approximate vertices (float) of P; may be empty for tiny polytopes."""
    n = P.dim
    A, b = P.float_rows()
    A = np.array(A)
    b = np.array(b)
    m = len(b)
    if m < n:
        return np.zeros((0, n))
    combos = np.array(list(itertools.combinations(range(m), n)))
    M = A[combos]
    rhs = b[combos]
    det = np.linalg.det(M)
    ok = np.abs(det) > 1e-12
    if not ok.any():
        return np.zeros((0, n))
    X = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
    slack = X @ A.T - b
    scale = 1e-9 * (1.0 + np.abs(X).max(axis=1, keepdims=True))
    feas = (slack <= scale).all(axis=1)
    return X[feas]


def _candidate_directions(P: RationalPolytope, V: np.ndarray, inherited: Sequence[int] | None):
    n = P.dim
    dirs: list[tuple[int, ...]] = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    if inherited is not None:
        dirs.append(tuple(inherited))
    if len(V) > n:
        C = V - V.mean(axis=0)
        S = C.T @ C / len(V)
        for row in float_lll_directions(S):
            g = gcd_list(row)
            if g:
                d = tuple(x // g for x in row)
                if d not in dirs and tuple(-x for x in d) not in dirs:
                    dirs.append(d)
    return dirs


def _float_width(V: np.ndarray, d: Sequence[int]) -> float:
    proj = V @ np.array(d, dtype=float)
    return float(proj.max() - proj.min())


def choose_direction(P: RationalPolytope, V: np.ndarray, inherited: Sequence[int] | None = None) -> tuple[int, ...]:
    """Smallest estimated width among axial, inherited and LLL directions.

    Axial directions come first so they win ties.
    """
    dirs = _candidate_directions(P, V, inherited)
    if len(V) == 0:
        return dirs[0]
    return min(dirs, key=lambda d: _float_width(V, d))


# --- emptiness oracle ---------------------------------------------------------


def find_integer_point(P: RationalPolytope) -> Point | None:
    """Some integer point of the closed polytope P, or None."""
    n = P.dim
    if n == 0:
        return () if not P.is_empty() else None
    if n == 1:
        r = P.integer_range()
        if r is None:
            return None
        return ((r[0] + r[1]) // 2,)
    V = float_vertices(P)
    if len(V):
        guesses = [np.rint(V.mean(axis=0))] + [np.rint(v) for v in V[:8]]
        for g in guesses:
            x = tuple(int(t) for t in g)
            if P.contains(x):
                return x
    d = choose_direction(P, V)
    r = P.integer_range(d)
    if r is None:
        return None
    lo, hi = r
    mid = (lo + hi) // 2
    for level in sorted(range(lo, hi + 1), key=lambda t: (abs(t - mid), t)):
        Q, f = slice_at(P, d, level)
        y = find_integer_point(Q)
        if y is not None:
            return f(y)
    return None


def em_feasible(P: RationalPolytope) -> bool:
    """True iff P has no integer point strictly inside every constraint."""
    return find_integer_point(P.tightened(strict=True)) is None


def has_integer_point(P: RationalPolytope) -> bool:
    return find_integer_point(P.tightened()) is not None


# --- enumeration --------------------------------------------------------------


class _Collector:
    def __init__(self, limit: int | None) -> None:
        self.points: list[Point] = []
        self.limit = limit

    def add(self, p: Point) -> None:
        if self.limit is not None and len(self.points) >= self.limit:
            raise EnumerationCapExceeded
        self.points.append(p)


def ip_enumerate(P: RationalPolytope, limit: int | None = None) -> tuple[set[Point], EnumStats]:
    """All integer points of the closed polytope P.

    With ``limit`` the enumeration stops after that many points and
    ``stats.truncated`` is set.
    """
    if not 1 <= P.dim <= 4:
        raise ValueError("ip_enumerate supports dimensions 1..4")
    stats = EnumStats()
    out = _Collector(limit)
    Q = P.tightened()
    try:
        lo, hi = Q.bounding_box()
    except EmptyPolytope:
        return set(), stats
    centre = tuple(int((a + b) // 2) for a, b in zip(lo, hi))
    shift = AffineMap(centre, AffineMap.identity(P.dim).cols)
    try:
        _ip(Q.translate(centre), P.dim, shift, stats, out, None, 0)
    except EnumerationCapExceeded:
        stats.truncated = True
    return set(out.points), stats


def _ip(P, top, to_root, stats, out, inherited, depth):
    stats.max_recursion_depth = max(stats.max_recursion_depth, depth)
    n = P.dim
    if n == 1:
        r = P.integer_range()
        if r is not None:
            for t in range(r[0], r[1] + 1):
                out.add(to_root((t,)))
        return
    stats.oracle_calls += 1
    if find_integer_point(P) is None:
        return
    V = float_vertices(P)
    d = choose_direction(P, V, inherited)
    try:
        lo, hi = P.width_along(d)
    except EmptyPolytope:
        return
    L, H = int(math.ceil(lo)), int(math.floor(hi))
    if L > H:
        return
    if L == H:
        Q, f = slice_at(P, d, L)
        _ip(Q, top, f.then(to_root), stats, out, None, depth + 1)
        return
    mid = (lo + hi) / 2
    z = int(math.floor(mid))
    if mid - z > mpq(1, 2):
        z += 1
    z = min(max(z, L), H)
    if n == top:
        stats.bisection_count += 1
        stats.branch_widths.append(float(hi - lo))
    neg = tuple(-x for x in d)
    if z - 1 >= L:
        _ip(P.with_constraint(d, z - 1), top, to_root, stats, out, d, depth + 1)
    Q, f = slice_at(P, d, z)
    _ip(Q, top, f.then(to_root), stats, out, None, depth + 1)
    if z + 1 <= H:
        _ip(P.with_constraint(neg, -(z + 1)), top, to_root, stats, out, d, depth + 1)


def brute_force_enumerate(P: RationalPolytope, cap: int = 10**6) -> set[Point]:
    """Scan the integer bounding box with exact membership tests."""
    try:
        lo, hi = P.bounding_box()
    except EmptyPolytope:
        return set()
    ranges = [range(math.ceil(a), math.floor(b) + 1) for a, b in zip(lo, hi)]
    count = math.prod(len(r) for r in ranges)
    if count > cap:
        raise EnumerationCapExceeded(f"bounding box holds {count} points > cap {cap}")
    return {p for p in itertools.product(*ranges) if P.contains(p)}
