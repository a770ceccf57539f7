"""Budgeted oracle for the norm equation |w|^2 = n over Z[w]."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .eisenstein import SQRT_MINUS_3, EisensteinInt, gcd
from .numtheory import DEFAULT_BUDGET, Budget, Factorization, factor, is_prime, sqrt_mod

EASY_COFACTOR_LIMIT = 10**6


class Status(str, enum.Enum):
    SOLVED = "solved"
    UNSOLVABLE = "unsolvable"
    UNKNOWN = "unknown"


@dataclass
class NormOutcome:
    n: int
    status: Status
    w: EisensteinInt | None = None
    work_spent: int = 0
    factorization: Factorization | None = None
    # prime q = 2 mod 3 dividing n to an odd power, with its exact exponent
    witness: tuple[int, int] | None = None

    @property
    def solved(self) -> bool:
        return self.status is Status.SOLVED

    @property
    def unknown(self) -> bool:
        return self.status is Status.UNKNOWN

    def to_json(self) -> dict:
        out: dict = {"status": self.status.value, "n": str(self.n), "work_spent": self.work_spent}
        if self.w is not None:
            out["w"] = self.w.to_json()
        if self.witness is not None:
            out["witness"] = {"prime": str(self.witness[0]), "exponent": self.witness[1]}
        return out


class Reason(str, enum.Enum):
    POWER_OF_THREE = "power_of_three"
    PRIME_COFACTOR = "prime_cofactor"
    SMALL_COFACTOR = "small_cofactor"
    OTHER = "other"


@dataclass(frozen=True)
class InstanceClass:
    easy: bool
    reason: Reason


def strip_threes(n: int) -> tuple[int, int]:
    a = 0
    while n and n % 3 == 0:
        n //= 3
        a += 1
    return a, n


def classify(n: int, small_limit: int = EASY_COFACTOR_LIMIT) -> InstanceClass:
    """Easy iff n = 3^a * m with m = 1, m prime or m < ``small_limit``."""
    if n < 0:
        raise ValueError("norm equation right-hand side must be nonnegative")
    _, m = strip_threes(n)
    if m <= 1:
        return InstanceClass(True, Reason.POWER_OF_THREE)
    if m < small_limit:
        return InstanceClass(True, Reason.SMALL_COFACTOR)
    if is_prime(m):
        return InstanceClass(True, Reason.PRIME_COFACTOR)
    return InstanceClass(False, Reason.OTHER)


def prime_element(p: int) -> EisensteinInt:
    """An element of norm p for a prime p = 1 (mod 3), or p = 3."""
    if p == 3:
        return SQRT_MINUS_3
    x = sqrt_mod(-3, p)
    if x is None:
        raise ValueError(f"{p} does not split in Z[w]")
    pi = gcd(p, EisensteinInt(x) - SQRT_MINUS_3)
    assert pi.norm() == p
    return pi


def _odd_inert(fac: Factorization) -> tuple[int, int] | None:
    for p, e in fac.items():
        if p % 3 == 2 and e % 2 and fac.cofactor % p:
            return p, e
    return None


def solve(n: int, budget: Budget | int | None = None, seed: int = 0) -> NormOutcome:
    """Solve norm(w) = n.

    Unsolvable is reported as soon as a prime q = 2 (mod 3) is found with an
    odd exponent; ``witness`` records it. A partial factorization can still
    prove this when q was fully divided out before the budget ran out.
    """
    if n < 0:
        raise ValueError("norm equation right-hand side must be nonnegative")
    if not isinstance(budget, Budget):
        budget = Budget(DEFAULT_BUDGET if budget is None else budget)
    if n == 0:
        return NormOutcome(n, Status.SOLVED, EisensteinInt(0))
    a, m = strip_threes(n)
    fac = factor(m, budget, seed)
    fac.n = n
    if a:
        fac.factors = dict(sorted({**fac.factors, 3: a}.items()))
    witness = _odd_inert(fac)
    if witness is not None:
        return NormOutcome(n, Status.UNSOLVABLE, None, fac.work_spent, fac, witness)
    if not fac.complete:
        return NormOutcome(n, Status.UNKNOWN, None, fac.work_spent, fac)
    w = EisensteinInt(1)
    for p, e in fac.items():
        if p % 3 == 2:
            w = w * p ** (e // 2)
        else:
            w = w * prime_element(p) ** e
    w = w.canonical()
    assert w.norm() == n
    return NormOutcome(n, Status.SOLVED, w, fac.work_spent, fac)


class OutsideBall(ValueError):
    """Candidate (u, v) has norm(u) + norm(v) > 3^k."""


def residual(u: EisensteinInt, v: EisensteinInt, k: int) -> int:
    return 3**k - u.norm() - v.norm()


def k_feasible(
    u: EisensteinInt, v: EisensteinInt, k: int, budget: Budget | int | None = None, seed: int = 0
) -> NormOutcome:
    n = residual(u, v, k)
    if n < 0:
        raise OutsideBall(f"norm(u) + norm(v) exceeds 3^{k} by {-n}")
    return solve(n, budget, seed)
