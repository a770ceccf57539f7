"""Rational-integer number theory used by the norm equation solver.

Primality is Miller-Rabin (deterministic below 3.3e24), factoring is trial
division followed by Pollard rho with Brent cycle detection. All work is
metered by a :class:`Budget` so callers can cap hard instances.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

TRIAL_LIMIT = 10_000
DEFAULT_BUDGET = 10_000_000

# Bases 2..41 are a proven witness set for n < 3.317e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_DETERMINISTIC_LIMIT = 3_317_044_064_679_887_385_961_981
_EXTRA_ROUNDS = 16


def _small_primes(limit: int) -> list[int]:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i, flag in enumerate(sieve) if flag]


SMALL_PRIMES = _small_primes(TRIAL_LIMIT)


class BudgetExhausted(Exception):
    pass


class Budget:
    """Work meter: Pollard-rho iterations plus Miller-Rabin calls."""

    def __init__(self, limit: int = DEFAULT_BUDGET) -> None:
        self.limit = limit
        self.spent = 0

    def spend(self, units: int = 1) -> None:
        self.spent += units
        if self.spent > self.limit:
            raise BudgetExhausted(self.spent)

    @property
    def remaining(self) -> int:
        return max(self.limit - self.spent, 0)


def _mr_round(n: int, d: int, s: int, a: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int, budget: Budget | None = None, rng: random.Random | None = None) -> bool:
    if budget is not None:
        budget.spend()
    if n < 2:
        return False
    for p in SMALL_PRIMES[:25]:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if not all(_mr_round(n, d, s, a) for a in _MR_BASES):
        return False
    if n < _MR_DETERMINISTIC_LIMIT:
        return True
    rng = rng or random.Random(n)
    return all(_mr_round(n, d, s, rng.randrange(2, n - 1)) for _ in range(_EXTRA_ROUNDS))


def sqrt_mod(a: int, p: int) -> int | None:
    """Tonelli-Shanks: x with x*x = a (mod p), or None if a is a non-residue."""
    if p == 2 or not is_prime(p):
        raise ValueError(f"{p} is not an odd prime")
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def pollard_brent(n: int, budget: Budget, rng: random.Random) -> int:
    """A non-trivial factor of the odd composite n."""
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g, r, q = 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            budget.spend(r)
            k = 0
            while k < r and g == 1:
                ys = y
                steps = min(m, r - k)
                for _ in range(steps):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                budget.spend(steps)
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                budget.spend()
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


@dataclass
class Factorization:
    """Prime factorization of ``n``; ``cofactor`` > 1 marks an unresolved composite."""

    n: int
    factors: dict[int, int] = field(default_factory=dict)
    cofactor: int = 1
    work_spent: int = 0

    @property
    def complete(self) -> bool:
        return self.cofactor == 1

    def items(self) -> list[tuple[int, int]]:
        return sorted(self.factors.items())

    def residues(self) -> dict[int, int]:
        return {p: p % 3 for p in self.factors}

    def product(self) -> int:
        out = self.cofactor
        for p, e in self.factors.items():
            out *= p**e
        return out

    def _add(self, p: int, e: int = 1) -> None:
        self.factors[p] = self.factors.get(p, 0) + e


def factor(n: int, budget: Budget | int | None = None, seed: int = 0) -> Factorization:
    """Factor ``n`` within ``budget``.

    On exhaustion the returned factorization is partial: ``complete`` is False
    and ``cofactor`` holds the single composite left unsplit.
    """
    if n < 1:
        raise ValueError("factor() needs n >= 1")
    if not isinstance(budget, Budget):
        budget = Budget(DEFAULT_BUDGET if budget is None else budget)
    start = budget.spent
    rng = random.Random(seed)
    out = Factorization(n)
    m = n
    for p in SMALL_PRIMES:
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out._add(p, e)
    pending = [m] if m > 1 else []
    try:
        while pending:
            c = pending.pop()
            if c == 1:
                continue
            if is_prime(c, budget, rng):
                out._add(c)
                continue
            r = math.isqrt(c)
            if r * r == c:
                pending += [r, r]
                continue
            d = pollard_brent(c, budget, rng)
            pending += [d, c // d]
    except BudgetExhausted:
        pending.append(c)
        out.cofactor = math.prod(pending)
    # merge split copies of the same prime
    out.factors = dict(sorted(out.factors.items()))
    out.work_spent = budget.spent - start
    return out
