"""Exact arithmetic in the Eisenstein integers Z[w], w = exp(2*pi*i/3)."""

from __future__ import annotations

from typing import Iterator


def _round_div(n: int, d: int) -> int:
    """Nearest integer to n/d for d > 0, halves rounded up."""
    return (2 * n + d) // (2 * d)


class EisensteinInt:
    """The element a + b*w of Z[w]; w**2 = -1 - w."""

    __slots__ = ("a", "b")

    def __init__(self, a: int = 0, b: int = 0) -> None:
        self.a = int(a)
        self.b = int(b)

    @classmethod
    def coerce(cls, x: EisensteinInt | int) -> EisensteinInt:
        if isinstance(x, EisensteinInt):
            return x
        if isinstance(x, int):
            return cls(x, 0)
        raise TypeError(f"cannot coerce {type(x).__name__} to EisensteinInt")

    def __repr__(self) -> str:
        return f"EisensteinInt({self.a}, {self.b})"

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        return f"{self.a}{self.b:+d}w"

    def __iter__(self) -> Iterator[int]:
        yield self.a
        yield self.b

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = EisensteinInt(other)
        if not isinstance(other, EisensteinInt):
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self) -> int:
        return hash((self.a, self.b))

    def __bool__(self) -> bool:
        return bool(self.a or self.b)

    def __neg__(self) -> EisensteinInt:
        return EisensteinInt(-self.a, -self.b)

    def __add__(self, other: EisensteinInt | int) -> EisensteinInt:
        try:
            o = EisensteinInt.coerce(other)
        except TypeError:
            return NotImplemented
        return EisensteinInt(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other: EisensteinInt | int) -> EisensteinInt:
        try:
            o = EisensteinInt.coerce(other)
        except TypeError:
            return NotImplemented
        return EisensteinInt(self.a - o.a, self.b - o.b)

    def __rsub__(self, other: EisensteinInt | int) -> EisensteinInt:
        return EisensteinInt.coerce(other) - self

    def __mul__(self, other: EisensteinInt | int) -> EisensteinInt:
        try:
            o = EisensteinInt.coerce(other)
        except TypeError:
            return NotImplemented
        # (a + b w)(c + d w) = ac + (ad + bc) w + bd w^2,  w^2 = -1 - w
        bd = self.b * o.b
        return EisensteinInt(self.a * o.a - bd, self.a * o.b + self.b * o.a - bd)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> EisensteinInt:
        if e < 0:
            raise ValueError("negative exponent")
        result = EisensteinInt(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def conj(self) -> EisensteinInt:
        # conj(w) = w^2 = -1 - w
        return EisensteinInt(self.a - self.b, -self.b)

    def norm(self) -> int:
        return self.a * self.a - self.a * self.b + self.b * self.b

    def divmod(self, other: EisensteinInt | int) -> tuple[EisensteinInt, EisensteinInt]:
        return euclid_div(self, EisensteinInt.coerce(other))

    def __floordiv__(self, other: EisensteinInt | int) -> EisensteinInt:
        return self.divmod(other)[0]

    def __mod__(self, other: EisensteinInt | int) -> EisensteinInt:
        return self.divmod(other)[1]

    def divides(self, other: EisensteinInt | int) -> bool:
        if not self:
            return not other
        return not (EisensteinInt.coerce(other) % self)

    def units_multiples(self) -> list[EisensteinInt]:
        return [self * u for u in UNITS]

    def canonical(self) -> EisensteinInt:
        """Canonical associate: a > 0 and b >= 0, smallest b on ties."""
        if not self:
            return self
        options = [x for x in self.units_multiples() if x.a > 0 and x.b >= 0]
        return min(options, key=lambda x: (x.b, x.a))

    def to_complex(self) -> complex:
        return complex(self.a - self.b / 2, self.b * 3 ** 0.5 / 2)

    def to_json(self) -> list[str]:
        return [str(self.a), str(self.b)]

    @classmethod
    def from_json(cls, pair: list) -> EisensteinInt:
        return cls(int(pair[0]), int(pair[1]))


OMEGA = EisensteinInt(0, 1)
SQRT_MINUS_3 = EisensteinInt(1, 2)  # (1 + 2w)^2 = -3, norm 3
UNITS = (
    EisensteinInt(1, 0),
    EisensteinInt(-1, 0),
    EisensteinInt(0, 1),
    EisensteinInt(0, -1),
    EisensteinInt(1, 1),
    EisensteinInt(-1, -1),
)


def euclid_div(x: EisensteinInt, y: EisensteinInt) -> tuple[EisensteinInt, EisensteinInt]:
    """Return (q, r) with x = q*y + r and norm(r) < norm(y)."""
    if not y:
        raise ZeroDivisionError("Eisenstein division by zero")
    n = y.norm()
    num = x * y.conj()
    q = EisensteinInt(_round_div(num.a, n), _round_div(num.b, n))
    r = x - q * y
    return q, r


def gcd(x: EisensteinInt | int, y: EisensteinInt | int) -> EisensteinInt:
    x = EisensteinInt.coerce(x)
    y = EisensteinInt.coerce(y)
    if not x and not y:
        raise ValueError("gcd(0, 0) is undefined")
    while y:
        x, y = y, euclid_div(x, y)[1]
    return x.canonical()
