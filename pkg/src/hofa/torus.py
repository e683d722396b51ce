"""Exact arithmetic on F_p, Z_{p^j} and the p-power torus U_inf = Z[1/p]/Z.

A torus value ``a / p^(k+1) mod 1`` is kept as an integer numerator and a
level ``k``; the canonical form strips factors of p from the numerator so
that equal values compare equal.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import lru_cache
from math import gcd

from .errors import ParseError, PrimeMismatch


@lru_cache(maxsize=None)
def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def check_prime(p: int) -> int:
    if not is_prime(p):
        raise ValueError(f"p={p} is not prime")
    return p


@lru_cache(maxsize=None)
def primitive_root(p: int) -> int:
    """Smallest generator of F_p^*; this is the fixed zeta used for homogeneity."""
    check_prime(p)
    if p == 2:
        return 1
    order = p - 1
    factors = {q for q in range(2, order + 1) if order % q == 0 and is_prime(q)}
    for g in range(2, p):
        if all(pow(g, order // q, p) != 1 for q in factors):
            return g
    raise AssertionError("unreachable")


def p_valuation(x: int, p: int) -> int:
    if x == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _canonical(p: int, num: int, level: int) -> tuple[int, int]:
    mod = p ** (level + 1)
    num %= mod
    if num == 0:
        return 0, 0
    while level > 0 and num % p == 0:
        num //= p
        level -= 1
    return num, level


@dataclass(frozen=True, order=True)
class TorusValue:
    """The element ``num / p^(level+1)`` of R/Z, always in canonical form."""

    p: int
    num: int
    level: int = 0

    def __post_init__(self):
        num, level = _canonical(self.p, self.num, self.level)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "level", level)

    @classmethod
    def zero(cls, p: int) -> "TorusValue":
        return cls(p, 0, 0)

    @classmethod
    def from_fraction(cls, p: int, num: int, den: int) -> "TorusValue":
        level = _power_exponent(den, p)
        if level is None or level < 1:
            raise ValueError(f"denominator {den} is not a power of p={p}")
        return cls(p, num, level - 1)

    @property
    def denominator(self) -> int:
        return self.p ** (self.level + 1)

    def is_zero(self) -> bool:
        return self.num == 0

    def numerator_at(self, level: int) -> int:
        """Numerator of this value written over p^(level+1)."""
        if level < self.level:
            raise ValueError(f"value {self} does not lie in U_{level + 1}")
        return self.num * self.p ** (level - self.level)

    def _check(self, other: "TorusValue") -> None:
        if self.p != other.p:
            raise PrimeMismatch(f"cannot combine values over p={self.p} and p={other.p}")

    def __add__(self, other: "TorusValue") -> "TorusValue":
        return torus_add(self, other)

    def __neg__(self) -> "TorusValue":
        return TorusValue(self.p, -self.num, self.level)

    def __sub__(self, other: "TorusValue") -> "TorusValue":
        return torus_add(self, -other)

    def __rmul__(self, n: int) -> "TorusValue":
        return int_scale(n, self)

    def __str__(self) -> str:
        return format_torus(self)


def torus_add(a: TorusValue, b: TorusValue) -> TorusValue:
    a._check(b)
    level = max(a.level, b.level)
    return TorusValue(a.p, a.numerator_at(level) + b.numerator_at(level), level)


def int_scale(n: int, a: TorusValue) -> TorusValue:
    return TorusValue(a.p, n * a.num, a.level)


def phase(a: TorusValue) -> complex:
    """e(a) = exp(2 pi i a), exact at the quarter points."""
    return phase_of_fraction(a.num, a.denominator)


def phase_of_fraction(num: int, den: int) -> complex:
    num %= den
    g = gcd(num, den)
    num, den = num // g, den // g
    if num == 0:
        return complex(1.0, 0.0)
    if den == 2:
        return complex(-1.0, 0.0)
    if den == 4:
        return complex(0.0, 1.0) if num == 1 else complex(0.0, -1.0)
    return cmath.exp(2j * cmath.pi * num / den)


@dataclass(frozen=True)
class CyclicInt:
    """An element of Z_{p^(k+1)}; ``exponent`` is k+1."""

    p: int
    value: int
    exponent: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.modulus)

    @property
    def modulus(self) -> int:
        return self.p**self.exponent

    def __int__(self) -> int:
        return self.value


def teichmuller_sigma(p: int, d: int, k: int) -> CyclicInt:
    """The scaling constant sigma(d, k) of homogeneous polynomials of degree d, depth k.

    Unique element of Z_{p^(k+1)} congruent to zeta^d mod p with sigma^(p-1) = 1.
    """
    if d < 0 or k < 0:
        raise ValueError("need d >= 0 and k >= 0")
    mod = p ** (k + 1)
    base = pow(primitive_root(p), d, p)
    sigma = pow(base, p**k, mod)
    if sigma % p != base or pow(sigma, p - 1, mod) != 1:
        raise AssertionError(f"Teichmuller lift failed for p={p}, d={d}, k={k}")
    return CyclicInt(p, sigma, k + 1)


def _power_exponent(den: int, p: int) -> int | None:
    if den < 1:
        return None
    e = 0
    while den % p == 0:
        den //= p
        e += 1
    return e if den == 1 else None


def format_torus(a: TorusValue) -> str:
    if a.num == 0:
        return "0"
    return f"{a.num}/{a.denominator}"


def parse_torus(text: str, p: int) -> TorusValue:
    s = text.strip()
    if s in ("0", "0/1"):
        return TorusValue.zero(p)
    if "/" not in s:
        raise ParseError("torus value must look like a/p^(k+1)", text, 0)
    num_s, den_s = s.split("/", 1)
    try:
        num, den = int(num_s), int(den_s)
    except ValueError:
        raise ParseError("torus value has non-integer parts", text, 0) from None
    level = _power_exponent(den, p)
    if level is None or level < 1:
        raise ParseError(f"denominator not a power of p={p}", text, s.index("/") + 1)
    return TorusValue(p, num, level - 1)
