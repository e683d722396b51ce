"""Non-classical polynomials F_p^n -> T in canonical form.

Every polynomial is ``shift + sum_{e,k} c_{e,k} |x|^e / p^(k+1)`` with digits
``c in [0, p-1]`` and exponent vectors ``e in [0, p-1]^n``, ``e != 0``.  For a
fixed exponent vector the digits over all depths combine into one torus value
``t_e = sum_k c_{e,k} / p^(k+1)``, and ``P(x) = shift + sum_e |x|^e * t_e``
where ``|x|^e`` is an ordinary integer.  Addition and integer scaling are
therefore slot-wise torus operations; carries between depths come for free.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, ParseError, PrimeMismatch
from .linalg import inverse_mod_prime_power
from .space import fp_space
from .torus import TorusValue, check_prime, format_torus, parse_torus

Exponents = tuple[int, ...]


def monomial_degree(p: int, exps: Exponents, depth: int) -> int:
    return sum(exps) + depth * (p - 1)


def _term_key(item):
    (exps, depth), _ = item
    return (sum(exps), tuple(-e for e in exps), depth)


class NCPoly:
    """An immutable non-classical polynomial over F_p^n."""

    __slots__ = ("p", "n", "shift", "_slots", "_hash")

    def __init__(self, p: int, n: int, slots: Mapping[Exponents, TorusValue] | None = None,
                 shift: TorusValue | None = None):
        self.p = p
        self.n = n
        self.shift = TorusValue.zero(p) if shift is None else shift
        if self.shift.p != p:
            raise PrimeMismatch("shift prime differs from polynomial prime")
        clean: dict[Exponents, TorusValue] = {}
        for exps, val in (slots or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != n:
                raise DimensionMismatch(f"exponent vector {exps} has wrong length for n={n}")
            if any(e < 0 or e >= p for e in exps):
                raise ValueError(f"exponents must lie in [0, {p - 1}], got {exps}")
            if val.p != p:
                raise PrimeMismatch("coefficient prime differs from polynomial prime")
            if not any(exps):
                self.shift = self.shift + val
                continue
            if exps in clean:
                val = clean[exps] + val
            clean[exps] = val
        self._slots = {e: v for e, v in sorted(clean.items()) if not v.is_zero()}
        self._hash = None

    # construction -----------------------------------------------------

    @classmethod
    def zero(cls, p: int, n: int) -> "NCPoly":
        return cls(p, n)

    @classmethod
    def constant(cls, value: TorusValue, n: int) -> "NCPoly":
        return cls(value.p, n, shift=value)

    @classmethod
    def monomial(cls, p: int, exps: Sequence[int], depth: int = 0, coeff: int = 1) -> "NCPoly":
        """``coeff * |x|^exps / p^(depth+1)``."""
        exps = tuple(exps)
        return cls(p, len(exps), {exps: TorusValue(p, coeff, depth)})

    @classmethod
    def from_terms(cls, p: int, n: int, terms: Mapping[tuple[Exponents, int], int],
                   shift: TorusValue | None = None) -> "NCPoly":
        """Build from the digit map (exponents, depth) -> c."""
        slots: dict[Exponents, TorusValue] = {}
        for (exps, depth), c in terms.items():
            v = TorusValue(p, c, depth)
            slots[tuple(exps)] = slots[tuple(exps)] + v if tuple(exps) in slots else v
        return cls(p, n, slots, shift)

    # structure --------------------------------------------------------

    @property
    def slots(self) -> dict[Exponents, TorusValue]:
        return dict(self._slots)

    @property
    def terms(self) -> dict[tuple[Exponents, int], int]:
        """Canonical digit map (exponents, depth) -> c in [1, p-1]."""
        out = {}
        for exps, t in self._slots.items():
            a = t.num
            for k in range(t.level + 1):
                c = (a // self.p ** (t.level - k)) % self.p
                if c:
                    out[(exps, k)] = c
        return out

    @property
    def degree(self) -> int:
        return max((monomial_degree(self.p, e, t.level) for e, t in self._slots.items()), default=0)

    @property
    def depth(self) -> int:
        return max((t.level for t in self._slots.values()), default=0)

    @property
    def level(self) -> int:
        """Smallest K such that every value lies in U_{K+1}."""
        return max([self.depth if self._slots else 0, self.shift.level])

    def is_zero(self) -> bool:
        return not self._slots and self.shift.is_zero()

    def is_constant(self) -> bool:
        return not self._slots

    def top_terms(self) -> dict[tuple[Exponents, int], int]:
        d = self.degree
        return {key: c for key, c in self.terms.items() if monomial_degree(self.p, *key) == d}

    # arithmetic -------------------------------------------------------

    def _check(self, other: "NCPoly") -> None:
        if self.p != other.p:
            raise PrimeMismatch(f"p={self.p} vs p={other.p}")
        if self.n != other.n:
            raise DimensionMismatch(f"n={self.n} vs n={other.n}")

    def __add__(self, other: "NCPoly") -> "NCPoly":
        return add(self, other)

    def __neg__(self) -> "NCPoly":
        return scale(-1, self)

    def __sub__(self, other: "NCPoly") -> "NCPoly":
        return add(self, scale(-1, other))

    def __rmul__(self, lam: int) -> "NCPoly":
        return scale(lam, self)

    def __mul__(self, lam: int) -> "NCPoly":
        return scale(lam, self)

    def __call__(self, x: Sequence[int]) -> TorusValue:
        return eval_poly(self, x)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NCPoly):
            return NotImplemented
        return (self.p, self.n, self.shift, self._slots) == (other.p, other.n, other.shift, other._slots)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.p, self.n, self.shift, tuple(self._slots.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"NCPoly(p={self.p}, n={self.n}, {format_poly(self)!r})"

    def __str__(self) -> str:
        return format_poly(self)

    # evaluation -------------------------------------------------------

    def values_at(self, points: np.ndarray, level: int | None = None) -> np.ndarray:
        """Numerators over p^(level+1) of P at each row of ``points``."""
        level = self.level if level is None else level
        if level < self.level:
            raise ValueError(f"level {level} is below the polynomial level {self.level}")
        q = self.p ** (level + 1)
        pts = np.asarray(points, dtype=np.int64) % self.p
        if pts.shape[-1] != self.n:
            raise DimensionMismatch(f"points need {self.n} coordinates")
        out = np.full(pts.shape[:-1], self.shift.numerator_at(level) % q, dtype=np.int64)
        for exps, t in self._slots.items():
            mono = np.ones(pts.shape[:-1], dtype=np.int64)
            for i, e in enumerate(exps):
                if e:
                    mono = (mono * pts[..., i] ** e) % q
            out = (out + t.numerator_at(level) % q * mono) % q
        return out

    def table(self, level: int | None = None) -> "FunctionTable":
        sp = fp_space(self.p, self.n)
        level = self.level if level is None else level
        return FunctionTable(self.p, self.n, level, self.values_at(sp.points, level))


def eval_poly(P: NCPoly, x: Sequence[int]) -> TorusValue:
    x = tuple(int(c) for c in x)
    if len(x) != P.n:
        raise DimensionMismatch(f"point has {len(x)} coordinates, polynomial has n={P.n}")
    val = P.shift
    for exps, t in P._slots.items():
        mono = 1
        for xi, e in zip(x, exps):
            mono *= (xi % P.p) ** e
        val = val + mono * t
    return val


def degree(P: NCPoly) -> int:
    return P.degree


def depth(P: NCPoly) -> int:
    return P.depth


def scale(lam: int, P: NCPoly) -> NCPoly:
    return NCPoly(P.p, P.n, {e: lam * t for e, t in P._slots.items()}, lam * P.shift)


def add(P: NCPoly, Q: NCPoly) -> NCPoly:
    P._check(Q)
    slots = dict(P._slots)
    for e, t in Q._slots.items():
        slots[e] = slots[e] + t if e in slots else t
    return NCPoly(P.p, P.n, slots, P.shift + Q.shift)


# ---------------------------------------------------------------------------
# function tables and interpolation


@dataclass(frozen=True, eq=False)
class FunctionTable:
    """A total map F_p^n -> U_{level+1}, stored as numerators over p^(level+1)."""

    p: int
    n: int
    level: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.int64) % self.p ** (self.level + 1)
        if vals.shape != (self.p**self.n,):
            raise DimensionMismatch(f"table needs {self.p ** self.n} entries, got {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, p: int, n: int, values: Iterable[TorusValue]) -> "FunctionTable":
        values = list(values)
        level = max((v.level for v in values), default=0)
        return cls(p, n, level, np.array([v.numerator_at(level) for v in values], dtype=np.int64))

    @classmethod
    def from_function(cls, p: int, n: int, fn) -> "FunctionTable":
        sp = fp_space(p, n)
        return cls.from_values(p, n, (fn(sp.point(i)) for i in range(sp.size)))

    def __getitem__(self, x) -> TorusValue:
        idx = x if isinstance(x, (int, np.integer)) else fp_space(self.p, self.n).index(x)
        return TorusValue(self.p, int(self.values[idx]), self.level)

    def to_values(self) -> list[TorusValue]:
        return [TorusValue(self.p, int(v), self.level) for v in self.values]

    def at_level(self, level: int) -> "FunctionTable":
        if level < self.level:
            raise ValueError("cannot lower the level of a table")
        return FunctionTable(self.p, self.n, level, self.values * self.p ** (level - self.level))

    def __eq__(self, other) -> bool:
        if not isinstance(other, FunctionTable):
            return NotImplemented
        return self.to_values() == other.to_values() and (self.p, self.n) == (other.p, other.n)


@lru_cache(maxsize=64)
def _vandermonde_inverse(p: int, level: int) -> np.ndarray:
    V = [[pow(x, e) if e else 1 for e in range(p)] for x in range(p)]
    inv = inverse_mod_prime_power(V, p, level + 1).astype(np.int64)
    inv.setflags(write=False)
    return inv


def interpolate(t: FunctionTable) -> NCPoly:
    """The unique canonical polynomial whose values are the table entries.

    The matrix of monomial values |x|^e over F_p^n is a tensor power of the
    univariate Vandermonde matrix on nodes 0..p-1, whose determinant is a unit
    mod p, so the solve is one small inverse applied along every axis.
    """
    p, n, level = t.p, t.n, t.level
    q = p ** (level + 1)
    coeffs = t.values.reshape((p,) * n) if n else t.values.reshape(())
    inv = _vandermonde_inverse(p, level)
    for axis in range(n):
        coeffs = np.moveaxis(np.tensordot(inv, coeffs, axes=([1], [axis])) % q, 0, axis)
    coeffs = np.asarray(coeffs).reshape(-1)
    sp = fp_space(p, n)
    shift = TorusValue(p, int(coeffs[0]), level)
    slots = {}
    for idx in range(1, sp.size):
        a = int(coeffs[idx])
        if a:
            slots[sp.point(idx)] = TorusValue(p, a, level)
    return NCPoly(p, n, slots, shift)


# ---------------------------------------------------------------------------
# derivatives


def additive_derivative(P: NCPoly, h: Sequence[int]) -> NCPoly:
    """D_h P(x) = P(x + h) - P(x), recovered from its value table."""
    h = np.asarray(h, dtype=np.int64)
    if h.shape != (P.n,):
        raise DimensionMismatch(f"direction must have {P.n} coordinates")
    sp = fp_space(P.p, P.n)
    level = P.level
    diff = P.values_at(sp.points + h, level) - P.values_at(sp.points, level)
    return interpolate(FunctionTable(P.p, P.n, level, diff))


def _iterated_difference(P: NCPoly, x, hs) -> TorusValue:
    t = len(hs)
    x = np.asarray(x, dtype=np.int64)
    hs = [np.asarray(h, dtype=np.int64) for h in hs]
    for v in [x, *hs]:
        if v.shape != (P.n,):
            raise DimensionMismatch(f"points must have {P.n} coordinates")
    total = TorusValue.zero(P.p)
    for r in range(t + 1):
        for S in combinations(range(t), r):
            pt = x + sum((hs[i] for i in S), np.zeros(P.n, dtype=np.int64))
            total = total + (-1) ** (t - r) * eval_poly(P, pt)
    return total


def derivative_poly_eval(P: NCPoly, hs: Sequence[Sequence[int]]) -> TorusValue:
    """The top derivative polynomial D_{h_1}...D_{h_d} P(0) with d = deg P."""
    if len(hs) != P.degree:
        raise ValueError(f"derivative polynomial takes deg P = {P.degree} directions, got {len(hs)}")
    return _iterated_difference(P, [0] * P.n, hs)


def partial_derivative_eval(P: NCPoly, x: Sequence[int], hs: Sequence[Sequence[int]]) -> TorusValue:
    """D_{h_1}...D_{h_t} P(x)."""
    return _iterated_difference(P, x, hs)


# ---------------------------------------------------------------------------
# composition with linear forms


class LinearComposition:
    """X -> P(L(X)) on (F^n)^ell, evaluated pointwise without expansion."""

    def __init__(self, P: NCPoly, coeffs: Sequence[int]):
        self.P = P
        self.coeffs = tuple(int(c) % P.p for c in getattr(coeffs, "coeffs", coeffs))
        self.ell = len(self.coeffs)

    def __call__(self, X: Sequence[Sequence[int]]) -> TorusValue:
        if len(X) != self.ell:
            raise DimensionMismatch(f"expected {self.ell} points")
        pt = [0] * self.P.n
        for c, x in zip(self.coeffs, X):
            if len(x) != self.P.n:
                raise DimensionMismatch(f"points must have {self.P.n} coordinates")
            pt = [(a + c * b) % self.P.p for a, b in zip(pt, x)]
        return eval_poly(self.P, pt)

    def table(self, level: int | None = None) -> np.ndarray:
        """Numerators over all X in (F^n)^ell, X in C order."""
        sp = fp_space(self.P.p, self.P.n)
        vals = self.P.values_at(sp.points, level)
        return vals[sp.linear_images(self.coeffs)]


def compose_linear(P: NCPoly, L) -> LinearComposition:
    return LinearComposition(P, L)


# ---------------------------------------------------------------------------
# random generation


def random_poly(p: int, n: int, max_level: int, rng: np.random.Generator,
                with_shift: bool = True, density: float = 1.0) -> NCPoly:
    """Random polynomial with all values in U_{max_level+1}."""
    q = p ** (max_level + 1)
    slots = {}
    for exps in product(range(p), repeat=n):
        if any(exps) and rng.random() < density:
            slots[exps] = TorusValue(p, int(rng.integers(q)), max_level)
    shift = TorusValue(p, int(rng.integers(q)), max_level) if with_shift else None
    return NCPoly(p, n, slots, shift)


# ---------------------------------------------------------------------------
# text form


def format_poly(P: NCPoly) -> str:
    """Canonical text: ``[shift a/q + ]c/p^(k+1) x1^e1 ... xn^en + ...``."""
    parts = []
    if not P.shift.is_zero():
        parts.append(f"shift {format_torus(P.shift)}")
    for (exps, k), c in sorted(P.terms.items(), key=_term_key):
        mono = " ".join(f"x{i + 1}^{e}" for i, e in enumerate(exps))
        parts.append(f"{c}/{P.p ** (k + 1)} {mono}")
    return " + ".join(parts) if parts else "0"


_TERM_RE = re.compile(r"^\s*(-?\d+)\s*/\s*(\d+)((?:\s*x\d+(?:\^\d+)?)*)\s*$")
_VAR_RE = re.compile(r"x(\d+)(?:\^(\d+))?")


def parse_poly(text: str, p: int, n: int | None = None) -> NCPoly:
    """Parse the text form; variables not mentioned in a term have exponent 0."""
    check_prime(p)
    pieces = []
    pos = 0
    for chunk in text.split("+"):
        pieces.append((chunk, pos))
        pos += len(chunk) + 1
    shift = TorusValue.zero(p)
    raw: list[tuple[dict[int, int], TorusValue]] = []
    max_var = 0
    for chunk, start in pieces:
        s = chunk.strip()
        offset = start + (len(chunk) - len(chunk.lstrip()))
        if not s:
            raise ParseError("empty term", text, offset)
        if s == "0":
            continue
        if s.startswith("shift"):
            try:
                shift = shift + parse_torus(s[len("shift"):], p)
            except ParseError as exc:
                raise ParseError(str(exc).split(" (at")[0], text, offset) from None
            continue
        m = _TERM_RE.match(s)
        if not m:
            raise ParseError("malformed term", text, offset)
        coef = m.group(1) + "/" + m.group(2)
        try:
            val = parse_torus(coef, p)
        except ParseError:
            raise ParseError(f"denominator not a power of p={p}", text,
                             offset + s.index("/") + 1) from None
        exps: dict[int, int] = {}
        for vm in _VAR_RE.finditer(m.group(3)):
            var = int(vm.group(1))
            e = int(vm.group(2)) if vm.group(2) is not None else 1
            if var < 1:
                raise ParseError("variables are numbered from x1", text, offset)
            if e >= p:
                raise ParseError(f"exponent {e} must be below p={p}", text, offset)
            exps[var] = exps.get(var, 0) + e
            if exps[var] >= p:
                raise ParseError(f"exponent of x{var} must be below p={p}", text, offset)
            max_var = max(max_var, var)
        raw.append((exps, val))
    if n is None:
        n = max(max_var, 1)
    elif max_var > n:
        raise ParseError(f"variable x{max_var} exceeds n={n}", text, 0)
    slots: dict[Exponents, TorusValue] = {}
    for exps, val in raw:
        key = tuple(exps.get(i + 1, 0) for i in range(n))
        if not any(key):
            shift = shift + val
            continue
        slots[key] = slots[key] + val if key in slots else val
    return NCPoly(p, n, slots, shift)
