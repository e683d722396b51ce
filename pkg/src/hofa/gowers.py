"""Gowers uniformity norms, biases and uniformity certificates.

Two exact paths share one enumeration order (x, y_1, ..., y_d):

* phase-of-polynomial inputs take iterated *additive* differences of integer
  numerators and histogram them over Z_{p^(K+1)}; the histogram is converted to
  a complex number once, so results are reproducible bit for bit;
* arbitrary bounded tables take iterated multiplicative derivatives.

Both refuse to run past the enumeration budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, check_budget
from .polynomial import NCPoly
from .space import fp_space
from .torus import phase_of_fraction


@dataclass(frozen=True, eq=False)
class ComplexTable:
    """f: F_p^n -> C with |f| <= 1."""

    p: int
    n: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128).reshape(-1)
        if vals.shape != (self.p**self.n,):
            raise DimensionMismatch(f"table needs {self.p ** self.n} entries, got {vals.size}")
        if vals.size and np.max(np.abs(vals)) > 1 + 1e-12:
            raise ValueError("complex table exceeds modulus 1")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def phase_of(cls, P: NCPoly) -> "ComplexTable":
        """The table of e(P)."""
        t = P.table()
        return cls(P.p, P.n, phases(t.values, P.p ** (t.level + 1)))

    @classmethod
    def constant(cls, p: int, n: int, c: complex = 1.0) -> "ComplexTable":
        return cls(p, n, np.full(p**n, c, dtype=np.complex128))

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.values[fp_space(self.p, self.n).index(points)]


def phases(nums: np.ndarray, q: int) -> np.ndarray:
    """e(num / q) elementwise, exact where the fraction is 0, 1/2 or a quarter."""
    table = np.array([phase_of_fraction(a, q) for a in range(q)], dtype=np.complex128)
    return table[np.asarray(nums) % q]


def _smallest_prime_factor(q: int) -> int:
    f = 2
    while q % f:
        f += 1
    return f


def histogram_average(counts: np.ndarray, q: int) -> complex:
    """sum_v counts[v] e(v/q) / sum counts, with one float conversion."""
    total = int(counts.sum())
    nz = np.nonzero(counts)[0]
    if len(nz) == 1 and nz[0] == 0:
        return complex(1.0, 0.0)
    # constant on cosets of the order-p subgroup: the sum vanishes exactly
    step = q // _smallest_prime_factor(q)
    if step < q and np.array_equal(counts, np.roll(counts, step)):
        return complex(0.0, 0.0)
    acc = sum(int(counts[v]) * phase_of_fraction(int(v), q) for v in nz)
    return acc / total


# ---------------------------------------------------------------------------
# exact norms


@dataclass
class GowersResult:
    norm: float
    norm_pow_2d: float
    method: str
    budget_used: int
    histogram: dict[int, int] | None = None
    stderr: float | None = None

    def as_dict(self) -> dict:
        out = {"norm": self.norm, "norm_pow_2d": self.norm_pow_2d, "method": self.method,
               "budget_used": self.budget_used}
        if self.histogram is not None:
            out["histogram"] = {str(k): v for k, v in sorted(self.histogram.items())}
        if self.stderr is not None:
            out["stderr"] = self.stderr
        return out


def _root(value: float, d: int) -> float:
    if value <= 0:
        return 0.0
    if value == 1.0:
        return 1.0
    return float(value ** (1.0 / 2**d))


def derivative_histogram(P: NCPoly, d: int, budget: int | None = None) -> tuple[np.ndarray, int]:
    """Counts of D_{y_1}...D_{y_d} P(x) over all (x, y_1..y_d), as numerators mod p^(K+1)."""
    sp = fp_space(P.p, P.n)
    N = sp.size
    check_budget(N ** (d + 1), budget, "use the Monte Carlo estimator instead")
    level = P.level
    q = P.p ** (level + 1)
    counts = np.zeros(q, dtype=np.int64)
    base = P.values_at(sp.points, level)
    if d == 0:
        return np.bincount(base, minlength=q), 1
    add = sp.add_table
    # G[m, x] = D_{y_1..y_j} P(x) with m enumerating (y_1..y_j)
    G = base[None, :]
    for _ in range(d - 1):
        G = ((G[:, add] - G[:, None, :]) % q).reshape(-1, N)
    for y in range(N):
        last = (G[:, add[:, y]] - G) % q
        counts += np.bincount(last.reshape(-1), minlength=q)
    return counts, N ** (d + 1)


def gowers_norm_poly(P: NCPoly, d: int, budget: int | None = None) -> GowersResult:
    """||e(P)||_{U^d} by exact enumeration of the derivative histogram."""
    if d < 1:
        raise ValueError("Gowers norms need d >= 1")
    counts, used = derivative_histogram(P, d, budget)
    q = counts.size
    value = min(max(histogram_average(counts, q).real, 0.0), 1.0)
    return GowersResult(_root(value, d), value, "exact-histogram", used,
                        {int(v): int(c) for v, c in enumerate(counts) if c})


def _multiplicative_derivatives(vals: np.ndarray, add: np.ndarray, j: int) -> np.ndarray:
    """Rows enumerate (y_1..y_j); entry [m, x] is the j-fold derivative at x."""
    G = vals[None, :]
    N = vals.size
    for _ in range(j):
        G = (G[:, add] * np.conj(G)[:, None, :]).reshape(-1, N)
    return G


def gowers_norm_table(f: ComplexTable, d: int, budget: int | None = None) -> GowersResult:
    if d < 1:
        raise ValueError("Gowers norms need d >= 1")
    sp = fp_space(f.p, f.n)
    N = sp.size
    check_budget(N ** (d + 1), budget, "use the Monte Carlo estimator instead")
    G = _multiplicative_derivatives(f.values, sp.add_table, d - 1)
    # averaging the last derivative over (x, y_d) gives |E_x G|^2
    inner = G.mean(axis=1)
    value = float(np.mean(np.abs(inner) ** 2))
    if d == 1:
        return GowersResult(float(abs(f.values.mean())), value, "exact-table", N**2)
    value = min(value, 1.0) if value <= 1.0 + 1e-12 else value
    return GowersResult(_root(value, d), value, "exact-table", N ** (d + 1))


def gowers_norm_exact(f, d: int, budget: int | None = None) -> float:
    """||f||_{U^d} for a ComplexTable or, via the histogram path, an NCPoly phase."""
    if isinstance(f, NCPoly):
        return gowers_norm_poly(f, d, budget).norm
    return gowers_norm_table(f, d, budget).norm


def gowers_norm_mc(f, d: int, samples: int, seed: int, *, p: int | None = None,
                   n: int | None = None) -> tuple[float, float]:
    """Monte Carlo estimate of ||f||_{U^d}^{2^d} and its standard error.

    ``f`` is a ComplexTable, an NCPoly (phase taken) or a callable mapping an
    (S, n) array of points to S complex values, in which case p and n are
    required.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    if isinstance(f, NCPoly):
        P = f
        p, n = P.p, P.n
        q = P.p ** (P.level + 1)

        def f(points, P=P, q=q):
            return phases(P.values_at(points), q)
    elif isinstance(f, ComplexTable):
        p, n = f.p, f.n
    elif p is None or n is None:
        raise ValueError("p and n are required for callable evaluators")
    rng = np.random.default_rng(seed)
    x = rng.integers(0, p, size=(samples, n))
    ys = rng.integers(0, p, size=(d, samples, n))
    prod = np.ones(samples, dtype=np.complex128)
    for S in product((0, 1), repeat=d):
        pt = (x + np.tensordot(np.array(S, dtype=np.int64), ys, axes=1)) % p
        val = np.asarray(f(pt), dtype=np.complex128)
        prod *= np.conj(val) if (d - sum(S)) % 2 else val
    real = prod.real
    est = float(real.mean())
    err = float(real.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return est, err


def bias(P, budget: int | None = None) -> float:
    """|E e(P)| by exact histogram over the domain of P.

    Accepts an NCPoly or any object with a ``table()`` of numerators, such as
    a LinearComposition.
    """
    if isinstance(P, NCPoly):
        sp = fp_space(P.p, P.n)
        check_budget(sp.size, budget)
        q = P.p ** (P.level + 1)
        nums = P.values_at(sp.points)
    else:
        q = P.P.p ** (P.P.level + 1)
        check_budget(P.P.p ** (P.P.n * P.ell), budget)
        nums = P.table()
    return bias_of_numerators(nums, q)


def bias_of_numerators(nums: np.ndarray, q: int) -> float:
    counts = np.bincount(np.asarray(nums).reshape(-1) % q, minlength=q)
    return abs(histogram_average(counts, q))


# ---------------------------------------------------------------------------
# uniformity


@dataclass
class PolyUniformity:
    uniform: bool
    value: float
    degree: int
    epsilon: float

    def __bool__(self) -> bool:
        return self.uniform


def poly_uniformity(P: NCPoly, eps: float, budget: int | None = None) -> PolyUniformity:
    """Whether ||e(P)||_{U^deg P} < eps."""
    d = P.degree
    if d < 1:
        raise ValueError("uniformity is defined for polynomials of degree >= 1")
    value = gowers_norm_poly(P, d, budget).norm
    return PolyUniformity(value < eps, value, d, eps)


@dataclass
class UniformityCertificate:
    """Every nonzero combination of the factor has U^d norm below epsilon."""

    epsilon: float
    max_value: float
    witnesses: list[tuple[tuple[int, ...], float]] = field(default_factory=list)
    checked: int = 0
    certified: bool = True

    def __bool__(self) -> bool:
        return True

    def as_dict(self) -> dict:
        return {"certified": True, "epsilon": self.epsilon, "max_value": self.max_value,
                "checked": self.checked,
                "witnesses": [{"lambda": list(l), "value": v} for l, v in self.witnesses]}


@dataclass
class UniformityViolation:
    epsilon: float
    lambdas: tuple[int, ...]
    value: float
    degree: int
    certified: bool = False

    def __bool__(self) -> bool:
        return False

    def as_dict(self) -> dict:
        return {"certified": False, "epsilon": self.epsilon, "lambda": list(self.lambdas),
                "value": self.value, "degree": self.degree}


def factor_uniformity(polys: Sequence[NCPoly], eps: float, budget: int | None = None,
                      keep: int = 3) -> UniformityCertificate | UniformityViolation:
    """Check every nonzero lambda modulo the depth moduli of the factor."""
    polys = list(getattr(polys, "polys", polys))
    if not polys:
        return UniformityCertificate(eps, 0.0)
    p, n = polys[0].p, polys[0].n
    moduli = [p ** (P.depth + 1) for P in polys]
    total = int(np.prod(moduli)) - 1
    N = p**n
    check_budget(total * N ** (max(P.degree for P in polys) + 1), budget)
    results: list[tuple[tuple[int, ...], float]] = []
    for lams in product(*[range(m) for m in moduli]):
        if not any(lams):
            continue
        combo = NCPoly.zero(p, n)
        d = 0
        for lam, P in zip(lams, polys):
            if lam:
                part = lam * P
                combo = combo + part
                d = max(d, part.degree)
        value = gowers_norm_poly(combo, d, budget).norm
        if not value < eps:
            return UniformityViolation(eps, lams, value, d)
        results.append((lams, value))
    results.sort(key=lambda r: (-r[1], r[0]))
    return UniformityCertificate(eps, results[0][1] if results else 0.0, results[:keep], len(results))
