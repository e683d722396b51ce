"""Homogeneous non-classical polynomials.

P is homogeneous when P(zeta x) = sigma P(x) for the fixed generator zeta of
F_p^*.  For degree d and depth k the constant is forced to be sigma(d, k), the
Teichmuller lift of zeta^d into Z_{p^(k+1)}.  The univariate basis h_1, h_2, ...
is built inductively, and multivariate monomials are handled by lifting the
univariate elements to Z_{p^(k+1)}-valued functions and multiplying them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import HofaError, NonZeroShift, VerificationError
from .polynomial import FunctionTable, NCPoly, interpolate, monomial_degree
from .space import fp_space
from .torus import TorusValue, primitive_root, teichmuller_sigma


def sigma(p: int, d: int, k: int) -> int:
    return teichmuller_sigma(p, d, k).value


def signature_feasible(p: int, d: int, k: int) -> bool:
    """Whether some polynomial has degree exactly d and depth exactly k."""
    return d >= 1 and k >= 0 and d >= k * (p - 1) + 1


def degree_signature(p: int, e: int) -> tuple[int, int]:
    """(s, k) with e = s + k(p-1) and 1 <= s <= p-1: the unique univariate monomial of degree e."""
    if e < 1:
        raise ValueError("degree must be positive")
    k = (e - 1) // (p - 1)
    return e - k * (p - 1), k


# ---------------------------------------------------------------------------
# homogeneity test


@dataclass(frozen=True)
class HomogeneityWitness:
    sigma: int
    modulus: int
    verified: bool
    counterexample: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.verified

    def as_dict(self) -> dict:
        out = {"sigma": self.sigma, "modulus": self.modulus, "verified": self.verified}
        if self.counterexample is not None:
            out["counterexample"] = list(self.counterexample)
        return out


def _require_zero_shift(P: NCPoly) -> None:
    if not P.shift.is_zero():
        raise NonZeroShift("homogeneity is only defined here for polynomials with zero shift")


def is_homogeneous(P: NCPoly) -> HomogeneityWitness:
    """Check P(zeta x) = sigma(deg P, depth P) * P(x) at every point."""
    _require_zero_shift(P)
    s = sigma(P.p, P.degree, P.depth)
    sp = fp_space(P.p, P.n)
    level = P.level
    q = P.p ** (level + 1)
    zeta = primitive_root(P.p)
    lhs = P.values_at(sp.points * zeta, level)
    rhs = (s * P.values_at(sp.points, level)) % q
    bad = np.nonzero(lhs != rhs)[0]
    if len(bad):
        return HomogeneityWitness(s, P.p ** (P.depth + 1), False, sp.point(int(bad[0])))
    return HomogeneityWitness(s, P.p ** (P.depth + 1), True)


# ---------------------------------------------------------------------------
# univariate basis


@dataclass(frozen=True)
class BasisElement:
    degree: int
    depth: int
    sigma: int
    poly: NCPoly


@dataclass
class HomogeneousBasis:
    p: int
    max_degree: int
    elements: list[BasisElement] = field(default_factory=list)
    degenerate: bool = False

    def __getitem__(self, e: int) -> BasisElement:
        return self.elements[e]

    def as_dict(self) -> dict:
        from .polynomial import format_poly

        return {
            "p": self.p,
            "max_degree": self.max_degree,
            "zeta": primitive_root(self.p),
            "degenerate_p2": self.degenerate,
            "elements": [
                {"index": i, "degree": el.degree, "depth": el.depth, "sigma": el.sigma,
                 "poly": format_poly(el.poly)}
                for i, el in enumerate(self.elements)
            ],
        }


def _monomial(p: int, s: int, depth: int) -> NCPoly:
    return NCPoly.monomial(p, (s,), depth)


def _dilate(P: NCPoly, c: int) -> NCPoly:
    """x -> P(c x)."""
    sp = fp_space(P.p, P.n)
    return interpolate(FunctionTable(P.p, P.n, P.level, P.values_at(sp.points * c)))


@lru_cache(maxsize=None)
def univariate_basis(p: int, d: int) -> HomogeneousBasis:
    """Homogeneous univariate h_0, ..., h_d with h_e of degree e."""
    zeta = primitive_root(p)
    h0 = NCPoly(p, 1, shift=TorusValue(p, 1, 0))
    basis = HomogeneousBasis(p, d, [BasisElement(0, 0, 1, h0)], degenerate=(p == 2))
    for e in range(1, d + 1):
        s, k = degree_signature(p, e)
        m = _monomial(p, s, k)
        if k == 0:
            h, A = m, pow(zeta, s, p)
        else:
            f = _dilate(m, zeta) - pow(zeta, s) * m
            a, b = _split_lower(f, s, basis)
            A = pow(zeta, s) + sum(c * p ** (k - j) for j, c in a.items())
            h = m
            for e2, coeff in b.items():
                el = basis.elements[e2]
                mod = p ** (el.depth + 1)
                gamma = coeff * pow((el.sigma - A) % mod, -1, mod) % mod
                h = h - gamma * el.poly
        A %= p ** (k + 1)
        if A != sigma(p, e, k):
            raise VerificationError("basis scaling constant disagrees with sigma(d,k)",
                                    {"p": p, "degree": e, "A": A, "sigma": sigma(p, e, k)})
        if _dilate(h, zeta) != A * h or h.degree != e or h.depth != k:
            raise VerificationError("basis element is not homogeneous", {"p": p, "degree": e})
        basis.elements.append(BasisElement(e, k, A, h))
    return basis


def _split_lower(f: NCPoly, s: int, basis: HomogeneousBasis) -> tuple[dict[int, int], dict[int, int]]:
    """Write f = sum_j a_j |x|^s/p^(j+1) + sum_e b_e h_e with e != s mod (p-1)."""
    p = f.p
    a: dict[int, int] = {}
    b: dict[int, int] = {}
    rest = f
    while not rest.is_zero():
        ((exps, j), c), = rest.top_terms().items()
        if exps[0] == s:
            a[j] = a.get(j, 0) + c
            rest = rest - c * _monomial(p, s, j)
        else:
            e2 = monomial_degree(p, exps, j)
            b[e2] = b.get(e2, 0) + c
            rest = rest - c * basis.elements[e2].poly
    return a, b


def decompose_univariate(P: NCPoly, basis: HomogeneousBasis | None = None) -> dict[int, int]:
    """Digits c_e in [0, p-1] with P = sum_e c_e h_e (zero shift, n = 1)."""
    _require_zero_shift(P)
    if P.n != 1:
        raise ValueError("univariate decomposition needs n = 1")
    if basis is None or basis.max_degree < P.degree:
        basis = univariate_basis(P.p, max(P.degree, 1))
    coeffs: dict[int, int] = {}
    rest = P
    while not rest.is_zero():
        ((exps, j), c), = rest.top_terms().items()
        e = monomial_degree(P.p, exps, j)
        coeffs[e] = c
        rest = rest - c * basis.elements[e].poly
    return coeffs


# ---------------------------------------------------------------------------
# multivariate components


@lru_cache(maxsize=4096)
def homogeneous_component(p: int, exps: tuple[int, ...], depth: int) -> NCPoly:
    """Homogeneous polynomial whose only top-degree monomial is |x|^exps / p^(depth+1).

    Product of the Z_{p^(depth+1)}-lifts of the univariate h_{s_i + depth(p-1)}.
    """
    n = len(exps)
    q = p ** (depth + 1)
    top = max(s + depth * (p - 1) for s in exps)
    basis = univariate_basis(p, max(top, 1))
    sp = fp_space(p, n)
    F = np.ones(sp.size, dtype=np.int64)
    for i, s in enumerate(exps):
        if s == 0:
            continue
        h = basis.elements[s + depth * (p - 1)].poly
        G = h.values_at(np.arange(p).reshape(-1, 1), depth)
        F = (F * G[sp.points[:, i]]) % q
    return interpolate(FunctionTable(p, n, depth, F))


def homogeneous_decompose(P: NCPoly) -> list[tuple[int, NCPoly]]:
    """Write P as an integer combination of homogeneous polynomials.

    The top monomial is peeled off with its homogeneous lift; the residual has
    either lower degree or fewer top monomials, so the loop terminates.
    """
    _require_zero_shift(P)
    if P.is_zero():
        return []
    if is_homogeneous(P):
        return [(1, P)]
    out: dict[NCPoly, int] = {}
    rest = P
    guard = 0
    while not rest.is_zero():
        guard += 1
        if guard > 10_000:
            raise HofaError("homogeneous decomposition did not terminate")
        top = rest.top_terms()
        (exps, j) = max(top, key=lambda key: (tuple(key[0]), key[1]))
        c = top[(exps, j)]
        comp = homogeneous_component(P.p, exps, j)
        before = (rest.degree, len(top))
        rest = rest - c * comp
        after = (rest.degree, len(rest.top_terms()) if rest.degree == before[0] else 0)
        if not rest.is_zero() and after >= before:
            raise HofaError("decomposition measure failed to decrease")
        out[comp] = out.get(comp, 0) + c
    total = NCPoly.zero(P.p, P.n)
    for c, H in ((c, H) for H, c in out.items()):
        total = total + c * H
    if total != P:
        raise VerificationError("homogeneous decomposition does not sum to the input")
    return [(c, H) for H, c in out.items()]


# ---------------------------------------------------------------------------
# sampling


class SampleBudgetExhausted(HofaError):
    def __init__(self, attempts: int, signature):
        self.attempts = attempts
        super().__init__(f"no homogeneous polynomial of signature {signature} found in {attempts} attempts")


@lru_cache(maxsize=256)
def compatible_components(p: int, d: int, k: int, n: int, extra_depth: int = 2) -> tuple[NCPoly, ...]:
    """Homogeneous generators sharing sigma(d, k): p^t * component, degree <= d, depth <= k.

    Scaling a component by p^t keeps it homogeneous and lowers degree by t(p-1);
    its constant agrees with sigma(d, k) exactly when the degrees agree mod p-1.
    """
    out = []
    for exps in product(range(p), repeat=n):
        if not any(exps):
            continue
        for j in range(k + extra_depth + 1):
            for t in range(j + 1):
                dd = monomial_degree(p, exps, j - t)
                if j - t > k or dd > d:
                    continue
                if p > 2 and (dd - d) % (p - 1):
                    continue
                comp = p**t * homogeneous_component(p, exps, j)
                if not comp.is_zero():
                    out.append(comp)
    uniq = list(dict.fromkeys(out))
    return tuple(uniq)


def homogeneous_sample(p: int, d: int, k: int, n: int, seed=None, budget: int = 10_000) -> NCPoly:
    """Random homogeneous polynomial with degree exactly d and depth exactly k."""
    if not signature_feasible(p, d, k):
        raise ValueError(f"no polynomial has degree {d} and depth {k} at p={p}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    comps = compatible_components(p, d, k, n)
    top = [c for c in comps if c.degree == d and c.depth == k]
    if not top:
        raise ValueError(f"degree {d} and depth {k} are not attainable with n={n} variables at p={p}")
    q = p ** (k + 1)
    for attempt in range(1, budget + 1):
        P = NCPoly.zero(p, n)
        for comp in comps:
            if rng.random() < 0.5:
                P = P + int(rng.integers(q)) * comp
        P = P + int(rng.integers(1, p)) * top[int(rng.integers(len(top)))]
        if P.degree == d and P.depth == k:
            if not is_homogeneous(P):
                raise VerificationError("sampled polynomial is not homogeneous", {"poly": str(P)})
            return P
    raise SampleBudgetExhausted(budget, (d, k))
