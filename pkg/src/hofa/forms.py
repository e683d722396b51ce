"""Linear forms: tensor powers, complexity notions, counting averages and the
rewriting calculus that reduces sum_i lambda_i P(L_i(X)) to a normal form
valid for every homogeneous P of a fixed degree and depth.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, combinations_with_replacement, product
from math import comb, prod
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, HofaError, ParseError, VerificationError, check_budget
from .linalg import in_span_mod_p, kernel_mod_p, rank_mod_p
from .space import fp_space
from .torus import check_prime, p_valuation, primitive_root, teichmuller_sigma

Form = tuple[int, ...]


@dataclass(frozen=True)
class LinearForm:
    p: int
    coeffs: Form

    def __post_init__(self):
        if len(self.coeffs) < 1:
            raise ValueError("a linear form needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(int(c) % self.p for c in self.coeffs))

    @property
    def ell(self) -> int:
        return len(self.coeffs)

    @property
    def weight(self) -> int:
        return form_weight(self.coeffs)

    @property
    def leading(self) -> int | None:
        return leading_coefficient(self.coeffs)

    def __str__(self) -> str:
        return format_form(self.coeffs)


@dataclass(frozen=True)
class FormSystem:
    p: int
    forms: tuple[Form, ...]

    def __post_init__(self):
        forms = tuple(tuple(int(c) % self.p for c in L) for L in self.forms)
        if not forms:
            raise ValueError("a system needs at least one form")
        if len({len(L) for L in forms}) != 1:
            raise DimensionMismatch("all forms in a system must have the same length")
        object.__setattr__(self, "forms", forms)

    @property
    def m(self) -> int:
        return len(self.forms)

    @property
    def ell(self) -> int:
        return len(self.forms[0])

    def __str__(self) -> str:
        return format_system(self.forms)


def form_weight(L: Sequence[int]) -> int:
    """|L|: the sum of the coefficients lifted to [0, p-1]."""
    return int(sum(L))


def leading_coefficient(L: Sequence[int]) -> int | None:
    return next((c for c in L if c), None)


# ---------------------------------------------------------------------------
# text formats


def parse_form(text: str, p: int) -> Form:
    check_prime(p)
    try:
        coeffs = tuple(int(c) % p for c in text.strip().strip("()").split(","))
    except ValueError:
        raise ParseError("linear form must be comma-separated integers", text) from None
    return coeffs


def format_form(L: Sequence[int]) -> str:
    return ",".join(str(int(c)) for c in L)


def parse_system(text: str, p: int) -> FormSystem:
    return FormSystem(p, tuple(parse_form(chunk, p) for chunk in text.split(";") if chunk.strip()))


def format_system(forms) -> str:
    forms = getattr(forms, "forms", forms)
    return ";".join(format_form(L) for L in forms)


_TERM = re.compile(r"\s*(-?\d+)\s*\*\s*\(([^)]*)\)\s*")


def parse_terms(text: str, p: int) -> list[tuple[int, Form]]:
    """``"1*(1,0) + 2*(1,1)"`` -> [(1, (1,0)), (2, (1,1))]."""
    out = []
    pos = 0
    for chunk in text.split("+"):
        m = _TERM.fullmatch(chunk)
        if not m:
            raise ParseError("expected a term of the form a*(c1,...,cl)", text, pos)
        out.append((int(m.group(1)), parse_form(m.group(2), p)))
        pos += len(chunk) + 1
    return out


def format_terms(terms) -> str:
    items = terms.items() if isinstance(terms, dict) else [(L, a) for a, L in terms]
    parts = [f"{a}*({format_form(L)})" for L, a in items]
    return " + ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# tensor powers and complexity


def monomial_index(ell: int, d: int) -> list[tuple[int, ...]]:
    """Exponent multisets of degree d in ell variables, x1 heaviest first."""
    out = []
    for combo in combinations_with_replacement(range(ell), d):
        m = [0] * ell
        for j in combo:
            m[j] += 1
        out.append(tuple(m))
    return out


def tensor_power(L: Sequence[int], d: int, p: int) -> tuple[int, ...]:
    """Symmetric d-th tensor power of L, one coordinate per exponent multiset."""
    if d < 1:
        raise ValueError("tensor powers need d >= 1")
    return tuple(prod(pow(int(c), e, p) for c, e in zip(L, m)) % p for m in monomial_index(len(L), d))


@dataclass
class RankReport:
    degree: int
    rank: int
    independent: bool
    witness: list[int] | None = None

    def as_dict(self) -> dict:
        return {"degree": self.degree, "rank": self.rank, "independent": self.independent,
                "witness": self.witness}


def tensor_rank_profile(S: FormSystem, dmax: int) -> list[RankReport]:
    out = []
    for d in range(1, dmax + 1):
        vecs = [tensor_power(L, d, S.p) for L in S.forms]
        cols = np.array(vecs, dtype=object).T
        r = rank_mod_p(cols, S.p)
        witness = None
        if r < S.m:
            witness = [int(v) for v in kernel_mod_p(cols, S.p)[0]]
            check = [sum(w * v[i] for w, v in zip(witness, vecs)) % S.p for i in range(len(vecs[0]))]
            if any(check):
                raise VerificationError("dependence witness does not vanish", {"witness": witness})
        out.append(RankReport(d, r, r == S.m, witness))
    return out


def pairwise_independent(S: FormSystem) -> bool:
    for a, b in combinations(S.forms, 2):
        if rank_mod_p([list(a), list(b)], S.p) < 2:
            return False
    return not any(not any(L) for L in S.forms)


def _require_pairwise(S: FormSystem) -> None:
    if not pairwise_independent(S):
        raise ValueError("forms must be nonzero and pairwise linearly independent")


@dataclass
class CSCertificate:
    index: int
    classes: list[list[int]]

    @property
    def s(self) -> int:
        return max(len(self.classes) - 1, 0)


@dataclass
class CSResult:
    s: int
    certificates: list[CSCertificate] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"cs_complexity": self.s,
                "certificates": [{"index": c.index, "s_i": c.s, "classes": c.classes}
                                 for c in self.certificates]}


def _min_partition(others: list[int], good: dict[int, bool]) -> list[int]:
    """Minimum partition of the index mask into good classes, as a list of masks."""
    full = (1 << len(others)) - 1
    best: dict[int, tuple[int, list[int]]] = {0: (0, [])}
    for mask in range(1, full + 1):
        low = mask & -mask
        rest = mask ^ low
        choice = None
        sub = rest
        while True:
            cls = sub | low
            if good[cls]:
                cost = best[mask ^ cls][0] + 1
                if choice is None or cost < choice[0]:
                    choice = (cost, best[mask ^ cls][1] + [cls])
            if sub == 0:
                break
            sub = (sub - 1) & rest
        if choice is None:
            raise ValueError("no span-avoiding partition exists")
        best[mask] = choice
    return best[full][1]


def cs_complexity(S: FormSystem) -> CSResult:
    """Exact Cauchy-Schwarz complexity by minimum-partition search."""
    _require_pairwise(S)
    if S.m > 12:
        raise ValueError("exact partition search is limited to 12 forms")
    certs = []
    for i in range(S.m):
        others = [j for j in range(S.m) if j != i]
        if not others:
            certs.append(CSCertificate(i, []))
            continue
        good = {}
        for mask in range(1, 1 << len(others)):
            cls = [S.forms[others[b]] for b in range(len(others)) if mask >> b & 1]
            good[mask] = not in_span_mod_p(cls, S.forms[i], S.p)
        masks = _min_partition(others, good)
        classes = [[others[b] for b in range(len(others)) if mk >> b & 1] for mk in masks]
        certs.append(CSCertificate(i, sorted(classes)))
    return CSResult(max(c.s for c in certs), certs)


@dataclass
class TrueComplexityResult:
    d: int
    cap: int
    profile: list[RankReport]

    def as_dict(self) -> dict:
        return {"true_complexity": self.d, "cap": self.cap,
                "profile": [r.as_dict() for r in self.profile]}


def true_complexity(S: FormSystem) -> TrueComplexityResult:
    """Smallest d >= 1 such that the (d+1)-st tensor powers are independent.

    The search is capped at max(cs_complexity, 1); running past the cap means
    an internal inconsistency and is raised rather than extended.
    """
    _require_pairwise(S)
    cap = max(cs_complexity(S).s, 1)
    profile = tensor_rank_profile(S, cap + 1)
    for d in range(1, cap + 1):
        if profile[d].independent:
            return TrueComplexityResult(d, cap, profile)
    raise VerificationError("tensor powers still dependent at the Cauchy-Schwarz cap",
                            {"cap": cap, "system": format_system(S)})


# ---------------------------------------------------------------------------
# counting operator


def _as_values(f, p: int, n: int) -> np.ndarray:
    from .gowers import ComplexTable
    from .polynomial import NCPoly

    if isinstance(f, NCPoly):
        f = ComplexTable.phase_of(f)
    if isinstance(f, ComplexTable):
        if (f.p, f.n) != (p, n):
            raise DimensionMismatch("function lives on a different space")
        return f.values
    if callable(f):
        return np.asarray(f(fp_space(p, n).points), dtype=np.complex128)
    vals = np.asarray(f, dtype=np.complex128).reshape(-1)
    if vals.size != p**n:
        raise DimensionMismatch(f"table needs {p ** n} entries")
    return vals


def count_operator(fs, S: FormSystem, n: int, budget: int | None = None,
                   seed: int | None = None, samples: int = 200_000) -> complex:
    """E_X prod_i f_i(L_i(X)) over X in (F_p^n)^ell.

    Exact when p^(n ell) is within budget; otherwise a seeded Monte Carlo
    average if a seed is supplied.
    """
    fs = list(fs)
    if len(fs) != S.m:
        raise DimensionMismatch(f"{S.m} forms but {len(fs)} functions")
    p = S.p
    sp = fp_space(p, n)
    tables = [_as_values(f, p, n) for f in fs]
    try:
        check_budget(sp.size**S.ell, budget, "pass a seed for the sampled estimate")
    except HofaError:
        if seed is None:
            raise
        rng = np.random.default_rng(seed)
        X = rng.integers(0, p, size=(samples, S.ell, n))
        acc = np.ones(samples, dtype=np.complex128)
        for f, L in zip(tables, S.forms):
            pts = np.einsum("j,sjn->sn", np.array(L), X) % p
            acc *= f[sp.index(pts)]
        return complex(acc.mean())
    acc = np.ones(sp.size**S.ell, dtype=np.complex128)
    for f, L in zip(tables, S.forms):
        acc *= f[sp.linear_images(L, S.ell)]
    return complex(acc.mean())


# ---------------------------------------------------------------------------
# rewriting


def expand_high_weight(L: Sequence[int], d: int) -> list[tuple[int, Form]]:
    """P(L(X)) = sum a P(M(X)) for every P of degree <= d, with |M| <= d.

    Splitting L(X) into |L| summands y_i and using the vanishing of the
    (|L|)-fold inclusion-exclusion sum of a degree-d polynomial expresses P(L)
    through sub-forms M <= L coordinatewise.  Repeated until every weight is
    at most d.  The zero form is kept (it evaluates to the shift of P).
    """
    L = tuple(int(c) for c in L)
    if d < 0:
        raise ValueError("degree must be non-negative")
    acc: dict[Form, int] = {L: 1}
    while True:
        heavy = [(M, a) for M, a in acc.items() if form_weight(M) > d and a]
        if not heavy:
            break
        M, a = max(heavy, key=lambda t: (form_weight(t[0]), t[0]))
        del acc[M]
        N = form_weight(M)
        for T in product(*[range(c + 1) for c in M]):
            if T == M:
                continue
            mult = prod(comb(c, t) for c, t in zip(M, T))
            sign = -1 if (N - sum(T)) % 2 == 0 else 1
            acc[T] = acc.get(T, 0) + a * sign * mult
    return sorted(((a, M) for M, a in acc.items() if a), key=lambda t: (form_weight(t[1]), t[1]))


def discrete_log(c: int, p: int) -> int:
    zeta = primitive_root(p)
    c %= p
    if c == 0:
        raise ValueError("zero has no discrete logarithm")
    x = 1
    for i in range(p - 1):
        if x == c:
            return i
        x = x * zeta % p
    raise ValueError("not a unit")


@lru_cache(maxsize=100_000)
def normalize_leading(L: Form, d: int, p: int) -> tuple[tuple[int, int, Form], ...]:
    """P(L(X)) = sum a P(c M(X)) with every M leading-1 and |M| <= d.

    Zero forms are dropped, which is valid for polynomials with zero shift.
    """
    L = tuple(int(x) % p for x in L)
    c0 = leading_coefficient(L)
    if c0 is None:
        raise ValueError("zero form has no leading coefficient")
    inv = pow(c0, -1, p)
    Lp = tuple(x * inv % p for x in L)
    if form_weight(Lp) <= d:
        return ((1, c0, Lp),)
    out: dict[tuple[int, Form], int] = {}
    for a, T in expand_high_weight(Lp, d):
        t = leading_coefficient(T)
        if t is None:
            continue
        if t == 1:
            key = (c0, T)
            out[key] = out.get(key, 0) + a
            continue
        # T has strictly smaller support than Lp
        for b, c, M in normalize_leading(tuple(c0 * x % p for x in T), d, p):
            out[(c, M)] = out.get((c, M), 0) + a * b
    return tuple((a, c, M) for (c, M), a in sorted(out.items(), key=lambda kv: (kv[0][1], kv[0][0])) if a)


@dataclass
class FormalSum:
    """sum_M a_M P(M(X)) for a symbolic homogeneous P of degree d and depth k."""

    p: int
    d: int
    k: int
    terms: dict[Form, int]

    @property
    def modulus(self) -> int:
        return self.p ** (self.k + 1)

    def is_zero(self) -> bool:
        return not self.terms

    def as_dict(self) -> dict:
        return {"p": self.p, "d": self.d, "k": self.k, "modulus": self.modulus,
                "terms": [{"coeff": a, "form": format_form(M)} for M, a in self.terms.items()]}

    def __str__(self) -> str:
        return format_terms(self.terms)


def formal_sum(p: int, d: int, k: int, terms) -> FormalSum:
    acc: dict[Form, int] = {}
    items = terms.items() if isinstance(terms, dict) else [(L, a) for a, L in terms]
    for L, a in items:
        L = tuple(int(x) % p for x in L)
        acc[L] = acc.get(L, 0) + int(a)
    return FormalSum(p, d, k, acc)


def effective_degree(p: int, d: int, a: int) -> int:
    """Degree of a*P when P has degree d: each factor of p lowers it by p-1."""
    return d - p_valuation(a, p) * (p - 1)


class RewriteDiverged(HofaError):
    pass


def _violation(M: Form, a: int, p: int, d: int) -> bool:
    return leading_coefficient(M) != 1 or form_weight(M) > effective_degree(p, d, a)


def canonical_rewrite(fs: FormalSum, max_iter: int = 200) -> FormalSum:
    """Normal form of a formal sum: leading-1 forms, nonzero coefficients mod
    p^(k+1), and |M| <= d - j(p-1) where p^j exactly divides the coefficient.
    """
    p, d, k = fs.p, fs.d, fs.k
    if not (d >= 1 and d >= k * (p - 1) + 1):
        raise ValueError(f"no homogeneous polynomial has degree {d} and depth {k} at p={p}")
    q = p ** (k + 1)
    sig = teichmuller_sigma(p, d, k).value
    cur = _reduce(fs.terms, q)
    prev_measure = None
    for _ in range(max_iter):
        bad = [(M, a) for M, a in cur.items() if _violation(M, a, p, d)]
        if not bad:
            ordered = dict(sorted(cur.items(), key=lambda kv: (form_weight(kv[0]), kv[0])))
            return FormalSum(p, d, k, ordered)
        measure = (len(bad), max(form_weight(M) for M, _ in bad))
        nxt: dict[Form, int] = {}
        for M, a in cur.items():
            if not _violation(M, a, p, d):
                nxt[M] = (nxt.get(M, 0) + a) % q
                continue
            D = effective_degree(p, d, a)
            for b, c, M2 in normalize_leading(M, D, p):
                coef = a * b * pow(sig, discrete_log(c, p), q)
                nxt[M2] = (nxt.get(M2, 0) + coef) % q
        cur = _reduce(nxt, q)
        prev_measure = measure
    raise RewriteDiverged(f"rewrite did not reach a normal form in {max_iter} rounds (last measure {prev_measure})")


def _reduce(terms: dict[Form, int], q: int) -> dict[Form, int]:
    out = {}
    for M, a in terms.items():
        a %= q
        if a and any(M):
            out[M] = (out.get(M, 0) + a) % q
    return {M: a for M, a in out.items() if a}


def formal_sum_values(P, terms, ell: int, level: int | None = None) -> np.ndarray:
    """Numerators of sum a P(M(X)) over all X in (F^n)^ell."""
    sp = fp_space(P.p, P.n)
    level = P.level if level is None else level
    q = P.p ** (level + 1)
    base = P.values_at(sp.points, level)
    items = terms.items() if isinstance(terms, dict) else [(L, a) for a, L in terms]
    out = np.zeros(sp.size**ell, dtype=np.int64)
    for M, a in items:
        out = (out + (int(a) % q) * base[sp.linear_images(M, ell)]) % q
    return out
