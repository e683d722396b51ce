"""Experiment drivers: counting averages along systems of forms versus Gowers norms."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import VerificationError
from .forms import FormSystem, count_operator, cs_complexity, format_system, parse_system, true_complexity
from .gowers import ComplexTable, gowers_norm_poly, gowers_norm_table
from .homogeneous import homogeneous_sample
from .polynomial import NCPoly, format_poly

FOUR_AP = "1,0;1,1;1,2;1,3"


@dataclass
class GowersWolfReport:
    system: str
    p: int
    n: int
    true_complexity: int
    cs_complexity: int
    quadratic: str
    cubics: list[dict] = field(default_factory=list)
    instances: list[dict] = field(default_factory=list)
    envelope: list[dict] = field(default_factory=list)
    zero_count: float = 0.0

    @property
    def lemma_ok(self) -> bool:
        return all(r["count"] <= r["lemma_bound"] + 1e-9 for r in self.instances)

    @property
    def envelope_within_norm(self) -> bool:
        return all(e["max_count"] <= e["delta"] + 1e-9 for e in self.envelope)

    @property
    def shrinks(self) -> bool:
        """The envelope at the smallest positive norm lies strictly below its top value."""
        pos = [e for e in self.envelope if e["delta"] > 0]
        return len(pos) >= 2 and pos[0]["max_count"] < pos[-1]["max_count"]

    @property
    def pointwise_monotone(self) -> bool:
        ordered = sorted(self.instances, key=lambda r: (r["norm"], r["count"]))
        return all(a["count"] <= b["count"] + 1e-9 for a, b in zip(ordered, ordered[1:]))

    @property
    def spearman(self) -> float:
        norms = np.array([r["norm"] for r in self.instances])
        counts = np.array([r["count"] for r in self.instances])
        rn = np.argsort(np.argsort(norms))
        rc = np.argsort(np.argsort(counts))
        if rn.std() == 0 or rc.std() == 0:
            return 0.0
        return float(np.corrcoef(rn, rc)[0, 1])

    @property
    def ok(self) -> bool:
        return self.lemma_ok and self.envelope_within_norm and self.shrinks and self.zero_count == 0

    def as_dict(self) -> dict:
        return {"system": self.system, "p": self.p, "n": self.n,
                "true_complexity": self.true_complexity, "cs_complexity": self.cs_complexity,
                "quadratic": self.quadratic, "cubics": self.cubics,
                "zero_function_count": self.zero_count, "lemma_bound_holds": self.lemma_ok,
                "envelope_within_norm": self.envelope_within_norm, "shrinks": self.shrinks,
                "pointwise_monotone": self.pointwise_monotone, "spearman": self.spearman,
                "ok": self.ok, "envelope": self.envelope, "instances": self.instances}


def _phase(P: NCPoly, c: int = 1) -> np.ndarray:
    return ComplexTable.phase_of(c * P).values


def correlated_quadratic(S: FormSystem, d: int, p: int) -> list[int]:
    """Multipliers c_i from the dependence of the d-th tensor powers of S, so
    that prod e(c_i Q(L_i(X))) is identically 1 for Q = x1^d / p."""
    from .forms import tensor_rank_profile

    prof = tensor_rank_profile(S, d)[d - 1]
    if prof.witness is None:
        raise ValueError(f"the degree-{d} tensor powers are independent")
    w = prof.witness
    inv = pow(w[0], -1, p)
    return [x * inv % p for x in w]


def run_gowers_wolf_experiment(p: int = 5, n: int = 2, system: str = FOUR_AP, seed: int = 0,
                               cubics: int = 4, steps: int = 11,
                               budget: int | None = None) -> GowersWolfReport:
    """Counting averages along S against the U^{d+1} norm of f_1.

    With Q = x1^d/p and multipliers c_i making prod e(c_i Q(L_i)) identically
    1, take f_i = e(c_i Q) for i >= 2 and
    f_1 = e(c_1 Q) ((1-t) + t e(C)) for random homogeneous degree-(d+1) C.
    At t = 0 the average is 1; at t = 1, f_1 is the phase of a degree-(d+1)
    polynomial whose norm equals that of e(C).  Every U^{d+1} norm is computed
    exactly; the report gives the envelope delta -> max |count| over instances
    with norm <= delta, together with the Cauchy-Schwarz bound for each instance.
    """
    S = parse_system(system, p)
    tc = true_complexity(S).d
    cs = cs_complexity(S).s
    rng = np.random.default_rng(seed)
    Q = NCPoly.monomial(p, (tc,) + (0,) * (n - 1))
    mult = correlated_quadratic(S, tc, p)
    others = [_phase(Q, c) for c in mult[1:]]
    eQ = _phase(Q, mult[0])
    report = GowersWolfReport(format_system(S), p, n, tc, cs, format_poly(Q))
    report.zero_count = abs(count_operator([np.zeros(p**n)] + others, S, n, budget))
    if report.zero_count != 0:
        raise VerificationError("counting average with a zero function is not zero")
    report.instances.append({"cubic": None, "t": None, "norm": 0.0, "count": 0.0, "lemma_bound": 0.0})
    other_norms = [gowers_norm_table(ComplexTable(p, n, g), cs + 1, budget).norm for g in others]
    for _ in range(cubics):
        C = homogeneous_sample(p, tc + 1, 0, n, seed=rng)
        report.cubics.append({"poly": format_poly(C), "norm": gowers_norm_poly(C, tc + 1, budget).norm})
        eC = _phase(C)
        for t in np.linspace(0.0, 1.0, steps):
            f1 = ComplexTable(p, n, eQ * ((1 - t) + t * eC))
            norm = gowers_norm_table(f1, tc + 1, budget).norm
            count = abs(count_operator([f1] + others, S, n, budget))
            bound = min([gowers_norm_table(f1, cs + 1, budget).norm] + other_norms)
            report.instances.append({"cubic": format_poly(C), "t": float(round(t, 10)),
                                     "norm": norm, "count": count, "lemma_bound": bound})
    best = 0.0
    for r in sorted(report.instances, key=lambda r: r["norm"]):
        best = max(best, r["count"])
        report.envelope.append({"delta": r["norm"], "max_count": best})
    return report


@dataclass
class LemmaInstance:
    system: str
    n: int
    s: int
    count: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.count <= self.bound + 1e-9


def max_pairwise_forms(p: int, ell: int) -> int:
    """Number of lines through the origin in F_p^ell."""
    return (p**ell - 1) // (p - 1)


def random_pairwise_system(p: int, ell: int, m: int, rng) -> FormSystem:
    """m pairwise independent nonzero forms in ell variables (rejection sampled)."""
    from .forms import pairwise_independent

    if m > max_pairwise_forms(p, ell):
        raise ValueError(f"at most {max_pairwise_forms(p, ell)} pairwise independent forms exist in F_{p}^{ell}")
    for _ in range(10_000):
        forms = tuple(tuple(int(x) for x in rng.integers(0, p, ell)) for _ in range(m))
        try:
            S = FormSystem(p, forms)
        except ValueError:
            continue
        if pairwise_independent(S):
            return S
    raise ValueError("could not draw a pairwise independent system")


def gowers_count_instance(p: int, n: int, S: FormSystem, rng) -> LemmaInstance:
    """Random bounded tables f_i and the comparison |count| vs min ||f_i||_{U^{s+1}}."""
    s = cs_complexity(S).s
    fs = []
    for _ in range(S.m):
        r = rng.random(p**n)
        ang = rng.random(p**n) * 2 * np.pi
        fs.append(ComplexTable(p, n, r * np.exp(1j * ang)))
    count = abs(count_operator(fs, S, n))
    bound = min(gowers_norm_table(f, s + 1).norm for f in fs)
    return LemmaInstance(format_system(S), n, s, count, bound)


def gowers_count_suite(p: int = 2, trials: int = 100, seed: int = 0, nmax: int = 3) -> list[LemmaInstance]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(trials):
        n = int(rng.integers(1, nmax + 1))
        ell = int(rng.integers(1, 4))
        m = int(rng.integers(1, min(4, max_pairwise_forms(p, ell)) + 1))
        S = random_pairwise_system(p, ell, m, rng)
        out.append(gowers_count_instance(p, n, S, rng))
    return out
