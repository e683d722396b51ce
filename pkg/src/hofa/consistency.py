"""Consistency groups, their annihilators, near-orthogonality and equidistribution.

For a system of forms L_1..L_m and a signature (d, k), the consistency group
is the subgroup of U_{k+1}^m generated by the value vectors
(P(L_1(X)), ..., P(L_m(X))) of homogeneous P of degree d and depth k.  Vectors
are stored as numerators over p^(k+1).  The annihilator is computed
symbolically with the rewriting calculus, the group itself is computed by
sampling, and finite duality links the two.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .errors import HofaError, VerificationError, check_budget
from .forms import FormSystem, canonical_rewrite, format_system, formal_sum
from .gowers import UniformityCertificate, bias_of_numerators, factor_uniformity
from .homogeneous import (compatible_components, homogeneous_sample, is_homogeneous,
                          signature_feasible)
from .space import fp_space

Vec = tuple[int, ...]


def _subgroup(gens, q: int, m: int) -> set[Vec]:
    group: set[Vec] = {(0,) * m}
    for g in gens:
        g = tuple(int(x) % q for x in g)
        if g in group:
            continue
        multiples = []
        v = g
        while v != (0,) * m:
            multiples.append(v)
            v = tuple((a + b) % q for a, b in zip(v, g))
        group = {tuple((a + b) % q for a, b in zip(h, t)) for h in group for t in multiples} | group
    return group


def _generators(elements: set[Vec], q: int, m: int) -> list[Vec]:
    """A small generating set, chosen greedily in sorted order."""
    gens: list[Vec] = []
    span: set[Vec] = {(0,) * m}
    for v in sorted(elements):
        if v not in span:
            gens.append(v)
            span = _subgroup(gens, q, m)
            if len(span) == len(elements):
                break
    return gens


@dataclass
class Annihilator:
    p: int
    d: int
    k: int
    system: FormSystem
    elements: set[Vec]

    @property
    def modulus(self) -> int:
        return self.p ** (self.k + 1)

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def generators(self) -> list[Vec]:
        return _generators(self.elements, self.modulus, self.system.m)

    def __contains__(self, lam) -> bool:
        return tuple(int(x) % self.modulus for x in lam) in self.elements

    def as_dict(self) -> dict:
        return {"p": self.p, "signature": [self.d, self.k], "system": format_system(self.system),
                "modulus": self.modulus, "order": self.order,
                "generators": [list(g) for g in self.generators]}


@dataclass
class ConsistencyGroup:
    p: int
    d: int
    k: int
    system: FormSystem
    elements: set[Vec]
    provenance: str
    stable: bool = True
    orders_by_n: dict[int, int] = field(default_factory=dict)
    stabilized_at: int | None = None

    @property
    def modulus(self) -> int:
        return self.p ** (self.k + 1)

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def generators(self) -> list[Vec]:
        return _generators(self.elements, self.modulus, self.system.m)

    def __contains__(self, beta) -> bool:
        return tuple(int(x) % self.modulus for x in beta) in self.elements

    def is_closed(self) -> bool:
        q = self.modulus
        return all(tuple((a + b) % q for a, b in zip(u, v)) in self.elements
                   for u in self.elements for v in self.elements)

    def as_dict(self) -> dict:
        out = {"p": self.p, "signature": [self.d, self.k], "system": format_system(self.system),
               "modulus": self.modulus, "order": self.order, "provenance": self.provenance,
               "generators": [list(g) for g in self.generators]}
        if self.provenance == "sampled":
            out["stable"] = self.stable
            out["orders_by_n"] = {str(n): o for n, o in sorted(self.orders_by_n.items())}
            out["stabilized_at"] = self.stabilized_at
        return out


def _check_signature(p: int, d: int, k: int) -> None:
    if not signature_feasible(p, d, k):
        raise ValueError(f"no homogeneous polynomial has degree {d} and depth {k} at p={p}")


def in_phi_perp(lam: Sequence[int], d: int, k: int, S: FormSystem) -> bool:
    """Whether sum lam_i P(L_i(X)) vanishes for every homogeneous P of the signature."""
    fs = formal_sum(S.p, d, k, [(int(a), L) for a, L in zip(lam, S.forms)])
    return canonical_rewrite(fs).is_zero()


def phi_perp_symbolic(d: int, k: int, S: FormSystem, budget: int | None = None) -> Annihilator:
    _check_signature(S.p, d, k)
    q = S.p ** (k + 1)
    check_budget(q**S.m, budget)
    elems = {lam for lam in product(range(q), repeat=S.m) if in_phi_perp(lam, d, k, S)}
    return Annihilator(S.p, d, k, S, elems)


def _value_vectors(P, S: FormSystem, k: int) -> set[Vec]:
    sp = fp_space(P.p, P.n)
    base = P.values_at(sp.points, k)
    cols = np.stack([base[sp.linear_images(L, S.ell)] for L in S.forms], axis=1)
    return {tuple(int(x) for x in row) for row in np.unique(cols, axis=0)}


def phi_sampled(d: int, k: int, S: FormSystem, nmax: int = 3, seed=None, samples: int = 12,
                budget: int | None = None) -> ConsistencyGroup:
    """Subgroup generated by observed value vectors for n = 1..nmax.

    Every homogeneous component of the exact signature is used, plus random
    homogeneous samples.  The result is stable when the last feasible n did not
    enlarge the group.
    """
    p = S.p
    _check_signature(p, d, k)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    q = p ** (k + 1)
    group: set[Vec] = {(0,) * S.m}
    orders: dict[int, int] = {}
    for n in range(1, nmax + 1):
        check_budget(p ** (n * S.ell) * (samples + 1), budget)
        tops = [c for c in compatible_components(p, d, k, n) if c.degree == d and c.depth == k]
        if not tops:
            continue
        polys = list(tops)
        for _ in range(samples):
            polys.append(homogeneous_sample(p, d, k, n, seed=rng))
        vecs: set[Vec] = set()
        for P in polys:
            vecs |= _value_vectors(P, S, k)
        group = _subgroup(sorted(vecs | group), q, S.m)
        orders[n] = len(group)
    ns = sorted(orders)
    stable = len(ns) >= 2 and orders[ns[-1]] == orders[ns[-2]]
    stabilized = min(n for n in ns if orders[n] == len(group)) if stable else None
    return ConsistencyGroup(p, d, k, S, group, "sampled", stable, orders, stabilized)


def phi_from_duality(A: Annihilator) -> ConsistencyGroup:
    q, m = A.modulus, A.system.m
    gens = A.generators
    elems = {beta for beta in product(range(q), repeat=m)
             if all(sum(a * b for a, b in zip(lam, beta)) % q == 0 for lam in gens)}
    if len(elems) * A.order != q**m:
        raise VerificationError("group order times annihilator order differs from the ambient order",
                                {"phi": len(elems), "perp": A.order, "ambient": q**m})
    return ConsistencyGroup(A.p, A.d, A.k, A.system, elems, "dual-of-annihilator")


def annihilator_of(G: ConsistencyGroup) -> Annihilator:
    q, m = G.modulus, G.system.m
    gens = G.generators
    elems = {lam for lam in product(range(q), repeat=m)
             if all(sum(a * b for a, b in zip(lam, beta)) % q == 0 for beta in gens)}
    return Annihilator(G.p, G.d, G.k, G.system, elems)


# ---------------------------------------------------------------------------
# near-orthogonality


def lambda_values(B, S: FormSystem, Lam, n: int | None = None) -> tuple[np.ndarray, int]:
    """Numerators of P_Lam(X) = sum_ij Lam[i][j] P_i(L_j(X)) over all X."""
    polys = list(getattr(B, "polys", B))
    p = S.p
    n = polys[0].n if polys else (n or 1)
    sp = fp_space(p, n)
    level = max((P.level for P in polys), default=0)
    q = p ** (level + 1)
    out = np.zeros(sp.size**S.ell, dtype=np.int64)
    images = [sp.linear_images(L, S.ell) for L in S.forms]
    for P, row in zip(polys, Lam):
        base = P.values_at(sp.points, level)
        for lam, idx in zip(row, images):
            if lam % q:
                out = (out + (int(lam) % q) * base[idx]) % q
    return out, q


@dataclass
class NearOrthogonalityVerdict:
    verdict: str
    bias: float
    epsilon: float
    certified: bool
    identically_zero: bool
    lam: list[list[int]]

    @property
    def consistent(self) -> bool:
        if self.verdict == "ZERO":
            return self.bias == 1.0 and self.identically_zero
        return self.bias < self.epsilon or not self.certified

    def as_dict(self) -> dict:
        out = {"verdict": self.verdict, "bias": self.bias, "epsilon": self.epsilon,
               "identically_zero": self.identically_zero, "lambda": self.lam,
               "consistent": self.consistent}
        if not self.certified:
            out["note"] = "prediction only: factor uniformity not certified"
        return out


def near_orthogonality_check(B, S: FormSystem, Lam, eps: float | None = None,
                             certificate=None, budget: int | None = None,
                             strict: bool = True) -> NearOrthogonalityVerdict:
    """Decide ZERO/NONZERO symbolically and confront it with the exact bias."""
    polys = list(getattr(B, "polys", B))
    for P in polys:
        if not is_homogeneous(P):
            raise ValueError("near-orthogonality needs homogeneous polynomials")
    if len(Lam) != len(polys) or any(len(row) != S.m for row in Lam):
        raise ValueError("lambda matrix must be C x m")
    certificate = certificate if certificate is not None else getattr(B, "certificate", None)
    certified = isinstance(certificate, UniformityCertificate)
    if eps is None:
        eps = certificate.epsilon if certified else 1.0
    zero = all(in_phi_perp(row, P.degree, P.depth, S) for P, row in zip(polys, Lam))
    if polys:
        check_budget(polys[0].p ** (polys[0].n * S.ell), budget)
    nums, q = lambda_values(polys, S, Lam)
    b = bias_of_numerators(nums, q)
    verdict = NearOrthogonalityVerdict("ZERO" if zero else "NONZERO", b, eps, certified,
                                       bool(not np.any(nums)), [[int(x) for x in r] for r in Lam])
    if strict and not verdict.consistent:
        raise VerificationError("near-orthogonality dichotomy violated", verdict.as_dict())
    return verdict


def all_lambda_matrices(B, S: FormSystem):
    polys = list(getattr(B, "polys", B))
    ranges = []
    for P in polys:
        ranges.extend([range(P.p ** (P.depth + 1))] * S.m)
    for flat in product(*ranges):
        yield [list(flat[i * S.m:(i + 1) * S.m]) for i in range(len(polys))]


# ---------------------------------------------------------------------------
# equidistribution


@dataclass
class EquidistReport:
    K: int
    group_orders: list[int]
    max_deviation: float
    inconsistent_mass: float
    epsilon: float
    cells: int
    target_probability: float | None = None

    @property
    def ok(self) -> bool:
        return self.max_deviation <= self.epsilon and self.inconsistent_mass == 0

    def as_dict(self) -> dict:
        out = {"K": self.K, "group_orders": self.group_orders, "max_deviation": self.max_deviation,
               "inconsistent_mass": self.inconsistent_mass, "epsilon": self.epsilon,
               "consistent_cells": self.cells, "ok": self.ok}
        if self.target_probability is not None:
            out["target_probability"] = self.target_probability
        return out


class InconsistentTarget(HofaError):
    def __init__(self, row: int, values):
        self.row = row
        super().__init__(f"row {row} of the target {list(values)} lies outside its consistency group")


def consistency_groups(B, S: FormSystem) -> list[ConsistencyGroup]:
    return [phi_from_duality(phi_perp_symbolic(P.degree, P.depth, S)) for P in B.polys]


def equidist_experiment(B, S: FormSystem, eps: float, target=None,
                        budget: int | None = None) -> EquidistReport:
    """Joint distribution of the C x m value matrix (P_i(L_j(X)))."""
    polys = list(B.polys)
    p, n = B.p, B.n
    sp = fp_space(p, n)
    N = sp.size**S.ell
    check_budget(N * len(polys) * S.m, budget)
    groups = consistency_groups(B, S)
    K = int(np.prod([g.order for g in groups]))
    images = [sp.linear_images(L, S.ell) for L in S.forms]
    cols = []
    for P in polys:
        base = P.values_at(sp.points, P.depth)
        cols.extend(base[idx] for idx in images)
    mat = np.stack(cols, axis=1) if cols else np.zeros((N, 0), dtype=np.int64)
    rows, counts = np.unique(mat, axis=0, return_counts=True)
    probs = {tuple(int(x) for x in r): c / N for r, c in zip(rows, counts)}

    def consistent(cell) -> bool:
        return all(cell[i * S.m:(i + 1) * S.m] in g for i, g in enumerate(groups))

    bad_mass = sum(pr for cell, pr in probs.items() if not consistent(cell))
    dev = 0.0
    for parts in product(*[sorted(g.elements) for g in groups]):
        cell = tuple(x for part in parts for x in part)
        dev = max(dev, abs(probs.get(cell, 0.0) - 1.0 / K))
    target_prob = None
    if target is not None:
        flat = tuple(int(x) for row in target for x in row)
        for i, g in enumerate(groups):
            row = flat[i * S.m:(i + 1) * S.m]
            if row not in g:
                raise InconsistentTarget(i, row)
        target_prob = probs.get(flat, 0.0)
    return EquidistReport(K, [g.order for g in groups], float(dev), float(bad_mass), eps,
                          K, target_prob)


def certified_factor(B, eps: float, budget: int | None = None):
    cert = factor_uniformity(B, eps, budget)
    if isinstance(cert, UniformityCertificate):
        B.certificate = cert
    return cert
