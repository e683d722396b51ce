"""Polynomial factors: the partition of F_p^n by the values of P_1..P_C."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, HofaError, ParseError, check_budget
from .gowers import ComplexTable, UniformityCertificate, UniformityViolation, factor_uniformity
from .polynomial import NCPoly, format_poly, parse_poly
from .space import fp_space
from .torus import TorusValue


@dataclass
class PolyFactor:
    p: int
    n: int
    polys: list[NCPoly] = field(default_factory=list)
    certificate: UniformityCertificate | None = None

    def __post_init__(self):
        self.polys = list(self.polys)
        for P in self.polys:
            if P.p != self.p or P.n != self.n:
                raise DimensionMismatch("all polynomials of a factor must share p and n")

    @property
    def complexity(self) -> int:
        return len(self.polys)

    @property
    def degrees(self) -> list[int]:
        return [P.degree for P in self.polys]

    @property
    def depths(self) -> list[int]:
        return [P.depth for P in self.polys]

    @property
    def atom_bound(self) -> int:
        return prod(self.p ** (k + 1) for k in self.depths)

    def extend(self, P: NCPoly) -> "PolyFactor":
        return PolyFactor(self.p, self.n, self.polys + [P])

    def as_dict(self) -> dict:
        out = {"p": self.p, "n": self.n, "complexity": self.complexity,
               "degrees": self.degrees, "depths": self.depths, "atom_bound": self.atom_bound,
               "polys": [format_poly(P) for P in self.polys]}
        if self.certificate is not None:
            out["certificate"] = self.certificate.as_dict()
        return out


def atom_of(B: PolyFactor, x: Sequence[int]) -> tuple[TorusValue, ...]:
    if len(x) != B.n:
        raise DimensionMismatch(f"point needs {B.n} coordinates")
    return tuple(P(x) for P in B.polys)


def atom_labels(B: PolyFactor, budget: int | None = None) -> tuple[np.ndarray, int]:
    """Atom index of every point (C order) and the number of atoms."""
    sp = fp_space(B.p, B.n)
    check_budget(sp.size * max(B.complexity, 1), budget)
    if not B.polys:
        return np.zeros(sp.size, dtype=np.int64), 1
    keys = np.stack([P.values_at(sp.points) for P in B.polys], axis=1)
    _, labels = np.unique(keys, axis=0, return_inverse=True)
    labels = labels.reshape(-1)
    return labels, int(labels.max()) + 1


def conditional_expectation(f, B: PolyFactor, budget: int | None = None) -> ComplexTable:
    """E[f | B]: average of f over the atom of each point."""
    vals = f.values if isinstance(f, ComplexTable) else np.asarray(f, dtype=np.complex128).reshape(-1)
    labels, count = atom_labels(B, budget)
    if vals.size != labels.size:
        raise DimensionMismatch("function and factor live on different spaces")
    sizes = np.bincount(labels, minlength=count)
    sums = np.bincount(labels, weights=vals.real, minlength=count) + 1j * np.bincount(
        labels, weights=vals.imag, minlength=count)
    return ComplexTable(B.p, B.n, (sums / sizes)[labels])


def is_measurable(f, B: PolyFactor, tol: float = 1e-12) -> bool:
    vals = f.values if isinstance(f, ComplexTable) else np.asarray(f, dtype=np.complex128)
    labels, count = atom_labels(B)
    for a in range(count):
        block = vals[labels == a]
        if np.max(np.abs(block - block[0])) > tol:
            return False
    return True


def refines(finer: PolyFactor, coarser: PolyFactor) -> bool:
    """Whether equal atoms of ``finer`` imply equal atoms of ``coarser``."""
    fl, _ = atom_labels(finer)
    cl, _ = atom_labels(coarser)
    seen: dict[int, int] = {}
    for a, b in zip(fl.tolist(), cl.tolist()):
        if seen.setdefault(a, b) != b:
            return False
    return True


@dataclass
class AtomCensus:
    atoms: int
    bound: int
    sizes: dict[str, int]

    @property
    def within_bound(self) -> bool:
        return self.atoms <= self.bound

    def as_dict(self) -> dict:
        return {"atoms": self.atoms, "bound": self.bound, "within_bound": self.within_bound,
                "sizes": self.sizes}


def atom_census(B: PolyFactor, budget: int | None = None) -> AtomCensus:
    sp = fp_space(B.p, B.n)
    check_budget(sp.size, budget)
    sizes: dict[str, int] = {}
    for x in sp.points:
        key = "(" + ", ".join(str(v) for v in atom_of(B, tuple(int(c) for c in x))) + ")"
        sizes[key] = sizes.get(key, 0) + 1
    return AtomCensus(len(sizes), B.atom_bound, dict(sorted(sizes.items())))


# ---------------------------------------------------------------------------
# search


class FactorSearchExhausted(HofaError):
    def __init__(self, attempts: int, best_value: float | None):
        self.attempts = attempts
        self.best_value = best_value
        super().__init__(f"no certified factor in {attempts} attempts; best max norm {best_value}")


def uniform_factor_search(signatures: Sequence[tuple[int, int]], p: int, n: int, eps: float,
                          seed=None, budget: int = 200) -> PolyFactor:
    """Random homogeneous polynomials with the given (degree, depth) signatures
    until every nonzero combination has top Gowers norm below eps."""
    from .homogeneous import homogeneous_sample

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    best = None
    for _ in range(budget):
        polys = [homogeneous_sample(p, d, k, n, seed=rng) for d, k in signatures]
        B = PolyFactor(p, n, polys)
        cert = factor_uniformity(B, eps)
        if isinstance(cert, UniformityCertificate):
            B.certificate = cert
            return B
        if isinstance(cert, UniformityViolation) and (best is None or cert.value < best):
            best = cert.value
    raise FactorSearchExhausted(budget, best)


def certify(B: PolyFactor, eps: float, budget: int | None = None):
    cert = factor_uniformity(B, eps, budget)
    if isinstance(cert, UniformityCertificate):
        B.certificate = cert
    return cert


# ---------------------------------------------------------------------------
# text form


def parse_factor(text: str, p: int, n: int | None = None) -> PolyFactor:
    """One polynomial per line; blank lines and ``#`` comments are ignored."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    polys = []
    for i, ln in enumerate(lines):
        try:
            polys.append(parse_poly(ln, p, n))
        except ParseError as exc:
            raise ParseError(f"line {i + 1}: {exc}", ln) from None
    if n is None:
        n = max((P.n for P in polys), default=1)
        polys = [parse_poly(ln, p, n) for ln in lines]
    return PolyFactor(p, n, polys)


def format_factor(B: PolyFactor) -> str:
    return "".join(format_poly(P) + "\n" for P in B.polys)
