"""End-to-end acceptance checks, one test per criterion, each with its runtime limit."""

from __future__ import annotations

import time
from itertools import product

import numpy as np

from hofa.consistency import (all_lambda_matrices, equidist_experiment, near_orthogonality_check,
                              phi_from_duality, phi_perp_symbolic, phi_sampled)
from hofa.experiments import (gowers_count_suite, max_pairwise_forms, random_pairwise_system,
                              run_gowers_wolf_experiment)
from hofa.factor import PolyFactor, certify
from hofa.forms import (canonical_rewrite, cs_complexity, formal_sum, formal_sum_values,
                        parse_system, tensor_power, tensor_rank_profile, true_complexity)
from hofa.gowers import UniformityCertificate, bias, gowers_norm_poly
from hofa.homogeneous import (decompose_univariate, homogeneous_sample, is_homogeneous, sigma,
                              signature_feasible, univariate_basis)
from hofa.polynomial import NCPoly, format_poly, interpolate, parse_poly, random_poly
from hofa.torus import primitive_root, teichmuller_sigma


class Timer:
    def __init__(self, limit: float):
        self.limit = limit

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.1f}s, limit {self.limit}s"


def test_criterion_01_representation_roundtrip():
    with Timer(10):
        rng = np.random.default_rng(2024)
        for p, n, K in product((2, 3), (1, 2), (0, 1, 2)):
            for _ in range(500):
                P = random_poly(p, n, K, rng, density=float(rng.random()))
                Q = interpolate(P.table(K))
                assert Q == P
                assert parse_poly(format_poly(Q), p, n) == P


def test_criterion_02_gowers_exact_anchors():
    with Timer(1):
        P = parse_poly("1/4 x1", 2)
        assert abs(gowers_norm_poly(P, 2).norm - 2 ** -0.25) < 1e-9
        assert gowers_norm_poly(P, 3).norm == 1.0
        assert abs(bias(parse_poly("1/3 x1^2", 3)) - 3 ** -0.5) < 1e-9


def test_criterion_03_sigma_table():
    with Timer(1):
        for p in (2, 3, 5):
            z = primitive_root(p)
            for d, k in product(range(7), range(3)):
                mod = p ** (k + 1)
                hits = [s for s in range(mod) if s % p == pow(z, d, p) and pow(s, p - 1, mod) == 1]
                assert hits == [teichmuller_sigma(p, d, k).value]
        assert teichmuller_sigma(3, 3, 1).value == 8


def test_criterion_04_homogeneous_basis():
    with Timer(5):
        p, d = 3, 5
        basis = univariate_basis(p, d)
        for el in basis.elements[1:]:
            w = is_homogeneous(el.poly)
            assert w.verified and w.sigma == sigma(p, el.degree, el.depth) == el.sigma
        for s, k in product(range(1, p), range(d)):
            M = NCPoly.monomial(p, (s,), k)
            if M.degree > d:
                continue
            total = NCPoly.zero(p, 1)
            for e, c in decompose_univariate(M, basis).items():
                total = total + c * basis.elements[e].poly
            assert total == M
        h3 = basis.elements[3].poly
        assert format_poly(h3) == "1/9 x1^1 + 1/3 x1^2"
        for x in range(3):
            assert h3((2 * x % 3,)) == 8 * h3((x,))


def test_criterion_05_rewrite_soundness():
    with Timer(60):
        rng = np.random.default_rng(5)
        done = mismatches = 0
        while done < 200:
            p = int(rng.choice([2, 3]))
            d, k = int(rng.integers(1, 4)), int(rng.integers(0, 2))
            # signatures must be realizable with n <= 2 to be checked pointwise
            if not signature_feasible(p, d, k) or (p, d, k) == (2, 3, 0):
                continue
            ell = int(rng.integers(1, 4))
            m = int(rng.integers(1, 5))
            q = p ** (k + 1)
            terms = [(int(rng.integers(q)), tuple(int(x) for x in rng.integers(0, p, ell)))
                     for _ in range(m)]
            out = canonical_rewrite(formal_sum(p, d, k, terms))
            checked = 0
            for n in (1, 2):
                try:
                    polys = [homogeneous_sample(p, d, k, n, seed=rng) for _ in range(5)]
                except ValueError:
                    continue
                for P in polys:
                    checked += 1
                    if not np.array_equal(formal_sum_values(P, terms, ell, k),
                                          formal_sum_values(P, out.terms, ell, k)):
                        mismatches += 1
            assert checked >= 5
            done += 1
        assert mismatches == 0


def test_criterion_06_duality_cross_validation():
    with Timer(120):
        systems = ["1,0;0,1;1,1", "1;2", "1,0;1,1;1,2", "1,0;1,1;1,2;1,3"]
        for p, text in product((2, 3), systems):
            S = parse_system(text, p)
            for d, k in product(range(1, 4), range(2)):
                if not signature_feasible(p, d, k):
                    continue
                A = phi_perp_symbolic(d, k, S)
                dual = phi_from_duality(A)
                G = phi_sampled(d, k, S, nmax=4, seed=0)
                assert G.stable, (p, text, d, k, G.orders_by_n)
                assert dual.elements == G.elements, (p, text, d, k)
                assert dual.order * A.order == p ** ((k + 1) * S.m)


def test_criterion_07_near_orthogonality_dichotomy():
    with Timer(300):
        S3 = parse_system("1,0;0,1;1,1", 3)
        S2 = parse_system("1,0;0,1;1,1", 2)
        cases = [
            (PolyFactor(3, 2, [parse_poly("1/3 x1 x2", 3, 2),
                               parse_poly("1/3 x1^2 + 2/3 x2^2", 3, 2)]), S3, 0.7),
            (PolyFactor(2, 4, [parse_poly("1/4 x1 + 1/4 x2 + 1/4 x3 + 1/4 x4", 2, 4)]), S2, 0.6),
        ]
        for B, S, eps in cases:
            assert isinstance(certify(B, eps), UniformityCertificate)
            verdicts = set()
            for Lam in all_lambda_matrices(B, S):
                v = near_orthogonality_check(B, S, Lam)
                if v.verdict == "ZERO":
                    assert v.bias == 1.0
                else:
                    assert v.bias < eps
                verdicts.add(v.verdict)
            assert verdicts == {"ZERO", "NONZERO"}


def test_criterion_08_equidistribution():
    with Timer(60):
        S = parse_system("1,0;0,1;1,1", 3)
        rep = equidist_experiment(PolyFactor(3, 1, [parse_poly("1/3 x1", 3)]), S, 0.0)
        assert rep.K == 9 and rep.max_deviation == 0.0 and rep.inconsistent_mass == 0.0
        B = PolyFactor(3, 2, [parse_poly("1/3 x1 x2", 3, 2)])
        cert = certify(B, 0.7)
        assert isinstance(cert, UniformityCertificate)
        rep = equidist_experiment(B, S, cert.epsilon)
        assert rep.max_deviation <= cert.epsilon and rep.inconsistent_mass == 0.0


def test_criterion_09_complexity_anchors():
    with Timer(30):
        ap3 = parse_system("1,0;1,1;1,2", 5)
        ap4 = parse_system("1,0;1,1;1,2;1,3", 5)
        assert cs_complexity(ap3).s == 1
        assert cs_complexity(ap4).s == 2
        assert true_complexity(ap4).d == 2
        squares = [tensor_power(L, 2, 5) for L in ap4.forms]
        assert all(sum(c * v[i] for c, v in zip((2, 4, 1, 3), squares)) % 5 == 0 for i in range(3))
        assert not tensor_rank_profile(ap4, 2)[1].independent
        rng = np.random.default_rng(9)
        for _ in range(50):
            p = int(rng.choice([3, 5, 7]))
            ell = int(rng.integers(2, 4))
            m = min(int(rng.integers(2, 6)), max_pairwise_forms(p, ell))
            S = random_pairwise_system(p, ell, m, rng)
            assert true_complexity(S).d <= max(cs_complexity(S).s, 1)


def test_criterion_10_gowers_wolf_properties():
    with Timer(300):
        instances = gowers_count_suite(p=2, trials=100, seed=10, nmax=3)
        assert all(inst.ok for inst in instances)
        rep = run_gowers_wolf_experiment(p=5, n=2, seed=0)
        assert rep.zero_count == 0
        assert rep.lemma_ok
        assert rep.envelope_within_norm and rep.shrinks
