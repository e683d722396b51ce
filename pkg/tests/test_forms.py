from __future__ import annotations

import numpy as np
import pytest

from hofa.forms import (canonical_rewrite, count_operator, cs_complexity, expand_high_weight,
                        format_system, formal_sum, formal_sum_values, normalize_leading,
                        parse_system, parse_terms, tensor_power, tensor_rank_profile,
                        true_complexity)
from hofa.gowers import ComplexTable, gowers_norm_table
from hofa.homogeneous import homogeneous_sample
from hofa.polynomial import NCPoly, parse_poly, random_poly
from hofa.space import fp_space


def test_tensor_powers():
    assert tensor_power((1, 2), 2, 3) == (1, 2, 1)
    assert tensor_power((1, 0), 3, 3) == (1, 0, 0, 0)
    assert tensor_power((1, 3), 2, 5) == (1, 3, 4)


def test_four_ap_profile_and_witness():
    S = parse_system("1,0;1,1;1,2;1,3", 5)
    prof = tensor_rank_profile(S, 3)
    assert not prof[1].independent and prof[2].independent
    w = prof[1].witness
    squares = [tensor_power(L, 2, 5) for L in S.forms]
    for wit in (w, [2, 4, 1, 3]):
        assert all(sum(c * v[i] for c, v in zip(wit, squares)) % 5 == 0 for i in range(3))
    assert any([c * x % 5 for x in w] == [2, 4, 1, 3] for c in range(1, 5))


def test_binary_squares_independent():
    S = parse_system("1,0;0,1;1,1", 2)
    assert tensor_rank_profile(S, 2)[1].independent


def test_complexities():
    ap3 = parse_system("1,0;1,1;1,2", 5)
    ap4 = parse_system("1,0;1,1;1,2;1,3", 5)
    assert cs_complexity(ap3).s == 1
    assert cs_complexity(ap4).s == 2
    assert true_complexity(ap3).d == 1
    assert true_complexity(ap4).d == 2
    assert cs_complexity(parse_system("1,0;0,1", 3)).s == 0
    assert cs_complexity(parse_system("1", 3)).s == 0
    assert true_complexity(parse_system("1,0;0,1", 3)).d == 1


def test_pairwise_dependence_rejected():
    with pytest.raises(ValueError):
        cs_complexity(parse_system("1,0;2,0", 3))


def test_cs_at_most_m_minus_2():
    rng = np.random.default_rng(0)
    from hofa.experiments import random_pairwise_system
    for _ in range(30):
        S = random_pairwise_system(5, 3, int(rng.integers(2, 6)), rng)
        assert cs_complexity(S).s <= S.m - 2


def test_count_trivial_and_zero():
    S = parse_system("1,0;1,1;0,1", 2)
    ones = ComplexTable.constant(2, 1)
    assert count_operator([ones] * 3, S, 1) == 1
    f1 = ComplexTable.phase_of(parse_poly("1/2 x1", 2))
    assert abs(count_operator([f1, ones, ones], S, 1)) == 0


def test_count_ap3_linear_phase():
    # |x| + |x+y| + |x+2y| = 3x + 3y = 0 mod 3, so every term is e(0)
    S = parse_system("1,0;1,1;1,2", 3)
    P = parse_poly("1/3 x1", 3)
    assert abs(count_operator([P, P, P], S, 1) - 1) < 1e-12


def test_count_monte_carlo_fallback():
    S = parse_system("1,0;1,1", 2)
    ones = ComplexTable.constant(2, 2)
    assert count_operator([ones, ones], S, 2, budget=4, seed=1, samples=100) == 1


def test_expand_example_p2():
    out = dict((M, a) for a, M in expand_high_weight((1, 1, 1), 2))
    assert out == {(0, 0, 0): 1, (1, 0, 0): -1, (0, 1, 0): -1, (0, 0, 1): -1,
                   (1, 1, 0): 1, (1, 0, 1): 1, (0, 1, 1): 1}
    P = parse_poly("1/4 x1", 2)
    vals = formal_sum_values(P, [(a, M) for a, M in expand_high_weight((1, 1, 1), 2)], 3)
    direct = formal_sum_values(P, [(1, (1, 1, 1))], 3)
    assert np.array_equal(vals, direct)


def test_expand_bounds_and_identity():
    rng = np.random.default_rng(2)
    for p, L, d in [(3, (2, 2), 2), (2, (1, 1, 1, 1), 3), (3, (2, 1, 2), 3)]:
        out = expand_high_weight(L, d)
        for _, M in out:
            assert sum(M) <= d and all(m <= l for m, l in zip(M, L))
        for _ in range(10):
            P = random_poly(p, 2, 2, rng)
            P = P if P.degree <= d else _truncate(P, d, rng)
            assert np.array_equal(formal_sum_values(P, out, len(L)),
                                  formal_sum_values(P, [(1, L)], len(L)))


def _truncate(P, d, rng):
    terms = {key: c for key, c in P.terms.items()
             if sum(key[0]) + key[1] * (P.p - 1) <= d}
    return NCPoly.from_terms(P.p, P.n, terms, P.shift)


def test_normalize_leading():
    assert normalize_leading((1, 1), 2, 3) == ((1, 1, (1, 1)),)
    assert normalize_leading((2,), 1, 3) == ((1, 2, (1,)),)
    out = normalize_leading((2, 1), 2, 3)
    assert all(M[next(i for i, c in enumerate(M) if c)] == 1 and sum(M) <= 2 for _, _, M in out)
    rng = np.random.default_rng(4)
    sp = fp_space(3, 2)
    for _ in range(20):
        P = _truncate(random_poly(3, 2, 0, rng, with_shift=False), 2, rng)
        lhs = formal_sum_values(P, [(1, (2, 1))], 2, 0)
        rhs = np.zeros_like(lhs)
        base = P.values_at(sp.points, 0)
        for a, c, M in out:
            rhs = (rhs + a * base[sp.linear_images([c * m for m in M], 2)]) % 3
        assert np.array_equal(lhs, rhs)


def test_rewrite_examples():
    fs = formal_sum(3, 1, 0, parse_terms("1*(1,0) + 1*(0,1) + 2*(1,1)", 3))
    assert canonical_rewrite(fs).is_zero()
    out = canonical_rewrite(formal_sum(3, 3, 1, [(1, (2,))]))
    assert out.terms == {(1,): 8}
    same = canonical_rewrite(formal_sum(3, 2, 0, [(1, (1, 1))]))
    assert same.terms == {(1, 1): 1}


def test_rewrite_normal_form_and_soundness():
    rng = np.random.default_rng(9)
    for _ in range(40):
        p = int(rng.choice([2, 3]))
        d, k = (3, 1) if p == 3 else (int(rng.integers(1, 4)), int(rng.integers(0, 2)))
        if d < k * (p - 1) + 1:
            continue
        ell = int(rng.integers(1, 4))
        q = p ** (k + 1)
        terms = [(int(rng.integers(q)), tuple(int(x) for x in rng.integers(0, p, ell)))
                 for _ in range(3)]
        out = canonical_rewrite(formal_sum(p, d, k, terms))
        for M, a in out.terms.items():
            j = 0
            while a % p ** (j + 1) == 0:
                j += 1
            assert M[next(i for i, c in enumerate(M) if c)] == 1
            assert 0 < a < q and sum(M) <= d - j * (p - 1)
        for n in (1, 2):
            try:
                P = homogeneous_sample(p, d, k, n, seed=rng)
            except ValueError:
                continue
            assert np.array_equal(formal_sum_values(P, terms, ell, k),
                                  formal_sum_values(P, out.terms, ell, k))


def test_gowers_count_lemma_random_tables():
    rng = np.random.default_rng(1)
    S = parse_system("1,0;1,1;0,1", 2)
    s = cs_complexity(S).s
    for _ in range(10):
        fs = [ComplexTable(2, 2, rng.random(4) * np.exp(2j * np.pi * rng.random(4))) for _ in range(3)]
        bound = min(gowers_norm_table(f, s + 1).norm for f in fs)
        assert abs(count_operator(fs, S, 2)) <= bound + 1e-9


def test_system_roundtrip():
    assert format_system(parse_system("1,0;1,1;1,2", 3)) == "1,0;1,1;1,2"
