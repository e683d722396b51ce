from __future__ import annotations

from itertools import product

import numpy as np
import pytest

from hofa.errors import NonZeroShift
from hofa.homogeneous import (decompose_univariate, homogeneous_decompose, homogeneous_sample,
                              is_homogeneous, sigma, univariate_basis, _dilate)
from hofa.polynomial import NCPoly, format_poly, interpolate, parse_poly, random_poly
from hofa.space import fp_space
from hofa.torus import primitive_root


def test_classical_monomial_is_homogeneous():
    w = is_homogeneous(parse_poly("1/3 x1 x2", 3))
    assert w.verified and w.sigma == 1


def test_everything_homogeneous_at_p2():
    rng = np.random.default_rng(0)
    for _ in range(10):
        P = random_poly(2, 2, 2, rng, with_shift=False)
        if not P.is_zero():
            assert is_homogeneous(P).verified


def test_ninth_is_not_homogeneous():
    w = is_homogeneous(parse_poly("1/9 x1", 3))
    assert not w.verified


def test_shift_rejected():
    with pytest.raises(NonZeroShift):
        is_homogeneous(parse_poly("shift 1/3 + 1/3 x1", 3))


def test_basis_low_degree_p3():
    b = univariate_basis(3, 3)
    assert [format_poly(e.poly) for e in b.elements[1:]] == [
        "1/3 x1^1", "1/3 x1^2", "1/9 x1^1 + 1/3 x1^2"]
    assert b.elements[3].sigma == 8


def test_h3_scaling_exact():
    h3 = univariate_basis(3, 3).elements[3].poly
    for x in range(3):
        assert h3(((2 * x) % 3,)) == 8 * h3((x,))


def test_basis_p2():
    b = univariate_basis(2, 2)
    assert format_poly(b.elements[2].poly) == "1/4 x1^1"
    assert b.elements[2].sigma == 1 and b.degenerate


@pytest.mark.parametrize("p", [2, 3])
def test_basis_spans_every_monomial(p):
    d = 5
    basis = univariate_basis(p, d)
    for s in range(1, p):
        for k in range(d):
            M = NCPoly.monomial(p, (s,), k)
            if M.degree > d:
                continue
            coeffs = decompose_univariate(M, basis)
            total = NCPoly.zero(p, 1)
            for e, c in coeffs.items():
                total = total + c * basis.elements[e].poly
            assert total == M


@pytest.mark.parametrize("p", [2, 3])
def test_basis_sigma_agreement(p):
    basis = univariate_basis(p, 5)
    for el in basis.elements[1:]:
        assert is_homogeneous(el.poly).verified
        assert el.sigma == sigma(p, el.degree, el.depth)
        assert el.sigma % p == pow(primitive_root(p), el.degree, p)


def test_scaling_degree_drop():
    rng = np.random.default_rng(5)
    for p in (3, 5):
        for _ in range(10):
            P = random_poly(p, 1, 1, rng, with_shift=False)
            if P.degree < 1:
                continue
            for c in range(1, p):
                diff = _dilate(P, c) - pow(c, P.degree) * P
                assert diff.degree < P.degree


def test_decompose_ninth():
    parts = homogeneous_decompose(parse_poly("1/9 x1", 3))
    assert [(c, format_poly(H)) for c, H in parts] == [
        (1, "1/9 x1^1 + 1/3 x1^2"), (2, "1/3 x1^2")]


def test_decompose_homogeneous_is_identity():
    P = parse_poly("1/3 x1 x2", 3)
    assert homogeneous_decompose(P) == [(1, P)]


def test_decompose_multivariate_soundness():
    rng = np.random.default_rng(11)
    for p, n in [(3, 2), (2, 2), (5, 1)]:
        for _ in range(8):
            P = random_poly(p, n, 1, rng, with_shift=False, density=0.6)
            parts = homogeneous_decompose(P)
            total = NCPoly.zero(p, n)
            for c, H in parts:
                assert is_homogeneous(H).verified
                total = total + c * H
            assert total == P


def test_decompose_product_monomial():
    P = parse_poly("1/9 x1 x2", 3)
    parts = homogeneous_decompose(P)
    assert parts[0][1].degree == 4
    total = NCPoly.zero(3, 2)
    for c, H in parts:
        total = total + c * H
    assert total == P


def test_sample_exact_signature():
    P = homogeneous_sample(2, 1, 0, 2, seed=0)
    assert P.degree == 1 and P.depth == 0
    Q = homogeneous_sample(3, 2, 0, 2, seed=0)
    assert Q.degree == 2 and is_homogeneous(Q).sigma == 1


def test_univariate_signature_is_one_dimensional():
    h3 = univariate_basis(3, 3).elements[3].poly
    for seed in range(10):
        P = homogeneous_sample(3, 3, 1, 1, seed=seed)
        assert any(c * h3 == P for c in range(1, 9) if c % 3)
    # and exhaustively: every homogeneous (3,1) univariate polynomial is a multiple of h3
    sp = fp_space(3, 1)
    from hofa.polynomial import FunctionTable
    for vals in product(range(9), repeat=3):
        if vals[0]:
            continue
        P = interpolate(FunctionTable(3, 1, 1, np.array(vals)))
        if P.degree == 3 and P.depth == 1 and is_homogeneous(P).verified:
            assert any(c * h3 == P for c in range(9))


def test_infeasible_signature_rejected():
    with pytest.raises(ValueError):
        homogeneous_sample(3, 2, 1, 1, seed=0)
