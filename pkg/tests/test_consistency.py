from __future__ import annotations

import pytest

from hofa.consistency import (InconsistentTarget, all_lambda_matrices, annihilator_of,
                              equidist_experiment, near_orthogonality_check, phi_from_duality,
                              phi_perp_symbolic, phi_sampled)
from hofa.errors import VerificationError
from hofa.factor import PolyFactor, certify
from hofa.forms import parse_system
from hofa.polynomial import parse_poly

XY = "1,0;0,1;1,1"


def test_phi_perp_additive():
    A = phi_perp_symbolic(1, 0, parse_system(XY, 3))
    assert A.order == 3 and (1, 1, 2) in A


def test_phi_perp_single_form_trivial():
    for p, d, k in [(3, 1, 0), (3, 3, 1), (2, 2, 1)]:
        assert phi_perp_symbolic(d, k, parse_system("1", p)).elements == {(0,)}


def test_phi_perp_binary_quadratics():
    assert phi_perp_symbolic(2, 0, parse_system(XY, 2)).elements == {(0, 0, 0)}


def test_phi_sampled_examples():
    G = phi_sampled(1, 0, parse_system(XY, 3), seed=0)
    assert G.elements == {(t, u, (t + u) % 3) for t in range(3) for u in range(3)}
    H = phi_sampled(1, 0, parse_system("1;2", 3), seed=0)
    assert H.elements == {(t, 2 * t % 3) for t in range(3)}
    assert (0, 0) in H and G.is_closed() and G.stable


def test_duality_examples():
    A = phi_perp_symbolic(1, 0, parse_system("1", 3))
    assert phi_from_duality(A).order == 3
    G = phi_from_duality(phi_perp_symbolic(1, 0, parse_system(XY, 3)))
    assert G.order == 9 and annihilator_of(G).elements == phi_perp_symbolic(1, 0, parse_system(XY, 3)).elements


@pytest.mark.parametrize("p,d,k", [(2, 2, 1), (3, 3, 1), (3, 2, 0)])
def test_duality_cross_validation(p, d, k):
    S = parse_system("1,0;1,1;1,2", p)
    A = phi_perp_symbolic(d, k, S)
    G = phi_sampled(d, k, S, nmax=3, seed=1)
    dual = phi_from_duality(A)
    assert dual.elements == G.elements
    assert dual.order * A.order == (p ** (k + 1)) ** S.m


def test_near_orthogonality_examples():
    S = parse_system(XY, 3)
    B = PolyFactor(3, 1, [parse_poly("1/3 x1^2", 3)])
    assert near_orthogonality_check(B, S, [[0, 0, 0]], strict=False).bias == 1.0
    v = near_orthogonality_check(B, S, [[1, 1, -1]], strict=False)
    assert v.verdict == "NONZERO" and abs(v.bias - 1 / 3) < 1e-12
    L = PolyFactor(3, 1, [parse_poly("1/3 x1", 3)])
    z = near_orthogonality_check(L, S, [[1, 1, 2]])
    assert z.verdict == "ZERO" and z.bias == 1.0 and z.identically_zero


def test_near_orthogonality_dichotomy_certified():
    B = PolyFactor(3, 2, [parse_poly("1/3 x1 x2", 3)])
    assert certify(B, 0.7)
    S = parse_system(XY, 3)
    for Lam in all_lambda_matrices(B, S):
        v = near_orthogonality_check(B, S, Lam)
        assert (v.verdict == "ZERO") == (v.bias == 1.0)


def test_non_homogeneous_factor_rejected():
    with pytest.raises(ValueError):
        near_orthogonality_check(PolyFactor(3, 1, [parse_poly("1/9 x1", 3)]), parse_system(XY, 3),
                                 [[1, 0, 0]])


def test_equidistribution_linear():
    B = PolyFactor(3, 1, [parse_poly("1/3 x1", 3)])
    rep = equidist_experiment(B, parse_system(XY, 3), 0.0, target=[[1, 1, 2]])
    assert rep.K == 9 and rep.max_deviation == 0.0 and rep.inconsistent_mass == 0.0
    assert rep.target_probability == 1 / 9
    with pytest.raises(InconsistentTarget):
        equidist_experiment(B, parse_system(XY, 3), 0.0, target=[[1, 1, 1]])


def test_equidistribution_bilinear():
    B = PolyFactor(3, 2, [parse_poly("1/3 x1 x2", 3)])
    cert = certify(B, 0.7)
    rep = equidist_experiment(B, parse_system(XY, 3), cert.epsilon)
    assert rep.ok and rep.K == 27
