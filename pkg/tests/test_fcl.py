import pytest
from hypothesis import given, settings
from ops import e, op, pair, psidos

from fclkp.errors import BranchError, ParameterError
from fclkp.fcl import (
    J1,
    J2,
    J3,
    J4,
    FClOp,
    bracket_eps,
    deformed_product,
    epsilon,
    eps_mul,
    fcl_bracket,
    fcl_compose,
    form_s,
    form_sprime,
    jacobi_defect,
    myb_defect,
    nijenhuis,
    p_minus,
    p_plus,
    phi_ee,
    phi_eo_projection,
    phi_lambda_mu,
    res,
    res_minus,
    res_plus,
    rota_baxter_defect,
    s_op,
    s_prime,
    symbol_at,
)
from fclkp.psido import PsiDO
from fclkp.scalar import FourierMat, GaussRat

i = GaussRat(0, 1)
fcls = psidos(lo=-2, hi=2).flatmap(lambda a: psidos(lo=-2, hi=2).map(lambda b: FClOp(a, b)))


def test_symbol_dictionary():
    A = FClOp(op({2: e(1)}), op({2: e(1)}))
    # sigma_2(+1) = i^2 a, sigma_2(-1) = (-i)^2 a
    assert symbol_at(A, 2, 1) == FourierMat([[e(1, -1)]])
    assert symbol_at(A, 2, -1) == FourierMat([[e(1, -1)]])
    B = FClOp(op({1: 1}), op({1: 1}))
    assert symbol_at(B, 1, 1) == FourierMat([[e(0, i)]])
    assert symbol_at(B, 1, -1) == FourierMat([[e(0, -i)]])


def test_residues():
    inv = op({-1: 1})
    assert res_plus(FClOp(inv, PsiDO.zero())) == -i
    assert res_minus(FClOp(PsiDO.zero(), inv)) == i
    # the residue vanishes on the ee class
    assert res(phi_ee(inv)).is_zero()
    assert res(eps_mul(phi_ee(inv))) == GaussRat(0, -2)


def test_epsilon_central_involution():
    eps = epsilon()
    assert fcl_compose(eps, eps) == FClOp.identity()
    A = FClOp(op({1: e(1)}), op({0: 2}))
    assert fcl_compose(eps, A) == fcl_compose(A, eps) == eps_mul(A)


def test_forms():
    A = FClOp(op({1: e(-1)}), PsiDO.zero())
    B = FClOp(PsiDO.zero(), op({-1: e(1)}))
    assert form_s(A, B) == GaussRat(1)
    assert form_s(B, A) == GaussRat(-1)
    # not symmetric: see the decisions ledger
    assert form_sprime(A, B) == GaussRat(-1)
    assert form_sprime(B, A) == GaussRat(1)


def test_s_prime_of_epsilon():
    assert s_prime(epsilon()) == -epsilon()


def test_s_prime_is_not_multiplicative():
    A, B = phi_ee(op({1: 1})), phi_ee(op({0: e(1)}))
    assert not (s_prime(fcl_compose(A, B)) - fcl_compose(s_prime(A), s_prime(B))).is_zero()


def test_s_is_multiplicative():
    A = FClOp(op({1: e(1)}), op({0: 2}))
    B = FClOp(op({-1: 1}), op({1: e(-1)}))
    assert s_op(fcl_compose(A, B)) == fcl_compose(s_op(A), s_op(B))


def test_projections():
    A = FClOp(op({1: e(1)}), op({0: 2}))
    assert p_plus(A) + p_minus(A) == A
    eo = phi_eo_projection(A)
    assert eo.is_eo()
    assert (A - eo).is_ee()


def test_phi_lambda_mu():
    P = op({1: 1, 0: e(1), -1: 3})
    got = phi_lambda_mu(P, 2, 3)
    assert got.plus == op({1: 2, 0: e(1), -1: GaussRat(3) / 2})
    assert got.minus == op({1: 3, 0: e(1), -1: 1})
    zero_branch = phi_lambda_mu(P, 2, 0)
    assert zero_branch.minus.is_zero()
    with pytest.raises(ParameterError):
        phi_lambda_mu(P, 0, 0)


def test_deformed_product():
    P, Q = op({1: 1}), op({0: e(1)})
    lam = GaussRat(2)
    got = deformed_product(phi_lambda_mu(P, lam, 0), phi_lambda_mu(Q, lam, 0), lam)
    assert got == phi_lambda_mu(fcl_compose(pair(P), pair(Q)).plus, lam, 0)
    with pytest.raises(ParameterError):
        deformed_product(p_plus(pair(P)), p_plus(pair(Q)), 0)
    with pytest.raises(BranchError):
        deformed_product(pair(P), p_plus(pair(Q)), 1)


def test_j_counterexamples_values():
    X, Y = op({1: e(1)}), op({1: 1})
    u, v = eps_mul(phi_ee(X)), eps_mul(phi_ee(Y))
    # [X, Y] = -i e^{ix} d, and N_{J2}(u, v) = -4 (comm, comm)
    comm = fcl_bracket(phi_ee(X), phi_ee(Y))
    assert comm == phi_ee(op({1: e(1, -i)}))
    assert nijenhuis(J2, u, v) == comm.scale(-4)
    assert nijenhuis(J3, p_plus(phi_ee(X)), p_plus(phi_ee(Y))) == phi_ee(op({1: e(1, i)}))


def test_j4_is_j1_j3():
    A = FClOp(op({2: e(1), -1: 1}), op({1: e(-1)}))
    assert J4(A) == J1(J3(A))


def test_rota_baxter_counterexample():
    one = FClOp.identity()
    assert rota_baxter_defect("eps", one, one, 0) == FClOp.identity().scale(-1)


@given(fcls, fcls)
@settings(max_examples=40, deadline=None)
def test_j_squares(A, B):
    for J in (J1, J2, J3, J4):
        assert J(J(A)) == -A
    assert nijenhuis(J1, A, B).is_zero()


@given(fcls, fcls, fcls)
@settings(max_examples=25, deadline=None)
def test_eps_bracket_is_lie(X, Y, Z):
    assert jacobi_defect(bracket_eps, X, Y, Z).is_zero()
    assert myb_defect("eps", X, Y).is_zero()
