import pytest
from ops import e, op

from fclkp.cpow import (
    abs_d_power,
    cgrade,
    const_power,
    dress_to_constants,
    exp_ad,
    fcl_power,
    gauge_normalize,
    power,
)
from fclkp.errors import GradeError, NonAbelianGaugeError, ShapeError
from fclkp.fcl import FClOp
from fclkp.psido import EXACT, OrderWindow, PsiDO, compose
from fclkp.scalar import FourierMat, FourierPoly, GaussRat

half = GaussRat(1) / 2
i = GaussRat(0, 1)


def test_square_of_first_order():
    M = op({1: 1, 0: e(1)})
    # (d + f)^2 = d^2 + 2 f d + f' + f^2
    expected = op({2: 1, 1: e(1, 2), 0: e(1, i) + e(2)})
    P = power(M, 2)
    assert P.agrees(expected)
    assert P.wm <= -6
    assert compose(M, M) == expected


def test_constant_square_root_series():
    H = op({2: 1, 0: 1})
    got = const_power(H, half, depth=6)
    assert got.coeff(1) == FourierMat.identity(1)
    assert got.coeff(-1) == FourierMat.scalar(FourierPoly.const(half))
    assert got.coeff(-3) == FourierMat.scalar(FourierPoly.const(GaussRat(-1) / 8))
    assert got.coeff(-5) == FourierMat.scalar(FourierPoly.const(GaussRat(1) / 16))


def test_square_root_squares_back():
    M = op({2: 1, 0: e(1)})
    with OrderWindow(6):
        R = power(M, half)
    assert R.grade() == 1
    assert compose(R, R).agrees(M)


def test_gauge_then_dress_reconstructs():
    M = op({1: 1, 0: e(1), -1: e(-1)})
    with OrderWindow(6):
        phi, c, N0 = gauge_normalize(M)
        assert N0.coeff(0).is_constant()
        assert exp_ad(phi, N0, -5).agrees(M)
        K, H = dress_to_constants(N0)
    assert H.is_constant()
    assert compose(N0, K, floor=-5).agrees(compose(K, H, floor=-5))


@pytest.mark.parametrize("r,s", [(half, half), (half, 1), (-1, GaussRat(3) / 2), (GaussRat(3) / 2, -1)])
def test_group_law(r, s):
    M = op({1: 1, 0: e(1), -1: e(-1, 2)})
    with OrderWindow(6):
        a, b, ab = power(M, r), power(M, s), power(M, GaussRat(r) + s)
    assert compose(a, b).agrees(ab)


def test_complex_exponent():
    M = op({1: 1, -1: e(1)})
    r = GaussRat(half, 1)
    with OrderWindow(5):
        P = power(M, r)
        Q = power(M, -r)
    assert P.grade() == r
    assert compose(P, Q).agrees(op({0: 1}))


def test_cgrade_constructor():
    A = cgrade(GaussRat(3, 1) / 2, [FourierMat.identity(1), FourierMat([[e(1)]])])
    assert A.grade() == GaussRat(3, 1) / 2
    assert A.wm != EXACT
    assert A.coeff(0) == FourierMat([[e(1)]])


def test_diagonal_matrix_power_and_nonabelian_guard():
    f = FourierMat.diag([e(1), e(-1)])
    M = PsiDO({1: FourierMat.identity(2), 0: f}, n=2)
    assert compose(power(M, half), power(M, half)).agrees(M)
    g = FourierMat([[e(1), FourierPoly.const(1)], [FourierPoly(), e(-1)]])
    with pytest.raises(NonAbelianGaugeError):
        power(PsiDO({1: FourierMat.identity(2), 0: g}, n=2), half)


def test_preconditions():
    with pytest.raises(ShapeError):
        power(op({1: 2}), half)
    with pytest.raises(GradeError):
        power(op({0: 1}), half)


def test_abs_d():
    one = abs_d_power(1)
    assert one == FClOp(op({1: -i}), op({1: i}))
    # |D|^2 = D^2 = -d^2 on both branches
    assert abs_d_power(2) == FClOp(op({2: -1}), op({2: -1}))


def test_fcl_power_branchwise():
    A = FClOp(op({1: 1, 0: e(1)}), op({1: 1}))
    P = fcl_power(A, 2)
    assert P.plus == power(A.plus, 2) and P.minus == op({2: 1})
