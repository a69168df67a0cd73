import pytest
import sympy as sp
from hypothesis import given, settings
from ops import e, op, psidos

from fclkp.errors import DimensionError, WatermarkError
from fclkp.psido import (
    EXACT,
    OrderWindow,
    PsiDO,
    adler_residue,
    adler_trace,
    bracket,
    bracket_r0,
    compose,
    exp_io,
    invert,
    split_D,
    split_S,
    sts_r,
)
from fclkp.scalar import FourierMat, FourierPoly, GaussRat

x = sp.symbols("x", real=True)
phi = sp.Function("phi")(x)


def poly_expr(f: FourierPoly):
    return sp.Add(*[(sp.Rational(str(c.re)) + sp.I * sp.Rational(str(c.im))) * sp.exp(sp.I * m * x) for m, c in f.items()])


def apply_do(A: PsiDO, expr):
    """Act with a scalar differential operator on a sympy expression."""
    assert A.n == 1 and A.offset.is_zero() and A.wm == EXACT
    out = 0
    for k, c in A.coeffs.items():
        assert k >= 0
        out += poly_expr(c[0, 0]) * sp.diff(expr, x, k)
    return sp.expand(out)


def test_leibniz_against_sympy():
    A = op({2: e(1), 0: e(-1, 3)})
    B = op({1: e(2, GaussRat(0, 1)), 0: e(0, 2)})
    lhs = apply_do(compose(A, B), phi)
    rhs = apply_do(A, apply_do(B, phi))
    assert sp.simplify(lhs - rhs) == 0


def test_d_times_function():
    # d o f = f d + f'
    f = e(1)
    assert compose(op({1: 1}), op({0: f})) == op({1: f, 0: f.derive()})


def test_inverse_d_times_function():
    # d^-1 o f = f d^-1 - f' d^-2 + f'' d^-3 - ...
    got = compose(op({-1: 1}), op({0: e(1)}), floor=-4)
    assert got.coeff(-1) == FourierMat([[e(1)]])
    assert got.coeff(-2) == FourierMat([[e(1, GaussRat(0, -1))]])
    assert got.coeff(-3) == FourierMat([[e(1, -1)]])
    assert got.coeff(-4) == FourierMat([[e(1, GaussRat(0, 1))]])
    assert got.wm == -4


def test_watermark_propagation():
    A = op({1: 1, 0: e(1)}, wm=-2)
    B = op({2: 1})
    C = compose(A, B)
    assert C.wm == 0
    with pytest.raises(WatermarkError):
        C.coeff(-1)
    assert compose(B, A).wm == 0


def test_default_floor_for_infinite_series():
    with OrderWindow(5):
        C = compose(op({-1: 1}), op({0: e(1)}))
    assert C.wm == -1 - 5


def test_finite_compositions_stay_exact():
    C = compose(op({1: 1, 0: e(1)}), op({2: e(-1), -1: 1}))
    assert C.wm == EXACT


def test_complex_grade_binomial():
    half = GaussRat(1) / 2
    h = PsiDO.d(half)
    assert compose(h, h) == op({1: 1})
    got = compose(h, op({0: e(1)}), floor=-3)
    assert got.grade() == half
    assert got.coeff(0) == FourierMat([[e(1)]])
    assert got.coeff(-1) == FourierMat([[e(1, GaussRat(0, half))]])
    # binom(1/2, 2) f'' = (-1/8)(-e^{ix})
    assert got.coeff(-2) == FourierMat([[e(1, GaussRat(1) / 8)]])


def test_imaginary_grade():
    g = GaussRat(0, 1)
    A = PsiDO.d(g)
    B = PsiDO.d(-g)
    assert compose(A, B) == op({0: 1})


def test_splits():
    A = op({2: e(1), 0: 3, -1: e(-1), -3: 1})
    assert split_D(A) == op({2: e(1), 0: 3})
    assert split_S(A) == op({-1: e(-1), -3: 1})
    assert split_D(A) + split_S(A) == A
    assert sts_r(A) == split_D(A) - split_S(A)


def test_adler_trace():
    A = op({-1: e(0, 5) + e(2)})
    assert adler_trace(A) == GaussRat(5)
    assert adler_residue(A) == FourierMat([[e(0, 5) + e(2)]])


def test_invert():
    L = op({1: 1, -1: e(1)})
    Li = invert(L, depth=6)
    prod = compose(L, Li)
    one = op({0: 1})
    assert prod.agrees(one)
    assert prod.wm <= -5


def test_exp_io_is_group_like():
    A = op({-1: e(1)})
    B = op({-1: e(1, -1)})
    P = compose(exp_io(A, floor=-5), exp_io(B, floor=-5), floor=-5)
    assert P.agrees(op({0: 1}))


def test_dimension_checks():
    with pytest.raises(DimensionError):
        compose(PsiDO.identity(1), PsiDO.identity(2))


def test_matrix_noncommutativity():
    E12 = FourierMat.from_constants([[0, 1], [0, 0]])
    E21 = FourierMat.from_constants([[0, 0], [1, 0]])
    A = PsiDO({0: E12}, n=2)
    B = PsiDO({0: E21}, n=2)
    assert not bracket(A, B).is_zero()
    assert adler_trace(bracket(compose(A, PsiDO.d(-1, 2)), B)) == GaussRat(0)


@given(psidos(), psidos(), psidos())
@settings(max_examples=40, deadline=None)
def test_associativity(A, B, C):
    assert compose(compose(A, B), C).agrees(compose(A, compose(B, C)))


@given(psidos(n=2), psidos(n=2))
@settings(max_examples=30, deadline=None)
def test_trace_of_commutator_vanishes(A, B):
    assert adler_trace(bracket(A, B)).is_zero()


@given(psidos(), psidos(), psidos())
@settings(max_examples=20, deadline=None)
def test_r0_bracket_jacobi(A, B, C):
    j = bracket_r0(A, bracket_r0(B, C)) + bracket_r0(B, bracket_r0(C, A)) + bracket_r0(C, bracket_r0(A, B))
    assert j.is_zero()
