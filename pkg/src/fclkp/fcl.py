"""Formal classical operators on the circle as pairs of branches.

An operator is stored as ``(plus, minus)``: the abstract ``PsiDO`` living on
the half line ``xi > 0`` and the one on ``xi < 0``.  Composition is
branchwise.  Homogeneous symbols are recovered through the fixed dictionary

    sigma_k(x, +1) = i^k  * plus_k(x)
    sigma_k(x, -1) = (-i)^k * minus_k(x)

which is where every factor of ``i`` in this module comes from.
"""

from __future__ import annotations

from typing import Callable, Union

from .errors import BranchError, DimensionError, ParameterError
from .psido import PsiDO, adler_trace, compose, split_D, split_S
from .scalar import I, FourierMat, GaussRat

_MINUS_I = GaussRat(0, -1)


class FClOp:
    """Immutable pair ``(plus, minus)`` of branch operators."""

    __slots__ = ("plus", "minus")

    def __init__(self, plus: PsiDO, minus: PsiDO):
        if plus.n != minus.n:
            raise DimensionError(f"dim: branches have sizes {plus.n} and {minus.n}")
        self.plus = plus
        self.minus = minus

    @property
    def n(self) -> int:
        return self.plus.n

    @classmethod
    def identity(cls, n: int = 1) -> "FClOp":
        one = PsiDO.identity(n)
        return cls(one, one)

    @classmethod
    def zero(cls, n: int = 1) -> "FClOp":
        z = PsiDO.zero(n)
        return cls(z, z)

    def branch(self, sign: int) -> PsiDO:
        if sign == 1:
            return self.plus
        if sign == -1:
            return self.minus
        raise ValueError("sign must be +1 or -1")

    def map(self, fn) -> "FClOp":
        return FClOp(fn(self.plus), fn(self.minus))

    def scale(self, c) -> "FClOp":
        return self.map(lambda p: p.scale(c))

    def __add__(self, other):
        if not isinstance(other, FClOp):
            return NotImplemented
        return FClOp(self.plus + other.plus, self.minus + other.minus)

    def __sub__(self, other):
        if not isinstance(other, FClOp):
            return NotImplemented
        return FClOp(self.plus - other.plus, self.minus - other.minus)

    def __neg__(self):
        return FClOp(-self.plus, -self.minus)

    def __mul__(self, other):
        if isinstance(other, FClOp):
            return fcl_compose(self, other)
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __rmul__(self, other):
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def is_zero(self) -> bool:
        return self.plus.is_zero() and self.minus.is_zero()

    def agrees(self, other: "FClOp") -> bool:
        return (self - other).is_zero()

    def is_ee(self) -> bool:
        return self.plus.agrees(self.minus)

    def is_eo(self) -> bool:
        return self.plus.agrees(-self.minus)

    def __eq__(self, other):
        if not isinstance(other, FClOp):
            return NotImplemented
        return self.plus == other.plus and self.minus == other.minus

    def __hash__(self):
        return hash((self.plus, self.minus))

    def __repr__(self):
        return f"FClOp(plus={self.plus!r}, minus={self.minus!r})"


def fcl_compose(A: FClOp, B: FClOp, floor=None, depth=None) -> FClOp:
    return FClOp(compose(A.plus, B.plus, floor, depth), compose(A.minus, B.minus, floor, depth))


def fcl_bracket(A: FClOp, B: FClOp, floor=None, depth=None) -> FClOp:
    return fcl_compose(A, B, floor, depth) - fcl_compose(B, A, floor, depth)


def epsilon(n: int = 1) -> FClOp:
    one = PsiDO.identity(n)
    return FClOp(one, -one)


def eps_mul(A: FClOp) -> FClOp:
    return FClOp(A.plus, -A.minus)


def p_plus(A: FClOp) -> FClOp:
    return FClOp(A.plus, PsiDO.zero(A.n))


def p_minus(A: FClOp) -> FClOp:
    return FClOp(PsiDO.zero(A.n), A.minus)


def parity_twist(P: PsiDO) -> PsiDO:
    """Multiply the order ``k`` coefficient by ``(-1)^k``."""
    if not P.offset.is_zero():
        raise ValueError("parity_twist needs integer orders")
    return P.map_items(lambda k, c: -c if k % 2 else c)


def s_op(A: FClOp) -> FClOp:
    return FClOp(A.minus, A.plus)


def s_prime(A: FClOp) -> FClOp:
    return FClOp(parity_twist(A.minus), parity_twist(A.plus))


def phi_eo_projection(A: FClOp) -> FClOp:
    h = (A.plus - A.minus).scale(GaussRat(1, 0) / 2)
    return FClOp(h, -h)


def phi_ee(P: PsiDO) -> FClOp:
    return FClOp(P, P)


def _scale_orders(P: PsiDO, c: GaussRat) -> PsiDO:
    # 0^k = 0 for every k, including k = 0
    if not P.offset.is_zero():
        raise ValueError("order scaling needs integer orders")
    if c.is_zero():
        return PsiDO.zero(P.n)
    return P.map_items(lambda k, m: m.scale(c ** k))


def phi_lambda_mu(P: PsiDO, lam, mu) -> FClOp:
    """``(sum a_k lam^k d^k, sum a_k mu^k d^k)``."""
    lam = GaussRat.coerce(lam)
    mu = GaussRat.coerce(mu)
    if lam.is_zero() and mu.is_zero():
        raise ParameterError("param: lambda and mu are both zero")
    return FClOp(_scale_orders(P, lam), _scale_orders(P, mu))


def symbol_at(A: FClOp, k: int, sign: int) -> FourierMat:
    """Homogeneous symbol of order ``k`` evaluated at ``xi = sign``."""
    if sign == 1:
        return A.plus.coeff(k).scale(I ** k)
    if sign == -1:
        return A.minus.coeff(k).scale(_MINUS_I ** k)
    raise ValueError("sign must be +1 or -1")


def res_plus(A: FClOp) -> GaussRat:
    return _MINUS_I * adler_trace(A.plus)


def res_minus(A: FClOp) -> GaussRat:
    return I * adler_trace(A.minus)


def res(A: FClOp) -> GaussRat:
    return res_plus(A) + res_minus(A)


def form_s(A: FClOp, B: FClOp) -> GaussRat:
    return res(fcl_compose(A, s_op(B), floor=-1))


def form_sprime(A: FClOp, B: FClOp) -> GaussRat:
    return res(fcl_compose(A, s_prime(B), floor=-1))


def pairing(A: FClOp, B: FClOp) -> GaussRat:
    """``res(A o B)``."""
    return res(fcl_compose(A, B, floor=-1))


Involution = Union[str, Callable[[FClOp], FClOp]]

_R = {"eps": eps_mul, "s": s_op, "sprime": s_prime}


def involution(r: Involution) -> Callable[[FClOp], FClOp]:
    if callable(r):
        return r
    try:
        return _R[r]
    except KeyError:
        raise ValueError(f"unknown involution {r!r}; expected one of {sorted(_R)}") from None


def polarized_bracket(r: Involution, A, B, bracket=fcl_bracket):
    """``([rA, B] + [A, rB]) / 2``."""
    rf = involution(r)
    half = GaussRat(1) / 2
    return (bracket(rf(A), B) + bracket(A, rf(B))).scale(half)


def bracket_eps(A: FClOp, B: FClOp) -> FClOp:
    # eps is central and squares to one, so the polarized bracket collapses
    return eps_mul(fcl_bracket(A, B))


def bracket_s(A: FClOp, B: FClOp) -> FClOp:
    return polarized_bracket(s_op, A, B)


def bracket_sprime(A: FClOp, B: FClOp) -> FClOp:
    return polarized_bracket(s_prime, A, B)


def J1(A: FClOp) -> FClOp:
    return FClOp(A.plus.scale(I), A.minus.scale(_MINUS_I))


def J2(A: FClOp) -> FClOp:
    return FClOp(A.minus.scale(I), A.plus.scale(I))


def J3(A: FClOp) -> FClOp:
    return FClOp(parity_twist(A.minus).scale(I), parity_twist(A.plus).scale(I))


def J4(A: FClOp) -> FClOp:
    return FClOp(-parity_twist(A.minus), parity_twist(A.plus))


J_STRUCTURES = {"J1": J1, "J2": J2, "J3": J3, "J4": J4}


def nijenhuis(J, u, v, bracket=fcl_bracket):
    """``[Ju, Jv] - J[Ju, v] - J[u, Jv] - [u, v]``."""
    Ju, Jv = J(u), J(v)
    return bracket(Ju, Jv) - J(bracket(Ju, v)) - J(bracket(u, Jv)) - bracket(u, v)


def myb_defect(r: Involution, X, Y, bracket=fcl_bracket):
    """``[rX, rY] - r([rX, Y] + [X, rY]) + [X, Y]``."""
    rf = involution(r)
    rX, rY = rf(X), rf(Y)
    return bracket(rX, rY) - rf(bracket(rX, Y) + bracket(X, rY)) + bracket(X, Y)


def rota_baxter_defect(r: Involution, u, v, lam, product=fcl_compose):
    """``r(u)r(v) - r(r(u)v) - r(u r(v)) - lam r(uv)``."""
    rf = involution(r)
    lam = GaussRat.coerce(lam)
    ru, rv = rf(u), rf(v)
    return product(ru, rv) - rf(product(ru, v)) - rf(product(u, rv)) - rf(product(u, v)).scale(lam)


def deformed_product(A: FClOp, B: FClOp, lam, floor=None, depth=None) -> FClOp:
    """Push-forward of composition through ``phi_lambda_mu(., lam, 0)``."""
    lam = GaussRat.coerce(lam)
    if lam.is_zero():
        raise ParameterError("param: lambda must be nonzero")
    for X in (A, B):
        if not X.minus.is_zero():
            raise BranchError("branch: deformed product is defined on the plus branch only")
    inv = lam.inverse()
    P = compose(_scale_orders(A.plus, inv), _scale_orders(B.plus, inv), floor, depth)
    return phi_lambda_mu(P, lam, 0)


def jacobi_defect(bracket, X, Y, Z):
    """``[X,[Y,Z]] + [Y,[Z,X]] + [Z,[X,Y]]``."""
    return bracket(X, bracket(Y, Z)) + bracket(Y, bracket(Z, X)) + bracket(Z, bracket(X, Y))


def fcl_split_D(A: FClOp) -> FClOp:
    return A.map(split_D)


def fcl_split_S(A: FClOp) -> FClOp:
    return A.map(split_S)
