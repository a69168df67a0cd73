"""Complex-grade operators and exact powers of monic operators.

A complex-grade operator ``sum_j a_j d^{b - j}`` is an ordinary ``PsiDO``
with a non-zero grade offset, so composition is the same Leibniz kernel
with generalized binomial coefficients.

Powers of a monic operator ``M`` of grade ``g`` are computed by

1. gauge:  ``M = e^phi M0 e^-phi`` with constant sub-leading coefficient;
2. dress:  ``M0 = K H K^-1`` with ``K`` in ``1 + IO`` and ``H`` constant;
3. ``H^r`` by the commutative binomial series;
4. undress: ``M^r = e^phi K H^r K^-1 e^-phi``.

Conjugation by ``e^phi`` is applied as the finite-per-order series
``sum ad_phi^j / j!``, so ``e^phi`` itself (not a trigonometric polynomial)
never has to be formed.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

from .errors import GradeError, NonAbelianGaugeError, OrderError, ShapeError
from .fcl import FClOp
from .psido import EXACT, OrderWindow, PsiDO, _canon_offset, compose, invert
from .scalar import ONE, FourierMat, FourierPoly, GaussRat

ccompose = compose


def cgrade(grade, tail: Sequence, n: int = 1, exact: bool = False) -> PsiDO:
    """``sum_j tail[j] d^{grade - j}``.

    Unless ``exact`` is set, the orders below the given tail are unknown.
    """
    g = GaussRat.coerce(grade)
    frac, top = _canon_offset(g)
    coeffs = {top - j: a for j, a in enumerate(tail)}
    wm = EXACT if exact else top - len(tail) + 1
    return PsiDO(coeffs, n=n, wm=wm, offset=frac)


def cgrade_pair(plus: PsiDO, minus: PsiDO) -> FClOp:
    if plus.grade() != minus.grade():
        raise OrderError(f"order: branch grades differ ({plus.grade()} vs {minus.grade()})")
    return FClOp(plus, minus)


def _ad(phi: PsiDO, X: PsiDO, floor) -> PsiDO:
    return compose(phi, X, floor=floor) - compose(X, phi, floor=floor)


def exp_ad(phi: FourierMat, X: PsiDO, floor) -> PsiDO:
    """``e^phi X e^-phi = sum_j ad_phi^j(X) / j!`` down to index ``floor``.

    Each ``ad_phi`` lowers the order by one when ``phi`` commutes with the
    coefficients of ``X``, which callers guarantee.
    """
    if phi.is_zero():
        return X.truncate(floor)
    P = PsiDO({0: phi}, n=X.n)
    result = X
    term = X
    j = 0
    top = X.ord_max
    while True:
        j += 1
        if top - j < floor:
            break
        term = _ad(P, term, floor).scale(GaussRat(1) / j)
        if term.is_zero() and term.wm == EXACT:
            break
        result = result + term
    return result.truncate(floor)


def _monic_top(N: PsiDO) -> int:
    if not N.is_monic():
        raise ShapeError("shape: operator must be monic (identity leading coefficient)")
    return max(N.coeffs)


def _work_depth(N: PsiDO) -> int:
    d = N.depth()
    return OrderWindow.depth if d is None else d


def gauge_normalize(N: PsiDO, g=None) -> Tuple[FourierMat, FourierMat, PsiDO]:
    """Return ``(phi, c, N0)`` with ``N = e^phi N0 e^-phi`` and constant sub-leading ``c``."""
    top = _monic_top(N)
    g = N.grade() if g is None else GaussRat.coerce(g)
    if g.is_zero():
        raise GradeError("grade-zero: gauge needs a non-zero grade")
    d = _work_depth(N)
    floor = top - d
    a1 = N.coeff(top - 1) if top - 1 >= N.wm else FourierMat.zero(N.n)
    if N.n > 1 and not a1.is_diagonal():
        raise NonAbelianGaugeError("nonabelian-gauge: sub-leading coefficient is not diagonal")
    c = a1.constant_part()
    if (a1 - c).is_zero():
        return FourierMat.zero(N.n), c, N
    g_part, _ = (a1 - c).antiderive()
    phi = g_part.scale(-g.inverse())
    if N.n > 1 and not all(m.is_diagonal() for m in N.coeffs.values()):
        raise NonAbelianGaugeError("nonabelian-gauge: coefficients do not commute with the gauge")
    N0 = exp_ad(-phi, N, floor)
    return phi, c, N0


def dress_to_constants(N: PsiDO, g=None) -> Tuple[PsiDO, PsiDO]:
    """Return ``(K, H)`` with ``N = K H K^-1``, ``K`` in ``1 + IO`` and ``H`` constant.

    ``N`` must be gauge-normalized (constant sub-leading coefficient).
    """
    top = _monic_top(N)
    g = N.grade() if g is None else GaussRat.coerce(g)
    if g.is_zero():
        raise GradeError("grade-zero: dressing needs a non-zero grade")
    n = N.n
    if N.is_constant():
        return PsiDO.identity(n), N
    d = _work_depth(N)
    ginv = g.inverse()
    K = PsiDO.identity(n)
    H = PsiDO({top: FourierMat.identity(n)}, n=n, offset=N.offset)
    for m in range(1, d + 1):
        order = top - m
        E = (compose(N, K, floor=order) - compose(K, H, floor=order)).coeff(order)
        cm = E.constant_part()
        if not cm.is_zero():
            H = H + PsiDO({order: cm}, n=n, offset=N.offset)
        rest = E - cm
        if rest.is_zero():
            continue
        if m == 1:
            raise ShapeError("shape: operator is not gauge-normalized")
        km, _ = rest.antiderive()
        K = K + PsiDO({-(m - 1): km.scale(-ginv)}, n=n)
    return K.truncate(-(d - 1)), H.truncate(top - d)


def _series_mul(a: List[FourierMat], b: List[FourierMat], d: int) -> List[FourierMat]:
    n = a[0].n
    out = [FourierMat.zero(n) for _ in range(d + 1)]
    for i, x in enumerate(a):
        if x.is_zero():
            continue
        for j, y in enumerate(b[: d + 1 - i]):
            if not y.is_zero():
                out[i + j] = out[i + j] + x * y
    return out


def const_power(H: PsiDO, r, depth: Optional[int] = None) -> PsiDO:
    """``H^r`` for monic constant-coefficient ``H`` via ``d^{g r} (1 + X)^r``."""
    if not H.is_constant():
        raise ShapeError("shape: const_power needs constant coefficients")
    top = _monic_top(H)
    r = GaussRat.coerce(r)
    n = H.n
    g = H.grade()
    gr = g * r
    frac, rtop = _canon_offset(gr)
    X_exact = H.wm == EXACT
    if depth is None:
        depth = OrderWindow.depth if X_exact else H.depth()
    x = [FourierMat.zero(n)] + [H.coeff(top - j) if top - j >= H.wm else FourierMat.zero(n) for j in range(1, depth + 1)]
    nonneg_int = r.is_integer() and r.re >= 0
    finite = X_exact and nonneg_int
    if finite:
        lower = [k for k in H.coeffs if k < top]
        span = (top - min(lower)) if lower else 0
        depth = max(depth, span * int(r.re))
        x = [FourierMat.zero(n)] + [H.coeff(top - j) for j in range(1, depth + 1)]
    total = [FourierMat.identity(n)] + [FourierMat.zero(n) for _ in range(depth)]
    power = [FourierMat.identity(n)] + [FourierMat.zero(n) for _ in range(depth)]
    binom = ONE
    k = 0
    while True:
        k += 1
        if k > depth:
            break
        binom = binom * (r - (k - 1)) / k
        if binom.is_zero():
            break
        power = _series_mul(power, x, depth)
        if all(p.is_zero() for p in power):
            break
        total = [t + p.scale(binom) for t, p in zip(total, power)]
    coeffs = {rtop - j: total[j] for j in range(depth + 1)}
    wm = EXACT if finite else rtop - depth
    return PsiDO(coeffs, n=n, wm=wm, offset=frac)


def _diag_split(M: PsiDO) -> List[PsiDO]:
    n = M.n
    parts = []
    for i in range(n):
        coeffs = {k: FourierMat([[c[i, i]]]) for k, c in M.coeffs.items()}
        parts.append(PsiDO(coeffs, n=1, wm=M.wm, offset=M.offset))
    return parts


def _diag_join(parts: List[PsiDO]) -> PsiDO:
    n = len(parts)
    wm = max(p.wm for p in parts)
    offset = parts[0].offset
    keys = set()
    for p in parts:
        keys |= set(p.coeffs)
    coeffs = {}
    for k in keys:
        if k < wm:
            continue
        coeffs[k] = FourierMat.diag([p.coeffs[k][0, 0] if k in p.coeffs else FourierPoly() for p in parts])
    return PsiDO(coeffs, n=n, wm=wm, offset=offset)


def power(M: PsiDO, r, check: bool = True) -> PsiDO:
    """``M^r`` for monic ``M`` of non-zero grade, exact above the returned watermark."""
    r = GaussRat.coerce(r)
    _monic_top(M)
    if M.grade().is_zero():
        raise GradeError("grade-zero: power needs a non-zero grade")
    if r == 1:
        return M
    if r.is_zero():
        return PsiDO.identity(M.n)
    if M.n > 1:
        if not all(c.is_diagonal() for c in M.coeffs.values()):
            raise NonAbelianGaugeError("nonabelian-gauge: matrix powers need diagonal coefficients")
        return _diag_join([power(p, r, check) for p in _diag_split(M)])
    d = _work_depth(M)
    phi, _, N0 = gauge_normalize(M)
    K, H = dress_to_constants(N0)
    if check:
        _check_dressing(N0, K, H)
    Hr = const_power(H, r, depth=d)
    if phi.is_zero() and K.wm == EXACT and K.is_constant():
        # M was already constant
        return Hr
    floor = Hr.ord_max - d
    Kinv = invert(K, depth=d)
    P = compose(compose(K, Hr, floor=floor), Kinv, floor=floor)
    return exp_ad(phi, P, floor)


def _check_dressing(N0: PsiDO, K: PsiDO, H: PsiDO):
    from .errors import VerificationError

    top = max(N0.coeffs)
    floor = top - (_work_depth(N0))
    lhs = compose(N0, K, floor=floor)
    rhs = compose(K, H, floor=floor)
    if not lhs.agrees(rhs):
        raise VerificationError("verify: dressing reconstruction failed")


def fcl_power(A: FClOp, r, check: bool = True) -> FClOp:
    return FClOp(power(A.plus, r, check), power(A.minus, r, check))


def abs_d_power(alpha: int, n: int = 1) -> FClOp:
    """``|D|^alpha`` for integer ``alpha`` in pair coordinates.

    With ``sigma(D) = xi`` the branch dictionary gives ``|D| = (-i d, i d)``.
    """
    alpha = int(alpha)
    mi = GaussRat(0, -1)
    return FClOp(PsiDO.d(alpha, n, mi ** alpha), PsiDO.d(alpha, n, GaussRat(0, 1) ** alpha))
