"""KP hierarchy solutions by graded Mulase factorization.

Time series are stored transposed: a ``TOp`` maps an exponent tuple
``(e_1, ..., e_N)`` of the monomial ``t_1^e_1 ... t_N^e_N`` to an operator
coefficient (a ``PsiDO`` or a branch pair ``FClOp``).  The valuation of a
monomial is ``sum k e_k`` and everything is truncated above a cap ``W``.

Orders are truncated too.  For a requested depth ``D`` the solution ``L``
is reported exact down to ``F = top(L0) - D``.  Working backwards through
the watermark rule, the valuation-``a`` parts of ``U`` and ``S`` are kept
down to ``F - top(L0) - (W - a)`` and ``S^-1`` down to ``F - top(L0)``;
after each stage the watermarks are checked against these floors.

An optional trailing exponent carries a formal perturbation parameter
(see ``sensitivity_expand``); it does not count towards the valuation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple, Union

from .cpow import abs_d_power, fcl_power
from .errors import GradeError, ParameterError, ShapeError, WatermarkError
from .fcl import FClOp, eps_mul, fcl_compose, fcl_split_D, fcl_split_S, res
from .psido import EXACT, OrderWindow, PsiDO, adler_trace, compose, split_D, split_S
from .scalar import FourierMat, FourierPoly, GaussRat

Op = Union[PsiDO, FClOp]
Exp = Tuple[int, ...]


# generic helpers over PsiDO / FClOp coefficients

def _cmp(a: Op, b: Op, floor=None) -> Op:
    if isinstance(a, FClOp):
        return fcl_compose(a, b, floor)
    return compose(a, b, floor)


def _D(a: Op) -> Op:
    return fcl_split_D(a) if isinstance(a, FClOp) else split_D(a)


def _S(a: Op) -> Op:
    return fcl_split_S(a) if isinstance(a, FClOp) else split_S(a)


def _trunc(a: Op, wm) -> Op:
    if isinstance(a, FClOp):
        return a.map(lambda p: p.truncate(wm))
    return a.truncate(wm)


def _wm(a: Op):
    if isinstance(a, FClOp):
        return max(a.plus.wm, a.minus.wm)
    return a.wm


def _is_exact_zero(a: Op) -> bool:
    return a.is_zero() and _wm(a) == EXACT


def _identity_like(a: Op) -> Op:
    if isinstance(a, FClOp):
        return FClOp.identity(a.n)
    return PsiDO.identity(a.n)


def _zero_like(a: Op) -> Op:
    if isinstance(a, FClOp):
        return FClOp.zero(a.n)
    return PsiDO.zero(a.n)


def _trace(a: Op) -> GaussRat:
    return res(a) if isinstance(a, FClOp) else adler_trace(a)


class TimePoly:
    """Polynomial in the times with values in an additive group (scalars or matrices)."""

    __slots__ = ("N", "W", "terms")

    def __init__(self, N: int, W: int, terms=None):
        self.N = N
        self.W = W
        self.terms = {e: v for e, v in (terms or {}).items() if not _value_zero(v)}

    def items(self):
        return sorted(self.terms.items())

    def is_zero(self) -> bool:
        return not self.terms

    def nonconstant(self) -> "TimePoly":
        return TimePoly(self.N, self.W, {e: v for e, v in self.terms.items() if any(e[: self.N])})

    def derivative(self, k: int) -> "TimePoly":
        out = {}
        for e, v in self.terms.items():
            if e[k - 1]:
                e2 = e[: k - 1] + (e[k - 1] - 1,) + e[k:]
                out[e2] = v * e[k - 1]
        return TimePoly(self.N, self.W - k, out)

    def __eq__(self, other):
        if not isinstance(other, TimePoly):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self):
        return f"TimePoly({self.items()})"


def _value_zero(v) -> bool:
    if isinstance(v, GaussRat):
        return v.is_zero()
    return v.is_zero()


class TOp:
    """Operator-valued polynomial in the times, truncated at valuation ``W``."""

    __slots__ = ("N", "W", "P", "pcap", "terms")

    def __init__(self, N: int, W: int, terms=None, P: int = 0, pcap: Optional[int] = None):
        self.N = N
        self.W = W
        self.P = P
        self.pcap = pcap
        self.terms: Dict[Exp, Op] = {}
        for e, a in (terms or {}).items():
            e = tuple(e)
            if len(e) != N + P:
                raise ShapeError(f"shape: exponent {e} does not have {N + P} entries")
            if self.val(e) <= W and self._pok(e) and not _is_exact_zero(a):
                self.terms[e] = a

    def _like(self, terms, W=None) -> "TOp":
        t = TOp.__new__(TOp)
        t.N, t.W, t.P, t.pcap = self.N, self.W if W is None else W, self.P, self.pcap
        t.terms = {e: a for e, a in terms.items() if not _is_exact_zero(a)}
        return t

    @classmethod
    def constant(cls, a: Op, N: int, W: int, P: int = 0, pcap=None) -> "TOp":
        return cls(N, W, {(0,) * (N + P): a}, P, pcap)

    def val(self, e: Exp) -> int:
        return sum((k + 1) * x for k, x in enumerate(e[: self.N]))

    def pdeg(self, e: Exp) -> int:
        return e[self.N] if self.P else 0

    def _pok(self, e: Exp) -> bool:
        return self.pcap is None or self.pdeg(e) <= self.pcap

    def zero_exp(self) -> Exp:
        return (0,) * (self.N + self.P)

    def unit(self, k: int) -> Exp:
        e = [0] * (self.N + self.P)
        e[k - 1] = 1
        return tuple(e)

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: (self.val(kv[0]), kv[0]))

    def at(self, e: Exp) -> Optional[Op]:
        return self.terms.get(tuple(e))

    def at_zero(self) -> Optional[Op]:
        return self.terms.get(self.zero_exp())

    def by_valuation(self) -> Dict[int, List[Tuple[Exp, Op]]]:
        out: Dict[int, List[Tuple[Exp, Op]]] = {}
        for e, a in self.items():
            out.setdefault(self.val(e), []).append((e, a))
        return out

    def restrict(self, W: int) -> "TOp":
        return self._like({e: a for e, a in self.terms.items() if self.val(e) <= W}, W=min(W, self.W))

    def map(self, fn) -> "TOp":
        return self._like({e: fn(a) for e, a in self.terms.items()})

    def map_items(self, fn) -> "TOp":
        return self._like({e: fn(e, a) for e, a in self.terms.items()})

    def scale(self, c) -> "TOp":
        return self.map(lambda a: a.scale(c))

    def __add__(self, other: "TOp") -> "TOp":
        out = dict(self.terms)
        for e, b in other.terms.items():
            out[e] = out[e] + b if e in out else b
        return self._like(out, W=min(self.W, other.W))

    def __neg__(self):
        return self.map(lambda a: -a)

    def __sub__(self, other: "TOp") -> "TOp":
        return self + (-other)

    def mul(self, other: "TOp", floor: Callable[[int], Optional[int]] = lambda v: None, W=None,
            min_right_val: int = 0) -> "TOp":
        """Truncated product; ``floor(v)`` gives the order floor for output valuation ``v``."""
        W = min(self.W, other.W) if W is None else W
        out: Dict[Exp, Op] = {}
        right = [(e, other.val(e), b) for e, b in other.terms.items() if other.val(e) >= min_right_val]
        for ea, a in self.terms.items():
            va = self.val(ea)
            for eb, vb, b in right:
                v = va + vb
                if v > W:
                    continue
                e = tuple(x + y for x, y in zip(ea, eb))
                if not self._pok(e):
                    continue
                p = _cmp(a, b, floor(v))
                out[e] = out[e] + p if e in out else p
        return self._like(out, W=W)

    def derivative(self, k: int) -> "TOp":
        """``d/dt_k``; the result is valid up to valuation ``W - k``."""
        out = {}
        for e, a in self.terms.items():
            if e[k - 1]:
                e2 = e[: k - 1] + (e[k - 1] - 1,) + e[k:]
                out[e2] = a.scale(e[k - 1])
        return self._like(out, W=self.W - k)

    def truncate(self, wm) -> "TOp":
        return self.map(lambda a: _trunc(a, wm))

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self.terms.values())

    def agrees(self, other: "TOp", W: Optional[int] = None) -> bool:
        W = min(self.W, other.W) if W is None else W
        return (self - other).restrict(W).is_zero()

    def min_wm(self):
        return max((_wm(a) for a in self.terms.values()), default=EXACT)

    def is_admissible(self) -> bool:
        """Every positive order ``k`` coefficient sits on monomials of valuation ``>= k``."""
        for e, a in self.terms.items():
            v = self.val(e)
            for br in (a.plus, a.minus) if isinstance(a, FClOp) else (a,):
                if not br.offset.is_zero():
                    return False
                if any(k > v for k in br.coeffs):
                    return False
        return True

    def __eq__(self, other):
        if not isinstance(other, TOp):
            return NotImplemented
        return (self.N, self.W, self.P, self.pcap, self.terms) == (other.N, other.W, other.P, other.pcap, other.terms)

    __hash__ = None

    def __repr__(self):
        return f"TOp(N={self.N}, W={self.W}, terms={len(self.terms)})"


def _power_series_inverse(S: TOp, floor) -> TOp:
    """``S^-1`` for ``S`` with valuation-0 part equal to one."""
    one = _identity_like(S.at_zero())
    X = S - TOp.constant(one, S.N, S.W, S.P, S.pcap)
    result = TOp.constant(one, S.N, S.W, S.P, S.pcap)
    term = result
    for _ in range(S.W):
        term = -term.mul(X, floor)
        if not term.terms:
            break
        result = result + term
    return result


def time_independent(L0: Op, N: int, W: int, V: Optional[Op] = None, pcap: Optional[int] = None) -> TOp:
    """Initial value as a ``TOp``; ``V`` adds the linear perturbation ``eps V``."""
    if V is None:
        return TOp.constant(L0, N, W)
    z = (0,) * N
    return TOp(N, W, {z + (0,): L0, z + (1,): V}, P=1, pcap=pcap)


def _check_floor(T: TOp, floor, what: str):
    for e, a in T.terms.items():
        f = floor(T.val(e))
        if f is not None and _wm(a) != EXACT and _wm(a) > f:
            raise WatermarkError(
                f"watermark: {what} at monomial {e} is exact only from order {_wm(a)}, need {f};"
                " increase the depth of the initial value"
            )


def dressing_exp(L0, N: int, W: int, floor: Callable[[int], Optional[int]] = lambda v: None) -> TOp:
    """``U = exp(sum_k t_k L0^k)`` truncated at valuation ``W``.

    ``L0`` may be an operator or a time-independent ``TOp`` (perturbed data).
    """
    L0t = L0 if isinstance(L0, TOp) else TOp.constant(L0, N, W)
    top = _top_index(L0t.at_zero())
    if top != 1:
        raise ShapeError("shape: dressing needs an initial value of order one")
    # X = sum_k t_k L0^k; the t_k factor lifts valuation by k
    X = TOp(N, W, {}, L0t.P, L0t.pcap)
    Lk = L0t
    for k in range(1, min(N, W) + 1):
        if k > 1:
            Lk = Lk.mul(L0t, lambda v, k=k: floor(k))
        shifted = {}
        for e, a in Lk.terms.items():
            e2 = list(e)
            e2[k - 1] += 1
            shifted[tuple(e2)] = a
        X = X + X._like(shifted)
    one = _identity_like(L0t.at_zero())
    U = TOp.constant(one, N, W, L0t.P, L0t.pcap)
    term = U
    for j in range(1, W + 1):
        term = term.mul(X, floor).scale(GaussRat(1) / j)
        if not term.terms:
            break
        U = U + term
    return U


def _top_index(a: Op) -> int:
    if isinstance(a, FClOp):
        tp, tm = a.plus.ord_max, a.minus.ord_max
        if tp != tm:
            raise ShapeError("shape: branches have different orders")
        return tp
    return a.ord_max


def mulase_factorize(U: TOp, floor: Callable[[int], Optional[int]] = lambda v: None) -> Tuple[TOp, TOp]:
    """Split ``U = S^-1 Y`` with ``S`` in ``1 + IO[[T]]`` and ``Y`` differential.

    Grade by grade: ``K_w = sum_{j>=1} S_{w-j} U_j``, ``S_w = -(K_w)_S``,
    ``Y_w = (K_w)_D``.
    """
    U0 = U.at_zero()
    if U0 is None or not (U0 - _identity_like(U0)).is_zero() or _wm(U0) > 0:
        raise GradeError("grade0: valuation-0 part of U must be the identity")
    one = _identity_like(U0)
    S = TOp.constant(one, U.N, U.W, U.P, U.pcap)
    Y = TOp.constant(one, U.N, U.W, U.P, U.pcap)
    byval = U.by_valuation()
    for w in range(1, U.W + 1):
        K: Dict[Exp, Op] = {}
        Sv = S.by_valuation()
        for j in range(1, w + 1):
            for eu, u in byval.get(j, []):
                for es, s in Sv.get(w - j, []):
                    e = tuple(x + y for x, y in zip(es, eu))
                    if not U._pok(e):
                        continue
                    p = _cmp(s, u, floor(w))
                    K[e] = K[e] + p if e in K else p
        S = S + S._like({e: -_S(k) for e, k in K.items()})
        Y = Y + Y._like({e: _D(k) for e, k in K.items()})
    return S, Y


@dataclass
class KPSolution:
    L0: Op
    L: TOp
    S: TOp
    Y: TOp
    U: TOp
    Sinv: TOp
    N: int
    W: int
    depth: int
    floor: int
    variant: str = "standard"
    params: dict = field(default_factory=dict)
    root: Optional[Op] = None
    L0_series: Optional[TOp] = None

    @property
    def L_full(self) -> TOp:
        return self.L


def _floors(t: int, F: int, W: int):
    fS = lambda v: F - t - (W - v)
    fSinv = lambda v: F - t
    fL = lambda v: F
    return fS, fSinv, fL


def _dress(L0, N: int, W: int, depth: int, driver=None, L0_series: Optional[TOp] = None):
    """Common core: ``U`` from ``driver`` (default ``L0``), factorize, ``L = S L0 S^-1``."""
    L0t = L0_series if L0_series is not None else TOp.constant(L0, N, W)
    base = L0t.at_zero()
    t = _top_index(base)
    F = t - depth
    fS, fSinv, fL = _floors(t, F, W)
    drv = L0t if driver is None else (driver if isinstance(driver, TOp) else TOp.constant(driver, N, W))
    U = dressing_exp(drv, N, W, fS)
    _check_floor(U, fS, "U")
    S, Y = mulase_factorize(U, fS)
    _check_floor(S, fS, "S")
    Sinv = _power_series_inverse(S, fSinv)
    _check_floor(Sinv, fSinv, "S^-1")
    T = L0t.mul(Sinv, fL)
    L = S.mul(T, fL)
    _check_floor(L, fL, "L")
    return L.truncate(F), S, Y, U, Sinv, F


def _check_standard_shape(L0: Op):
    branches = (L0.plus, L0.minus) if isinstance(L0, FClOp) else (L0,)
    for b in branches:
        if not b.offset.is_zero():
            raise ShapeError("shape: initial value must have integer orders")
        Dp = split_D(b)
        if not (Dp - PsiDO.d(1, b.n)).is_zero() or Dp.wm != EXACT:
            raise ShapeError("shape: initial value must be d + (orders <= -1)")


def kp_solve(L0: Op, N: int, W: int, depth: Optional[int] = None) -> KPSolution:
    """Solve ``dL/dt_k = [(L^k)_D, L]``, ``L(0) = L0``, for ``L0`` in ``d + IO``."""
    if W < 1 or N < 1:
        raise ParameterError("param: need N >= 1 and W >= 1")
    depth = OrderWindow.depth if depth is None else depth
    _check_standard_shape(L0)
    L, S, Y, U, Sinv, F = _dress(L0, N, W, depth)
    return KPSolution(L0, L, S, Y, U, Sinv, N, W, depth, F)


def _branch_scale(T: TOp, lam: GaussRat, mu: GaussRat, extra: int) -> TOp:
    """Multiply the valuation-``v`` coefficient by ``lam^(v+extra)`` (plus) and ``mu^(v+extra)`` (minus)."""
    def f(e, a):
        v = T.val(e) + extra
        return FClOp(a.plus.scale(lam ** v), a.minus.scale(mu ** v))
    return T.map_items(f)


def kp_solve_scaled(L0: FClOp, lam, mu, N: int, W: int, depth: Optional[int] = None) -> KPSolution:
    """Initial value with principal part ``(lam d, mu d)``: solve the rescaled problem and undo the scaling."""
    lam = GaussRat.coerce(lam)
    mu = GaussRat.coerce(mu)
    if lam.is_zero() or mu.is_zero():
        raise ParameterError("param: lambda and mu must be non-zero")
    if not isinstance(L0, FClOp):
        raise ShapeError("shape: scaled solver expects a branch pair")
    depth = OrderWindow.depth if depth is None else depth
    tilde = FClOp(L0.plus.scale(lam.inverse()), L0.minus.scale(mu.inverse()))
    base = kp_solve(tilde, N, W, depth)
    L = _branch_scale(base.L, lam, mu, 1)
    S = _branch_scale(base.S, lam, mu, 0)
    Y = _branch_scale(base.Y, lam, mu, 0)
    U = _branch_scale(base.U, lam, mu, 0)
    Sinv = _branch_scale(base.Sinv, lam, mu, 0)
    return KPSolution(L0, L, S, Y, U, Sinv, N, W, depth, base.floor, "scaled",
                      {"lambda": lam, "mu": mu, "tilde": base})


def _principal_scalar(P: PsiDO) -> GaussRat:
    c = P.coeff(1)
    lam = c[0, 0].mean()
    if not (c - FourierMat.scalar(FourierPoly.const(lam), P.n)).is_zero():
        raise ShapeError("shape: principal part must be a constant multiple of d")
    return lam


def kp_solve_twisted(L0: FClOp, N: int, W: int, depth: Optional[int] = None) -> KPSolution:
    """``dL/dt_k = eps^k [(L^k)_D, L]`` via ``L = eps * (standard solution for eps L0)``."""
    if not isinstance(L0, FClOp):
        raise ShapeError("shape: twisted solver expects a branch pair")
    lam = _principal_scalar(L0.plus)
    mu = _principal_scalar(L0.minus)
    depth = OrderWindow.depth if depth is None else depth
    inner = kp_solve_scaled(eps_mul(L0), lam, -mu, N, W, depth)
    L = inner.L.map(eps_mul)
    return KPSolution(L0, L, inner.S, inner.Y, inner.U, inner.Sinv, N, W, depth, inner.floor, "twisted",
                      {"lambda": lam, "mu": mu, "inner": inner})


def complex_root(L0: FClOp, alpha, form: str = "d") -> FClOp:
    """Grade-one root ``L0^(1/alpha)`` used to drive the complex-order hierarchy.

    ``form='d'``: ``L0`` is monic on both branches.  ``form='absD'``: the
    leading part is ``|D|^alpha`` for integer ``alpha``; the root then has
    leading part ``|D| = (-i d, i d)``.
    """
    alpha = GaussRat.coerce(alpha)
    if alpha.is_zero():
        raise GradeError("grade: alpha must be non-zero")
    if alpha == 1 and form == "d":
        return L0
    inv = alpha.inverse()
    if form == "d":
        return fcl_power(L0, inv)
    if form == "absD":
        if not alpha.is_integer():
            raise ParameterError("param: |D|^alpha form needs integer alpha")
        a = int(alpha.re)
        lead = abs_d_power(a, L0.n)
        cp = lead.plus.coeffs[a].mean()[0][0]
        cm = lead.minus.coeffs[a].mean()[0][0]
        monic = FClOp(L0.plus.scale(cp.inverse()), L0.minus.scale(cm.inverse()))
        R = fcl_power(monic, inv)
        return FClOp(R.plus.scale(GaussRat(0, -1)), R.minus.scale(GaussRat(0, 1)))
    raise ParameterError(f"param: unknown form {form!r}")


def kp_solve_complex(L0: FClOp, alpha, N: int, W: int, depth: Optional[int] = None, form: str = "d") -> KPSolution:
    """Complex-order hierarchy ``dL/dt_k = [(L^{k/alpha})_D, L]``."""
    alpha = GaussRat.coerce(alpha)
    if alpha.is_zero():
        raise GradeError("grade: alpha must be non-zero")
    if not isinstance(L0, FClOp):
        raise ShapeError("shape: complex solver expects a branch pair")
    if L0.plus.grade() != alpha or L0.minus.grade() != alpha:
        raise ShapeError(f"shape: initial value must have grade {alpha}")
    depth = OrderWindow.depth if depth is None else depth
    if alpha == 1 and form == "d":
        _check_standard_shape(L0)
        L, S, Y, U, Sinv, F = _dress(L0, N, W, depth)
        return KPSolution(L0, L, S, Y, U, Sinv, N, W, depth, F, "complex", {"alpha": alpha, "form": form}, root=L0)
    with OrderWindow(W + depth + 2):
        R = complex_root(L0, alpha, form)
    L, S, Y, U, Sinv, F = _dress(L0, N, W, depth, driver=R)
    return KPSolution(L0, L, S, Y, U, Sinv, N, W, depth, F, "complex", {"alpha": alpha, "form": form}, root=R)


def flow_generator(sol: KPSolution, k: int) -> TOp:
    """``(L^k)_D`` (or ``(L^{k/alpha})_D`` for the complex variant), exact."""
    W = sol.W - k
    if sol.variant == "complex":
        R = sol.root
        Rk = R
        for _ in range(k - 1):
            # each factor can lift the watermark by one, so start k below zero
            Rk = _cmp(Rk, R, -k)
        Rk_t = TOp.constant(Rk, sol.N, sol.W, sol.S.P, sol.S.pcap)
        P = sol.S.mul(Rk_t.mul(sol.Sinv, lambda v: 0, W=W), lambda v: 0, W=W)
    else:
        P = sol.L
        for _ in range(k - 1):
            P = P.mul(sol.L, W=W)
    B = P.map(_D)
    for e, a in B.terms.items():
        if _wm(a) != EXACT:
            raise WatermarkError(f"watermark: flow generator for k={k} is not exact; increase depth")
    return B


def _eps_power(T: TOp, k: int) -> TOp:
    return T.map(eps_mul) if k % 2 else T


def flow_rhs(sol: KPSolution, k: int) -> TOp:
    """Right-hand side of the ``t_k`` flow for the solution's variant."""
    W = sol.W - k
    B = flow_generator(sol, k)
    L = sol.L.restrict(W)
    rhs = B.mul(L, W=W) - L.mul(B, W=W)
    if sol.variant == "twisted":
        rhs = _eps_power(rhs, k)
    return rhs


def lax_defect(sol: KPSolution, k: int) -> TOp:
    """``dL/dt_k - rhs_k`` up to valuation ``W - k``."""
    if k < 1 or k > sol.N:
        raise ParameterError(f"param: flow index must be in 1..{sol.N}")
    return sol.L.derivative(k).restrict(sol.W - k) - flow_rhs(sol, k)


def _trace_poly(sol: KPSolution, m: int) -> TimePoly:
    if sol.variant == "complex":
        R = sol.root
        Rm = R
        for _ in range(m - 1):
            Rm = _cmp(Rm, R, -1 - m)
        P = sol.S.mul(TOp.constant(Rm, sol.N, sol.W, sol.S.P, sol.S.pcap).mul(sol.Sinv, lambda v: -1), lambda v: -1)
    else:
        P = sol.L
        for _ in range(m - 1):
            P = P.mul(sol.L)
    return TimePoly(sol.N, sol.W, {e: _trace(a) for e, a in P.terms.items()})


def conserved_quantity(sol: KPSolution, m: int) -> TimePoly:
    """Trace (Adler trace or residue) of ``L^m`` (``L^{m/alpha}`` for complex) as a time series."""
    return _trace_poly(sol, m)


def conservation_defect(sol: KPSolution, m: int) -> TimePoly:
    """Time-dependent part of the conserved quantity; identically zero for a true solution."""
    if m < 1 or m > sol.N:
        raise ParameterError(f"param: m must be in 1..{sol.N}")
    return _trace_poly(sol, m).nonconstant()


def factorization_residual(sol: KPSolution) -> TOp:
    """``S U - Y``."""
    t = _top_index(sol.L0)
    fS = lambda v: sol.floor - t - (sol.W - v)
    return sol.S.mul(sol.U, fS) - sol.Y


def double_dressing_residual(sol: KPSolution) -> TOp:
    """``S L0 S^-1 - Y L0 Y^-1`` above the watermark."""
    Y = sol.Y
    one = _identity_like(Y.at_zero())
    X = Y - TOp.constant(one, Y.N, Y.W, Y.P, Y.pcap)
    Yinv = TOp.constant(one, Y.N, Y.W, Y.P, Y.pcap)
    term = Yinv
    for _ in range(Y.W):
        term = -term.mul(X)
        if not term.terms:
            break
        Yinv = Yinv + term
    L0t = sol.L0_series if sol.L0_series is not None else TOp.constant(sol.L0, Y.N, Y.W, Y.P, Y.pcap)
    floor = sol.floor
    YL = Y.mul(L0t, lambda v: floor - Y.W)
    rhs = YL.mul(Yinv, lambda v: floor)
    return sol.L - rhs


def sensitivity_expand(L0: Op, V: Op, p: int, N: int, W: int, depth: Optional[int] = None) -> List[TOp]:
    """Solution for ``L0 + eps V`` as exact polynomials in ``eps``: returns the ``eps^j`` slices, ``j = 0..p``.

    Coefficients of degree above ``p`` are discarded, so ``p`` should be at
    least the degree bound to get the full polynomial.
    """
    depth = OrderWindow.depth if depth is None else depth
    _check_standard_shape(L0)
    for b in (V.plus, V.minus) if isinstance(V, FClOp) else (V,):
        if b.ord_max != EXACT and b.ord_max > -1:
            raise ShapeError("shape: perturbation direction must be of order <= -1")
    L0t = time_independent(L0, N, W, V, pcap=p)
    L, S, Y, U, Sinv, F = _dress(L0, N, W, depth, L0_series=L0t)
    slices = []
    for j in range(p + 1):
        terms = {e[:N]: a for e, a in L.terms.items() if e[N] == j}
        slices.append(TOp(N, W, terms))
    return slices


def evaluate_parameter(slices: List[TOp], eps) -> TOp:
    """``sum_j eps^j slices[j]``."""
    eps = GaussRat.coerce(eps)
    out = slices[0]
    for j, s in enumerate(slices[1:], start=1):
        out = out + s.scale(eps ** j)
    return out
