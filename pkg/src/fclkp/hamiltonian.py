"""Variational calculus and the Adler-Gelfand-Dickey structures.

Points of the phase space are monic operators
``L = d^k + u_1 d^{k-1} + ... + u_k`` with ``n x n`` matrix coefficients.
Functionals are densities given by differential polynomials in the entries
``(u_j^{(s)})_{pq}``; their gradients are covectors
``X = sum_r d^{-r} o p_r``, paired with tangent vectors ``V`` by the Adler
trace ``Tr(X V)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .cpow import fcl_power
from .errors import DimensionError, ShapeError, WatermarkError
from .fcl import FClOp, fcl_compose, fcl_split_D
from .psido import EXACT, PsiDO, adler_trace, bracket, compose, split_D, split_S
from .scalar import FourierMat, FourierPoly, GaussRat

Var = Tuple[int, int, int, int]  # (j, s, p, q): entry (p, q) of the s-th derivative of u_j
Mono = Tuple[Tuple[Var, int], ...]


def _mono_mul(a: Mono, b: Mono) -> Mono:
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


class DiffPoly:
    """Polynomial in the jet variables with trigonometric-polynomial coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[Mono, FourierPoly]] = None):
        self.terms = {}
        for m, c in (terms or {}).items():
            c = c if isinstance(c, FourierPoly) else FourierPoly.const(c)
            if not c.is_zero():
                self.terms[m] = c

    @classmethod
    def const(cls, c) -> "DiffPoly":
        return cls({(): c})

    @classmethod
    def var(cls, j: int, s: int = 0, p: int = 0, q: int = 0) -> "DiffPoly":
        return cls({(((j, s, p, q), 1),): FourierPoly.const(1)})

    @classmethod
    def matrix_var(cls, j: int, n: int, s: int = 0) -> List[List["DiffPoly"]]:
        return [[cls.var(j, s, p, q) for q in range(n)] for p in range(n)]

    def variables(self):
        out = set()
        for m in self.terms:
            out.update(v for v, _ in m)
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        if not isinstance(other, DiffPoly):
            other = DiffPoly.const(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return DiffPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, DiffPoly):
            other = DiffPoly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, DiffPoly):
            if isinstance(other, FourierPoly):
                other = DiffPoly.const(other)
            else:
                return DiffPoly({m: c.scale(other) for m, c in self.terms.items()})
        out: Dict[Mono, FourierPoly] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                c = c1 * c2
                out[m] = out[m] + c if m in out else c
        return DiffPoly(out)

    __rmul__ = __mul__

    def partial(self, v: Var) -> "DiffPoly":
        out: Dict[Mono, FourierPoly] = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.get(v)
            if not e:
                continue
            if e == 1:
                del d[v]
            else:
                d[v] = e - 1
            key = tuple(sorted(d.items()))
            t = c.scale(e)
            out[key] = out[key] + t if key in out else t
        return DiffPoly(out)

    def total_derivative(self) -> "DiffPoly":
        """``d/dx`` acting on both the explicit coefficients and the jet variables."""
        out = DiffPoly({m: c.derive() for m, c in self.terms.items()})
        for v in self.variables():
            j, s, p, q = v
            out = out + self.partial(v) * DiffPoly.var(j, s + 1, p, q)
        return out

    def evaluate(self, point: "LaxPoint") -> FourierPoly:
        cache: Dict[Tuple[int, int], FourierMat] = {}

        def jet(j, s):
            key = (j, s)
            if key not in cache:
                cache[key] = point.u[j - 1] if s == 0 else jet(j, s - 1).derive()
            return cache[key]

        acc = FourierPoly()
        for m, c in self.terms.items():
            t = c
            for (j, s, p, q), e in m:
                x = jet(j, s)[p, q]
                for _ in range(e):
                    t = t * x
            acc = acc + t
        return acc

    def integral(self, point: "LaxPoint") -> GaussRat:
        return self.evaluate(point).mean()

    def __eq__(self, other):
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self):
        return f"DiffPoly({len(self.terms)} terms)"


def mat_trace_dp(M: Sequence[Sequence[DiffPoly]]) -> DiffPoly:
    acc = DiffPoly()
    for i in range(len(M)):
        acc = acc + M[i][i]
    return acc


def mat_mul_dp(A, B):
    n = len(A)
    return [[sum((A[i][r] * B[r][j] for r in range(n)), DiffPoly()) for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class LaxPoint:
    """``L = d^k + u_1 d^{k-1} + ... + u_k``."""

    k: int
    u: Tuple[FourierMat, ...]

    def __post_init__(self):
        if len(self.u) != self.k:
            raise ShapeError(f"shape: expected {self.k} coefficients, got {len(self.u)}")
        if len({m.n for m in self.u}) > 1:
            raise DimensionError("dim: coefficients differ in size")

    @property
    def n(self) -> int:
        return self.u[0].n if self.u else 1

    def to_psido(self) -> PsiDO:
        coeffs = {self.k: FourierMat.identity(self.n)}
        for j, c in enumerate(self.u, start=1):
            coeffs[self.k - j] = c
        return PsiDO(coeffs, n=self.n)


@dataclass(frozen=True)
class Covector:
    """``X = sum_{r=1..k} d^{-r} o p_r``, a representative of ``IO / IO_{-k}``."""

    p: Tuple[FourierMat, ...]

    @property
    def k(self) -> int:
        return len(self.p)

    @property
    def n(self) -> int:
        return self.p[0].n

    def to_psido(self, floor: int) -> PsiDO:
        X = PsiDO.zero(self.n)
        for r, pr in enumerate(self.p, start=1):
            X = X + compose(PsiDO.d(-r, self.n), PsiDO({0: pr}, n=self.n), floor=floor)
        return X.truncate(floor)

    def scale(self, c) -> "Covector":
        return Covector(tuple(m.scale(c) for m in self.p))

    def __add__(self, other: "Covector") -> "Covector":
        return Covector(tuple(a + b for a, b in zip(self.p, other.p)))

    def __sub__(self, other: "Covector") -> "Covector":
        return Covector(tuple(a - b for a, b in zip(self.p, other.p)))

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.p)

    @classmethod
    def from_psido(cls, A: PsiDO, k: int) -> "Covector":
        """Reduce the integral part of ``A`` modulo ``IO_{-k}`` to covector form."""
        if A.wm != EXACT and A.wm > -k:
            raise WatermarkError(f"watermark: need orders down to {-k}, have {A.wm}")
        n = A.n
        rest = split_S(A).truncate(-k)
        ps = []
        for r in range(1, k + 1):
            pr = rest.coeff(-r)
            ps.append(pr)
            rest = rest - compose(PsiDO.d(-r, n), PsiDO({0: pr}, n=n), floor=-k)
        return cls(tuple(ps))


def variational_derivative(l: DiffPoly, j: int, n: int = 1) -> List[List[DiffPoly]]:
    """``delta l / delta u_j`` as an ``n x n`` array: entry ``(p, q)`` is
    ``sum_s (-d/dx)^s (d l / d (u_j^{(s)})_{pq})``."""
    out = [[DiffPoly() for _ in range(n)] for _ in range(n)]
    smax = max((s for (jj, s, _, _) in l.variables() if jj == j), default=-1)
    for p in range(n):
        for q in range(n):
            acc = DiffPoly()
            for s in range(smax + 1):
                t = l.partial((j, s, p, q))
                for _ in range(s):
                    t = -t.total_derivative()
                acc = acc + t
            out[p][q] = acc
    return out


def functional_to_covector(l: DiffPoly, L: LaxPoint) -> Covector:
    """Gradient covector: ``p_r`` is the transpose of ``delta l / delta u_{k+1-r}`` at ``L``.

    The transpose makes ``Tr(X V) = sum_j integral sum_pq (delta l/delta u_j)_pq (v_j)_pq``.
    """
    n, k = L.n, L.k
    ps = []
    for r in range(1, k + 1):
        grad = variational_derivative(l, k + 1 - r, n)
        ps.append(FourierMat([[grad[q][p].evaluate(L) for q in range(n)] for p in range(n)]))
    return Covector(tuple(ps))


def _parts(L: LaxPoint, X: Covector):
    k = L.k
    Lp = L.to_psido()
    Xp = X.to_psido(floor=-k - 1)
    return Lp, Xp


def h1(L: LaxPoint, X: Covector) -> PsiDO:
    """``[L, X]_+``."""
    Lp, Xp = _parts(L, X)
    return split_D(bracket(Lp, Xp))


def h2(L: LaxPoint, X: Covector) -> PsiDO:
    """``(LX)_+ L - L (XL)_+``."""
    Lp, Xp = _parts(L, X)
    return compose(split_D(compose(Lp, Xp)), Lp) - compose(Lp, split_D(compose(Xp, Lp)))


def h_lambda(L: LaxPoint, X: Covector, lam) -> PsiDO:
    return h2(L, X) + h1(L, X).scale(lam)


def pairing(V: PsiDO, X: Covector) -> GaussRat:
    """``Tr(V X)`` for a differential operator ``V`` and covector ``X``."""
    top = V.ord_max
    if top == EXACT:
        return GaussRat(0)
    return adler_trace(compose(V, X.to_psido(floor=-top - 1), floor=-1))


def gd_bracket(l1: DiffPoly, l2: DiffPoly, lam, L: LaxPoint) -> GaussRat:
    """``{l1, l2}_lam (L) = Tr(H_lam(X_1) X_2)``."""
    X1 = functional_to_covector(l1, L)
    X2 = functional_to_covector(l2, L)
    return pairing(h_lambda(L, X1, lam), X2)


def gd_bracket_expanded(l1: DiffPoly, l2: DiffPoly, lam, L: LaxPoint) -> GaussRat:
    """The expanded residue formula
    ``Tr(L (X1 L)_+ X2 - (L X1)_+ L X2) + lam Tr([L, X1]_+ X2)``.

    Its first part carries the opposite sign to ``Tr(H_2(X1) X2)``; by
    antisymmetry it equals ``gd_bracket(l2, l1, -lam, L)``.
    """
    X1 = functional_to_covector(l1, L)
    X2 = functional_to_covector(l2, L)
    k = L.k
    Lp = L.to_psido()
    Xa = X1.to_psido(floor=-k - 1)
    Xb = X2.to_psido(floor=-2 * k - 1)
    A = compose(compose(Lp, split_D(compose(Xa, Lp))), Xb, floor=-1)
    B = compose(compose(split_D(compose(Lp, Xa)), Lp), Xb, floor=-1)
    C = compose(split_D(bracket(Lp, Xa)), Xb, floor=-1)
    lam = GaussRat.coerce(lam)
    return adler_trace(A) - adler_trace(B) + lam * adler_trace(C)


def gd2_covector_bracket(X: Covector, Y: Covector, L: LaxPoint) -> Covector:
    """``[(XL)_+ Y + (YL)_- X - X(LY)_- - Y(LX)_+ + H_2(X) Y - H_2(Y) X]_-`` modulo ``IO_{-k}``."""
    k = L.k
    floor = -3 * k - 2
    Lp = L.to_psido()
    Xp = X.to_psido(floor)
    Yp = Y.to_psido(floor)
    XL, YL = compose(Xp, Lp), compose(Yp, Lp)
    LX, LY = compose(Lp, Xp), compose(Lp, Yp)
    expr = (
        compose(split_D(XL), Yp)
        + compose(split_S(YL), Xp)
        - compose(Xp, split_S(LY))
        - compose(Yp, split_D(LX))
        + compose(h2(L, X), Yp)
        - compose(h2(L, Y), Xp)
    )
    return Covector.from_psido(expr, k)


def _power_op(L, k: int):
    P = L
    for _ in range(k - 1):
        P = fcl_compose(P, L) if isinstance(L, FClOp) else compose(P, L)
    return P


def casimir_flow(L, k: int):
    """``[(L^k)_D, L]`` for a ``PsiDO``, an ``FClOp`` or a time series ``TOp``."""
    from .kp import TOp, _D

    if isinstance(L, TOp):
        P = L
        for _ in range(k - 1):
            P = P.mul(L)
        B = P.map(_D)
        return B.mul(L) - L.mul(B)
    P = _power_op(L, k)
    if isinstance(L, FClOp):
        B = fcl_split_D(P)
        return fcl_compose(B, L) - fcl_compose(L, B)
    B = split_D(P)
    if B.wm != EXACT:
        raise WatermarkError("watermark: differential part of L^k is not exact")
    return bracket(B, L)


def casimir_gradient(L, k: int):
    """Gradient ``((k+1)/k) L^k`` of ``H_k(L) = (1/k) Tr(L^{k+1})``."""
    return _power_op(L, k).scale(GaussRat(k + 1) / k)


def casimir_value(L, k: int) -> GaussRat:
    """``H_k(L) = (1/k) Tr(L^{k+1})`` (residue on branch pairs)."""
    from .fcl import res

    P = _power_op(L, k + 1)
    t = res(P) if isinstance(P, FClOp) else adler_trace(P)
    return t / k


def hamiltonian_flow(L, k: int):
    """``[(grad H_k)_+, L] = ((k+1)/k) [(L^k)_D, L]``."""
    G = casimir_gradient(L, k)
    if isinstance(L, FClOp):
        B = fcl_split_D(G)
        return fcl_compose(B, L) - fcl_compose(L, B)
    return bracket(split_D(G), L)


def complex_ham_field(L: FClOp, k: int, alpha=None) -> FClOp:
    """``[(L^{k/alpha})_D, L]`` for a monic grade-``alpha`` branch pair."""
    alpha = L.plus.grade() if alpha is None else GaussRat.coerce(alpha)
    if alpha.is_zero():
        raise ShapeError("shape: alpha must be non-zero")
    P = fcl_power(L, GaussRat(k) / alpha)
    B = fcl_split_D(P)
    for br in (B.plus, B.minus):
        if br.wm != EXACT:
            raise WatermarkError("watermark: differential part of the power is not exact")
    return fcl_compose(B, L) - fcl_compose(L, B)
