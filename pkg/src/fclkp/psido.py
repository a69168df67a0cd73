"""Truncated formal pseudo-differential operators ``sum_k a_k d^k``.

Operators are written in Wick order, coefficients on the left, and are
composed with the generalized Leibniz rule

    d^b o f = sum_{a >= 0} C(b, a) f^{(a)} d^{b - a},

where ``C(b, a)`` is the falling factorial of ``b`` over ``a!``.  The same
kernel serves complex-grade operators: an operator carries an ``offset``
(a Gaussian rational with real part in ``[0, 1)``) and its integer
``index`` keys stand for the orders ``offset + index``.  Ordinary operators
have offset zero.

Lower tails are infinite in general, so every value carries a watermark:
all orders ``>= wm`` are exact, lower orders are unknown and not stored.
``EXACT`` (``-inf``) marks an operator whose stored coefficients are the
complete answer.
"""

from __future__ import annotations

import math
from typing import Dict, Iterable, Optional, Tuple

from .errors import DimensionError, NotInvertibleError, OrderError, WatermarkError
from .scalar import ONE, ZERO, FourierMat, GaussRat

EXACT = -math.inf


class OrderWindow:
    """Global default for how many orders below the top are retained.

    Used only when an operation would otherwise produce an infinite exact
    tail (e.g. ``d^{-1} o u``).  ``with OrderWindow(10): ...`` changes it
    temporarily.
    """

    depth = 8

    def __init__(self, depth: int):
        if depth < 1:
            raise ValueError("depth must be >= 1")
        self._new = depth
        self._old = None

    def __enter__(self):
        self._old = OrderWindow.depth
        OrderWindow.depth = self._new
        return self

    def __exit__(self, *exc):
        OrderWindow.depth = self._old
        return False


def _canon_offset(off: GaussRat) -> Tuple[GaussRat, int]:
    """Split ``off`` into ``(frac, k)`` with ``off = frac + k``, ``0 <= Re frac < 1``."""
    k = int(math.floor(off.re))
    return GaussRat._raw(off.re - k, off.im), k


def _as_mat(c, n: int) -> FourierMat:
    if isinstance(c, FourierMat):
        if c.n != n:
            raise DimensionError(f"dim: coefficient is {c.n}x{c.n}, operator is {n}x{n}")
        return c
    return FourierMat.scalar(c, n)


def _imax(a, b):
    return a if a >= b else b


class PsiDO:
    """Immutable truncated operator with exactness watermark."""

    __slots__ = ("n", "coeffs", "wm", "offset")

    def __init__(self, coeffs=None, n: Optional[int] = None, wm=EXACT, offset=0):
        coeffs = dict(coeffs or {})
        if n is None:
            n = next((c.n for c in coeffs.values() if isinstance(c, FourierMat)), 1)
        off = GaussRat.coerce(offset)
        frac, shift = _canon_offset(off)
        if wm != EXACT:
            wm = int(wm) + shift
        data = {}
        for k, c in coeffs.items():
            k = int(k) + shift
            if k < wm:
                continue
            m = _as_mat(c, n)
            if not m.is_zero():
                data[k] = m
        self.n = n
        self.coeffs = data
        self.wm = wm
        self.offset = frac

    @classmethod
    def _make(cls, n, data, wm, offset) -> "PsiDO":
        obj = object.__new__(cls)
        obj.n = n
        obj.coeffs = data
        obj.wm = wm
        obj.offset = offset
        return obj

    # constructors

    @classmethod
    def zero(cls, n: int = 1) -> "PsiDO":
        return cls._make(n, {}, EXACT, ZERO)

    @classmethod
    def identity(cls, n: int = 1) -> "PsiDO":
        return cls({0: FourierMat.identity(n)}, n=n)

    @classmethod
    def scalar(cls, c, n: int = 1) -> "PsiDO":
        return cls({0: c}, n=n)

    @classmethod
    def d(cls, k=1, n: int = 1, coeff=1) -> "PsiDO":
        """The monomial ``coeff * d^k``; ``k`` may be a Gaussian rational."""
        g = GaussRat.coerce(k)
        frac, idx = _canon_offset(g)
        c = _as_mat(coeff, n)
        return cls._make(n, {} if c.is_zero() else {idx: c}, EXACT, frac)

    # basic queries

    @property
    def ord_max(self):
        top = max(self.coeffs) if self.coeffs else EXACT
        if self.wm != EXACT:
            top = _imax(top, self.wm - 1)
        return top

    @property
    def is_exact(self) -> bool:
        return self.wm == EXACT

    @property
    def is_integral_grade(self) -> bool:
        return self.offset.is_zero()

    def grade(self) -> GaussRat:
        top = self.ord_max
        if top == EXACT:
            raise OrderError("order: zero operator has no grade")
        return self.offset + top

    def orders(self):
        return sorted(self.coeffs, reverse=True)

    def coeff(self, k: int) -> FourierMat:
        """Coefficient of index ``k``; raises if that order is not exact."""
        if k < self.wm:
            raise WatermarkError(f"watermark: order {k} is below watermark {self.wm}")
        c = self.coeffs.get(k)
        return c if c is not None else FourierMat.zero(self.n)

    def is_zero(self) -> bool:
        """True when every exact coefficient vanishes."""
        return not self.coeffs

    def is_constant(self) -> bool:
        return all(c.is_constant() for c in self.coeffs.values())

    def is_monic(self) -> bool:
        if not self.coeffs:
            return False
        top = max(self.coeffs)
        return top >= self.wm and self.coeffs[top].is_identity() and self.ord_max == top

    @property
    def capped(self) -> bool:
        return any(c.capped for c in self.coeffs.values())

    def depth(self):
        """Number of exact orders below the top, or ``None`` if exact."""
        if self.wm == EXACT:
            return None
        return self.ord_max - self.wm

    # structural helpers

    def truncate(self, wm) -> "PsiDO":
        """Raise the watermark to ``wm`` (index units), dropping lower orders."""
        if wm == EXACT or (self.wm != EXACT and wm <= self.wm):
            return self
        return PsiDO._make(self.n, {k: c for k, c in self.coeffs.items() if k >= wm}, wm, self.offset)

    def map_coeffs(self, fn) -> "PsiDO":
        data = {}
        for k, c in self.coeffs.items():
            m = fn(c)
            if not m.is_zero():
                data[k] = m
        return PsiDO._make(self.n, data, self.wm, self.offset)

    def map_items(self, fn) -> "PsiDO":
        data = {}
        for k, c in self.coeffs.items():
            m = fn(k, c)
            if not m.is_zero():
                data[k] = m
        return PsiDO._make(self.n, data, self.wm, self.offset)

    def scale(self, c) -> "PsiDO":
        g = GaussRat.coerce(c)
        if g.is_zero():
            return PsiDO._make(self.n, {}, self.wm, self.offset)
        return self.map_coeffs(lambda m: m.scale(g))

    def lmul(self, f) -> "PsiDO":
        """Left multiplication by a coefficient ``f`` (no Leibniz terms)."""
        f = _as_mat(f, self.n)
        return self.map_coeffs(lambda m: f * m)

    def rmul_const(self, c: FourierMat) -> "PsiDO":
        """Right multiplication by a constant matrix, which commutes with ``d``."""
        if not c.is_constant():
            raise ValueError("rmul_const needs a constant matrix")
        return self.map_coeffs(lambda m: m * c)

    def shift(self, k) -> "PsiDO":
        """Right multiplication by ``d^k`` for integer ``k``."""
        k = int(k)
        wm = self.wm if self.wm == EXACT else self.wm + k
        return PsiDO._make(self.n, {i + k: c for i, c in self.coeffs.items()}, wm, self.offset)

    def derive_coeffs(self) -> "PsiDO":
        return self.map_coeffs(lambda m: m.derive())

    def _check(self, other: "PsiDO"):
        if not isinstance(other, PsiDO):
            raise TypeError(f"expected PsiDO, got {type(other).__name__}")
        if self.n != other.n:
            raise DimensionError(f"dim: {self.n} vs {other.n}")

    def _check_same_grade(self, other: "PsiDO"):
        self._check(other)
        if self.offset != other.offset:
            raise OrderError(f"order: grade offsets differ ({self.offset} vs {other.offset})")

    def __add__(self, other):
        if not isinstance(other, PsiDO):
            other = PsiDO.scalar(other, self.n)
        if not other.coeffs and other.wm == EXACT:
            return self
        if not self.coeffs and self.wm == EXACT:
            return other
        self._check_same_grade(other)
        wm = _imax(self.wm, other.wm)
        data = {}
        for k in set(self.coeffs) | set(other.coeffs):
            if k < wm:
                continue
            a = self.coeffs.get(k)
            b = other.coeffs.get(k)
            m = a if b is None else (b if a is None else a + b)
            if not m.is_zero():
                data[k] = m
        return PsiDO._make(self.n, data, wm, self.offset)

    __radd__ = __add__

    def __neg__(self):
        return self.map_coeffs(lambda m: -m)

    def __sub__(self, other):
        if not isinstance(other, PsiDO):
            other = PsiDO.scalar(other, self.n)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PsiDO):
            return compose(self, other)
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __rmul__(self, other):
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result = PsiDO.identity(self.n)
        for _ in range(k):
            result = compose(result, self)
        return result

    def agrees(self, other: "PsiDO") -> bool:
        """Equal on every order where both are exact."""
        return (self - other).is_zero()

    def __eq__(self, other):
        if not isinstance(other, PsiDO):
            return NotImplemented
        return (
            self.n == other.n
            and self.wm == other.wm
            and self.offset == other.offset
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.n, self.wm, self.offset, tuple(sorted(self.coeffs.items()))))

    def __repr__(self):
        terms = []
        for k in self.orders():
            order = self.offset + k
            terms.append(f"{self.coeffs[k]!r} d^{order}")
        body = " + ".join(terms) if terms else "0"
        wm = "exact" if self.wm == EXACT else f"wm={self.offset + self.wm}"
        return f"PsiDO({body}; {wm})"


def _leibniz_coeffs_finite(A: PsiDO, B: PsiDO) -> bool:
    a_inf = (not A.offset.is_zero()) or any(i < 0 for i in A.coeffs)
    if not a_inf:
        return True
    return all(c.is_constant() for c in B.coeffs.values())


def compose(A: PsiDO, B: PsiDO, floor=None, depth: Optional[int] = None) -> PsiDO:
    """Product ``A o B``.

    ``floor`` (absolute index in the result's frame) or ``depth`` (orders
    below the top) cut the computation; without either, an infinite exact
    tail is cut at ``OrderWindow.depth`` below the top.
    """
    A._check(B)
    n = A.n
    frac, s = _canon_offset(A.offset + B.offset)
    topA, topB = A.ord_max, B.ord_max
    if topA == EXACT or topB == EXACT:
        # one factor is the exact zero operator
        return PsiDO._make(n, {}, EXACT, frac)
    rule = _imax(A.wm + topB, B.wm + topA)
    if rule != EXACT:
        rule += s
    top = topA + topB + s
    if floor is None and depth is not None:
        floor = top - depth
    if floor is None and rule == EXACT and not _leibniz_coeffs_finite(A, B):
        floor = top - OrderWindow.depth
    lo = rule if floor is None else _imax(rule, floor)

    acc: Dict[int, FourierMat] = {}
    derivs = {j: [b] for j, b in B.coeffs.items()}
    offA = A.offset
    int_off = offA.is_zero()
    for i, a in A.coeffs.items():
        beta = offA + i
        for j, b in B.coeffs.items():
            base = i + j + s
            if base < lo:
                continue
            chain = derivs[j]
            binom = ONE
            alpha = 0
            while True:
                order = base - alpha
                if order < lo:
                    break
                if alpha >= len(chain):
                    nxt = chain[-1].derive()
                    chain.append(nxt)
                db = chain[alpha]
                if db.is_zero():
                    break
                term = a * db
                if alpha:
                    term = term.scale(binom)
                prev = acc.get(order)
                acc[order] = term if prev is None else prev + term
                alpha += 1
                if int_off and i >= 0 and alpha > i:
                    break
                binom = binom * (beta - (alpha - 1)) / alpha
                if binom.is_zero():
                    break
    data = {k: m for k, m in acc.items() if not m.is_zero()}
    return PsiDO._make(n, data, lo if lo != EXACT else EXACT, frac)


def bracket(A: PsiDO, B: PsiDO, floor=None, depth=None) -> PsiDO:
    return compose(A, B, floor, depth) - compose(B, A, floor, depth)


def _need_integral(A: PsiDO):
    if not A.offset.is_zero():
        raise OrderError("order: operation needs an integer-grade operator")


def split_D(A: PsiDO) -> PsiDO:
    """Differential part (orders >= 0).  Exact as soon as order 0 is exact."""
    _need_integral(A)
    data = {k: c for k, c in A.coeffs.items() if k >= 0}
    wm = EXACT if A.wm == EXACT or A.wm <= 0 else A.wm
    return PsiDO._make(A.n, data, wm, A.offset)


def split_S(A: PsiDO) -> PsiDO:
    """Integral part (orders <= -1)."""
    _need_integral(A)
    data = {k: c for k, c in A.coeffs.items() if k <= -1}
    return PsiDO._make(A.n, data, A.wm, A.offset)


def adler_residue(A: PsiDO) -> FourierMat:
    _need_integral(A)
    if A.wm != EXACT and A.wm > -1:
        raise WatermarkError(f"watermark: order -1 is not exact (wm={A.wm})")
    return A.coeff(-1)


def adler_trace(A: PsiDO) -> GaussRat:
    return adler_residue(A).mat_trace().mean()


def _neumann(E: PsiDO, floor: int) -> PsiDO:
    """``(1 + E)^{-1}`` for ``E`` of order <= -1, kept to index ``floor``."""
    n = E.n
    result = PsiDO.identity(n)
    term = PsiDO.identity(n)
    j = 0
    while True:
        j += 1
        if -j < floor:
            break
        term = -compose(term, E, floor=floor)
        if term.is_zero() and term.wm == EXACT:
            break
        result = result + term
    return result.truncate(floor)


def invert(A: PsiDO, depth: Optional[int] = None) -> PsiDO:
    """Inverse of ``c d^g + lower`` with ``c`` a constant invertible matrix.

    Covers ``1 + (orders <= -1)`` as the special case ``c = 1, g = 0``.
    The result keeps as many exact orders below its top as ``A`` has; an
    exact ``A`` gets ``depth`` (default ``OrderWindow.depth``) orders.
    """
    if not A.coeffs:
        raise NotInvertibleError("not-invertible: zero operator")
    top = max(A.coeffs)
    if A.wm != EXACT and A.ord_max != top:
        raise NotInvertibleError("not-invertible: leading order is unknown")
    c = A.coeffs[top]
    if not c.is_constant():
        raise NotInvertibleError("not-invertible: leading coefficient is not a constant matrix")
    cinv = c.constant_inverse()
    if depth is None:
        depth = A.depth() if A.wm != EXACT else OrderWindow.depth
    g = A.offset + top
    n = A.n
    R = A - PsiDO.d(g, n, c)
    if R.is_zero() and R.wm == EXACT:
        return PsiDO.d(-g, n, cinv)
    E = compose(PsiDO.d(-g, n), R.lmul(cinv), floor=-depth)
    core = _neumann(E, -depth)
    out = compose(core, PsiDO.d(-g, n, cinv))
    return out


def exp_io(A: PsiDO, floor=None) -> PsiDO:
    """``sum_j A^j / j!`` for ``A`` of order <= -1."""
    _need_integral(A)
    n = A.n
    top = A.ord_max
    if top != EXACT and top >= 0:
        raise OrderError("order: exp_io needs ord_max <= -1")
    if floor is None:
        floor = A.wm if A.wm != EXACT else -OrderWindow.depth
    result = PsiDO.identity(n)
    if top == EXACT:
        return result
    term = PsiDO.identity(n)
    j = 0
    while True:
        j += 1
        if j * top < floor:
            break
        term = compose(term, A, floor=floor).scale(GaussRat(1) / j)
        result = result + term
    return result.truncate(floor)


def sts_r(A: PsiDO) -> PsiDO:
    return split_D(A) - split_S(A)


def bracket_r0(A: PsiDO, B: PsiDO, floor=None, depth=None) -> PsiDO:
    """``[A_D, B_D] - [A_S, B_S]``."""
    return bracket(split_D(A), split_D(B), floor, depth) - bracket(split_S(A), split_S(B), floor, depth)


def from_terms(terms: Iterable[Tuple[int, object]], n: int = 1, wm=EXACT) -> PsiDO:
    """Build an operator from ``(order, coefficient)`` pairs, summing repeats."""
    acc: Dict[int, FourierMat] = {}
    for k, c in terms:
        m = _as_mat(c, n)
        acc[k] = m if k not in acc else acc[k] + m
    return PsiDO(acc, n=n, wm=wm)
