"""Exact scalars and the coefficient ring.

``GaussRat`` is a Gaussian rational ``re + im*i``.  ``FourierPoly`` is a
trigonometric polynomial ``sum_m c_m e^{imx}`` on the circle with Gaussian
rational coefficients, and ``FourierMat`` is a square matrix of those.  The
derivation is ``d/dx``; the circle integral is normalized to total mass one,
so the integral of ``f`` is simply its mode-0 coefficient.

All values are immutable.  Rationals are backed by ``gmpy2.mpq`` which keeps
them gcd-reduced with a positive denominator.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Iterator, Optional, Sequence, Tuple

from gmpy2 import mpq

from .errors import DimensionError, NotInvertibleError

_ZERO = mpq(0)
_ONE = mpq(1)


def to_mpq(value) -> mpq:
    if isinstance(value, type(_ZERO)):
        return value
    if isinstance(value, int):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        return mpq(value)
    if isinstance(value, GaussRat):
        if value.im != 0:
            raise TypeError(f"{value} is not real")
        return value.re
    raise TypeError(f"cannot convert {value!r} to a rational")


class GaussRat:
    """Exact Gaussian rational number."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = to_mpq(re)
        self.im = to_mpq(im)

    @classmethod
    def coerce(cls, value) -> "GaussRat":
        if isinstance(value, GaussRat):
            return value
        return cls(value)

    @classmethod
    def _raw(cls, re, im) -> "GaussRat":
        obj = object.__new__(cls)
        obj.re = re
        obj.im = im
        return obj

    def pair(self) -> Tuple[mpq, mpq]:
        return (self.re, self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def is_integer(self) -> bool:
        return self.im == 0 and self.re.denominator == 1

    def conjugate(self) -> "GaussRat":
        return GaussRat._raw(self.re, -self.im)

    def __add__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussRat._raw(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussRat._raw(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return GaussRat._raw(-self.re, -self.im)

    def __mul__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        a, b, c, d = self.re, self.im, o.re, o.im
        return GaussRat._raw(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def inverse(self) -> "GaussRat":
        norm = self.re * self.re + self.im * self.im
        if norm == 0:
            raise ZeroDivisionError("GaussRat division by zero")
        return GaussRat._raw(self.re / norm, -self.im / norm)

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = GaussRat._raw(_ONE, _ZERO)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return f"GaussRat({self})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


def _coerce_or_none(value) -> Optional[GaussRat]:
    if isinstance(value, GaussRat):
        return value
    try:
        return GaussRat(value)
    except TypeError:
        return None


I = GaussRat(0, 1)
ZERO = GaussRat(0)
ONE = GaussRat(1)


def _mul_pairs(x, y):
    a, b = x
    c, d = y
    return (a * c - b * d, a * d + b * c)


class FourierPoly:
    """Trigonometric polynomial ``sum_m c_m e^{imx}``.

    ``cap`` optionally bounds the retained bandwidth ``|m| <= cap``; a value
    that lost modes to the cap carries ``capped=True`` and so does every
    value computed from it.
    """

    __slots__ = ("_c", "cap", "capped")

    def __init__(self, coeffs=None, cap: Optional[int] = None, capped: bool = False):
        data: Dict[int, Tuple[mpq, mpq]] = {}
        if coeffs:
            for m, c in dict(coeffs).items():
                g = GaussRat.coerce(c)
                if g.is_zero():
                    continue
                if cap is not None and abs(m) > cap:
                    capped = True
                    continue
                data[int(m)] = (g.re, g.im)
        self._c = data
        self.cap = cap
        self.capped = capped

    @classmethod
    def _from_pairs(cls, data, cap=None, capped=False) -> "FourierPoly":
        obj = object.__new__(cls)
        obj._c = data
        obj.cap = cap
        obj.capped = capped
        return obj

    @classmethod
    def const(cls, c, cap=None) -> "FourierPoly":
        return cls({0: c}, cap=cap)

    @classmethod
    def mode(cls, m: int, c=1, cap=None) -> "FourierPoly":
        return cls({m: c}, cap=cap)

    def items(self) -> Iterator[Tuple[int, GaussRat]]:
        for m in sorted(self._c):
            yield m, GaussRat._raw(*self._c[m])

    def modes(self):
        return sorted(self._c)

    def __getitem__(self, m: int) -> GaussRat:
        p = self._c.get(m)
        return ZERO if p is None else GaussRat._raw(*p)

    def is_zero(self) -> bool:
        return not self._c

    def is_constant(self) -> bool:
        return all(m == 0 for m in self._c)

    def bandwidth(self) -> int:
        return max((abs(m) for m in self._c), default=0)

    def _policy(self, other: "FourierPoly"):
        if self.cap is None:
            cap = other.cap
        elif other.cap is None:
            cap = self.cap
        else:
            cap = min(self.cap, other.cap)
        return cap, self.capped or other.capped

    def __add__(self, other):
        if not isinstance(other, FourierPoly):
            other = FourierPoly.const(other)
        cap, capped = self._policy(other)
        data = dict(self._c)
        for m, (c, d) in other._c.items():
            p = data.get(m)
            if p is None:
                data[m] = (c, d)
            else:
                s = (p[0] + c, p[1] + d)
                if s[0] == 0 and s[1] == 0:
                    del data[m]
                else:
                    data[m] = s
        return FourierPoly._from_pairs(data, cap, capped)

    __radd__ = __add__

    def __neg__(self):
        return FourierPoly._from_pairs({m: (-a, -b) for m, (a, b) in self._c.items()}, self.cap, self.capped)

    def __sub__(self, other):
        if not isinstance(other, FourierPoly):
            other = FourierPoly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "FourierPoly":
        g = GaussRat.coerce(c)
        if g.is_zero():
            return FourierPoly._from_pairs({}, self.cap, self.capped)
        if g.im == 0:
            r = g.re
            if r == 1:
                return self
            return FourierPoly._from_pairs({m: (a * r, b * r) for m, (a, b) in self._c.items()}, self.cap, self.capped)
        gp = (g.re, g.im)
        return FourierPoly._from_pairs({m: _mul_pairs(p, gp) for m, p in self._c.items()}, self.cap, self.capped)

    def __mul__(self, other):
        if not isinstance(other, FourierPoly):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        cap, capped = self._policy(other)
        out: Dict[int, Tuple[mpq, mpq]] = {}
        for m1, (a, b) in self._c.items():
            for m2, (c, d) in other._c.items():
                m = m1 + m2
                if cap is not None and abs(m) > cap:
                    capped = True
                    continue
                re = a * c - b * d
                im = a * d + b * c
                p = out.get(m)
                if p is not None:
                    re += p[0]
                    im += p[1]
                out[m] = (re, im)
        return FourierPoly._from_pairs({m: p for m, p in out.items() if p[0] != 0 or p[1] != 0}, cap, capped)

    def __rmul__(self, other):
        return self.scale(other)

    def derive(self) -> "FourierPoly":
        # d/dx e^{imx} = i m e^{imx}
        return FourierPoly._from_pairs(
            {m: (-b * m, a * m) for m, (a, b) in self._c.items() if m != 0}, self.cap, self.capped
        )

    def antiderive(self) -> Tuple["FourierPoly", GaussRat]:
        """Split ``f = g' + c`` with ``g`` mean-free and ``c`` the mean."""
        g = {m: (b / m, -a / m) for m, (a, b) in self._c.items() if m != 0}
        return FourierPoly._from_pairs(g, self.cap, self.capped), self[0]

    def mean(self) -> GaussRat:
        return self[0]

    def conjugate_coeffs(self) -> "FourierPoly":
        return FourierPoly._from_pairs({m: (a, -b) for m, (a, b) in self._c.items()}, self.cap, self.capped)

    def __eq__(self, other):
        if isinstance(other, FourierPoly):
            return self._c == other._c
        try:
            return self._c == FourierPoly.const(other)._c
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(tuple(sorted(self._c.items())))

    def __repr__(self):
        return f"FourierPoly({self})"

    def __str__(self):
        if not self._c:
            return "0"
        parts = []
        for m, c in self.items():
            if m == 0:
                parts.append(f"({c})")
            else:
                parts.append(f"({c})e^{{{m}ix}}")
        return " + ".join(parts)


def _matrix_shape(rows) -> int:
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise DimensionError("dim: matrix must be square and non-empty")
    return n


class FourierMat:
    """``n x n`` matrix of ``FourierPoly`` entries."""

    __slots__ = ("n", "entries")

    def __init__(self, entries: Sequence[Sequence]):
        n = _matrix_shape(entries)
        self.n = n
        self.entries = tuple(
            tuple(e if isinstance(e, FourierPoly) else FourierPoly.const(e) for e in row) for row in entries
        )

    @classmethod
    def _make(cls, n, entries) -> "FourierMat":
        obj = object.__new__(cls)
        obj.n = n
        obj.entries = entries
        return obj

    @classmethod
    def zero(cls, n: int = 1, cap=None) -> "FourierMat":
        z = FourierPoly(cap=cap)
        return cls._make(n, tuple(tuple(z for _ in range(n)) for _ in range(n)))

    @classmethod
    def identity(cls, n: int = 1, cap=None) -> "FourierMat":
        return cls.scalar(1, n, cap=cap)

    @classmethod
    def scalar(cls, c, n: int = 1, cap=None) -> "FourierMat":
        f = c if isinstance(c, FourierPoly) else FourierPoly.const(c, cap=cap)
        z = FourierPoly(cap=cap)
        return cls._make(n, tuple(tuple(f if i == j else z for j in range(n)) for i in range(n)))

    @classmethod
    def diag(cls, polys: Sequence) -> "FourierMat":
        n = len(polys)
        z = FourierPoly()
        fs = [p if isinstance(p, FourierPoly) else FourierPoly.const(p) for p in polys]
        return cls._make(n, tuple(tuple(fs[i] if i == j else z for j in range(n)) for i in range(n)))

    @classmethod
    def from_constants(cls, rows) -> "FourierMat":
        return cls([[FourierPoly.const(c) for c in row] for row in rows])

    def _check(self, other: "FourierMat"):
        if not isinstance(other, FourierMat):
            raise TypeError("expected FourierMat")
        if other.n != self.n:
            raise DimensionError(f"dim: {self.n} vs {other.n}")

    def __getitem__(self, ij) -> FourierPoly:
        i, j = ij
        return self.entries[i][j]

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.entries for e in row)

    def is_constant(self) -> bool:
        return all(e.is_constant() for row in self.entries for e in row)

    def is_diagonal(self) -> bool:
        n = self.n
        return all(self.entries[i][j].is_zero() for i in range(n) for j in range(n) if i != j)

    def is_identity(self) -> bool:
        n = self.n
        return all(self.entries[i][j] == (1 if i == j else 0) for i in range(n) for j in range(n))

    @property
    def capped(self) -> bool:
        return any(e.capped for row in self.entries for e in row)

    def map(self, fn) -> "FourierMat":
        return FourierMat._make(self.n, tuple(tuple(fn(e) for e in row) for row in self.entries))

    def __add__(self, other):
        self._check(other)
        return FourierMat._make(
            self.n, tuple(tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(self.entries, other.entries))
        )

    def __sub__(self, other):
        self._check(other)
        return FourierMat._make(
            self.n, tuple(tuple(a - b for a, b in zip(r1, r2)) for r1, r2 in zip(self.entries, other.entries))
        )

    def __neg__(self):
        return self.map(lambda e: -e)

    def scale(self, c) -> "FourierMat":
        g = GaussRat.coerce(c)
        if g == 1:
            return self
        return self.map(lambda e: e.scale(g))

    def __mul__(self, other):
        if not isinstance(other, FourierMat):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        self._check(other)
        n = self.n
        if n == 1:
            return FourierMat._make(1, ((self.entries[0][0] * other.entries[0][0],),))
        A, B = self.entries, other.entries
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = None
                for k in range(n):
                    a, b = A[i][k], B[k][j]
                    if a.is_zero() or b.is_zero():
                        continue
                    t = a * b
                    acc = t if acc is None else acc + t
                if acc is None:
                    acc = FourierPoly(cap=A[i][0].cap)
                row.append(acc)
            rows.append(tuple(row))
        return FourierMat._make(n, tuple(rows))

    def __rmul__(self, other):
        return self.scale(other)

    def derive(self) -> "FourierMat":
        return self.map(lambda e: e.derive())

    def antiderive(self) -> Tuple["FourierMat", Tuple[Tuple[GaussRat, ...], ...]]:
        """Return ``(g, c)`` with ``self = g' + c``, ``g`` mean-free, ``c`` the constant matrix."""
        g = self.map(lambda e: e.antiderive()[0])
        return g, self.mean()

    def mean(self) -> Tuple[Tuple[GaussRat, ...], ...]:
        return tuple(tuple(e.mean() for e in row) for row in self.entries)

    def constant_part(self) -> "FourierMat":
        return self.map(lambda e: FourierPoly.const(e.mean(), cap=e.cap))

    def mat_trace(self) -> FourierPoly:
        acc = self.entries[0][0]
        for i in range(1, self.n):
            acc = acc + self.entries[i][i]
        return acc

    def transpose(self) -> "FourierMat":
        n = self.n
        return FourierMat._make(n, tuple(tuple(self.entries[j][i] for j in range(n)) for i in range(n)))

    def constant_inverse(self) -> "FourierMat":
        """Inverse of a constant matrix (Gauss-Jordan over Gaussian rationals)."""
        if not self.is_constant():
            raise NotInvertibleError("not-invertible: matrix has non-constant entries")
        n = self.n
        a = [[self.entries[i][j].mean() for j in range(n)] + [ONE if i == k else ZERO for k in range(n)] for i in range(n)]
        for col in range(n):
            piv = next((r for r in range(col, n) if not a[r][col].is_zero()), None)
            if piv is None:
                raise NotInvertibleError("not-invertible: singular constant matrix")
            a[col], a[piv] = a[piv], a[col]
            inv = a[col][col].inverse()
            a[col] = [x * inv for x in a[col]]
            for r in range(n):
                if r != col and not a[r][col].is_zero():
                    f = a[r][col]
                    a[r] = [x - f * y for x, y in zip(a[r], a[col])]
        return FourierMat.from_constants([row[n:] for row in a])

    def __eq__(self, other):
        if not isinstance(other, FourierMat):
            return NotImplemented
        return self.n == other.n and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        if self.n == 1:
            return f"FourierMat[{self.entries[0][0]}]"
        return "FourierMat[" + "; ".join(", ".join(str(e) for e in row) for row in self.entries) + "]"


def derive(f: FourierMat) -> FourierMat:
    return f.derive()


def antiderive(f: FourierMat):
    return f.antiderive()


def mean(f: FourierMat):
    return f.mean()


def mat_trace(f: FourierMat) -> FourierPoly:
    return f.mat_trace()


def embed_quaternion(a, b, c, d) -> FourierMat:
    """Image of ``a + b j`` style quaternion data under ``H -> M_2(C)``.

    The quaternion ``q = z + w j`` with complex ``z = a + b i`` and
    ``w = c + d i`` maps to ``[[z, w], [-conj(w), conj(z)]]``; the arguments
    are real-coefficient trigonometric polynomials (or rationals).
    """
    fa, fb, fc, fd = (x if isinstance(x, FourierPoly) else FourierPoly.const(x) for x in (a, b, c, d))
    z = fa + fb.scale(I)
    w = fc + fd.scale(I)
    zbar = fa - fb.scale(I)
    wbar = fc - fd.scale(I)
    return FourierMat([[z, w], [-wbar, zbar]])


def as_gauss(values: Iterable) -> Tuple[GaussRat, ...]:
    return tuple(GaussRat.coerce(v) for v in values)
