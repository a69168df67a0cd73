"""Shorthand constructors shared by the tests."""

from hypothesis import strategies as st

from fclkp.fcl import FClOp
from fclkp.psido import PsiDO
from fclkp.scalar import FourierMat, FourierPoly, GaussRat


def e(m=0, c=1):
    return FourierPoly.mode(m, c)


def op(terms, n=1, wm=None):
    """``op({1: 1, -1: e(1)})`` is ``d + e^{ix} d^-1``."""
    coeffs = {}
    for k, c in terms.items():
        if isinstance(c, FourierMat):
            coeffs[k] = c
        elif isinstance(c, FourierPoly):
            coeffs[k] = FourierMat.scalar(c, n)
        else:
            coeffs[k] = FourierMat.scalar(FourierPoly.const(c), n)
    if wm is None:
        return PsiDO(coeffs, n=n)
    return PsiDO(coeffs, n=n, wm=wm)


def pair(a, b=None):
    return FClOp(a, a if b is None else b)


small_int = st.integers(-3, 3)
gauss = st.builds(lambda a, b, d: GaussRat(GaussRat(a) / d, b), small_int, small_int, st.integers(1, 3))
polys = st.dictionaries(st.integers(-2, 2), gauss, max_size=3).map(FourierPoly)


@st.composite
def mats(draw, n=None):
    n = draw(st.sampled_from((1, 2))) if n is None else n
    return FourierMat([[draw(polys) for _ in range(n)] for _ in range(n)])


@st.composite
def psidos(draw, n=1, lo=-3, hi=2):
    orders = draw(st.lists(st.integers(lo, hi), min_size=1, max_size=3, unique=True))
    return PsiDO({k: draw(mats(n)) for k in orders}, n=n)
