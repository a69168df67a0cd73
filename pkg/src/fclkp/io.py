"""Exact JSON serialization of operators and time series, plus CSV export.

Operator file layout (all numbers are decimal integers)::

    {"kind": "psido" | "fcl" | "cgrade" | "fcl-cgrade",
     "n": 1,
     "grade": [re_num, re_den, im_num, im_den],      # cgrade kinds only
     "bandwidth_cap": null,
     "branches": {"main": BRANCH} | {"plus": BRANCH, "minus": BRANCH}}

    BRANCH = {"watermark": int | null,
              "terms": [[k, [[p, q, m, re_num, re_den, im_num, im_den], ...]], ...]}

For the cgrade kinds the order of term ``k`` is ``grade + k`` where
``grade`` is the fractional part of the operator's order (real part in
``[0, 1)``); for the integral kinds ``k`` is the order itself.  A null
watermark means the operator is exact.  Terms are sorted by decreasing
order and entries by ``(p, q, m)``, so output is byte-deterministic.
"""

from __future__ import annotations

import csv
import io as _io
import json
from typing import Dict, List, Optional, Tuple, Union

from gmpy2 import mpq

from .errors import AlgebraError, ShapeError
from .fcl import FClOp
from .psido import EXACT, PsiDO
from .scalar import FourierMat, FourierPoly, GaussRat


class ParseError(AlgebraError):
    tag = "parse"


KINDS = ("psido", "fcl", "cgrade", "fcl-cgrade")


def _rat_out(q) -> Tuple[int, int]:
    return int(q.numerator), int(q.denominator)


def _rat_in(num, den, where: str):
    if not (isinstance(num, int) and isinstance(den, int)) or isinstance(num, bool) or isinstance(den, bool):
        raise ParseError(f"parse: {where}: rational parts must be integers")
    if den <= 0:
        raise ParseError(f"parse: {where}: denominator must be positive")
    q = mpq(num, den)
    if int(q.numerator) != num or int(q.denominator) != den:
        raise ParseError(f"parse: {where}: rational {num}/{den} is not in lowest terms")
    return q


def gauss_to_list(g: GaussRat) -> List[int]:
    return [*_rat_out(g.re), *_rat_out(g.im)]


def gauss_from_list(v, where: str = "value") -> GaussRat:
    if not isinstance(v, list) or len(v) != 4:
        raise ParseError(f"parse: {where}: expected [re_num, re_den, im_num, im_den]")
    return GaussRat(_rat_in(v[0], v[1], where), _rat_in(v[2], v[3], where))


def _branch_out(P: PsiDO) -> dict:
    terms = []
    for k in sorted(P.coeffs, reverse=True):
        c = P.coeffs[k]
        entries = []
        for p in range(P.n):
            for q in range(P.n):
                for m, g in c[p, q].items():
                    entries.append([p, q, m, *gauss_to_list(g)])
        terms.append([k, entries])
    return {"watermark": None if P.wm == EXACT else int(P.wm), "terms": terms}


def _branch_in(obj, n: int, offset: GaussRat, cap, where: str) -> PsiDO:
    if not isinstance(obj, dict) or set(obj) != {"watermark", "terms"}:
        raise ParseError(f"parse: {where}: branch needs exactly 'watermark' and 'terms'")
    wm = obj["watermark"]
    if wm is not None and (not isinstance(wm, int) or isinstance(wm, bool)):
        raise ParseError(f"parse: {where}: watermark must be an integer or null")
    if not isinstance(obj["terms"], list):
        raise ParseError(f"parse: {where}: terms must be a list")
    coeffs: Dict[int, FourierMat] = {}
    for item in obj["terms"]:
        if not (isinstance(item, list) and len(item) == 2 and isinstance(item[0], int) and isinstance(item[1], list)):
            raise ParseError(f"parse: {where}: each term is [order, entries]")
        k, entries = item
        if k in coeffs:
            raise ParseError(f"parse: {where}: order {k} repeated")
        grid: List[List[Dict[int, GaussRat]]] = [[{} for _ in range(n)] for _ in range(n)]
        for ent in entries:
            if not (isinstance(ent, list) and len(ent) == 7 and all(isinstance(x, int) for x in ent)):
                raise ParseError(f"parse: {where}: entry must be 7 integers")
            p, q, m = ent[:3]
            if not (0 <= p < n and 0 <= q < n):
                raise ShapeError(f"shape: {where}: entry index ({p},{q}) outside {n}x{n}")
            if m in grid[p][q]:
                raise ParseError(f"parse: {where}: mode {m} repeated")
            grid[p][q][m] = gauss_from_list(ent[3:], where)
        coeffs[k] = FourierMat([[FourierPoly(grid[p][q], cap=cap) for q in range(n)] for p in range(n)])
    if wm is not None:
        bad = [k for k in coeffs if k < wm]
        if bad:
            raise ParseError(f"parse: {where}: orders {bad} lie below the watermark")
    return PsiDO(coeffs, n=n, wm=EXACT if wm is None else wm, offset=offset)


def operator_to_obj(A: Union[PsiDO, FClOp], cap: Optional[int] = None) -> dict:
    if isinstance(A, FClOp):
        integral = A.plus.offset.is_zero() and A.minus.offset.is_zero()
        if A.plus.offset != A.minus.offset:
            raise ShapeError("shape: branch grades differ")
        obj = {"kind": "fcl" if integral else "fcl-cgrade", "n": A.n}
        offset = A.plus.offset
        branches = {"plus": _branch_out(A.plus), "minus": _branch_out(A.minus)}
    else:
        integral = A.offset.is_zero()
        obj = {"kind": "psido" if integral else "cgrade", "n": A.n}
        offset = A.offset
        branches = {"main": _branch_out(A)}
    if not integral:
        obj["grade"] = gauss_to_list(offset)
    obj["bandwidth_cap"] = cap
    obj["branches"] = branches
    return obj


def operator_from_obj(obj, cap: Optional[int] = None) -> Union[PsiDO, FClOp]:
    if not isinstance(obj, dict):
        raise ParseError("parse: operator must be a JSON object")
    kind = obj.get("kind")
    if kind not in KINDS:
        raise ParseError(f"parse: unknown kind {kind!r}")
    n = obj.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError("parse: n must be a positive integer")
    file_cap = obj.get("bandwidth_cap")
    if file_cap is not None and (not isinstance(file_cap, int) or file_cap < 0):
        raise ParseError("parse: bandwidth_cap must be a non-negative integer or null")
    cap = cap if cap is not None else file_cap
    if kind in ("cgrade", "fcl-cgrade"):
        offset = gauss_from_list(obj.get("grade"), "grade")
        if not (0 <= offset.re < 1):
            raise ParseError("parse: grade offset must have real part in [0, 1)")
    else:
        if "grade" in obj:
            raise ParseError("parse: integral kinds carry no grade")
        offset = GaussRat(0)
    branches = obj.get("branches")
    if not isinstance(branches, dict):
        raise ParseError("parse: missing branches")
    if kind in ("psido", "cgrade"):
        if set(branches) != {"main"}:
            raise ParseError("parse: single-branch kinds need exactly the 'main' branch")
        return _branch_in(branches["main"], n, offset, cap, "main")
    if set(branches) != {"plus", "minus"}:
        raise ParseError("parse: branch-pair kinds need 'plus' and 'minus'")
    return FClOp(
        _branch_in(branches["plus"], n, offset, cap, "plus"),
        _branch_in(branches["minus"], n, offset, cap, "minus"),
    )


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def emit_operator(A, cap: Optional[int] = None) -> str:
    return dumps(operator_to_obj(A, cap))


def parse_operator(text: str, cap: Optional[int] = None):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"parse: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return operator_from_obj(obj, cap)


def read_operator(path: str, cap: Optional[int] = None):
    with open(path, encoding="utf-8") as fh:
        return parse_operator(fh.read(), cap)


def write_text(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def series_to_obj(T, name: str) -> dict:
    """A time series ``TOp`` as ``{"kind": "series", ...}``."""
    series = []
    for e, a in T.items():
        series.append({"exponent": list(e), "operator": operator_to_obj(a)})
    return {"kind": "series", "name": name, "times": T.N, "valuation": T.W, "series": series}


def series_from_obj(obj):
    from .kp import TOp

    if not isinstance(obj, dict) or obj.get("kind") != "series":
        raise ParseError("parse: not a series file")
    N, W = obj.get("times"), obj.get("valuation")
    if not isinstance(N, int) or not isinstance(W, int):
        raise ParseError("parse: series needs integer times and valuation")
    terms = {}
    for item in obj.get("series", []):
        e = item.get("exponent")
        if not (isinstance(e, list) and len(e) == N and all(isinstance(x, int) and x >= 0 for x in e)):
            raise ParseError("parse: bad exponent")
        terms[tuple(e)] = operator_from_obj(item.get("operator"))
    return TOp(N, W, terms)


def _order_label(offset: GaussRat, k: int) -> str:
    if offset.is_zero():
        return str(k)
    return str(offset + k)


def series_csv(T) -> str:
    """Flattened coefficient rows (derived view of the series file)."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"e{i}" for i in range(1, T.N + 1)] + ["branch", "k", "p", "q", "m", "re_num", "re_den", "im_num", "im_den"])
    for e, a in T.items():
        branches = [("plus", a.plus), ("minus", a.minus)] if isinstance(a, FClOp) else [("main", a)]
        for bname, P in branches:
            for k in sorted(P.coeffs, reverse=True):
                c = P.coeffs[k]
                for p in range(P.n):
                    for q in range(P.n):
                        for m, g in c[p, q].items():
                            w.writerow(list(e) + [bname, _order_label(P.offset, k), p, q, m, *gauss_to_list(g)])
    return buf.getvalue()


def format_gauss(g: GaussRat) -> str:
    sign = "+" if g.im >= 0 else "-"
    return f"{g.re} {sign} {abs(g.im)}i"
