"""``fclkp`` command line.

Exit codes: 0 ok, 1 verification suite failed, 2 parse error, 3 shape
error, 4 solver precondition, 5 post-verification failure.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from typing import List, Optional

from . import io
from .cpow import fcl_power, power
from .errors import AlgebraError, DimensionError, OrderError, ShapeError, VerificationError
from .fcl import FClOp, fcl_bracket, fcl_compose, phi_eo_projection, res
from .psido import PsiDO, adler_trace, bracket, compose, split_D, split_S
from .scalar import GaussRat

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_SHAPE, EXIT_PRECOND, EXIT_POST = range(6)

VARIANTS = ("standard", "scaled", "twisted", "complex")
SUITE_NAMES = ("algebra", "manin", "jstructs", "brackets", "hamiltonian", "all")


class CLIError(Exception):
    def __init__(self, code: int, msg: str):
        super().__init__(msg)
        self.code = code


_NUM = r"[+-]?\d+(?:/\d+)?"
_GAUSS = re.compile(rf"^(?:(?P<re>{_NUM})(?P<im>[+-]\d*(?:/\d+)?)i|(?P<only_im>[+-]?\d*(?:/\d+)?)i|(?P<only_re>{_NUM}))$")


def parse_gauss(text: str) -> GaussRat:
    """``3``, ``-1/2``, ``2i``, ``1/2-3i``, ``i``."""
    s = text.replace(" ", "")
    m = _GAUSS.match(s)
    if not m:
        raise CLIError(EXIT_PARSE, f"parse: cannot read number {text!r}")

    def imag(part: str):
        if part in ("", "+"):
            return 1
        if part == "-":
            return -1
        return part.lstrip("+")

    try:
        if m.group("only_re") is not None:
            return GaussRat(m.group("only_re").lstrip("+"))
        if m.group("only_im") is not None:
            return GaussRat(0, imag(m.group("only_im")))
        return GaussRat(m.group("re").lstrip("+"), imag(m.group("im")))
    except (ValueError, ZeroDivisionError):
        raise CLIError(EXIT_PARSE, f"parse: cannot read number {text!r}") from None


def _load(path: str, cap=None):
    try:
        return io.read_operator(path, cap)
    except io.ParseError as exc:
        raise CLIError(EXIT_PARSE, str(exc)) from None
    except (ShapeError, DimensionError) as exc:
        raise CLIError(EXIT_SHAPE, str(exc)) from None
    except OSError as exc:
        raise CLIError(EXIT_PARSE, f"parse: cannot read {path}: {exc.strerror}") from None


def _same_kind(ops):
    pair = [isinstance(A, FClOp) for A in ops]
    if len(set(pair)) > 1:
        raise CLIError(EXIT_SHAPE, "shape: cannot mix single-branch and branch-pair operators")
    if len({A.n for A in ops}) > 1:
        raise CLIError(EXIT_SHAPE, "shape: operators have different matrix sizes")
    return pair[0]


def _emit(A, out: Optional[str], cap=None):
    text = io.emit_operator(A, cap)
    if out:
        io.write_text(out, text)
    else:
        sys.stdout.write(text)


def _library_call(fn, *args):
    """Map library errors raised by plain operations onto exit codes."""
    try:
        return fn(*args)
    except (ShapeError, DimensionError, OrderError) as exc:
        raise CLIError(EXIT_SHAPE, str(exc)) from None
    except VerificationError as exc:
        raise CLIError(EXIT_POST, str(exc)) from None
    except AlgebraError as exc:
        raise CLIError(EXIT_PRECOND, str(exc)) from None
    except ValueError as exc:
        raise CLIError(EXIT_SHAPE, f"shape: {exc}") from None


def cmd_compose(args) -> int:
    ops = [_load(p, args.bandwidth_cap) for p in args.files]
    pair = _same_kind(ops)
    op = fcl_compose if pair else compose
    result = ops[0]
    for B in ops[1:]:
        result = _library_call(op, result, B)
    _emit(result, args.out, args.bandwidth_cap)
    return EXIT_OK


def cmd_bracket(args) -> int:
    A, B = (_load(p, args.bandwidth_cap) for p in args.files)
    pair = _same_kind([A, B])
    _emit(_library_call(fcl_bracket if pair else bracket, A, B), args.out, args.bandwidth_cap)
    return EXIT_OK


def cmd_residue(args) -> int:
    A = _load(args.file, args.bandwidth_cap)
    value = _library_call(res if isinstance(A, FClOp) else adler_trace, A)
    print(io.format_gauss(value))
    return EXIT_OK


def _project(A, tag: str):
    if tag in ("D", "S"):
        f = split_D if tag == "D" else split_S
        return A.map(f) if isinstance(A, FClOp) else f(A)
    if not isinstance(A, FClOp):
        raise ShapeError(f"shape: projection {tag!r} needs a branch-pair operator")
    z = PsiDO.zero(A.n)
    if tag == "plus":
        return FClOp(A.plus, z)
    if tag == "minus":
        return FClOp(z, A.minus)
    eo = phi_eo_projection(A)
    if tag == "eo":
        return eo
    return A - eo


def cmd_project(args) -> int:
    A = _load(args.file, args.bandwidth_cap)
    _emit(_library_call(_project, A, args.tag), args.out, args.bandwidth_cap)
    return EXIT_OK


def cmd_power(args) -> int:
    A = _load(args.file, args.bandwidth_cap)
    r = parse_gauss(args.exponent)
    fn = fcl_power if isinstance(A, FClOp) else power
    _emit(_library_call(fn, A, r), args.out, args.bandwidth_cap)
    return EXIT_OK


def _solve(L0, args):
    from . import kp

    if args.valuation < 1 or args.depth < 1 or args.times < 1:
        raise ValueError("need --valuation >= 1, --depth >= 1 and --times >= 1")
    N, W, depth = args.times, args.valuation, args.depth
    v = args.variant
    if v == "standard":
        return kp.kp_solve(L0, N, W, depth)
    if v == "scaled":
        if args.lam is None or args.mu is None:
            raise ValueError("scaled variant needs --lambda and --mu")
        return kp.kp_solve_scaled(L0, parse_gauss(args.lam), parse_gauss(args.mu), N, W, depth)
    if v == "twisted":
        return kp.kp_solve_twisted(L0, N, W, depth)
    if args.alpha is None:
        raise ValueError("complex variant needs --alpha")
    alpha = parse_gauss(args.alpha)
    if isinstance(L0, PsiDO):
        # both branches of (L0, L0) evolve identically; keep one
        return kp.kp_solve_complex(FClOp(L0, L0), alpha, N, W, depth, args.form)
    return kp.kp_solve_complex(L0, alpha, N, W, depth, args.form)


def _verify_solution(sol) -> List[str]:
    from . import kp

    lines = []
    worst = "0"
    for k in range(1, sol.N + 1):
        if sol.W - k < 0:
            continue
        d = kp.lax_defect(sol, k)
        status = "0" if d.is_zero() else "nonzero"
        if status != "0":
            worst = "nonzero"
        lines.append(f"lax_defect k={k}: {status}")
    for m in range(1, sol.N + 1):
        d = kp.conservation_defect(sol, m)
        status = "0" if d.is_zero() else "nonzero"
        if status != "0":
            worst = "nonzero"
        lines.append(f"conservation_defect m={m}: {status}")
    lines.append(f"max_defect: {worst}")
    return lines


def cmd_kp_solve(args) -> int:
    L0 = _load(args.file, args.bandwidth_cap)
    try:
        sol = _solve(L0, args)
    except CLIError:
        raise
    except VerificationError as exc:
        raise CLIError(EXIT_POST, str(exc)) from None
    except (AlgebraError, ValueError) as exc:
        raise CLIError(EXIT_PRECOND, f"precondition: {exc}") from None
    try:
        report = _verify_solution(sol)
    except AlgebraError as exc:
        raise CLIError(EXIT_POST, f"verify: {exc}") from None
    out = args.out
    os.makedirs(out, exist_ok=True)
    series = {name: getattr(sol, name) for name in ("L", "S", "Y")}
    if isinstance(L0, PsiDO) and args.variant == "complex":
        # the pair (L0, L0) was solved; both branches agree, keep one
        series = {name: T.map(lambda a: a.plus) for name, T in series.items()}
    for name, T in series.items():
        io.write_text(os.path.join(out, f"{name}.json"), io.dumps(io.series_to_obj(T, name)))
    io.write_text(os.path.join(out, "L.csv"), io.series_csv(series["L"]))
    header = [f"variant: {args.variant}", f"times: {sol.N}", f"valuation: {sol.W}", f"depth: {sol.depth}",
              f"watermark: {sol.floor}"]
    text = "\n".join(header + report) + "\n"
    io.write_text(os.path.join(out, "report.txt"), text)
    sys.stdout.write(text)
    if report[-1] != "max_defect: 0":
        sys.stderr.write("verify: nonzero defect in solution\n")
        return EXIT_POST
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import suites

    checks = suites.run(args.suite, args.seed)
    for c in checks:
        print(c.line())
    failed = sum(not c.ok for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed (seed {args.seed})")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fclkp", description="Exact formal pseudo-differential operators and KP solvers.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--bandwidth-cap", type=int, default=None, help="truncate Fourier modes above this bandwidth")
        if out:
            p.add_argument("--out", default=None, help="output file (default: stdout)")

    p = sub.add_parser("compose", help="compose operator files left to right")
    p.add_argument("files", nargs="+")
    common(p)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("bracket", help="commutator [A, B]")
    p.add_argument("files", nargs=2)
    common(p)
    p.set_defaults(func=cmd_bracket)

    p = sub.add_parser("residue", help="Adler trace (single branch) or residue (branch pair)")
    p.add_argument("file")
    common(p, out=False)
    p.set_defaults(func=cmd_residue)

    p = sub.add_parser("project", help="projection onto a summand")
    p.add_argument("file")
    p.add_argument("--tag", required=True, choices=("D", "S", "plus", "minus", "ee", "eo"))
    common(p)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("power", help="power of a monic operator")
    p.add_argument("file")
    p.add_argument("--exponent", required=True, help="e.g. 2, 1/2, -1, 1/2+1i")
    common(p)
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("kp-solve", help="solve a KP-type hierarchy from an initial operator")
    p.add_argument("file")
    p.add_argument("--variant", choices=VARIANTS, default="standard")
    p.add_argument("--times", type=int, default=3)
    p.add_argument("--valuation", type=int, default=3)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--lambda", dest="lam", default=None)
    p.add_argument("--mu", default=None)
    p.add_argument("--alpha", default=None)
    p.add_argument("--form", choices=("d", "absD"), default="d")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--bandwidth-cap", type=int, default=None)
    p.set_defaults(func=cmd_kp_solve)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("--suite", choices=SUITE_NAMES, default="all")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CLIError as exc:
        sys.stderr.write(f"{exc}\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
