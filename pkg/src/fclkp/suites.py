"""Randomized and witness-based invariant checks driven by ``fclkp verify``.

Every suite takes a seed and returns a list of ``Check`` records.  A check
either asserts an identity (``ok`` iff the defect is zero) or asserts that a
known counterexample really is one (``ok`` iff the defect is nonzero).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Dict, List

from .fcl import (
    J1,
    J2,
    J3,
    J4,
    FClOp,
    bracket_eps,
    bracket_s,
    bracket_sprime,
    eps_mul,
    fcl_bracket,
    fcl_compose,
    fcl_split_D,
    fcl_split_S,
    jacobi_defect,
    myb_defect,
    nijenhuis,
    p_plus,
    phi_ee,
    res,
    rota_baxter_defect,
)
from .hamiltonian import (
    Covector,
    DiffPoly,
    LaxPoint,
    casimir_flow,
    functional_to_covector,
    gd2_covector_bracket,
    gd_bracket,
    gd_bracket_expanded,
    h_lambda,
    pairing,
    variational_derivative,
)
from .psido import EXACT, PsiDO, adler_trace, bracket, bracket_r0, compose, sts_r
from .scalar import FourierMat, FourierPoly, GaussRat


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""
    expect_nonzero: bool = False

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        tag = " (expected-nonzero)" if self.expect_nonzero else ""
        out = f"{status} {self.name}{tag}"
        if self.detail:
            out += f": {self.detail}"
        return out


def _zero(x) -> bool:
    if isinstance(x, GaussRat):
        return x.is_zero()
    return x.is_zero()


def identity(name: str, defects, dump=repr) -> Check:
    """Pass iff every defect vanishes; the first nonzero one is dumped."""
    count = 0
    for d in defects:
        count += 1
        if not _zero(d):
            return Check(name, False, f"counterexample #{count}: {dump(d)}")
    return Check(name, True, f"{count} cases")


def witness(name: str, defect, dump=repr) -> Check:
    if _zero(defect):
        return Check(name, False, "defect vanished on the stored counterexample", True)
    return Check(name, True, f"defect {dump(defect)}", True)


# random generators


def rand_gauss(rng: random.Random) -> GaussRat:
    re = rng.randint(-3, 3)
    im = rng.randint(-2, 2)
    if rng.random() < 0.2:
        return GaussRat(GaussRat(re) / rng.choice((2, 3)), im)
    return GaussRat(re, im)


def rand_poly(rng: random.Random, modes: int = 2) -> FourierPoly:
    k = rng.randint(1, 2)
    return FourierPoly({rng.randint(-modes, modes): rand_gauss(rng) for _ in range(k)})


def rand_mat(rng: random.Random, n: int, modes: int = 2) -> FourierMat:
    rows = []
    for _ in range(n):
        rows.append([rand_poly(rng, modes) if rng.random() < 0.7 else FourierPoly() for _ in range(n)])
    M = FourierMat(rows)
    if M.is_zero():
        return FourierMat.scalar(rand_poly(rng, modes), n)
    return M


def rand_psido(rng: random.Random, n: int, lo: int = -4, hi: int = 2, terms: int = 2) -> PsiDO:
    orders = rng.sample(range(lo, hi + 1), min(terms, hi - lo + 1))
    return PsiDO({k: rand_mat(rng, n) for k in orders}, n=n)


def rand_fcl(rng: random.Random, n: int, lo: int = -3, hi: int = 2, terms: int = 2) -> FClOp:
    return FClOp(rand_psido(rng, n, lo, hi, terms), rand_psido(rng, n, lo, hi, terms))


# suites


def suite_algebra(seed: int = 0, triples: int = 70) -> List[Check]:
    rng = random.Random(seed)
    assoc, unit, trace, fassoc, funit = [], [], [], [], []
    for t in range(triples):
        n = rng.choice((1, 2))
        A, B, C = (rand_psido(rng, n) for _ in range(3))
        assoc.append(compose(compose(A, B), C) - compose(A, compose(B, C)))
        one = PsiDO.identity(n)
        unit.append(compose(one, A) - A)
        unit.append(compose(A, one) - A)
        trace.append(adler_trace(bracket(A, B)))
        trace.append(adler_trace(bracket(B, C)))
        if t % 3 == 0:
            X, Y, Z = (rand_fcl(rng, n) for _ in range(3))
            fassoc.append(fcl_compose(fcl_compose(X, Y), Z) - fcl_compose(X, fcl_compose(Y, Z)))
            fone = FClOp.identity(n)
            funit.append(fcl_compose(fone, X) - X)
            funit.append(fcl_compose(X, fone) - X)
    return [
        identity("compose associativity", assoc),
        identity("compose unit laws", unit),
        identity("Tr([A,B]) = 0", trace),
        identity("fcl_compose associativity", fassoc),
        identity("fcl_compose unit laws", funit),
    ]


def _monomial(n: int, p: int, q: int, m: int, k: int) -> PsiDO:
    E = [[FourierPoly.mode(m) if (i, j) == (p, q) else FourierPoly() for j in range(n)] for i in range(n)]
    return PsiDO({k: FourierMat(E)}, n=n)


def _window(orders=range(-3, 3), modes=range(-2, 3), sizes=(1, 2)):
    for n in sizes:
        for p in range(n):
            for q in range(n):
                for m in modes:
                    for k in orders:
                        yield n, p, q, m, k


def suite_manin(seed: int = 0, samples: int = 40) -> List[Check]:
    rng = random.Random(seed)
    trace = lambda A, B: adler_trace(compose(A, B, floor=-1))
    do_iso, io_iso, fd_iso, fs_iso, ee_iso, eo_iso = [], [], [], [], [], []
    for _ in range(samples):
        n = rng.choice((1, 2))
        A, B = rand_psido(rng, n, 0, 2), rand_psido(rng, n, 0, 2)
        do_iso.append(trace(A, B))
        A, B = rand_psido(rng, n, -4, -1), rand_psido(rng, n, -4, -1)
        io_iso.append(trace(A, B))
        X, Y = rand_fcl(rng, n), rand_fcl(rng, n)
        pair = lambda U, V: res(fcl_compose(U, V, floor=-1))
        fd_iso.append(pair(fcl_split_D(X), fcl_split_D(Y)))
        fs_iso.append(pair(fcl_split_S(X), fcl_split_S(Y)))
        P, Q = rand_psido(rng, n, -3, 2), rand_psido(rng, n, -3, 2)
        ee_iso.append(pair(phi_ee(P), phi_ee(Q)))
        eo_iso.append(pair(FClOp(P, -P), FClOp(Q, -Q)))
    checks = [
        identity("DO isotropic under Adler pairing", do_iso),
        identity("IO isotropic under Adler pairing", io_iso),
        identity("FCl_D isotropic under res", fd_iso),
        identity("FCl_S isotropic under res", fs_iso),
        identity("ee isotropic under res", ee_iso),
        identity("eo isotropic under res", eo_iso),
    ]
    # nondegeneracy: each basis monomial has a partner in the complementary summand
    adler, fsplit, parity = [], [], []
    for n, p, q, m, k in _window():
        a = _monomial(n, p, q, m, k)
        b = _monomial(n, q, p, -m, -k - 1)
        adler.append(trace(a, b))
        z = PsiDO.zero(n)
        fsplit.append(res(fcl_compose(FClOp(a, z), FClOp(b, z), floor=-1)))
        fsplit.append(res(fcl_compose(FClOp(z, a), FClOp(z, b), floor=-1)))
        parity.append(res(fcl_compose(phi_ee(a), FClOp(b, -b), floor=-1)))
    for name, values in (("DO/IO", adler), ("FCl_D/FCl_S", fsplit), ("ee/eo", parity)):
        bad = [i for i, v in enumerate(values) if v.is_zero()]
        checks.append(Check(f"{name} nondegenerate on basis window", not bad,
                            f"{len(values)} monomials" if not bad else f"degenerate at index {bad[0]}"))
    return checks


def bracket_witnesses():
    """Stored counterexamples ``X = (e^{ix} d, 0)``, ``Y = (d, 0)``, ``Z = (0, e^{-ix} d)``."""
    X = p_plus(phi_ee(PsiDO.d(1, coeff=FourierPoly.mode(1))))
    Y = p_plus(phi_ee(PsiDO.d(1)))
    Z = FClOp(PsiDO.zero(), PsiDO.d(1, coeff=FourierPoly.mode(-1)))
    return X, Y, Z


def suite_brackets(seed: int = 0, samples: int = 25) -> List[Check]:
    rng = random.Random(seed)
    jac_plain, jac_eps, jac_r0, myb_eps, myb_sts = [], [], [], [], []
    for _ in range(samples):
        n = rng.choice((1, 2))
        X, Y, Z = (rand_fcl(rng, n, -2, 2) for _ in range(3))
        jac_plain.append(jacobi_defect(fcl_bracket, X, Y, Z))
        jac_eps.append(jacobi_defect(bracket_eps, X, Y, Z))
        myb_eps.append(myb_defect("eps", X, Y))
        A, B, C = (rand_psido(rng, n, -2, 2) for _ in range(3))
        jac_r0.append(jacobi_defect(bracket_r0, A, B, C))
        myb_sts.append(myb_defect(sts_r, A, B, bracket=bracket))
    checks = [
        identity("Jacobi [.,.]", jac_plain),
        identity("Jacobi [.,.]_eps", jac_eps),
        identity("Jacobi bracket_r0", jac_r0),
        identity("MYB defect eps", myb_eps),
        identity("MYB defect sts_r", myb_sts),
    ]
    X, Y, Z = bracket_witnesses()
    checks += [
        witness("MYB defect s on stored witness", myb_defect("s", X, Y)),
        witness("MYB defect s' on stored witness", myb_defect("sprime", X, Y)),
        witness("Jacobi [.,.]_s on stored witness", jacobi_defect(bracket_s, X, Y, Z)),
        witness("Jacobi [.,.]_s' on stored witness", jacobi_defect(bracket_sprime, X, Y, Z)),
    ]
    one = FClOp.identity()
    for r in ("eps", "s", "sprime"):
        for lam in (0, 1):
            checks.append(witness(f"Rota-Baxter defect {r} at lambda={lam}", rota_baxter_defect(r, one, one, lam)))
    return checks


J_TABLE_ANTI = ((J1, J2), (J1, J3), (J1, J4), (J2, J4), (J3, J4))


def j_counterexamples():
    """``f = e^{ix}``, ``g = 1``: ``(eps X, eps Y)`` for J2 and ``(X_+, Y_+)`` for J3."""
    X = PsiDO.d(1, coeff=FourierPoly.mode(1))
    Y = PsiDO.d(1)
    j2 = (eps_mul(phi_ee(X)), eps_mul(phi_ee(Y)))
    j3 = (p_plus(phi_ee(X)), p_plus(phi_ee(Y)))
    return j2, j3


def suite_jstructs(seed: int = 0, samples: int = 100) -> List[Check]:
    rng = random.Random(seed)
    Js = {"J1": J1, "J2": J2, "J3": J3, "J4": J4}
    ops = [rand_fcl(rng, rng.choice((1, 2))) for _ in range(10)]
    checks = []
    for name, J in Js.items():
        checks.append(identity(f"{name}^2 = -Id", [J(J(A)) + A for A in ops]))
    names = {id(v): k for k, v in Js.items()}
    for Ja, Jb in J_TABLE_ANTI:
        checks.append(identity(f"{names[id(Ja)]}{names[id(Jb)]} = -{names[id(Jb)]}{names[id(Ja)]}",
                               [Ja(Jb(A)) + Jb(Ja(A)) for A in ops]))
    checks.append(identity("J2J3 = J3J2", [J2(J3(A)) - J3(J2(A)) for A in ops]))
    checks.append(identity("J1J3 = J4", [J1(J3(A)) - J4(A) for A in ops]))
    nij = []
    for _ in range(samples):
        n = rng.choice((1, 2))
        u, v = rand_fcl(rng, n, -2, 2), rand_fcl(rng, n, -2, 2)
        nij.append(nijenhuis(J1, u, v))
    checks.append(identity("Nijenhuis(J1) = 0", nij))
    (u2, v2), (u3, v3) = j_counterexamples()
    checks.append(witness("Nijenhuis(J2) on f d, g d with f = e^{ix}, g = 1", nijenhuis(J2, u2, v2)))
    checks.append(witness("Nijenhuis(J3) on f d, g d with f = e^{ix}, g = 1", nijenhuis(J3, u3, v3)))
    return checks


def rand_diffpoly(rng: random.Random, k: int, n: int, smax: int = 2) -> DiffPoly:
    out = DiffPoly()
    for _ in range(rng.randint(1, 3)):
        term = DiffPoly({(): rand_poly(rng, 1)})
        for _ in range(rng.randint(1, 2)):
            j = rng.randint(1, k)
            term = term * DiffPoly.var(j, rng.randint(0, smax), rng.randrange(n), rng.randrange(n))
        out = out + term
    return out


def rand_point(rng: random.Random, k: int, n: int) -> LaxPoint:
    return LaxPoint(k, tuple(rand_mat(rng, n, 1) for _ in range(k)))


def suite_hamiltonian(seed: int = 0, samples: int = 50) -> List[Check]:
    rng = random.Random(seed)
    el, tangent, anti, ident, expanded, alt, skew = [], [], [], [], [], [], []
    for _ in range(samples):
        n = rng.choice((1, 2))
        k = rng.choice((1, 2, 3)) if n == 1 else rng.choice((1, 2))
        L = rand_point(rng, k, n)
        l1, l2 = rand_diffpoly(rng, k, n), rand_diffpoly(rng, k, n)
        for j in range(1, k + 1):
            for row in variational_derivative(l1.total_derivative(), j, n):
                el.extend(row)
        lam = rand_gauss(rng)
        X = Covector(tuple(rand_mat(rng, n, 1) for _ in range(k)))
        V = h_lambda(L, X, lam)
        top = V.ord_max
        tangent.append(GaussRat(0) if top == EXACT or top <= k - 1 else GaussRat(1))
        b12 = gd_bracket(l1, l2, lam, L)
        anti.append(b12 + gd_bracket(l2, l1, lam, L))
        X1, X2 = functional_to_covector(l1, L), functional_to_covector(l2, L)
        ident.append(b12 - pairing(h_lambda(L, X1, lam), X2))
        expanded.append(gd_bracket_expanded(l1, l2, lam, L) - gd_bracket(l2, l1, -lam, L))
        if len(alt) < 15:
            Y = Covector(tuple(rand_mat(rng, n, 1) for _ in range(k)))
            alt.append(gd2_covector_bracket(X, X, L))
            skew.append(gd2_covector_bracket(X, Y, L) + gd2_covector_bracket(Y, X, L))
    checks = [
        identity("Euler-Lagrange of total derivatives", el),
        identity("h_lambda tangent (order <= k-1)", tangent),
        identity("gd_bracket antisymmetry", anti),
        identity("gd_bracket = <H_lambda(X1), X2>", ident),
        identity("expanded formula = gd_bracket(l2, l1, -lambda)", expanded),
        identity("gd2 covector bracket alternating", alt),
        identity("gd2 covector bracket skew", skew),
    ]
    checks.append(_casimir_vs_kp())
    return checks


def acceptance_datum() -> PsiDO:
    """``L0 = d + e^{ix} d^-1``."""
    return PsiDO({1: FourierMat.identity(1), -1: FourierMat([[FourierPoly.mode(1)]])}, n=1)


def _casimir_vs_kp() -> Check:
    from .kp import flow_rhs, kp_solve

    sol = kp_solve(acceptance_datum(), 3, 4, 6)
    defects = []
    for k in range(1, 4):
        Lk = sol.L.restrict(sol.W - k)
        defects.append(casimir_flow(Lk, k) - flow_rhs(sol, k))
    return identity("casimir_flow = KP right-hand side", defects)


SUITES: Dict[str, Callable[[int], List[Check]]] = {
    "algebra": suite_algebra,
    "manin": suite_manin,
    "jstructs": suite_jstructs,
    "brackets": suite_brackets,
    "hamiltonian": suite_hamiltonian,
}


def run(suite: str, seed: int = 0) -> List[Check]:
    if suite == "all":
        out = []
        for name, fn in SUITES.items():
            out += [Check(f"[{name}] {c.name}", c.ok, c.detail, c.expect_nonzero) for c in fn(seed)]
        return out
    return SUITES[suite](seed)
