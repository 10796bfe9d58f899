"""The end-to-end verification suite, one function per numbered criterion.

Each check returns a ``detail`` dict on success and raises
:class:`CheckFailed` (an AssertionError) on a mathematical failure. Any
other exception is an internal error. :func:`run_all` collects results.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Callable

from . import crystal as cr
from . import finite as fg
from . import words
from .cyclo import CycloInt, is_unit
from .intlattice import hnf
from .matrices import MatrixOps
from .product import DirectProduct, verify_prop8


class CheckFailed(AssertionError):
    pass


def require(cond: bool, message: str) -> None:
    if not cond:
        raise CheckFailed(message)


@dataclass
class CheckResult:
    number: int
    name: str
    status: str  # "pass" | "fail" | "error"
    detail: dict = field(default_factory=dict)
    message: str = ""
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def line(self) -> str:
        tag = "PASS" if self.status == "pass" else "FAIL"
        message = f"internal error: {self.message}" if self.status == "error" else self.message
        extra = f": {message}" if message else ""
        return f"[{tag}] {self.number:2d} {self.name}{extra}"


@lru_cache(maxsize=None)
def cached_scan(group_name: str, bound: int, cosets=None, support=None) -> cr.ScanReport:
    G = cr.group_from_name(group_name)
    return cr.magnus_scan(G, bound, cosets=cosets and list(cosets), support=support and list(support))


# -- 1 ----------------------------------------------------------------------


def _phi_by_gcd(n: int) -> int:
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


def check_cyclic_law(limit: int = 200) -> dict:
    magnus = []
    for n in range(1, limit + 1):
        ok, _ = fg.has_magnus(fg.from_cyclic_factors([n]))
        require(ok == (n in (1, 2, 3, 4, 6)), f"C{n}: has_magnus={ok}")
        require(ok == (_phi_by_gcd(n) <= 2), f"C{n}: disagrees with phi(n) <= 2")
        if ok:
            magnus.append(n)
    return {"limit": limit, "magnus_orders": magnus}


# -- 2, 3 -------------------------------------------------------------------


def check_cyclic_products(limit: int = 12) -> dict:
    equal_pairs = 0
    for m, n in itertools.product(range(1, limit + 1), repeat=2):
        P = DirectProduct(fg.from_cyclic_factors([m]), fg.from_cyclic_factors([n]))
        x, y = (1 % m), (1 % n)
        eq = P.closure_equal((x, y), (x, int(P.right.group.inv[y])))
        eq_res = P.closure_equal((x, y), (x, int(P.right.group.inv[y])), route="residue")
        require(eq == eq_res, f"C{m} x C{n}: table and residue routes disagree")
        require(eq == (math.gcd(m, n) in (1, 2)), f"C{m} x C{n}: closure equality {eq}")
        equal_pairs += eq
    return {"limit": limit, "equal_pairs": equal_pairs}


def check_c4_c3() -> dict:
    C4, C3 = fg.from_cyclic_factors([4]), fg.from_cyclic_factors([3])
    require(fg.has_magnus(C4)[0] and fg.has_magnus(C3)[0], "C4 or C3 fails Magnus")
    P = fg.direct_product(C4, C3)
    ok, witness = fg.has_magnus(P)
    require(not ok and witness is not None, "C4 x C3 unexpectedly has the Magnus property")
    a, b = witness
    require(fg.normal_closure(P, a) == fg.normal_closure(P, b), "witness closures differ")
    require(not fg.are_conjugate(P, a, b) and not fg.are_conjugate(P, a, int(P.inv[b])),
            "witness elements are conjugate up to inversion")
    return {"witness": [list(divmod(a, 3)), list(divmod(b, 3))]}


# -- 4, 5, 6, 7 -------------------------------------------------------------


def check_hw_construction() -> dict:
    cr.HantzscheWendt()  # construction runs every self-check
    G = cr.make_hw()
    require(G.evaluate("[x,y]").trans == (-1, 1, 1), "[x,y] != x^-2 y^2 z^2")
    return {"relations": len(cr._HW_RELATIONS), "matrix_identities": len(cr._HW_DISPLAYED)}


def check_hw_abelianization() -> dict:
    G = cr.make_hw()
    abstract = cr.abelianization(G)
    Q = cr.finite_quotient(G, 4)
    require(Q.group.order == 256, f"G/4A has order {Q.group.order}")
    table = fg.abelian_invariants(Q.group)
    require(abstract.torsion == (4, 4) and abstract.free_rank == 0, f"abstract: {abstract}")
    require(table.torsion == (4, 4) and table.free_rank == 0, f"G/4A: {table}")
    return {"abstract": list(abstract.torsion), "quotient": list(table.torsion)}


def hw_expected_closure(a: int, b: int, c: int):
    v = (a, b, c)
    gens = [v]
    if sum(1 for t in v if t) >= 2:
        for k, t in enumerate(v):
            if t:
                gens.append(tuple(2 * t if i == k else 0 for i in range(3)))
    return hnf(gens, 3)


def check_hw_closures() -> dict:
    G = cr.make_hw()
    for a, b, c in itertools.product(range(-2, 3), repeat=3):
        N = cr.normal_closure(G.translation((a, b, c)))
        require(N.image_order == 1, "translation with nontrivial image")
        require(N.NA == hw_expected_closure(a, b, c), f"closure of ({a},{b},{c}) differs")
    scan = cached_scan("hw", 2)
    require(scan.ok, f"{len(scan.violations)} violations in the bound-2 scan")
    return {"formulas": 125, "scan_elements": scan.elements, "equal_closure_pairs": scan.equal_closure_pairs}


def _closure_image(Q: cr.CrystalQuotient, N: cr.NormalClosure) -> frozenset:
    """Image of ``<g>^G`` in ``G/mA`` from the lattice description."""
    G, m = Q.crystal, Q.m
    out = set()
    powers = [G.power(N.rep, k) for k in range(N.image_order)]
    for coeffs in itertools.product(range(m), repeat=N.NA.rank):
        t = tuple(sum(c * r[i] for c, r in zip(coeffs, N.NA.basis)) for i in range(G.n))
        ell = G.translation(t)
        for gk in powers:
            out.add(Q.project(G.mul(gk, ell)))
    return frozenset(out)


def check_quotient_oracle(moduli=(4, 8)) -> dict:
    G = cr.make_hw()
    box = list(cr.scan_elements(G, 1))
    closures = {g: cr.normal_closure(g) for g in box}
    out = {"box": len(box)}
    for m in moduli:
        Q = cr.finite_quotient(G, m)
        F = Q.group
        images = {}
        for g in box:
            img = _closure_image(Q, closures[g])
            require(img == fg.normal_closure(F, Q.project(g)), f"G/{m}A: closure image of {g} disagrees")
            images[g] = img
        for g, h in itertools.combinations(box, 2):
            if cr.closure_equal(g, h):
                require(images[g] == images[h], f"G/{m}A: {g}, {h} have equal closures, different images")
            if cr.are_conjugate(g, h):
                require(fg.are_conjugate(F, Q.project(g), Q.project(h)), f"{g} ~ {h} not seen in G/{m}A")
        out[f"order_G/{m}A"] = F.order
    return out


# -- 8, 9, 10, 11 -----------------------------------------------------------


def check_h_construction() -> dict:
    cr.GeneralizedHW(3)
    H = cr.make_gp(3)
    require(H.evaluate("u^3").trans == (-2, -1, 0, 0, 0, 0, 0, 0), "u^3 != e_inf^-2 he_inf^-1")
    require(H.evaluate("[u,v]").trans == (1, 0, 1, 0, 1, 0, 1, 0), "[u,v] != e_inf e0 e1 e2")
    table = sum(len(row) for row in cr._H_CONJ_TABLE.values())
    require(table == 16, "conjugation table incomplete")
    return {"table_entries": table}


def _h_vec(*blocks) -> tuple:
    """Concatenate four Z[omega] entries given as (c0, c1) pairs."""
    return tuple(c for blk in blocks for c in blk)


PI = (-1, 1)
ONE, W, ZERO = (1, 0), (0, 1), (0, 0)
THREE, THREE_W = (3, 0), (0, 3)


def _neg(c):
    return (-c[0], -c[1])


def h_expected_modules() -> dict:
    """The four reference module lattices, written out over Z-bases of Z[omega]."""
    pi = CycloInt(3, PI)
    pi_w = (pi * CycloInt(3, W)).coeffs

    def pis(pos):
        return [_h_vec(*[PI if i == pos else ZERO for i in range(4)]),
                _h_vec(*[pi_w if i == pos else ZERO for i in range(4)])]

    def threes(positions):
        return [_h_vec(*[t if i == pos else ZERO for i in range(4)]) for pos in positions for t in (THREE, THREE_W)]

    full = [_h_vec(*[t if i == 0 else ZERO for i in range(4)]) for t in (ONE, W)]
    return {
        (1, 0, 0, 0): hnf(full, 8),
        (1, 1, 0, 0): hnf([_h_vec(ONE, ONE, ZERO, ZERO)] + pis(0) + pis(1), 8),
        (1, 1, 1, 0): hnf(
            [_h_vec(ONE, ONE, ONE, ZERO), _h_vec(ZERO, PI, PI, ZERO), _h_vec(PI, ZERO, PI, ZERO)]
            + threes([0, 1, 2]), 8),
        (1, 1, 1, 1): hnf(
            [_h_vec(ONE, ONE, ONE, ONE), _h_vec(ZERO, PI, PI, PI), _h_vec(PI, ZERO, PI, _neg(PI))]
            + threes([0, 1, 2, 3]), 8),
    }


def check_h_modules() -> dict:
    H = cr.make_gp(3)
    for key, expected in h_expected_modules().items():
        g = H.translation(_h_vec(*[ONE if k else ZERO for k in key]))
        N = cr.normal_closure(g)
        require(N.NA == expected, f"closure of {key} differs from the reference module")
    return {"modules": 4}


def check_h_abelianization() -> dict:
    H = cr.make_gp(3)
    inv = cr.abelianization(H)
    require(inv.torsion == (3,) * 5 and inv.free_rank == 0, f"abelianization {inv}")
    require(cr.derived_lattice(H) == cr.equal_augmentation_lattice(H), "[H,H] lattice mismatch")
    return {"torsion": list(inv.torsion)}


def check_automorphisms() -> dict:
    out = {}
    for p in (3, 5):
        G = cr.make_gp(p)
        s, si, t = cr.sigma(G), cr.sigma_inverse(G), cr.tau(G)
        for phi in (s, si, t):
            phi.check_relators()
        sample = [G.identity(), *G.hol_gens] + [G.basis_element(k) for k in range(G.n)]
        sample += [G.mul(a, b) for a, b in itertools.product(sample[:3], sample[3:6])]
        for g in sample:
            require(si(s(g)) == g and s(si(g)) == g, f"sigma not inverted on {g}")
            require(t(t(g)) == g, f"tau is not an involution on {g}")
        out[f"p{p}"] = len(sample)
    return out


# -- 12, 13, 14 -------------------------------------------------------------


def check_counterexample() -> dict:
    report = verify_prop8()
    require(report.left_index == 4, f"left index {report.left_index}")
    require(report.right_index == 3, f"right index {report.right_index}")
    require(not report.left_conjugate_to_inverse, "x ~ x^-1 in G")
    require(not report.right_conjugate_to_inverse, "e_inf ~ e_inf^-1 in H")
    require(report.closures_equal, "product closures differ")
    require(report.passed, "Prop8 report incomplete")
    return report.as_dict()


def check_p5_failure() -> dict:
    G = cr.make_gp(5)
    one_plus = CycloInt(5, (1, 1))
    require(one_plus.norm() == 1 and is_unit(one_plus), "1 + zeta is not a unit")
    e0 = G.translation(G.block_vector({"0": 1}))
    f0 = G.translation(G.block_vector({"0": one_plus}))
    M0 = hnf([G.block_vector({"0": CycloInt.zeta_power(5, k)}) for k in range(4)], G.n)
    N1, N2 = cr.normal_closure(e0), cr.normal_closure(f0)
    require(N1.NA == M0 and N2.NA == M0, "closures are not M_0")
    require(cr.closure_equal(e0, f0), "closures differ")
    cls = {G.conjugate_by_rep(e0, q) for q in G.holonomies}
    require(len(cls) <= 25, "class of e0 too big")
    require(not cr.are_conjugate(f0, e0) and not cr.are_conjugate(f0, e0.inverse()),
            "(1+zeta)e0 is conjugate to e0 or its inverse")
    cosets, support = cr.default_scan_region(G)
    scan = cached_scan("gp:5", 1, tuple(map(tuple, cosets)), tuple(support))
    require(len(scan.violations) >= 1, "no violation found")
    a, b = scan.violations[0]
    return {"class_size": len(cls), "violations": len(scan.violations), "first": [str(a), str(b)]}


def check_scans() -> dict:
    t_only = cached_scan("hw", 3, ((0, 0),))
    all_cosets = cached_scan("hw", 2)
    h = cached_scan("g3", 1)
    for name, s in (("hw bound 3 (A)", t_only), ("hw bound 2", all_cosets), ("g3 bound 1", h)):
        require(s.ok, f"{name}: {len(s.violations)} violations")
    return {"hw_translation_bound3": t_only.elements, "hw_bound2": all_cosets.elements, "g3_bound1": h.elements}


# -- 15, 16 -----------------------------------------------------------------


def p3_catalog() -> dict[str, fg.FiniteGroup]:
    return {
        "C3": fg.from_cyclic_factors([3]),
        "C9": fg.from_cyclic_factors([9]),
        "C3xC3": fg.from_cyclic_factors([3, 3]),
        "heis3": fg.heisenberg(3),
    }


def check_p_group_products() -> dict:
    cat = p3_catalog()
    magnus = [k for k, G in cat.items() if fg.has_magnus(G)[0]]
    require("C3" in magnus, "C3 fails Magnus")
    products = []
    for a, b in itertools.combinations_with_replacement(magnus, 2):
        P = fg.direct_product(cat[a], cat[b])
        require(fg.has_magnus(P)[0], f"{a} x {b} fails Magnus")
        products.append(f"{a}x{b}")
    for name in ("C9", "C3xC3", "heis3"):
        G = cat[name]
        for x in range(1, G.order):
            Q, image = fg.lemma5_central_quotient(G, x)
            require(image != 0 and image in Q.center(), f"{name}: element {x} not centralised")
    return {"magnus_factors": magnus, "products": products}


def corpus(name: str) -> list[str]:
    path = resources.files("magnus") / "data" / f"corpus_{name}.txt"
    with resources.as_file(path) as p:
        return words.read_corpus(p)


def check_parser_corpus() -> dict:
    total = 0
    for name, G in (("hw", cr.make_hw()), ("g3", cr.make_gp(3))):
        menv = {k: v.to_matrix() for k, v in G.env.items()}
        ops = MatrixOps(G.rep_dim)
        for text in corpus(name):
            w = words.parse(text)
            require(words.parse(words.to_text(w)) == w, f"round trip failed for {text!r}")
            direct = G.evaluate(w)
            via_matrix = G.from_matrix(words.evaluate(w, menv, ops))
            require(direct == via_matrix, f"{text!r}: normal form and matrix routes disagree")
            total += 1
    require(total >= 30, f"corpus holds only {total} words")
    return {"words": total}


CHECKS: list[tuple[int, str, Callable[[], dict]]] = [
    (1, "cyclic groups: Magnus iff n in {1,2,3,4,6}", check_cyclic_law),
    (2, "C_m x C_n closures of xy and xy^-1", check_cyclic_products),
    (3, "C4 x C3 fails Magnus", check_c4_c3),
    (4, "G construction self-checks", check_hw_construction),
    (5, "G abelianization C4 x C4", check_hw_abelianization),
    (6, "G closure formulas and bound-2 scan", check_hw_closures),
    (7, "G closures against G/4A and G/8A", check_quotient_oracle),
    (8, "H construction self-checks", check_h_construction),
    (9, "H module lattices", check_h_modules),
    (10, "H abelianization C3^5", check_h_abelianization),
    (11, "sigma and tau for p = 3, 5", check_automorphisms),
    (12, "G x H fails Magnus", check_counterexample),
    (13, "G_5 fails Magnus", check_p5_failure),
    (14, "bounded scans of G and H", check_scans),
    (15, "finite p-group products", check_p_group_products),
    (16, "word corpus", check_parser_corpus),
]


def run_check(number: int) -> CheckResult:
    num, name, fn = next(c for c in CHECKS if c[0] == number)
    start = time.perf_counter()
    try:
        detail = fn()
        status, message = "pass", ""
    except AssertionError as exc:  # CheckFailed and construction SelfCheckError
        detail, status, message = {}, "fail", str(exc)
    except Exception as exc:  # noqa: BLE001 - reported as internal error
        detail, status, message = {}, "error", f"{type(exc).__name__}: {exc}"
    return CheckResult(num, name, status, detail, message, time.perf_counter() - start)


def run_all() -> list[CheckResult]:
    return [run_check(num) for num, _, _ in CHECKS]
