"""Normal closures in direct products of two groups.

The key fact is that commutators decouple: ``[(g,h), (w,1)] = ([g,w], 1)``,
so ``[(g,h), GxH] = [g,G] x [h,H]`` and

    <(g,h)>^(GxH) = <(g,h)> . ([g,G] x [h,H]).

Each factor therefore only has to answer one question: for which integers
``k`` does ``g'`` lie in ``g^k [g,G]``? The answer is a residue class
``k0 mod q`` (``q = 0`` meaning the single value ``k0``), and a pair lies in
the product closure when the two residue classes meet.

For two crystallographic factors there is also the lattice route in the
concatenated coordinates; for two small finite factors, the Cayley table
of the product. Tests check the three routes against each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

from . import crystal as cr
from . import finite as fg
from .intlattice import INFINITE, Lattice, hnf, index_in, solve_left

__all__ = [
    "CrystalFactor",
    "FiniteFactor",
    "DirectProduct",
    "ProductClosure",
    "CounterexampleReport",
    "factor_for",
    "product_closure",
    "product_closure_contains",
    "product_closure_equal",
    "lemma2_obstruction",
    "verify_prop8",
]

Residue = tuple[int, int]  # (k0, modulus); modulus 0 pins k = k0


def _meet(a: Residue | None, b: Residue | None) -> bool:
    if a is None or b is None:
        return False
    (k1, m1), (k2, m2) = a, b
    return (k1 - k2) % math.gcd(m1, m2) == 0 if (m1 or m2) else k1 == k2


class CrystalFactor:
    """Adapter exposing a crystallographic group to the product code."""

    kind = "crystal"

    def __init__(self, group: cr.CrystalGroup):
        self.group = group
        self.name = group.name

    def identity(self):
        return self.group.identity()

    def inv(self, g):
        return self.group.inv(g)

    def check(self, g) -> None:
        if not isinstance(g, cr.CrystalElement) or g.group is not self.group:
            raise ValueError(f"{g!r} is not an element of {self.name}")

    def conjugate_to_inverse(self, g) -> bool:
        return cr.conjugate_to_inverse(g)

    def closure_equal(self, g, h) -> bool:
        return cr.closure_equal(g, h)

    def cyclic_quotient_order(self, g):
        return cr.cyclic_quotient_order(g)

    def residue(self, g, w) -> Residue | None:
        """The k with ``w`` in ``g^k [g,G]``, as a residue class."""
        G = self.group
        N = cr.normal_closure(g)
        d = N.image_order
        for k in range(d):
            if G.hol_scale(g.hol, k) != w.hol:
                continue
            r = G.mul(w, G.power(g, -k)).trans
            if r not in N.NA:
                return None
            t = G.power(g, d).trans
            m = index_in(N.L, N.L.add_vectors([t]))  # order of t modulo L
            coeffs = solve_left([t, *N.L.basis], r)
            j = coeffs[0]
            if m is INFINITE:
                return k + d * j, 0
            return (k + d * j) % (d * m), d * m
        return None


class FiniteFactor:
    """Adapter for a Cayley-table group; elements are table indices."""

    kind = "finite"

    def __init__(self, group: fg.FiniteGroup, name: str = "F"):
        self.group = group
        self.name = name
        self._comm_cache: dict[int, frozenset] = {}

    def identity(self):
        return 0

    def inv(self, g):
        return int(self.group.inv[g])

    def check(self, g) -> None:
        if not isinstance(g, int) or not 0 <= g < self.group.order:
            raise ValueError(f"{g!r} is not an element of {self.name}")

    def conjugate_to_inverse(self, g) -> bool:
        return fg.are_conjugate(self.group, g, self.inv(g))

    def closure_equal(self, g, h) -> bool:
        return fg.normal_closure(self.group, g) == fg.normal_closure(self.group, h)

    def commutator_subgroup(self, g) -> frozenset:
        if g not in self._comm_cache:
            F = self.group
            comms = {F.commutator(g, x) for x in range(F.order)}
            self._comm_cache[g] = fg.normal_closure_of_set(F, comms)
        return self._comm_cache[g]

    def cyclic_quotient_order(self, g):
        return fg.closure_cyclic_quotient_order(self.group, g)

    def residue(self, g, w) -> Residue | None:
        F = self.group
        C = self.commutator_subgroup(g)
        q = self.cyclic_quotient_order(g)
        gk_inv = 0  # g^-k, starting at k = 0
        g_inv = int(F.inv[g])
        for k in range(q):
            if int(F.mul[w, gk_inv]) in C:
                return k, q
            gk_inv = int(F.mul[gk_inv, g_inv])
        return None


def factor_for(group, name: str | None = None):
    if isinstance(group, (CrystalFactor, FiniteFactor)):
        return group
    if isinstance(group, cr.CrystalGroup):
        return CrystalFactor(group)
    if isinstance(group, fg.FiniteGroup):
        return FiniteFactor(group, name or "F")
    raise TypeError(f"cannot use {type(group).__name__} as a product factor")


@dataclass(frozen=True)
class ProductClosure:
    """``<(g,h)>^(GxH)``; ``lattice`` is filled in for two crystal factors."""

    product: "DirectProduct" = field(repr=False)
    g: Any
    h: Any
    image_order: int | None = None
    L: Lattice | None = None
    NA: Lattice | None = None

    def contains(self, pair, route: str = "auto") -> bool:
        return self.product.contains(self, pair, route)

    def __contains__(self, pair) -> bool:
        return self.product.contains(self, pair)


class DirectProduct:
    def __init__(self, left, right, cap: int = fg.DEFAULT_CAP):
        self.left = factor_for(left, "left")
        self.right = factor_for(right, "right")
        self.cap = cap
        self.name = f"{self.left.name} x {self.right.name}"

    def _check_pair(self, pair) -> tuple:
        g, h = pair
        self.left.check(g)
        self.right.check(h)
        return g, h

    @property
    def both_crystal(self) -> bool:
        return self.left.kind == self.right.kind == "crystal"

    @property
    def both_finite(self) -> bool:
        return self.left.kind == self.right.kind == "finite"

    @cached_property
    def table(self) -> fg.FiniteGroup:
        """Cayley table of the product (finite factors only, within the cap)."""
        if not self.both_finite:
            raise ValueError("table route needs two finite factors")
        return fg.direct_product(self.left.group, self.right.group, cap=self.cap)

    def _index(self, g: int, h: int) -> int:
        return g * self.right.group.order + h

    def inverse(self, pair) -> tuple:
        g, h = self._check_pair(pair)
        return self.left.inv(g), self.right.inv(h)

    # -- closures ---------------------------------------------------------
    def commutator_module(self, g, h) -> Lattice:
        """``[g,G] x [h,H]`` in concatenated coordinates (crystal factors)."""
        if not self.both_crystal:
            raise ValueError("lattices exist only for two crystal factors")
        Lg, Lh = cr.commutator_module(g), cr.commutator_module(h)
        ng, nh = Lg.ambient_rank, Lh.ambient_rank
        rows = [r + (0,) * nh for r in Lg.basis] + [(0,) * ng + r for r in Lh.basis]
        return hnf(rows, ng + nh)

    def closure(self, pair) -> ProductClosure:
        g, h = self._check_pair(pair)
        if not self.both_crystal:
            return ProductClosure(self, g, h)
        dg, dh = cr.image_order(g), cr.image_order(h)
        d = math.lcm(dg, dh)
        L = self.commutator_module(g, h)
        t = g.group.power(g, d).trans + h.group.power(h, d).trans
        return ProductClosure(self, g, h, d, L, L.add_vectors([t]))

    def contains(self, N: ProductClosure, pair, route: str = "auto") -> bool:
        g2, h2 = self._check_pair(pair)
        if route == "auto":
            route = "lattice" if self.both_crystal else (
                "table" if self.both_finite and self._table_ok() else "residue")
        if route == "lattice":
            return self._contains_lattice(N, g2, h2)
        if route == "table":
            P = self.table
            return self._index(g2, h2) in fg.normal_closure(P, self._index(N.g, N.h))
        if route == "residue":
            return _meet(self.left.residue(N.g, g2), self.right.residue(N.h, h2))
        raise ValueError(f"unknown route {route!r}")

    def _table_ok(self) -> bool:
        return self.left.group.order * self.right.group.order <= self.cap

    def _contains_lattice(self, N: ProductClosure, g2, h2) -> bool:
        if N.NA is None:
            raise ValueError("lattice route needs two crystal factors")
        G, H = N.g.group, N.h.group
        for k in range(N.image_order):
            if G.hol_scale(N.g.hol, k) == g2.hol and H.hol_scale(N.h.hol, k) == h2.hol:
                r = G.mul(g2, G.power(N.g, -k)).trans + H.mul(h2, H.power(N.h, -k)).trans
                return r in N.NA
        return False

    def closure_equal(self, a, b, route: str = "auto") -> bool:
        return self.contains(self.closure(a), b, route) and self.contains(self.closure(b), a, route)

    def lemma2_obstruction(self, g, h) -> tuple[bool, bool, bool]:
        """(g ~ g^-1, h ~ h^-1, closures of (g,h) and (g,h^-1) differ)."""
        self._check_pair((g, h))
        i = self.left.conjugate_to_inverse(g)
        ii = self.right.conjugate_to_inverse(h)
        iii = not self.closure_equal((g, h), (g, self.right.inv(h)))
        return i, ii, iii


def product_closure(P: DirectProduct, g, h) -> ProductClosure:
    return P.closure((g, h))


def product_closure_contains(N: ProductClosure, pair, route: str = "auto") -> bool:
    return N.product.contains(N, pair, route)


def product_closure_equal(P: DirectProduct, a, b, route: str = "auto") -> bool:
    return P.closure_equal(a, b, route)


def lemma2_obstruction(P: DirectProduct, g, h) -> tuple[bool, bool, bool]:
    return P.lemma2_obstruction(g, h)


# ---------------------------------------------------------------------------


@dataclass
class CounterexampleReport:
    left_index: Any
    right_index: Any
    left_module_is_derived: bool
    left_conjugate_to_inverse: bool
    right_conjugate_to_inverse: bool
    left_misses: list
    right_misses: list
    closures_equal: bool
    closure_is_product: bool
    image_order_mod_MN: Any
    subdirect: bool
    flags: tuple

    @property
    def fails_magnus(self) -> bool:
        return self.flags == (False, False, False)

    @property
    def passed(self) -> bool:
        return (
            self.left_index == 4
            and self.right_index == 3
            and self.left_module_is_derived
            and self.closures_equal
            and self.closure_is_product
            and self.subdirect
            and self.fails_magnus
            and len(self.left_misses) == 4
            and len(self.right_misses) == 9
        )

    @property
    def verdict(self) -> str:
        return "G x H fails Magnus" if self.passed else "inconclusive"

    def as_dict(self) -> dict:
        return {
            "left_index": self.left_index,
            "right_index": self.right_index,
            "left_module_is_derived": self.left_module_is_derived,
            "left_conjugate_to_inverse": self.left_conjugate_to_inverse,
            "right_conjugate_to_inverse": self.right_conjugate_to_inverse,
            "left_misses": [[list(q), list(r)] for q, r in self.left_misses],
            "right_misses": [[list(q), list(r)] for q, r in self.right_misses],
            "closures_equal": self.closures_equal,
            "closure_is_product": self.closure_is_product,
            "image_order_mod_MN": self.image_order_mod_MN,
            "subdirect": self.subdirect,
            "lemma2_flags": list(self.flags),
            "verdict": self.verdict,
        }


def _inverse_misses(g: cr.CrystalElement) -> list:
    """For every holonomy representative q, the nonzero residue of
    ``trans(g^-1) - trans(g^q)`` modulo K. Each one rules out all
    conjugators in the coset ``q A``; together they cover G."""
    G = g.group
    target = g.inverse()
    K = G.K[g.hol]
    misses = []
    for q in G.holonomies:
        x = G.conjugate_by_rep(g, q)
        if x.hol != target.hol:
            continue
        residue = K.reduce(cr._sub(target.trans, x.trans))
        if any(residue):
            misses.append((q, residue))
    return misses


def verify_prop8() -> CounterexampleReport:
    G, H = cr.make_hw(), cr.make_gp(3)
    x = G.env["x"]
    e = H.env["e_inf"]
    M = cr.derived_lattice(G)
    Nx, Ne = cr.normal_closure(x), cr.normal_closure(e)
    N = Ne.L
    P = DirectProduct(G, H)
    closure = P.closure((x, e))
    # <(x,e)>^(GxH) = <x>^G x <e>^H: compare translation parts and images
    nx, ne = G.n, H.n
    prod_NA = hnf([r + (0,) * ne for r in Nx.NA.basis] + [(0,) * nx + r for r in Ne.NA.basis], nx + ne)
    is_product = (
        all(P.contains(closure, pair) for pair in ((x, H.identity()), (G.identity(), e)))
        and closure.NA == prod_NA
    )
    qx, qe = cr.cyclic_quotient_order(x), cr.cyclic_quotient_order(e)
    image_order = math.lcm(qx, qe)
    return CounterexampleReport(
        left_index=Nx.index_of(M),
        right_index=Ne.index_of(N),
        left_module_is_derived=Nx.L == M,
        left_conjugate_to_inverse=cr.conjugate_to_inverse(x),
        right_conjugate_to_inverse=cr.conjugate_to_inverse(e),
        left_misses=_inverse_misses(x),
        right_misses=_inverse_misses(e),
        closures_equal=P.closure_equal((x, e), (x, e.inverse())),
        closure_is_product=is_product,
        image_order_mod_MN=image_order,
        subdirect=(qx, qe) == (4, 3) and image_order == qx * qe,
        flags=P.lemma2_obstruction(x, e),
    )
