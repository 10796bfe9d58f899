"""Exact computation in the crystallographic groups G = G_2 and G_p (p odd).

Every element is stored in normal form ``rep(h) * b`` where ``h = (i, j)``
is its holonomy class in ``C_p x C_p``, ``rep(i, j) = s1^i s2^j`` for the
two holonomy generators (``x, y`` for p = 2, ``u, v`` for odd p) and ``b``
is an integer vector in the translation lattice Z^n.

Coordinates of the translation lattice:

* p = 2: ``(a, b, c)`` stands for ``x^(2a) y^(2b) z^(2c)`` with ``z = xy``.
* odd p: blocks ordered ``(inf, 0, 1, ..., p-1)``, each block holding the
  coefficients of an element of Z[zeta] over ``1, zeta, ..., zeta^(p-2)``.

The group law is read off the faithful affine matrix representations once,
at construction: the action matrices ``rho(h)`` and the 2-cocycle on
holonomy representatives are both extracted from matrix products, after
which multiplication is integer arithmetic. ``to_matrix``/``from_matrix``
give the representation route back for cross-checking.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cache, cached_property
from typing import Iterable, Sequence

import numpy as np

from . import words
from .cyclo import CycloInt, CycloRat, SUPPORTED_PRIMES, p_over_pi, pi_element
from .finite import DEFAULT_CAP, FiniteGroup, OrderCapExceeded
from .intlattice import (
    INFINITE,
    AbelianInvariants,
    Lattice,
    hnf,
    index_in,
    smith,
    solve_left,
)
from .matrices import identity as mat_identity
from .matrices import int_mat_mul, mat_eq, mat_inv, mat_mul, mat_pow, vecmat

__all__ = [
    "SelfCheckError",
    "CrystalGroup",
    "CrystalElement",
    "NormalClosure",
    "ScanReport",
    "make_hw",
    "make_gp",
    "group_from_name",
    "commutator_module",
    "normal_closure",
    "closure_contains",
    "closure_equal",
    "conjugates_lattice",
    "find_conjugator",
    "are_conjugate",
    "conjugate_to_inverse",
    "cyclic_quotient_order",
    "derived_lattice",
    "equal_augmentation_lattice",
    "abelianization",
    "Automorphism",
    "automorphism_sigma",
    "automorphism_tau",
    "magnus_scan",
    "finite_quotient",
]

Hol = tuple[int, int]
Vec = tuple[int, ...]


class SelfCheckError(AssertionError):
    """A construction-time identity failed; the group data is inconsistent."""


def _check(cond: bool, what: str) -> None:
    if not cond:
        raise SelfCheckError(what)


def _add(*vs: Sequence[int]) -> Vec:
    return tuple(map(sum, zip(*vs)))


def _neg(v: Sequence[int]) -> Vec:
    return tuple(-x for x in v)


def _sub(a: Sequence[int], b: Sequence[int]) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


@dataclass(frozen=True)
class CrystalElement:
    group: "CrystalGroup" = field(repr=False)
    hol: Hol
    trans: Vec

    def __mul__(self, other: "CrystalElement") -> "CrystalElement":
        return self.group.mul(self, other)

    def inverse(self) -> "CrystalElement":
        return self.group.inv(self)

    def __pow__(self, k: int) -> "CrystalElement":
        return self.group.power(self, k)

    def conjugate(self, w: "CrystalElement") -> "CrystalElement":
        """``w^-1 * self * w``."""
        return self.group.conjugate(self, w)

    def is_translation(self) -> bool:
        return self.hol == (0, 0)

    def is_identity(self) -> bool:
        return self.hol == (0, 0) and not any(self.trans)

    def to_matrix(self):
        return self.group.to_matrix(self)

    def __str__(self) -> str:
        return self.group.format(self)


class CrystalGroup:
    """Common machinery; subclasses supply the representation."""

    p: int
    n: int
    name: str
    hol_gen_names: tuple[str, str]
    rep_dim: int

    # -- representation hooks -------------------------------------------
    def generator_matrices(self) -> tuple[list, list]:
        raise NotImplementedError

    def translation_vector(self, trans: Sequence[int]) -> list:
        """Translation part (row vector) of the matrix of the element ``b``."""
        raise NotImplementedError

    def trans_from_translation(self, vec: Sequence) -> Vec:
        raise NotImplementedError

    def basis_labels(self) -> list[str]:
        raise NotImplementedError

    # -- construction -----------------------------------------------------
    def _build(self) -> None:
        p, n = self.p, self.n
        self.holonomies: list[Hol] = [(i, j) for i in range(p) for j in range(p)]
        S1, S2 = self.generator_matrices()
        self.gen_matrices = (S1, S2)
        self.rep_matrices = {
            (i, j): mat_mul(mat_pow(S1, i), mat_pow(S2, j)) for i, j in self.holonomies
        }
        self._hol_by_linear = {}
        for h, R in self.rep_matrices.items():
            key = self._linear_key(R)
            _check(key not in self._hol_by_linear, "holonomy representatives are not distinct")
            self._hol_by_linear[key] = h
        unit = [tuple(int(k == c) for c in range(n)) for k in range(n)]
        self.rho: dict[Hol, tuple[Vec, ...]] = {}
        for h, R in self.rep_matrices.items():
            diag = [R[k][k] for k in range(1, self.rep_dim)]
            self.rho[h] = tuple(
                self.trans_from_translation([a * d for a, d in zip(self.translation_vector(e), diag)])
                for e in unit
            )
        self._zero = (0,) * n
        self.cocycle: dict[tuple[Hol, Hol], Vec] = {}
        for h1, h2 in itertools.product(self.holonomies, repeat=2):
            M = mat_mul(self.rep_matrices[h1], self.rep_matrices[h2])
            h = self.hol_add(h1, h2)
            _check(self._linear_key(M) == self._linear_key(self.rep_matrices[h]), "holonomy is not a homomorphism")
            diff = [a - b for a, b in zip(M[0][1:], self.rep_matrices[h][0][1:])]
            self.cocycle[h1, h2] = self.trans_from_translation(diff)
        # conjugation of a representative: rep(q)^-1 rep(h) rep(q) = rep(h) * c
        self.conj_shift: dict[tuple[Hol, Hol], Vec] = {}
        ident = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
        self.K: dict[Hol, Lattice] = {}
        for h in self.holonomies:
            self.K[h] = hnf(
                [_sub(ident[k], self.rho[h][k]) for k in range(n)], n
            )
            for q in self.holonomies:
                rq = self.element(q, self._zero)
                self.conj_shift[h, q] = self.conjugate(self.element(h, self._zero), rq).trans
        self._ident_matrix = ident
        self.rho_stack = np.array([self.rho[q] for q in self.holonomies], dtype=np.int64)

    def _linear_key(self, M) -> tuple:
        return tuple(M[k][k] for k in range(1, self.rep_dim))

    def hol_add(self, h1: Hol, h2: Hol) -> Hol:
        return ((h1[0] + h2[0]) % self.p, (h1[1] + h2[1]) % self.p)

    def hol_scale(self, h: Hol, k: int) -> Hol:
        return ((h[0] * k) % self.p, (h[1] * k) % self.p)

    # -- elements -----------------------------------------------------------
    def element(self, hol: Hol, trans: Sequence[int] = ()) -> CrystalElement:
        trans = tuple(int(t) for t in trans) if trans else self._zero_vec()
        if len(trans) != self.n:
            raise ValueError(f"translation vector must have length {self.n}")
        return CrystalElement(self, (hol[0] % self.p, hol[1] % self.p), trans)

    def _zero_vec(self) -> Vec:
        return (0,) * self.n

    def identity(self) -> CrystalElement:
        return CrystalElement(self, (0, 0), self._zero_vec())

    def translation(self, trans: Sequence[int]) -> CrystalElement:
        return self.element((0, 0), trans)

    def basis_element(self, k: int) -> CrystalElement:
        return self.translation(tuple(int(c == k) for c in range(self.n)))

    @cached_property
    def hol_gens(self) -> tuple[CrystalElement, CrystalElement]:
        return self.element((1, 0)), self.element((0, 1))

    def holonomy_rep(self, h: Hol) -> CrystalElement:
        return self.element(h)

    def _same(self, *elements: CrystalElement) -> None:
        for e in elements:
            if e.group is not self:
                raise ValueError(f"element of {e.group.name} used in {self.name}")

    def mul(self, a: CrystalElement, b: CrystalElement) -> CrystalElement:
        self._same(a, b)
        hol = self.hol_add(a.hol, b.hol)
        moved = vecmat(a.trans, self.rho[b.hol])
        trans = tuple(c + m + t for c, m, t in zip(self.cocycle[a.hol, b.hol], moved, b.trans))
        return CrystalElement(self, hol, trans)

    def inv(self, a: CrystalElement) -> CrystalElement:
        self._same(a)
        h = a.hol
        hi = ((-h[0]) % self.p, (-h[1]) % self.p)
        moved = vecmat(a.trans, self.rho[hi])
        trans = tuple(-c - m for c, m in zip(self.cocycle[h, hi], moved))
        return CrystalElement(self, hi, trans)

    def power(self, a: CrystalElement, k: int) -> CrystalElement:
        if k < 0:
            a, k = self.inv(a), -k
        result = self.identity()
        while k:
            if k & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            k >>= 1
        return result

    def conjugate(self, a: CrystalElement, w: CrystalElement) -> CrystalElement:
        return self.mul(self.mul(self.inv(w), a), w)

    def commutator(self, a: CrystalElement, b: CrystalElement) -> CrystalElement:
        return self.mul(self.mul(self.inv(a), self.inv(b)), self.mul(a, b))

    def conjugate_by_rep(self, a: CrystalElement, q: Hol) -> CrystalElement:
        """``rep(q)^-1 * a * rep(q)`` via the precomputed tables."""
        shift = self.conj_shift[a.hol, q]
        moved = vecmat(a.trans, self.rho[q])
        return CrystalElement(self, a.hol, tuple(s + m for s, m in zip(shift, moved)))

    def act(self, trans: Sequence[int], h: Hol) -> Vec:
        """Conjugation action of the holonomy class ``h`` on the lattice."""
        return vecmat(trans, self.rho[h])

    # -- words ------------------------------------------------------------
    @cached_property
    def env(self) -> dict[str, CrystalElement]:
        raise NotImplementedError

    def evaluate(self, w) -> CrystalElement:
        return words.evaluate(w, self.env, self)

    # -- representation route ---------------------------------------------
    def to_matrix(self, g: CrystalElement):
        R = self.rep_matrices[g.hol]
        M = [list(r) for r in R]
        M[0] = [M[0][0]] + [a + b for a, b in zip(R[0][1:], self.translation_vector(g.trans))]
        return M

    def from_matrix(self, M) -> CrystalElement:
        key = self._linear_key(M)
        if key not in self._hol_by_linear:
            raise ValueError("matrix is not in the image of the representation")
        h = self._hol_by_linear[key]
        R = self.rep_matrices[h]
        for i in range(1, self.rep_dim):
            for j in range(self.rep_dim):
                if M[i][j] != R[i][j]:
                    raise ValueError("matrix is not in the image of the representation")
        if M[0][0] != 1:
            raise ValueError("matrix is not in the image of the representation")
        diff = [a - b for a, b in zip(M[0][1:], R[0][1:])]
        return self.element(h, self.trans_from_translation(diff))

    # -- display ----------------------------------------------------------
    def format(self, g: CrystalElement) -> str:
        s1, s2 = self.hol_gen_names
        parts = []
        for name, e in ((s1, g.hol[0]), (s2, g.hol[1])):
            if e == 1:
                parts.append(name)
            elif e:
                parts.append(f"{name}^{e}")
        parts.append(self.format_trans(g.trans))
        return " . ".join(parts)

    def format_trans(self, trans: Sequence[int]) -> str:
        return "(" + ",".join(str(t) for t in trans) + ")"

    def __repr__(self):
        return f"<CrystalGroup {self.name}: p={self.p}, lattice rank {self.n}>"


# ---------------------------------------------------------------------------
# G = G_2, presentation <x, y | x^-1 y^2 x = y^-2, y^-1 x^2 y = x^-2>

_F = Fraction

_HW_X = [
    [_F(1), _F(-1, 2), _F(0), _F(0)],
    [_F(0), _F(1), _F(0), _F(0)],
    [_F(0), _F(0), _F(-1), _F(0)],
    [_F(0), _F(0), _F(0), _F(-1)],
]
_HW_Y = [
    [_F(1), _F(0), _F(1, 2), _F(1, 2)],
    [_F(0), _F(-1), _F(0), _F(0)],
    [_F(0), _F(0), _F(1), _F(0)],
    [_F(0), _F(0), _F(0), _F(-1)],
]


def _unipotent(first_row: Sequence[int]) -> list:
    M = mat_identity(len(first_row) + 1)
    M[0] = [1] + list(first_row)
    return M


# reference values of X^2, Y^2, (XY)^2 and [X, Y]
_HW_DISPLAYED = {
    "X^2": _unipotent([-1, 0, 0]),
    "Y^2": _unipotent([0, 1, 0]),
    "(XY)^2": _unipotent([0, 0, 1]),
    "[X,Y]": _unipotent([1, 1, 1]),
}

_HW_RELATIONS = [
    ("x^-1 y^2 x", "y^-2"),
    ("y^-1 x^2 y", "x^-2"),
    ("x^-1 z^2 x", "z^-2"),
    ("z^-1 x^2 z", "x^-2"),
    ("y^-1 z^2 y", "z^-2"),
    ("z^-1 y^2 z", "y^-2"),
    ("[x,y]", "x^-2 y^2 z^2"),
]


class HantzscheWendt(CrystalGroup):
    p = 2
    n = 3
    rep_dim = 4
    name = "hw"
    hol_gen_names = ("x", "y")

    def __init__(self):
        self._build()
        self._self_check()

    def generator_matrices(self):
        return [list(r) for r in _HW_X], [list(r) for r in _HW_Y]

    def translation_vector(self, trans):
        a, b, c = trans
        return [Fraction(-a), Fraction(b), Fraction(c)]

    def trans_from_translation(self, vec):
        vals = [-vec[0], vec[1], vec[2]]
        out = []
        for v in vals:
            v = Fraction(v)
            if v.denominator != 1:
                raise ValueError(f"translation {vec} is not in the lattice A")
            out.append(int(v))
        return tuple(out)

    def basis_labels(self):
        return ["x^2", "y^2", "z^2"]

    def format_trans(self, trans):
        return "x^{2*%d} y^{2*%d} z^{2*%d}" % tuple(trans)

    @cached_property
    def env(self):
        x, y = self.hol_gens
        return {"x": x, "y": y, "z": self.mul(x, y)}

    def _self_check(self):
        x, y = self.hol_gens
        z = self.env["z"]
        _check(self.mul(x, x).trans == (1, 0, 0) and self.mul(x, x).is_translation(), "x^2 is not (1,0,0)")
        _check(self.mul(y, y).trans == (0, 1, 0) and self.mul(y, y).is_translation(), "y^2 is not (0,1,0)")
        _check(self.mul(z, z).trans == (0, 0, 1) and self.mul(z, z).is_translation(), "z^2 is not (0,0,1)")
        for lhs, rhs in _HW_RELATIONS:
            _check(self.evaluate(lhs) == self.evaluate(rhs), f"relation {lhs} = {rhs} fails")
        X, Y = self.gen_matrices
        XY = mat_mul(X, Y)
        computed = {
            "X^2": mat_mul(X, X),
            "Y^2": mat_mul(Y, Y),
            "(XY)^2": mat_mul(XY, XY),
            "[X,Y]": mat_mul(mat_mul(mat_inv(X), mat_inv(Y)), XY),
        }
        for key, M in computed.items():
            _check(mat_eq(M, _HW_DISPLAYED[key]), f"matrix identity {key} fails")
        _check(self.evaluate("[x,y]").trans == (-1, 1, 1), "[x,y] is not x^-2 y^2 z^2")
        _check(self.rho[1, 0] == ((1, 0, 0), (0, -1, 0), (0, 0, -1)), "action of x is not diag(1,-1,-1)")
        _check(self.rho[0, 1] == ((-1, 0, 0), (0, 1, 0), (0, 0, -1)), "action of y is not diag(-1,1,-1)")


# ---------------------------------------------------------------------------
# G_p for odd p, H = G_3


def block_names(p: int) -> list[str]:
    return ["inf"] + [str(i) for i in range(p)]


def mult_matrix(c: CycloInt) -> tuple[Vec, ...]:
    """Integer matrix of multiplication by ``c`` on Z[zeta] (row convention)."""
    p = c.p
    rows = []
    for k in range(p - 1):
        e = CycloInt(p, tuple(int(i == k) for i in range(p - 1)))
        rows.append((e * c).coeffs)
    return tuple(rows)


def _block_diag(blocks: Sequence[Sequence[Sequence[int]]]) -> tuple[Vec, ...]:
    n = sum(len(b) for b in blocks)
    rows = []
    off = 0
    for b in blocks:
        for r in b:
            rows.append((0,) * off + tuple(r) + (0,) * (n - off - len(r)))
        off += len(b)
    return tuple(rows)


# conjugation table for H: a^z = c_{a,z}
_H_CONJ_TABLE = {
    "u": {
        "e_inf": "e_inf", "he_inf": "he_inf",
        "e0": "he0", "he0": "e0^-1 he0^-1",
        "e1": "he1", "he1": "e1^-1 he1^-1",
        "e2": "he2", "he2": "e2^-1 he2^-1",
    },
    "v": {
        "e_inf": "he_inf", "he_inf": "e_inf^-1 he_inf^-1",
        "e0": "e0", "he0": "he0",
        "e1": "he1", "he1": "e1^-1 he1^-1",
        "e2": "e2^-1 he2^-1", "he2": "e2",
    },
}

_H_POWER_RELATIONS = [
    ("u^3", "e_inf^-2 he_inf^-1"),
    ("v^3", "e0^2 he0"),
    ("[u,v]", "e_inf e0 e1 e2"),
]

_H_LATTICE_GENS = ["e_inf", "he_inf", "e0", "he0", "e1", "he1", "e2", "he2"]


class GeneralizedHW(CrystalGroup):
    rep_dim: int
    hol_gen_names = ("u", "v")

    def __init__(self, p: int):
        if p not in SUPPORTED_PRIMES:
            raise ValueError(f"unsupported prime p={p}; choose from {sorted(SUPPORTED_PRIMES)}")
        self.p = p
        self.n = (p - 1) * (p + 1)
        self.rep_dim = p + 2
        self.name = "g3" if p == 3 else f"gp:{p}"
        self.blocks = block_names(p)
        self._build()
        self._self_check()

    def zeta(self, k: int = 1) -> CycloInt:
        return CycloInt.zeta_power(self.p, k)

    def generator_matrices(self):
        p = self.p
        one = CycloRat.from_int(p, 1)
        zero = CycloRat.from_int(p, 0)
        zeta = CycloRat.zeta_power(p, 1)
        inv_pi = 1 / pi_element(p)
        d = self.rep_dim
        U = mat_identity(d, one, zero)
        V = mat_identity(d, one, zero)
        U[0][1] = inv_pi
        for k in range(2, d):
            U[k][k] = zeta
            V[0][k] = -inv_pi
        V[1][1] = zeta
        for i in range(1, p):
            V[2 + i][2 + i] = CycloRat.zeta_power(p, i)
        return U, V

    def translation_vector(self, trans):
        m = self.p - 1
        return [CycloRat(self.p, trans[b * m:(b + 1) * m]) for b in range(self.p + 1)]

    def trans_from_translation(self, vec):
        out = []
        for entry in vec:
            if isinstance(entry, (int, Fraction)):
                entry = CycloRat.from_int(self.p, entry)
            elif isinstance(entry, CycloInt):
                entry = entry.to_rat()
            try:
                out.extend(entry.to_int().coeffs)
            except ValueError:
                raise ValueError(f"translation {vec} is not in the lattice") from None
        return tuple(out)

    def block_vector(self, values: dict) -> Vec:
        """Lattice vector from ``{block_name: CycloInt or int}``."""
        m = self.p - 1
        out = [0] * self.n
        for name, val in values.items():
            b = self.blocks.index(str(name))
            if isinstance(val, int):
                val = CycloInt(self.p, (val,))
            out[b * m:(b + 1) * m] = val.coeffs
        return tuple(out)

    def block_values(self, trans: Sequence[int]) -> list[CycloInt]:
        m = self.p - 1
        return [CycloInt(self.p, trans[b * m:(b + 1) * m]) for b in range(self.p + 1)]

    def basis_labels(self):
        return [f"e{b}_c{k}" for b in self.blocks for k in range(self.p - 1)]

    def format_trans(self, trans):
        vals = self.block_values(trans)
        return "(" + ", ".join(str(v) for v in vals) + ")"

    @cached_property
    def env(self):
        u, v = self.hol_gens
        env = {"u": u, "v": v}
        labels = self.basis_labels()
        for k, lab in enumerate(labels):
            env[lab] = self.basis_element(k)
        m = self.p - 1
        for b, name in enumerate(self.blocks):
            key = "e_inf" if name == "inf" else f"e{name}"
            env[key] = self.basis_element(b * m)
            if self.p == 3:
                env["h" + key] = self.basis_element(b * m + 1)
        return env

    def module_action(self) -> tuple[tuple[Vec, ...], tuple[Vec, ...]]:
        """rho(u), rho(v) assembled from the module table, independently of the matrices."""
        p = self.p
        z = self.zeta()
        one = CycloInt(p, (1,))
        u_blocks = [mult_matrix(one)] + [mult_matrix(z)] * p
        v_blocks = [mult_matrix(z), mult_matrix(one)] + [mult_matrix(self.zeta(i)) for i in range(1, p)]
        return _block_diag(u_blocks), _block_diag(v_blocks)

    def _self_check(self):
        p = self.p
        u, v = self.hol_gens
        ru, rv = self.module_action()
        _check(self.rho[1, 0] == ru, "matrix action of u disagrees with the module table")
        _check(self.rho[0, 1] == rv, "matrix action of v disagrees with the module table")
        ident = self._ident_matrix
        for R in (ru, rv):
            _check(tuple(map(tuple, _int_mat_pow(R, p))) == ident, "action does not have order p")
        _check(int_mat_mul(ru, rv) == int_mat_mul(rv, ru), "actions do not commute")
        q = p_over_pi(p)
        _check(self.power(u, p) == self.translation(self.block_vector({"inf": q})), "u^p != p/pi e_inf")
        _check(self.power(v, p) == self.translation(self.block_vector({"0": -q})), "v^p != -p/pi e_0")
        all_blocks = self.block_vector({b: 1 for b in self.blocks})
        _check(self.commutator(u, v) == self.translation(all_blocks), "[u,v] != sum of e_i")
        if p == 3:
            self._check_presentation_h()

    def _check_presentation_h(self):
        ev = self.evaluate
        for a, b in itertools.combinations(_H_LATTICE_GENS, 2):
            _check(ev(f"[{a},{b}]").is_identity(), f"[{a},{b}] != 1")
        for z, row in _H_CONJ_TABLE.items():
            for a, c in row.items():
                _check(ev(f"{z}^-1 {a} {z}") == ev(c), f"{a}^{z} != {c}")
        for lhs, rhs in _H_POWER_RELATIONS:
            _check(ev(lhs) == ev(rhs), f"relation {lhs} = {rhs} fails")


def _int_mat_pow(R, k):
    n = len(R)
    out = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    for _ in range(k):
        out = int_mat_mul(out, R)
    return out


@cache
def make_hw() -> HantzscheWendt:
    return HantzscheWendt()


@cache
def make_gp(p: int) -> GeneralizedHW:
    return GeneralizedHW(p)


def group_from_name(name: str) -> CrystalGroup:
    """``hw``, ``g3`` or ``gp:<p>``."""
    name = name.strip().lower()
    if name in ("hw", "g", "g2"):
        return make_hw()
    if name in ("g3", "h"):
        return make_gp(3)
    if name.startswith("gp:"):
        p = int(name[3:])
        return make_hw() if p == 2 else make_gp(p)
    raise ValueError(f"unknown crystal group {name!r}; expected hw, g3 or gp:<p>")


# ---------------------------------------------------------------------------
# normal closures and conjugacy


_NUMPY_SAFE = 2**40


def _module_span(G: CrystalGroup, base: Lattice, vectors: Iterable[Sequence[int]]) -> Lattice:
    """``base`` plus the Z[Q]-module generated by ``vectors`` (base must be invariant)."""
    vectors = [v for v in vectors if any(v)]
    if not vectors:
        return base
    if max(abs(x) for v in vectors for x in v) < _NUMPY_SAFE:
        # entries of rho are tiny, so int64 cannot overflow here
        imgs = np.einsum("vk,qkj->vqj", np.array(vectors, dtype=np.int64), G.rho_stack)
        images = {tuple(map(int, r)) for r in imgs.reshape(-1, G.n) if r.any()}
        images = sorted(images)
    else:
        images = [G.act(v, q) for v in vectors for q in G.holonomies]
    return base.add_vectors(images)


def commutator_module(g: CrystalElement) -> Lattice:
    """The lattice ``[g, G]``: the normal closure of all commutators ``[g, w]``.

    Commutators with lattice elements contribute ``image(1 - rho(g))``; the
    holonomy generators contribute the rest.
    """
    G = g.group
    vecs = [G.commutator(g, s).trans for s in G.hol_gens]
    return _module_span(G, G.K[g.hol], vecs)


@dataclass(frozen=True)
class NormalClosure:
    """``<g>^G = <g> . L`` with ``L = [g, G]``; ``NA`` is its translation part."""

    group: CrystalGroup = field(repr=False)
    rep: CrystalElement
    image_order: int
    L: Lattice
    NA: Lattice

    def contains(self, w: CrystalElement) -> bool:
        return closure_contains(self, w)

    def __contains__(self, w) -> bool:
        return closure_contains(self, w)

    @cached_property
    def holonomy_image(self) -> frozenset:
        return frozenset(self.group.hol_scale(self.rep.hol, k) for k in range(self.image_order))

    @cached_property
    def key(self) -> tuple:
        """Complete invariant: equal keys iff equal closures."""
        G = self.group
        if self.image_order == 1:
            return (1, None, self.NA.basis, None)
        h_star = min(h for h in self.holonomy_image if h != (0, 0))
        k = next(k for k in range(1, self.image_order) if G.hol_scale(self.rep.hol, k) == h_star)
        g_star = G.power(self.rep, k)
        return (self.image_order, h_star, self.NA.basis, self.NA.reduce(g_star.trans))

    def index_of(self, sub: Lattice):
        """``|<g>^G : sub|`` for a lattice ``sub`` contained in NA."""
        return self.image_order * index_in(sub, self.NA)


def image_order(g: CrystalElement) -> int:
    return 1 if g.hol == (0, 0) else g.group.p


def normal_closure(g: CrystalElement) -> NormalClosure:
    G = g.group
    d = image_order(g)
    L = commutator_module(g)
    NA = L.add_vectors([G.power(g, d).trans])
    return NormalClosure(G, g, d, L, NA)


def closure_contains(N: NormalClosure, w: CrystalElement) -> bool:
    G = N.group
    G._same(N.rep, w)
    for k in range(N.image_order):
        if G.hol_scale(N.rep.hol, k) == w.hol:
            rest = G.mul(w, G.power(N.rep, -k))
            return rest.trans in N.NA
    return False


def closure_equal(g: CrystalElement, h: CrystalElement) -> bool:
    return closure_contains(normal_closure(g), h) and closure_contains(normal_closure(h), g)


def conjugates_lattice(g: CrystalElement) -> tuple[CrystalElement, Lattice]:
    """Conjugating by lattice elements moves ``trans(g)`` exactly within ``+ K``."""
    return g, g.group.K[g.hol]


def find_conjugator(g: CrystalElement, h: CrystalElement) -> CrystalElement | None:
    """Some ``w`` with ``w^-1 g w == h``, or None when g and h are not conjugate."""
    G = g.group
    G._same(g, h)
    if g.hol != h.hol:
        return None
    I_minus_rho = [_sub(G._ident_matrix[k], G.rho[g.hol][k]) for k in range(G.n)]
    for q in G.holonomies:
        x = G.conjugate_by_rep(g, q)
        diff = _sub(h.trans, x.trans)
        if diff not in G.K[g.hol]:
            continue
        t = solve_left(I_minus_rho, diff)
        w = G.mul(G.holonomy_rep(q), G.translation(t))
        if G.conjugate(g, w) != h:
            raise SelfCheckError("conjugator reconstruction failed")
        return w
    return None


def are_conjugate(g: CrystalElement, h: CrystalElement) -> bool:
    G = g.group
    G._same(g, h)
    if g.hol != h.hol:
        return False
    K = G.K[g.hol]
    return any(_sub(h.trans, G.conjugate_by_rep(g, q).trans) in K for q in G.holonomies)


def conjugate_to_inverse(g: CrystalElement) -> bool:
    return are_conjugate(g, g.inverse())


def conjugacy_key(g: CrystalElement) -> tuple:
    """Canonical label of the conjugacy class of ``g``."""
    G = g.group
    K = G.K[g.hol]
    return (g.hol, min(K.reduce(G.conjugate_by_rep(g, q).trans) for q in G.holonomies))


def signed_conjugacy_key(g: CrystalElement) -> tuple:
    """Label shared by exactly the elements conjugate to ``g`` or ``g^-1``."""
    return min(conjugacy_key(g), conjugacy_key(g.inverse()))


def cyclic_quotient_order(g: CrystalElement):
    """Order of the cyclic group ``<g>^G / [g, G]`` (possibly INFINITE)."""
    N = normal_closure(g)
    return N.index_of(N.L)


# ---------------------------------------------------------------------------
# abelianization


def derived_lattice(G: CrystalGroup) -> Lattice:
    """``[G, G]`` as a sublattice of the translation lattice."""
    s1, s2 = G.hol_gens
    base = G.K[1, 0].add_vectors(G.K[0, 1].basis)
    return _module_span(G, base, [G.commutator(s1, s2).trans])


def equal_augmentation_lattice(G: "GeneralizedHW") -> Lattice:
    """``{sum b_i e_i : b_inf(1) = b_0(1) = ... = b_(p-1)(1)}``, read modulo p.

    The value ``b(1)`` of an element of Z[zeta] is only defined modulo
    ``Phi_p(1) = p``, so the equalities are congruences.
    """
    p, m = G.p, G.p - 1
    gens = []
    for b in range(p + 1):
        e0 = tuple(int(c == b * m) for c in range(G.n))
        gens.append(tuple(p * x for x in e0))
        for k in range(1, m):
            ek = tuple(int(c == b * m + k) for c in range(G.n))
            gens.append(_sub(ek, e0))
    gens.append(tuple(int(c % m == 0) for c in range(G.n)))
    return hnf(gens, G.n)


def abelianization_relations(G: CrystalGroup) -> list[Vec]:
    """Abelianized relators on the generators ``(s1, s2, lattice basis)``."""
    p, n = G.p, G.n
    s1, s2 = G.hol_gens
    rows = []
    rows.append((p, 0) + _neg(G.power(s1, p).trans))
    rows.append((0, p) + _neg(G.power(s2, p).trans))
    rows.append((0, 0) + _neg(G.commutator(s1, s2).trans))
    for h in ((1, 0), (0, 1)):
        for k in range(n):
            rows.append((0, 0) + _sub(G.rho[h][k], G._ident_matrix[k]))
    return rows


def abelianization(G: CrystalGroup) -> AbelianInvariants:
    inv = smith(abelianization_relations(G), ncols=G.n + 2)
    if isinstance(G, GeneralizedHW):
        _check(derived_lattice(G) == equal_augmentation_lattice(G), "[G,G] differs from the equal-augmentation lattice")
    return inv


# ---------------------------------------------------------------------------
# automorphisms of G_p


class Automorphism:
    """An endomorphism of G_p given by images of u, v and a lattice matrix.

    Construction checks that every defining relator is preserved.
    """

    def __init__(self, G: GeneralizedHW, image_s1: CrystalElement, image_s2: CrystalElement,
                 lattice_matrix: Sequence[Sequence[int]], name: str = "phi"):
        self.group = G
        self.name = name
        self.images = (image_s1, image_s2)
        self.matrix = tuple(tuple(r) for r in lattice_matrix)
        self.check_relators()

    def on_lattice(self, trans: Sequence[int]) -> Vec:
        return vecmat(trans, self.matrix)

    def __call__(self, g: CrystalElement) -> CrystalElement:
        G = self.group
        G._same(g)
        a, b = self.images
        head = G.mul(G.power(a, g.hol[0]), G.power(b, g.hol[1]))
        return G.mul(head, G.translation(self.on_lattice(g.trans)))

    def check_relators(self) -> None:
        G = self.group
        p = G.p
        s1, s2 = G.hol_gens
        a, b = self.images
        phi_t = lambda g: G.translation(self.on_lattice(g.trans))  # noqa: E731
        _check(G.power(a, p) == phi_t(G.power(s1, p)), f"{self.name} breaks u^p")
        _check(G.power(b, p) == phi_t(G.power(s2, p)), f"{self.name} breaks v^p")
        _check(G.commutator(a, b) == phi_t(G.commutator(s1, s2)), f"{self.name} breaks [u,v]")
        for k in range(G.n):
            e = G.basis_element(k)
            img = phi_t(e)
            for s, s_img in ((s1, a), (s2, b)):
                _check(G.conjugate(img, s_img) == phi_t(G.conjugate(e, s)), f"{self.name} breaks e^{s.hol}")


def _sigma_matrix(G: GeneralizedHW, shift: int) -> tuple[Vec, ...]:
    """Block i of the image takes block i+shift of the source (inf fixed)."""
    p, m = G.p, G.p - 1

    def src(i):  # block position of index i+shift
        return 0 if i == 0 else 1 + ((i - 1 + shift) % p)

    rows = [[0] * G.n for _ in range(G.n)]
    for i in range(p + 1):
        s = src(i)
        for k in range(m):
            rows[s * m + k][i * m + k] = 1
    return tuple(tuple(r) for r in rows)


def _tau_matrix(G: GeneralizedHW) -> tuple[Vec, ...]:
    p, m = G.p, G.p - 1
    rows = [[0] * G.n for _ in range(G.n)]
    # source block position -> (target block position, Galois exponent)
    targets = {0: (1, 1), 1: (0, 1)}
    for i in range(1, p):
        src = pow(i, -1, p)
        targets[1 + src] = (1 + i, i)
    for s, (t, k) in targets.items():
        for c in range(m):
            basis = CycloInt(p, tuple(int(j == c) for j in range(m)))
            rows[s * m + c][t * m:(t + 1) * m] = [-x for x in basis.galois(k).coeffs]
    return tuple(tuple(r) for r in rows)


def _require_odd(G: CrystalGroup) -> GeneralizedHW:
    if not isinstance(G, GeneralizedHW):
        raise ValueError("sigma and tau are defined for G_p with p odd only")
    return G


@cache
def sigma(G: GeneralizedHW) -> Automorphism:
    G = _require_odd(G)
    u, v = G.hol_gens
    return Automorphism(G, u, G.mul(u, v), _sigma_matrix(G, 1), "sigma")


@cache
def sigma_inverse(G: GeneralizedHW) -> Automorphism:
    G = _require_odd(G)
    u, v = G.hol_gens
    return Automorphism(G, u, G.mul(u.inverse(), v), _sigma_matrix(G, -1), "sigma^-1")


@cache
def tau(G: GeneralizedHW) -> Automorphism:
    G = _require_odd(G)
    u, v = G.hol_gens
    return Automorphism(G, v, u, _tau_matrix(G), "tau")


def automorphism_sigma(g: CrystalElement) -> CrystalElement:
    return sigma(_require_odd(g.group))(g)


def automorphism_tau(g: CrystalElement) -> CrystalElement:
    return tau(_require_odd(g.group))(g)


# ---------------------------------------------------------------------------
# bounded Magnus scan


@dataclass
class ScanReport:
    group: str
    bound: int
    cosets: list
    support: list
    elements: int = 0
    buckets: int = 0
    equal_closure_pairs: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _order_key(g: CrystalElement) -> tuple:
    return (g.hol, sum(map(abs, g.trans)), tuple(-t for t in g.trans))


def default_scan_region(G: CrystalGroup) -> tuple[list | None, list | None]:
    """(cosets, support) used when none are given.

    Beyond p = 3 the full box is astronomically large, so the scan stays
    inside the trivial coset and the single block M_0.
    """
    if G.p <= 3:
        return None, None
    m = G.p - 1
    return [(0, 0)], list(range(m, 2 * m))


def scan_elements(G: CrystalGroup, bound: int, cosets=None, support=None) -> Iterable[CrystalElement]:
    cosets = G.holonomies if cosets is None else [tuple(c) for c in cosets]
    support = list(range(G.n)) if support is None else list(support)
    rng = range(-bound, bound + 1)
    for h in cosets:
        for vals in itertools.product(rng, repeat=len(support)):
            t = [0] * G.n
            for k, val in zip(support, vals):
                t[k] = val
            yield G.element(h, t)


def magnus_scan(G: CrystalGroup, bound: int, cosets=None, support=None,
                max_elements: int = 200_000) -> ScanReport:
    """Look for Magnus violations among elements with ``|trans_k| <= bound``.

    A finite certificate only: an empty violation list means "no violation
    within the box". Violations are pairs of representatives of distinct
    (conjugacy-or-inverse) classes that share a normal closure.
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    n_cosets = len(G.holonomies if cosets is None else cosets)
    n_support = G.n if support is None else len(support)
    total = n_cosets * (2 * bound + 1) ** n_support
    if total > max_elements:
        raise ValueError(
            f"box holds {total} elements (> {max_elements}); restrict cosets/support"
        )
    report = ScanReport(G.name, bound, list(cosets) if cosets else [list(h) for h in G.holonomies],
                        list(support) if support is not None else list(range(G.n)))
    buckets: dict[tuple, list[tuple[CrystalElement, NormalClosure]]] = {}
    for g in sorted(scan_elements(G, bound, cosets, support), key=_order_key):
        N = normal_closure(g)
        buckets.setdefault(N.key, []).append((g, N))
        report.elements += 1
    report.buckets = len(buckets)
    for key in sorted(buckets, key=repr):
        members = buckets[key]
        if len(members) < 2:
            continue
        report.equal_closure_pairs += len(members) * (len(members) - 1) // 2
        g0, N0 = members[0]
        classes: dict[tuple, CrystalElement] = {}
        for g, N in members:
            # the key is complete; confirm with the membership procedure anyway
            if not (closure_contains(N0, g) and closure_contains(N, g0)):
                raise SelfCheckError(f"closure key collision for {g0} and {g}")
            classes.setdefault(signed_conjugacy_key(g), g)
        reps = list(classes.values())
        for a, b in itertools.combinations(reps, 2):
            report.violations.append((a, b))
    report.violations.sort(key=lambda ab: (_order_key(ab[0]), _order_key(ab[1])))
    return report


# ---------------------------------------------------------------------------
# finite quotients G / mZ^n


@dataclass(frozen=True, eq=False)
class CrystalQuotient:
    """``G / (m * lattice)`` as a Cayley table plus the projection map."""

    crystal: CrystalGroup
    m: int
    group: FiniteGroup

    def index(self, hol: Hol, trans: Sequence[int]) -> int:
        G, m = self.crystal, self.m
        code = 0
        for t in trans:
            code = code * m + (t % m)
        return (hol[0] * G.p + hol[1]) * m**G.n + code

    def project(self, g: CrystalElement) -> int:
        self.crystal._same(g)
        return self.index(g.hol, g.trans)

    def __call__(self, g: CrystalElement) -> int:
        return self.project(g)


def finite_quotient(G: CrystalGroup, m: int, cap: int = DEFAULT_CAP) -> CrystalQuotient:
    if m < 1:
        raise ValueError("m must be positive")
    p, n = G.p, G.n
    per = m**n
    order = p * p * per
    if order > cap:
        raise OrderCapExceeded(f"quotient of order {order} exceeds the cap {cap}")
    codes = np.arange(per, dtype=np.int64)
    radix = m ** np.arange(n - 1, -1, -1, dtype=np.int64)
    T = (codes[:, None] // radix[None, :]) % m  # (per, n)
    table = np.empty((order, order), dtype=np.int64)
    hol_list = G.holonomies  # index of (i, j) is i*p + j
    for ha in hol_list:
        ia = ha[0] * p + ha[1]
        rows = slice(ia * per, (ia + 1) * per)
        for hb in hol_list:
            ib = hb[0] * p + hb[1]
            rho = np.array(G.rho[hb], dtype=np.int64)
            c = np.array(G.cocycle[ha, hb], dtype=np.int64)
            A = (T @ rho + c) % m  # (per, n), contribution of the left factor
            res = (A[:, None, :] + T[None, :, :]) % m
            hc = G.hol_add(ha, hb)
            table[rows, ib * per:(ib + 1) * per] = (hc[0] * p + hc[1]) * per + res @ radix
    q = CrystalQuotient.__new__(CrystalQuotient)
    object.__setattr__(q, "crystal", G)
    object.__setattr__(q, "m", m)
    gens = [q.index(s.hol, s.trans) for s in G.hol_gens]
    if isinstance(G, GeneralizedHW):
        gens += [q.index((0, 0), G.basis_element(k).trans) for k in range(n)]
    labels = tuple((h, tuple(int(x) for x in T[k])) for h in hol_list for k in range(per))
    object.__setattr__(q, "group", FiniteGroup(table.astype(np.int32), tuple(gens), labels))
    return q
