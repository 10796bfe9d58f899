"""Sublattices of Z^n in row-style Hermite normal form, plus Smith invariants.

All arithmetic is on Python ints, so there is no overflow. A lattice is
stored by its unique HNF basis: pivots move strictly right, pivot entries
are positive, and entries above a pivot lie in ``[0, pivot)``. Equality of
lattices is therefore equality of bases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "INFINITE",
    "Lattice",
    "AbelianInvariants",
    "hnf",
    "contains",
    "lattice_equal",
    "lattice_sum",
    "index_in",
    "quotient_invariants",
    "smith",
    "solve_left",
    "xgcd",
]

INFINITE = math.inf

Vector = tuple[int, ...]


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, s, t)`` with ``s*a + t*b == g == gcd(a, b) >= 0``."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        return -a, -s0, -t0
    return a, s0, t0


def _first_nonzero(v, start=0):
    for k in range(start, len(v)):
        if v[k]:
            return k
    return None


class _Echelon:
    """Mutable HNF builder keyed by pivot column."""

    def __init__(self, n: int, rows: Iterable[Sequence[int]] = ()):
        self.n = n
        self.rows: dict[int, list[int]] = {}
        for r in rows:
            self.rows[_first_nonzero(r)] = list(r)

    def insert(self, v: Sequence[int]) -> bool:
        """Add ``v`` to the span; return True if the lattice grew."""
        v = list(v)
        c = _first_nonzero(v)
        grew = False
        while c is not None:
            r = self.rows.get(c)
            if r is None:
                if v[c] < 0:
                    v = [-x for x in v]
                self.rows[c] = v
                return True
            a, b = r[c], v[c]
            if b % a == 0:
                q = b // a
                v = [x - q * y for x, y in zip(v, r)]
            else:
                g, s, t = xgcd(a, b)
                ag, bg = a // g, b // g
                self.rows[c] = [s * x + t * y for x, y in zip(r, v)]
                v = [ag * y - bg * x for x, y in zip(r, v)]
                grew = True
            c = _first_nonzero(v, c + 1)
        return grew

    def canonical(self) -> tuple[Vector, ...]:
        pivots = sorted(self.rows)
        rows = [self.rows[c] for c in pivots]
        for j, pc in enumerate(pivots):
            rj = rows[j]
            piv = rj[pc]
            for i in range(j):
                q = rows[i][pc] // piv
                if q:
                    rows[i] = [x - q * y for x, y in zip(rows[i], rj)]
        return tuple(tuple(r) for r in rows)


@dataclass(frozen=True)
class Lattice:
    """A sublattice of Z^n, held in canonical HNF."""

    ambient_rank: int
    basis: tuple[Vector, ...] = ()

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(_first_nonzero(r) for r in self.basis)

    def is_zero(self) -> bool:
        return not self.basis

    def is_full(self) -> bool:
        return self.rank == self.ambient_rank

    def reduce(self, v: Sequence[int]) -> Vector:
        """Canonical representative of ``v + L``."""
        if len(v) != self.ambient_rank:
            raise ValueError(f"vector of length {len(v)} in Z^{self.ambient_rank}")
        v = list(v)
        for row in self.basis:
            c = _first_nonzero(row)
            q = v[c] // row[c]
            if q:
                v = [x - q * y for x, y in zip(v, row)]
        return tuple(v)

    def __contains__(self, v) -> bool:
        return not any(self.reduce(v))

    def __add__(self, other: "Lattice") -> "Lattice":
        return lattice_sum(self, other)

    def add_vectors(self, vectors: Iterable[Sequence[int]]) -> "Lattice":
        ech = _Echelon(self.ambient_rank, self.basis)
        for v in vectors:
            if len(v) != self.ambient_rank:
                raise ValueError(f"vector of length {len(v)} in Z^{self.ambient_rank}")
            ech.insert(v)
        return Lattice(self.ambient_rank, ech.canonical())

    def coordinates(self, v: Sequence[int]) -> tuple[int, ...]:
        """Integer coefficients of ``v`` in this basis; ValueError if v not in L."""
        v = list(v)
        coords = []
        for row in self.basis:
            c = _first_nonzero(row)
            q, r = divmod(v[c], row[c])
            if r:
                raise ValueError("vector is not in the lattice")
            coords.append(q)
            v = [x - q * y for x, y in zip(v, row)]
        if any(v):
            raise ValueError("vector is not in the lattice")
        return tuple(coords)

    def transform(self, matrix: Sequence[Sequence[int]]) -> "Lattice":
        """Image ``{v @ matrix}`` of the lattice under a square integer matrix."""
        return hnf([_vecmat(r, matrix) for r in self.basis], self.ambient_rank)

    def __str__(self):
        if not self.basis:
            return f"0 < Z^{self.ambient_rank}"
        return "span{" + ", ".join(str(r) for r in self.basis) + "}"


def _vecmat(v, m):
    n = len(m[0])
    out = [0] * n
    for vi, row in zip(v, m):
        if vi:
            for j in range(n):
                out[j] += vi * row[j]
    return tuple(out)


def hnf(generators: Iterable[Sequence[int]], ambient_rank: int) -> Lattice:
    ech = _Echelon(ambient_rank)
    for v in generators:
        if len(v) != ambient_rank:
            raise ValueError(f"generator {tuple(v)} does not have length {ambient_rank}")
        ech.insert(v)
    return Lattice(ambient_rank, ech.canonical())


def contains(L: Lattice, v: Sequence[int]) -> bool:
    return v in L


def _same_rank(L1: Lattice, L2: Lattice) -> None:
    if L1.ambient_rank != L2.ambient_rank:
        raise ValueError(f"ambient ranks differ: {L1.ambient_rank} vs {L2.ambient_rank}")


def lattice_equal(L1: Lattice, L2: Lattice) -> bool:
    _same_rank(L1, L2)
    return L1.basis == L2.basis


def lattice_sum(L1: Lattice, L2: Lattice) -> Lattice:
    _same_rank(L1, L2)
    if not L2.basis:
        return L1
    return L1.add_vectors(L2.basis)


def _coordinate_matrix(sub: Lattice, sup: Lattice) -> list[list[int]]:
    _same_rank(sub, sup)
    try:
        return [list(sup.coordinates(r)) for r in sub.basis]
    except ValueError:
        raise ValueError("first lattice is not contained in the second") from None


def quotient_invariants(sub: Lattice, sup: Lattice) -> "AbelianInvariants":
    """Structure of ``sup / sub`` (which must satisfy sub <= sup)."""
    m = _coordinate_matrix(sub, sup)
    return smith(m, ncols=sup.rank)


def index_in(sub: Lattice, sup: Lattice):
    """``|sup : sub|`` or :data:`INFINITE` when the ranks differ."""
    inv = quotient_invariants(sub, sup)
    if inv.free_rank:
        return INFINITE
    return inv.order


def solve_left(M: Sequence[Sequence[int]], target: Sequence[int]) -> tuple[int, ...] | None:
    """An integer row vector ``t`` with ``t @ M == target``, or None."""
    r = len(M)
    m = len(target)
    aug = [tuple(row) + tuple(int(i == k) for k in range(r)) for i, row in enumerate(M)]
    L = hnf(aug, m + r)
    red = L.reduce(tuple(target) + (0,) * r)
    if any(red[:m]):
        return None
    return tuple(-x for x in red[m:])


@dataclass(frozen=True)
class AbelianInvariants:
    """Invariant factors ``d1 | d2 | ...`` (all > 1) and free rank."""

    torsion: tuple[int, ...] = ()
    free_rank: int = 0

    def __post_init__(self):
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a:
                raise ValueError(f"torsion {self.torsion} is not a divisibility chain")
        if any(d <= 1 for d in self.torsion):
            raise ValueError("torsion factors must exceed 1")

    @property
    def order(self):
        return INFINITE if self.free_rank else math.prod(self.torsion)

    def __str__(self):
        parts = [f"C{d}" for d in self.torsion] + ["Z"] * self.free_rank
        return " x ".join(parts) if parts else "1"


def smith(M: Sequence[Sequence[int]], ncols: int | None = None) -> AbelianInvariants:
    """Invariants of the cokernel of ``M`` (rows are relations on the columns).

    ``ncols`` is needed only when ``M`` has no rows.
    """
    A = [list(map(int, r)) for r in M]
    if ncols is None:
        if not A:
            raise ValueError("ncols is required for an empty matrix")
        ncols = len(A[0])
    if any(len(r) != ncols for r in A):
        raise ValueError("ragged matrix")
    nrows = len(A)
    diag = []
    t = 0
    while t < min(nrows, ncols):
        # smallest nonzero entry in the trailing block becomes the pivot
        best = None
        for i in range(t, nrows):
            for j in range(t, ncols):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i, j = best
        A[t], A[i] = A[i], A[t]
        for r in A:
            r[t], r[j] = r[j], r[t]
        while True:
            piv = A[t][t]
            done = True
            for i in range(t + 1, nrows):
                q = A[i][t] // piv
                if q:
                    A[i] = [x - q * y for x, y in zip(A[i], A[t])]
                if A[i][t]:
                    done = False
            for j in range(t + 1, ncols):
                q = A[t][j] // piv
                if q:
                    for r in A:
                        r[j] -= q * r[t]
                if A[t][j]:
                    done = False
            if done:
                bad = next(
                    (i for i in range(t + 1, nrows) for j in range(t + 1, ncols) if A[i][j] % piv),
                    None,
                )
                if bad is None:
                    break
                A[t] = [x + y for x, y in zip(A[t], A[bad])]
                continue
            # move the new smallest entry of row/col t onto the diagonal
            best = (t, t)
            for i in range(t + 1, nrows):
                if A[i][t] and abs(A[i][t]) < abs(A[best[0]][best[1]]):
                    best = (i, t)
            for j in range(t + 1, ncols):
                if A[t][j] and abs(A[t][j]) < abs(A[best[0]][best[1]]):
                    best = (t, j)
            i, j = best
            A[t], A[i] = A[i], A[t]
            for r in A:
                r[t], r[j] = r[j], r[t]
        diag.append(abs(A[t][t]))
        t += 1
    return AbelianInvariants(tuple(d for d in diag if d > 1), ncols - len(diag))
