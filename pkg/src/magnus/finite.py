"""Finite groups given by Cayley tables.

Tables are numpy integer arrays, ``mul[a, b]`` is the index of ``a*b`` and
index 0 is always the identity. Subsets of a group are returned as
``frozenset`` of element indices. These routines are deliberately brute
force; they serve as the oracle for the lattice computations elsewhere.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .intlattice import AbelianInvariants, smith

__all__ = [
    "DEFAULT_CAP",
    "OrderCapExceeded",
    "FiniteGroup",
    "from_cyclic_factors",
    "from_permutations",
    "from_function",
    "direct_product",
    "heisenberg",
    "normal_closure",
    "conjugacy_class",
    "are_conjugate",
    "has_magnus",
    "closure_cyclic_quotient_order",
    "prop4_check",
    "lemma2_flags",
    "lower_central_series",
    "lemma5_central_quotient",
    "quotient",
    "abelian_invariants",
    "euler_phi",
]

DEFAULT_CAP = 5000


class OrderCapExceeded(ValueError):
    pass


def _check_cap(order, cap):
    if order > cap:
        raise OrderCapExceeded(f"group order {order} exceeds the cap {cap}")


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    mul: np.ndarray
    gens: tuple[int, ...]
    labels: tuple | None = None
    inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        mul = np.asarray(self.mul)
        n = mul.shape[0]
        if mul.shape != (n, n):
            raise ValueError("multiplication table must be square")
        ar = np.arange(n)
        if not (np.array_equal(mul[0], ar) and np.array_equal(mul[:, 0], ar)):
            raise ValueError("index 0 is not a two-sided identity")
        rows, cols = np.nonzero(mul == 0)
        if len(rows) != n or len(set(rows.tolist())) != n:
            raise ValueError("table does not have unique inverses")
        inv = np.empty(n, dtype=mul.dtype)
        inv[rows] = cols
        mul.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "mul", mul)
        object.__setattr__(self, "inv", inv)
        object.__setattr__(self, "gens", tuple(int(g) for g in self.gens))

    @property
    def order(self) -> int:
        return self.mul.shape[0]

    def __len__(self):
        return self.order

    @property
    def ops(self):
        """Operations object for :func:`magnus.words.evaluate`."""
        return _TableOps(self)

    def label(self, a: int):
        return self.labels[a] if self.labels is not None else a

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != 0:
            x = int(self.mul[x, a])
            k += 1
        return k

    def power(self, a: int, k: int) -> int:
        if k < 0:
            a, k = int(self.inv[a]), -k
        result = 0
        while k:
            if k & 1:
                result = int(self.mul[result, a])
            a = int(self.mul[a, a])
            k >>= 1
        return result

    def commutator(self, a: int, b: int) -> int:
        m, i = self.mul, self.inv
        return int(m[m[i[a], i[b]], m[a, b]])

    def is_abelian(self) -> bool:
        return np.array_equal(self.mul, self.mul.T)

    def center(self) -> frozenset:
        m = self.mul
        return frozenset(int(a) for a in range(self.order) if np.array_equal(m[a], m[:, a]))

    def generated_by(self) -> frozenset:
        return _subgroup_mask_to_set(_generate(self, self.gens))

    def check_axioms(self, samples: int = 2000, seed: int = 0) -> None:
        """Sampled associativity check; raises AssertionError on failure."""
        n = self.order
        rng = np.random.default_rng(seed)
        if n**3 <= samples:
            a, b, c = (g.ravel() for g in np.meshgrid(*(np.arange(n),) * 3, indexing="ij"))
        else:
            a, b, c = (rng.integers(0, n, samples) for _ in range(3))
        m = self.mul
        assert np.array_equal(m[m[a, b], c], m[a, m[b, c]]), "table is not associative"
        assert np.all(m[np.arange(n), self.inv] == 0), "inverse table is wrong"


class _TableOps:
    def __init__(self, G: FiniteGroup):
        self.G = G

    def mul(self, a, b):
        return int(self.G.mul[a, b])

    def inv(self, a):
        return int(self.G.inv[a])

    def identity(self):
        return 0


def _subgroup_mask_to_set(mask: np.ndarray) -> frozenset:
    return frozenset(np.flatnonzero(mask).tolist())


def _generate(G: FiniteGroup, gens: Iterable[int]) -> np.ndarray:
    """Boolean mask of the subgroup generated by ``gens``.

    Semi-naive closure: each round multiplies the newly found elements
    against everything found so far, so cyclic subgroups need only
    logarithmically many rounds.
    """
    mask = np.zeros(G.order, dtype=bool)
    mask[0] = True
    frontier = np.unique(np.asarray(list(gens), dtype=np.int64))
    frontier = frontier[frontier != 0]
    mask[frontier] = True
    while frontier.size:
        members = np.flatnonzero(mask)
        prod = np.concatenate(
            [G.mul[np.ix_(frontier, members)].ravel(), G.mul[np.ix_(members, frontier)].ravel()]
        )
        new = np.unique(prod[~mask[prod]])
        mask[new] = True
        frontier = new
    return mask


def _conj_class_mask(G: FiniteGroup, g: int) -> np.ndarray:
    ar = np.arange(G.order)
    images = G.mul[G.mul[G.inv, g], ar]
    mask = np.zeros(G.order, dtype=bool)
    mask[images] = True
    return mask


def _normal_closure_mask(G: FiniteGroup, elements: Iterable[int]) -> np.ndarray:
    elements = list(elements)
    if not elements:
        mask = np.zeros(G.order, dtype=bool)
        mask[0] = True
        return mask
    ar = np.arange(G.order)
    conj = np.unique(G.mul[G.mul[G.inv[:, None], np.asarray(elements)[None, :]], ar[:, None]])
    if conj.size == 1:
        return _cyclic_mask(G, int(conj[0]))
    return _generate(G, conj)


def _cyclic_mask(G: FiniteGroup, g: int) -> np.ndarray:
    mask = np.zeros(G.order, dtype=bool)
    mask[0] = True
    col = G.mul[:, g].tolist()
    x = g
    while x != 0:
        mask[x] = True
        x = col[x]
    return mask


# construction -----------------------------------------------------------


def from_cyclic_factors(factors: Sequence[int], cap: int = DEFAULT_CAP) -> FiniteGroup:
    """``C_{f1} x C_{f2} x ...`` with lexicographic (mixed-radix) indexing."""
    factors = tuple(int(f) for f in factors)
    if any(f < 1 for f in factors):
        raise ValueError("cyclic factors must be >= 1")
    n = math.prod(factors)
    _check_cap(n, cap)
    labels = list(itertools.product(*(range(f) for f in factors)))
    if not factors:
        labels = [()]
    coords = np.array(labels, dtype=np.int64).reshape(n, len(factors))
    mul_coords = (coords[:, None, :] + coords[None, :, :]) % np.array(factors or [1])
    radix = np.array([math.prod(factors[k + 1:]) for k in range(len(factors))], dtype=np.int64)
    mul = (mul_coords * radix).sum(axis=-1) if factors else np.zeros((1, 1), dtype=np.int64)
    gens = tuple(int(radix[k]) for k, f in enumerate(factors) if f > 1)
    return FiniteGroup(mul.astype(np.int32), gens, tuple(labels))


def from_function(
    gens: Sequence[Hashable],
    mul: Callable[[Hashable, Hashable], Hashable],
    identity: Hashable,
    cap: int = DEFAULT_CAP,
) -> FiniteGroup:
    """Enumerate the closure of ``gens`` breadth-first and tabulate ``mul``.

    Associativity is inherited from ``mul``; it is not re-checked here.
    """
    elements = [identity]
    index = {identity: 0}
    queue = deque([identity])
    while queue:
        a = queue.popleft()
        for s in gens:
            b = mul(a, s)
            if b not in index:
                index[b] = len(elements)
                elements.append(b)
                _check_cap(len(elements), cap)
                queue.append(b)
    n = len(elements)
    table = np.empty((n, n), dtype=np.int32)
    for i, a in enumerate(elements):
        table[i] = [index[mul(a, b)] for b in elements]
    return FiniteGroup(table, tuple(index[s] for s in gens), tuple(elements))


def _compose(a: tuple, b: tuple) -> tuple:
    # a then b (right action), matching g^h = h^-1 g h
    return tuple(b[i] for i in a)


def from_permutations(gens: Sequence[Sequence[int]], cap: int = DEFAULT_CAP) -> FiniteGroup:
    gens = [tuple(g) for g in gens]
    if not gens:
        return FiniteGroup(np.zeros((1, 1), dtype=np.int32), (), ((),))
    d = len(gens[0])
    if any(sorted(g) != list(range(d)) for g in gens):
        raise ValueError("generators must be permutations of the same range(d)")
    return from_function(gens, _compose, tuple(range(d)), cap=cap)


def direct_product(A: FiniteGroup, B: FiniteGroup, cap: int = DEFAULT_CAP) -> FiniteGroup:
    """Index of ``(a, b)`` is ``a * |B| + b``."""
    na, nb = A.order, B.order
    _check_cap(na * nb, cap)
    mul = (A.mul[:, None, :, None].astype(np.int64) * nb + B.mul[None, :, None, :]).reshape(
        na * nb, na * nb
    )
    gens = tuple(a * nb for a in A.gens) + tuple(B.gens)
    la = A.labels if A.labels is not None else tuple(range(na))
    lb = B.labels if B.labels is not None else tuple(range(nb))
    labels = tuple((x, y) for x in la for y in lb)
    return FiniteGroup(mul.astype(np.int32), gens, labels)


def heisenberg(p: int = 3) -> FiniteGroup:
    """Upper unitriangular 3x3 matrices mod p, via their regular permutation action."""
    pts = [(a, b, c) for a in range(p) for b in range(p) for c in range(p)]
    where = {x: i for i, x in enumerate(pts)}

    def right_mult(g):
        a2, b2, c2 = g
        return tuple(where[((a + a2) % p, (b + b2) % p, (c + c2 + a * b2) % p)] for a, b, c in pts)

    return from_permutations([right_mult((1, 0, 0)), right_mult((0, 1, 0))])


# subgroups, conjugacy, closures ------------------------------------------


def normal_closure(G: FiniteGroup, g: int) -> frozenset:
    return _subgroup_mask_to_set(_normal_closure_mask(G, [g]))


def normal_closure_of_set(G: FiniteGroup, elements: Iterable[int]) -> frozenset:
    return _subgroup_mask_to_set(_normal_closure_mask(G, elements))


def subgroup(G: FiniteGroup, elements: Iterable[int]) -> frozenset:
    return _subgroup_mask_to_set(_generate(G, elements))


def conjugacy_class(G: FiniteGroup, g: int) -> frozenset:
    return _subgroup_mask_to_set(_conj_class_mask(G, g))


def are_conjugate(G: FiniteGroup, g: int, h: int) -> bool:
    return bool(_conj_class_mask(G, g)[h])


def conjugacy_labels(G: FiniteGroup) -> np.ndarray:
    """Array mapping each element to the least element of its class."""
    labels = np.full(G.order, -1, dtype=np.int64)
    for g in range(G.order):
        if labels[g] < 0:
            labels[_conj_class_mask(G, g)] = g
    return labels


def has_magnus(G: FiniteGroup) -> tuple[bool, tuple[int, int] | None]:
    """Exhaustive Magnus check; the witness is the lexicographically least bad pair."""
    n = G.order
    keys = [_normal_closure_mask(G, [g]).tobytes() for g in range(n)]
    cls = conjugacy_labels(G)
    buckets: dict[bytes, list[int]] = {}
    for g, k in enumerate(keys):
        buckets.setdefault(k, []).append(g)
    for x in range(n):
        ok = {cls[x], cls[G.inv[x]]}
        bad = [y for y in buckets[keys[x]] if cls[y] not in ok]
        if bad:
            return False, (x, min(bad))
    return True, None


def closure_cyclic_quotient_order(G: FiniteGroup, g: int) -> int:
    """``|<g>^G| / |<[g,x] : x in G>^G|``."""
    closure = _normal_closure_mask(G, [g]).sum()
    comms = {G.commutator(g, x) for x in range(G.order)}
    sub = _normal_closure_mask(G, comms).sum()
    return int(closure // sub)


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def prop4_check(G: FiniteGroup, H: FiniteGroup, g: int, h: int) -> bool:
    """Whether some ``m | q_g``, ``n | q_h`` have ``gcd(m, n)`` outside {1, 2}."""
    qg = closure_cyclic_quotient_order(G, g)
    qh = closure_cyclic_quotient_order(H, h)
    return any(math.gcd(m, k) not in (1, 2) for m in divisors(qg) for k in divisors(qh))


def lemma2_flags(
    G: FiniteGroup, H: FiniteGroup, g: int, h: int, cap: int = DEFAULT_CAP
) -> tuple[bool, bool, bool]:
    i = are_conjugate(G, g, int(G.inv[g]))
    ii = are_conjugate(H, h, int(H.inv[h]))
    P = direct_product(G, H, cap=cap)
    nb = H.order
    iii = normal_closure(P, g * nb + h) != normal_closure(P, g * nb + int(H.inv[h]))
    return i, ii, iii


def _commutator_subgroup_mask(G: FiniteGroup, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    a = np.flatnonzero(A)
    b = np.flatnonzero(B)
    m, inv = G.mul, G.inv
    comms = m[m[inv[a][:, None], inv[b][None, :]], m[a[:, None], b[None, :]]]
    return _generate(G, np.unique(comms))


def lower_central_series(G: FiniteGroup) -> list[frozenset]:
    whole = np.ones(G.order, dtype=bool)
    series = [whole]
    while True:
        nxt = _commutator_subgroup_mask(G, series[-1], whole)
        if np.array_equal(nxt, series[-1]):
            break
        series.append(nxt)
    return [_subgroup_mask_to_set(s) for s in series]


def _prime_power_base(n: int) -> int | None:
    if n == 1:
        return None
    p = next(d for d in range(2, n + 1) if n % d == 0)
    while n % p == 0:
        n //= p
    return p if n == 1 else None


def quotient(G: FiniteGroup, N: Iterable[int]) -> tuple[FiniteGroup, np.ndarray]:
    """``G/N`` and the projection array ``element -> coset index``."""
    N = sorted(set(N))
    if 0 not in N:
        raise ValueError("N must contain the identity")
    nmask = np.zeros(G.order, dtype=bool)
    nmask[N] = True
    if not np.array_equal(_generate(G, N), nmask):
        raise ValueError("N is not a subgroup")
    for g in range(G.order):
        if not np.all(nmask[G.mul[G.mul[G.inv[g], N], g]]):
            raise ValueError("N is not normal")
    proj = np.full(G.order, -1, dtype=np.int64)
    reps = []
    narr = np.asarray(N)
    for g in range(G.order):
        if proj[g] < 0:
            proj[G.mul[g, narr]] = len(reps)
            reps.append(g)
    reps = np.asarray(reps)
    table = proj[G.mul[np.ix_(reps, reps)]]
    gens = tuple(dict.fromkeys(int(proj[s]) for s in G.gens if proj[s] != 0))
    labels = tuple(G.label(int(r)) for r in reps)
    return FiniteGroup(table.astype(np.int32), gens, labels), proj


def lemma5_central_quotient(G: FiniteGroup, x: int) -> tuple[FiniteGroup, int]:
    """A quotient of the p-group ``G`` in which ``x`` is non-trivial and central."""
    if x == 0:
        raise ValueError("x must not be the identity")
    if _prime_power_base(G.order) is None:
        raise ValueError(f"order {G.order} is not a prime power")
    series = lower_central_series(G)
    if len(series[-1]) != 1:
        raise ValueError("group is not nilpotent")
    k = max(i for i, s in enumerate(series) if x in s)
    N = series[k + 1] if k + 1 < len(series) else frozenset({0})
    Q, proj = quotient(G, N)
    image = int(proj[x])
    if image == 0 or image not in Q.center():
        raise AssertionError("lower central series quotient failed to centralise x")
    return Q, image


def abelian_invariants(G: FiniteGroup) -> AbelianInvariants:
    """Invariants of ``G/[G,G]`` from the Schreier relations of the abelian quotient."""
    whole = np.ones(G.order, dtype=bool)
    derived = _subgroup_mask_to_set(_commutator_subgroup_mask(G, whole, whole))
    Q, _ = quotient(G, derived)
    k = len(Q.gens)
    if k == 0:
        return AbelianInvariants()
    # spanning tree: each element of Q as a word vector in the generators
    vec = {0: (0,) * k}
    queue = deque([0])
    while queue:
        a = queue.popleft()
        for i, s in enumerate(Q.gens):
            b = int(Q.mul[a, s])
            if b not in vec:
                vec[b] = tuple(c + (j == i) for j, c in enumerate(vec[a]))
                queue.append(b)
    relations = []
    for a, va in vec.items():
        for i, s in enumerate(Q.gens):
            b = int(Q.mul[a, s])
            rel = tuple(c + (j == i) - d for j, (c, d) in enumerate(zip(va, vec[b])))
            if any(rel):
                relations.append(rel)
    return smith(relations, ncols=k)


def euler_phi(n: int) -> int:
    """Count of ``1 <= k <= n`` coprime to n (gcd counting)."""
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)
