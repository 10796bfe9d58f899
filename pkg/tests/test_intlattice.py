import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st
from sympy import ZZ, Matrix
from sympy.matrices.normalforms import invariant_factors

from magnus.intlattice import (
    INFINITE,
    AbelianInvariants,
    contains,
    hnf,
    index_in,
    lattice_equal,
    lattice_sum,
    quotient_invariants,
    smith,
    solve_left,
    xgcd,
)


def vectors(n, k, lo=-5, hi=5):
    return st.lists(st.lists(st.integers(lo, hi), min_size=n, max_size=n).map(tuple),
                    min_size=1, max_size=k)


def brute_member(gens, v, radius=8):
    """Search small integer combinations; only used where gens span a lattice
    whose reduced coordinates stay inside the radius."""
    for coeffs in itertools.product(range(-radius, radius + 1), repeat=len(gens)):
        if tuple(sum(c * g[i] for c, g in zip(coeffs, gens)) for i in range(len(v))) == tuple(v):
            return True
    return False


def test_hnf_example():
    L = hnf([(2, 2, 0), (4, 0, 0), (0, 4, 0)], 3)
    assert L.basis == ((2, 2, 0), (0, 4, 0))
    assert (4, 0, 0) in L and (1, 1, 0) not in L


def test_above_pivot_entries_reduced():
    assert hnf([(2, 4, 0), (0, 4, 0), (2, 2, 0)], 3).basis == ((2, 0, 0), (0, 2, 0))


def test_equality_examples():
    assert lattice_equal(hnf([(1, 1), (0, 2)], 2), hnf([(1, -1), (0, 2)], 2))
    assert not lattice_equal(hnf([(2, 0)], 2), hnf([(2, 0), (0, 2)], 2))
    S = lattice_sum(hnf([(2, 2, 0), (0, 4, 0)], 3), hnf([(1, 0, 0)], 3))
    assert (0, 2, 0) in S
    assert index_in(hnf([(1, 1), (1, -1)], 2), hnf([(1, 0), (0, 1)], 2)) == 2


def test_hnf_of_commutator_lattice():
    # closing (-1, 1, 1) under the sign changes diag(1,-1,-1) and diag(-1,1,-1)
    L = hnf([(-1, 1, 1), (-1, -1, -1), (1, 1, -1), (1, -1, 1)], 3)
    assert L.basis == ((1, 1, 1), (0, 2, 0), (0, 0, 2))


def test_index_examples():
    A = hnf([(1, 0), (0, 1)], 2)
    assert index_in(hnf([(2, 0), (0, 1)], 2), A) == 2
    assert index_in(hnf([(1, 0)], 2), A) is INFINITE


def test_index_requires_containment():
    with pytest.raises(ValueError):
        index_in(hnf([(1, 0)], 2), hnf([(2, 0)], 2))


def test_ambient_mismatch():
    with pytest.raises(ValueError):
        lattice_sum(hnf([(1, 0)], 2), hnf([(1, 0, 0)], 3))


def test_smith_examples():
    assert smith([[2, 0], [0, 4]]).torsion == (2, 4)
    assert smith([], ncols=2) == AbelianInvariants((), 2)
    assert smith([[4]]).torsion == (4,)
    assert smith([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]).torsion == (2, 6, 12)


def test_abelian_invariants_validation():
    with pytest.raises(ValueError):
        AbelianInvariants((4, 6))
    assert AbelianInvariants((2, 4)).order == 8
    assert AbelianInvariants((), 1).order is INFINITE


def test_solve_left():
    assert solve_left([[0, 0, 0], [0, -2, 0], [0, 0, -2]], (0, 4, -2)) == (0, -2, 1)
    assert solve_left([[2, 0], [0, 2]], (1, 0)) is None


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
def test_xgcd(a, b):
    g, s, t = xgcd(a, b)
    assert g >= 0 and s * a + t * b == g
    assert (a == b == 0 and g == 0) or (a % g == 0 and b % g == 0)


@given(vectors(3, 4))
def test_hnf_is_canonical_under_unimodular_changes(gens):
    L = hnf(gens, 3)
    shuffled = list(reversed(gens))
    mixed = [tuple(x + 3 * y for x, y in zip(shuffled[0], shuffled[-1]))] + shuffled[1:]
    if len(shuffled) == 1:
        mixed = [tuple(-x for x in shuffled[0])]
    assert hnf(mixed, 3) == L
    assert hnf(L.basis, 3) == L


@given(vectors(3, 4))
def test_hnf_shape(gens):
    L = hnf(gens, 3)
    piv = L.pivots
    assert list(piv) == sorted(set(piv))
    for row, c in zip(L.basis, piv):
        assert row[c] > 0
        for other in L.basis:
            if other is not row:
                assert 0 <= other[c] < row[c] or other[c] == 0 or other is row


@given(vectors(2, 3, -3, 3), st.tuples(st.integers(-6, 6), st.integers(-6, 6)))
def test_membership_matches_brute_force(gens, v):
    L = hnf(gens, 2)
    if L.rank == 2:
        # every vector in L with small entries has a small HNF coordinate vector
        assert contains(L, v) == brute_member(list(L.basis), v, radius=12)
    for g in gens:
        assert g in L


@given(vectors(3, 4), vectors(3, 2))
def test_sum_and_containment(a, b):
    A, B = hnf(a, 3), hnf(b, 3)
    S = lattice_sum(A, B)
    assert all(r in S for r in A.basis + B.basis)
    assert lattice_equal(S, lattice_sum(B, A))
    if S.rank == A.rank:
        assert index_in(A, S) * 1 >= 1


@given(st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=1, max_size=4))
def test_smith_matches_sympy(rows):
    ours = smith(rows)
    factors = [abs(int(f)) for f in invariant_factors(Matrix(rows), domain=ZZ)]
    nonzero = [f for f in factors if f]
    assert ours.torsion == tuple(f for f in nonzero if f > 1)
    assert ours.free_rank == 3 - len(nonzero)


@given(vectors(3, 3, -4, 4))
def test_index_is_determinant_ratio(gens):
    L = hnf(gens, 3)
    Z = hnf([(1, 0, 0), (0, 1, 0), (0, 0, 1)], 3)
    if L.rank < 3:
        assert index_in(L, Z) is INFINITE
    else:
        assert index_in(L, Z) == abs(Matrix(L.basis).det())
        assert quotient_invariants(L, Z).order == index_in(L, Z)


@given(vectors(3, 3, -4, 4), st.lists(st.integers(-3, 3), min_size=3, max_size=3))
def test_solve_left_certificate(rows, t):
    target = tuple(sum(c * r[i] for c, r in zip(t, rows)) for i in range(3))
    sol = solve_left(rows, target)
    assert sol is not None
    assert tuple(sum(c * r[i] for c, r in zip(sol, rows)) for i in range(3)) == target


def test_coordinates_and_transform():
    L = hnf([(2, 0), (0, 3)], 2)
    assert L.coordinates((4, -3)) == (2, -1)
    with pytest.raises(ValueError):
        L.coordinates((1, 0))
    assert L.transform([[0, 1], [1, 0]]) == hnf([(0, 2), (3, 0)], 2)
