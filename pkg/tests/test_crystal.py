import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from magnus import crystal as cr
from magnus import finite as fg
from magnus.crystal import (
    abelianization,
    are_conjugate,
    closure_contains,
    closure_equal,
    commutator_module,
    conjugate_to_inverse,
    conjugates_lattice,
    cyclic_quotient_order,
    find_conjugator,
    finite_quotient,
    magnus_scan,
    make_gp,
    make_hw,
    normal_closure,
)
from magnus.cyclo import CycloInt
from magnus.intlattice import hnf, index_in
from magnus.matrices import mat_eq, mat_mul

G = make_hw()
H = make_gp(3)
G5 = make_gp(5)


def elements(group, bound=3):
    return st.builds(
        lambda h, t: group.element(h, t),
        st.tuples(st.integers(0, group.p - 1), st.integers(0, group.p - 1)),
        st.lists(st.integers(-bound, bound), min_size=group.n, max_size=group.n),
    )


any_group = st.sampled_from([G, H, G5])


@st.composite
def element_pairs(draw):
    K = draw(any_group)
    return draw(elements(K)), draw(elements(K))


def fixed_point_commutator_module(g):
    """[g, G] by closing the commutators under conjugation until the HNF stops growing."""
    K = g.group
    gens = list(K.hol_gens) + [K.basis_element(k) for k in range(K.n)]
    L = hnf([K.commutator(g, w).trans for w in gens], K.n)
    movers = list(K.hol_gens) + [s.inverse() for s in K.hol_gens]
    while True:
        images = [K.conjugate(K.translation(r), s).trans for r in L.basis for s in movers]
        bigger = L.add_vectors(images)
        if bigger == L:
            return L
        L = bigger


# -- construction ---------------------------------------------------------------


def test_hw_examples():
    x, y = G.hol_gens
    assert G.evaluate("[x,y]") == G.translation((-1, 1, 1))
    assert G.evaluate("x^-1 z^2 x") == G.evaluate("z^-2")
    assert G.mul(x, x) == G.translation((1, 0, 0))
    assert G.conjugate(G.evaluate("y^2"), x).trans == (0, -1, 0)
    assert G.power(x, -1) == G.element((1, 0), (-1, 0, 0))


def test_hw_square_matrix():
    X = G.env["x"].to_matrix()
    assert mat_mul(X, X)[0] == [1, -1, 0, 0]


def test_h_examples():
    assert H.evaluate("u^3") == H.translation((-2, -1, 0, 0, 0, 0, 0, 0))
    assert H.evaluate("[u,v]") == H.translation((1, 0, 1, 0, 1, 0, 1, 0))
    assert H.evaluate("u^-1 e2 u") == H.env["he2"]


@pytest.mark.parametrize("p", [5, 7])
def test_larger_primes_construct(p):
    K = make_gp(p)
    assert K.n == (p - 1) * (p + 1)
    assert K.evaluate("[u,v]").trans == K.block_vector({b: 1 for b in K.blocks})


def test_unsupported_prime():
    with pytest.raises(ValueError):
        make_gp(11)
    with pytest.raises(ValueError):
        cr.group_from_name("gp:4")


def test_mixing_groups_rejected():
    with pytest.raises(ValueError):
        G.mul(G.identity(), H.identity())


def test_corrupted_matrix_is_detected(monkeypatch):
    bad = [row[:] for row in cr._HW_DISPLAYED["[X,Y]"]]
    bad[0][1] = 3
    monkeypatch.setitem(cr._HW_DISPLAYED, "[X,Y]", bad)
    with pytest.raises(cr.SelfCheckError):
        cr.HantzscheWendt()


def test_module_action_agrees_with_matrices():
    for K in (H, G5):
        assert (K.rho[1, 0], K.rho[0, 1]) == K.module_action()


# -- group law against the matrix representation --------------------------------------


@given(element_pairs())
def test_multiplication_matches_matrices(ab):
    a, b = ab
    K = a.group
    assert mat_eq((a * b).to_matrix(), mat_mul(a.to_matrix(), b.to_matrix()))
    assert K.from_matrix(mat_mul(a.to_matrix(), b.to_matrix())) == a * b


@given(element_pairs())
def test_inverse_and_round_trip(ab):
    a, _ = ab
    K = a.group
    assert (a * a.inverse()).is_identity() and (a.inverse() * a).is_identity()
    assert K.from_matrix(a.to_matrix()) == a
    assert a.conjugate(K.identity()) == a


@given(any_group.flatmap(lambda K: st.tuples(elements(K), elements(K), elements(K))))
def test_associativity(abc):
    a, b, c = abc
    assert (a * b) * c == a * (b * c)


@given(any_group.flatmap(lambda K: st.tuples(elements(K), st.integers(-7, 7), st.integers(-7, 7))))
def test_powers(data):
    a, m, n = data
    assert a ** (m + n) == (a**m) * (a**n)


def test_faithful_on_box():
    seen = {}
    for g in cr.scan_elements(G, 2):
        key = tuple(tuple(Fraction(x) for x in row) for row in g.to_matrix())
        assert key not in seen
        seen[key] = g


def test_from_matrix_rejects_foreign_matrix():
    M = G.identity().to_matrix()
    M[0][1] = Fraction(1, 3)
    with pytest.raises(ValueError):
        G.from_matrix(M)
    M = G.identity().to_matrix()
    M[1][2] = 1
    with pytest.raises(ValueError):
        G.from_matrix(M)


# -- closures ----------------------------------------------------------------------------


def test_commutator_module_examples():
    x = G.env["x"]
    assert commutator_module(x).basis == ((1, 1, 1), (0, 2, 0), (0, 0, 2))
    e = H.env["e_inf"]
    assert commutator_module(e) == hnf([(-1, 1) + (0,) * 6, (-1, -2) + (0,) * 6], 8)
    assert commutator_module(e).basis[:2] == ((1, 2, 0, 0, 0, 0, 0, 0), (0, 3, 0, 0, 0, 0, 0, 0))
    for K in (G, H, G5):
        assert commutator_module(K.identity()).is_zero()


@given(any_group.flatmap(lambda K: elements(K, 2)))
def test_commutator_module_matches_fixed_point(g):
    assert commutator_module(g) == fixed_point_commutator_module(g)


@given(any_group.flatmap(lambda K: elements(K, 2)))
def test_closure_lattices_are_invariant(g):
    K = g.group
    N = normal_closure(g)
    for h in ((1, 0), (0, 1)):
        assert N.L.transform(K.rho[h]) == N.L
        assert N.NA.transform(K.rho[h]) == N.NA


def test_normal_closure_examples():
    g = G.translation((1, 1, 0))
    N = normal_closure(g)
    assert N.image_order == 1
    assert N.NA == hnf([(1, 1, 0), (2, 0, 0), (0, 2, 0)], 3)
    N = normal_closure(G.identity())
    assert N.image_order == 1 and N.NA.is_zero()


def test_closure_contains_examples():
    x, y = G.hol_gens
    N = normal_closure(x)
    assert closure_contains(N, x * G.translation((0, 2, 0)))
    assert not closure_contains(N, y)
    assert closure_contains(N, x.inverse())


def test_closure_equal_examples():
    assert closure_equal(G.translation((1, 1, 0)), G.translation((-1, 1, 0)))
    assert not closure_equal(G.translation((1, 0, 0)), G.translation((0, 1, 0)))


@given(any_group.flatmap(lambda K: st.tuples(elements(K, 2), elements(K, 2))))
def test_closure_contains_conjugates(gw):
    g, w = gw
    N = normal_closure(g)
    assert closure_contains(N, g.conjugate(w))
    assert closure_contains(N, g.inverse())
    assert closure_equal(g, g.inverse() * g * g)


@given(any_group.flatmap(lambda K: st.tuples(elements(K, 1), elements(K, 1))))
def test_closure_key_is_complete(gh):
    g, h = gh
    assert (normal_closure(g).key == normal_closure(h).key) == closure_equal(g, h)


@given(any_group.flatmap(lambda K: st.tuples(elements(K, 2), elements(K, 2))))
def test_conjugate_key_is_complete(gw):
    g, w = gw
    K = g.group
    h = g.conjugate(w)
    assert cr.conjugacy_key(g) == cr.conjugacy_key(h)
    other = K.element(g.hol, tuple(t + 1 for t in g.trans))
    assert (cr.conjugacy_key(g) == cr.conjugacy_key(other)) == are_conjugate(g, other)


def test_quotient_order_and_index():
    x = G.env["x"]
    assert cyclic_quotient_order(x) == 4
    assert cyclic_quotient_order(H.env["e_inf"]) == 3
    assert cyclic_quotient_order(G.identity()) == 1


def test_translation_quotient_orders():
    # x^2 spans its own closure, so the commutator part has index 2 there
    assert cyclic_quotient_order(G.translation((1, 0, 0))) == 2
    # e_inf + e_0 in H: (1,1,0,0) has order 3 modulo the pi-part
    assert cyclic_quotient_order(H.translation((1, 1, 0, 0, 0, 0, 0, 0))) == 3


# -- conjugacy ---------------------------------------------------------------------------


def test_conjugates_lattice_examples():
    x = G.env["x"]
    assert conjugates_lattice(x)[1] == hnf([(0, 2, 0), (0, 0, 2)], 3)
    assert conjugates_lattice(G.translation((1, 2, 3)))[1].is_zero()
    pi_blocks = []
    for b in (1, 2, 3):
        for c in ((-1, 1), (-1, -2)):
            v = [0] * 8
            v[2 * b:2 * b + 2] = c
            pi_blocks.append(v)
    assert conjugates_lattice(H.env["u"])[1] == hnf(pi_blocks, 8)


def test_conjugacy_examples():
    assert not conjugate_to_inverse(G.env["x"])
    assert not conjugate_to_inverse(H.env["e_inf"])
    assert are_conjugate(G.translation((1, 1, 0)), G.translation((1, -1, 0)))
    assert conjugate_to_inverse(G.translation((1, 0, 0)))


@given(any_group.flatmap(lambda K: st.tuples(elements(K, 2), elements(K, 2))))
def test_find_conjugator(gw):
    g, w = gw
    h = g.conjugate(w)
    c = find_conjugator(g, h)
    assert c is not None and g.conjugate(c) == h
    assert are_conjugate(g, h) and are_conjugate(h, g)


def test_find_conjugator_refutes():
    x = G.env["x"]
    assert find_conjugator(x, x.inverse()) is None
    assert find_conjugator(x, G.env["y"]) is None


# -- abelianization and automorphisms --------------------------------------------------


def test_abelianizations():
    assert abelianization(G).torsion == (4, 4)
    assert abelianization(H).torsion == (3,) * 5
    assert abelianization(G5).torsion == (5,) * 7


def test_derived_lattice_index():
    Z = hnf([tuple(int(i == j) for j in range(3)) for i in range(3)], 3)
    assert index_in(cr.derived_lattice(G), Z) == 4


def test_automorphism_examples():
    u, v = H.hol_gens
    assert cr.automorphism_sigma(v) == u * v
    assert cr.automorphism_tau(H.env["e1"]) == H.env["e1"].inverse()
    zero_five = G5.translation(G5.block_vector({"0": 1}))
    assert cr.automorphism_sigma(zero_five) == G5.translation(G5.block_vector({"4": 1}))
    with pytest.raises(ValueError):
        cr.automorphism_sigma(G.env["x"])


@given(st.sampled_from([H, G5]).flatmap(lambda K: st.tuples(elements(K, 2), elements(K, 2))))
def test_automorphisms_are_bijective_homomorphisms(ab):
    a, b = ab
    K = a.group
    s, si, t = cr.sigma(K), cr.sigma_inverse(K), cr.tau(K)
    for phi in (s, si, t):
        assert phi(a * b) == phi(a) * phi(b)
    assert si(s(a)) == a and s(si(a)) == a and t(t(a)) == a


@given(st.sampled_from([H, G5]).flatmap(lambda K: st.tuples(elements(K, 1), elements(K, 1))))
def test_automorphisms_preserve_closures_and_conjugacy(gh):
    g, h = gh
    for phi in (cr.sigma(g.group), cr.tau(g.group)):
        assert closure_equal(g, h) == closure_equal(phi(g), phi(h))
        assert are_conjugate(g, h) == are_conjugate(phi(g), phi(h))


# -- scans ------------------------------------------------------------------------------


def test_scan_hw_small():
    report = magnus_scan(G, 1)
    assert report.ok and report.elements == 4 * 27


def test_scan_p5_violation():
    cosets, support = cr.default_scan_region(G5)
    report = magnus_scan(G5, 1, cosets, support)
    e0 = G5.translation(G5.block_vector({"0": 1}))
    f0 = G5.translation(G5.block_vector({"0": CycloInt(5, (1, 1))}))
    assert report.violations[0] == (e0, f0)


def test_scan_guard():
    with pytest.raises(ValueError):
        magnus_scan(G5, 1)
    with pytest.raises(ValueError):
        magnus_scan(G, 0)


def test_p5_unit_closure():
    e0 = G5.translation(G5.block_vector({"0": 1}))
    f0 = G5.translation(G5.block_vector({"0": CycloInt(5, (1, 1))}))
    assert closure_equal(e0, f0)
    assert not are_conjugate(e0, f0) and not are_conjugate(e0.inverse(), f0)


# -- finite quotients ------------------------------------------------------------------


def test_quotient_orders():
    assert finite_quotient(G, 2).group.order == 32
    Q = finite_quotient(G, 4)
    assert Q.group.order == 256
    assert fg.abelian_invariants(Q.group).torsion == (4, 4)
    assert finite_quotient(G, 8).group.order == 2048
    with pytest.raises(fg.OrderCapExceeded):
        finite_quotient(G, 8, cap=2000)
    with pytest.raises(fg.OrderCapExceeded):
        finite_quotient(G, 16)


@pytest.mark.parametrize("K, m", [(G, 2), (G, 4), (H, 1)])
def test_quotient_projection_is_homomorphism(K, m):
    Q = finite_quotient(K, m)
    box = list(itertools.islice(cr.scan_elements(K, 1), 0, None, 7))[:40]
    for a, b in itertools.product(box, repeat=2):
        assert Q(a * b) == Q.group.mul[Q(a), Q(b)]
    x = K.hol_gens[0]
    y2 = K.power(K.hol_gens[1], 2)
    assert Q(x * y2) == Q.group.mul[Q(x), Q(y2)]


def test_quotient_generators_generate():
    for K, m in ((G, 4), (H, 1)):
        Q = finite_quotient(K, m)
        assert len(Q.group.generated_by()) == Q.group.order


@given(elements(G, 2), elements(G, 2))
def test_closures_project_into_quotient_closures(g, h):
    Q = finite_quotient(G, 4)
    if closure_contains(normal_closure(g), h):
        assert Q(h) in fg.normal_closure(Q.group, Q(g))
    if are_conjugate(g, h):
        assert fg.are_conjugate(Q.group, Q(g), Q(h))
