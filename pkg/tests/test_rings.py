"""Ring layer: axioms, annihilator stabilisation, localisation, ideals."""

import pytest

from chevring import (
    Ideal,
    NilpotentDenominator,
    NotUnitIdeal,
    ProductRing,
    TruncatedPolynomialRing,
    Zmod,
    ann_stabilize,
    ideal_ops,
    is_semisimple,
    localise_finite,
    parse_ring,
    partition_of_one,
)
from chevring.errors import AmbientMismatch

SMALL_RINGS = [
    Zmod(2),
    Zmod(3),
    Zmod(4),
    Zmod(5),
    Zmod(6),
    Zmod(8),
    Zmod(9),
    Zmod(12),
    ProductRing([Zmod(2), Zmod(2)]),
    ProductRing([Zmod(4), Zmod(9)]),
    TruncatedPolynomialRing(3, 2),
    TruncatedPolynomialRing(2, 3),
]


def brute_annihilator(ring, x):
    return frozenset(a for a in range(ring.size) if ring.mul(x, a) == ring.zero)


def brute_ann_stabilize(ring, s):
    # independent oracle: walk powers of s and compare annihilators directly
    k = 0
    power = ring.one
    while True:
        nxt = ring.mul(power, s)
        if brute_annihilator(ring, power) == brute_annihilator(ring, nxt):
            return k
        power = nxt
        k += 1


@pytest.mark.parametrize("ring", SMALL_RINGS, ids=lambda r: r.name)
def test_ring_axioms_exhaustive(ring):
    ring.check_axioms()


def test_ann_stabilize_frozen_examples():
    assert ann_stabilize(Zmod(8), 2) == 3
    assert ann_stabilize(Zmod(6), 5) == 0
    assert ann_stabilize(Zmod(12), 2) == 2


@pytest.mark.parametrize("ring", SMALL_RINGS, ids=lambda r: r.name)
def test_ann_stabilize_matches_enumeration_oracle(ring):
    for s in range(ring.size):
        k = ann_stabilize(ring, s)
        assert k == brute_ann_stabilize(ring, s)
        # stabilisation makes multiplication by s injective on s^k R
        sk = ring.pow(s, k)
        image = {ring.mul(sk, a) for a in range(ring.size)}
        seen = {}
        for x in image:
            y = ring.mul(s, x)
            assert y not in seen or seen[y] == x
            seen[y] = x


def test_is_semisimple_frozen_examples():
    assert is_semisimple(Zmod(6)) is True
    assert is_semisimple(Zmod(8)) is False
    assert is_semisimple(TruncatedPolynomialRing(3, 2)) is False


def test_is_semisimple_matches_squarefree_modulus():
    def squarefree(m):
        return all(m % (d * d) for d in range(2, m))

    for m in range(2, 40):
        assert is_semisimple(Zmod(m)) == squarefree(m)


def test_localise_frozen_example_z12():
    loc = localise_finite(Zmod(12), 2)
    assert sorted(loc.kernel.carrier) == [0, 3, 6, 9]
    assert loc.target.size == 3
    assert loc.image_of_s == 2
    assert loc.image_of_s_inverse == 2
    # the 3-element target has the arithmetic of Z/3 on labels 0,1,2
    z3 = Zmod(3)
    for a in range(3):
        for b in range(3):
            assert loc.target.add(a, b) == z3.add(a, b)
            assert loc.target.mul(a, b) == z3.mul(a, b)


def test_localise_identity_and_nilpotent():
    loc = localise_finite(Zmod(6), 1)
    assert sorted(loc.kernel.carrier) == [0]
    assert loc.target.size == 6
    with pytest.raises(NilpotentDenominator):
        localise_finite(Zmod(8), 2)


@pytest.mark.parametrize("ring", SMALL_RINGS, ids=lambda r: r.name)
def test_localisation_is_ring_homomorphism(ring):
    for s in range(ring.size):
        try:
            loc = localise_finite(ring, s)
        except NilpotentDenominator:
            assert ring.is_nilpotent(s)
            continue
        # kernel equals Ann(s^k) at the stabilized exponent
        assert loc.kernel.carrier == brute_annihilator(ring, ring.pow(s, loc.stable_exponent))
        assert loc.target.mul(loc.image_of_s, loc.image_of_s_inverse) == loc.target.one
        for a in range(ring.size):
            for b in range(ring.size):
                assert loc(ring.add(a, b)) == loc.target.add(loc(a), loc(b))
                assert loc(ring.mul(a, b)) == loc.target.mul(loc(a), loc(b))


def test_ideal_ops_frozen_examples():
    z6 = Zmod(6)
    out = ideal_ops(Ideal(z6, [2]), Ideal(z6, [3]))
    assert out["comaximal"] is True
    assert out["product"].carrier == frozenset({0})

    z12 = Zmod(12)
    out = ideal_ops(Ideal(z12, [4]), Ideal(z12, [6]))
    assert out["sum"].carrier == Ideal(z12, [2]).carrier
    assert out["comaximal"] is False
    assert out["product"].carrier == frozenset({0})

    whole = Ideal(z12, [1])
    any_other = Ideal(z12, [6])
    out = ideal_ops(whole, any_other)
    assert out["comaximal"] is True
    assert out["product"].carrier == any_other.carrier


def test_ideal_ops_ambient_mismatch():
    with pytest.raises(AmbientMismatch):
        ideal_ops(Ideal(Zmod(6), [2]), Ideal(Zmod(12), [2]))


def test_ideal_carrier_closure_properties():
    for ring in SMALL_RINGS:
        for g in range(ring.size):
            ideal = Ideal(ring, [g])
            for x in ideal.carrier:
                for r in range(ring.size):
                    assert ring.mul(r, x) in ideal.carrier
                for y in ideal.carrier:
                    assert ring.add(x, y) in ideal.carrier


def test_partition_of_one_frozen_examples():
    assert partition_of_one(Zmod(6), [(2, 2), (3, 1)]) == (1, 1)
    with pytest.raises(NotUnitIdeal):
        partition_of_one(Zmod(6), [(2, 1)])
    assert partition_of_one(Zmod(5), [(3, 1)]) == (2,)


def test_partition_of_one_is_a_partition():
    ring = Zmod(12)
    pairs = [(3, 2), (4, 1)]
    eta = partition_of_one(ring, pairs)
    acc = ring.zero
    for (s, l), e in zip(pairs, eta):
        acc = ring.add(acc, ring.mul(ring.pow(s, l), e))
    assert acc == ring.one


def test_parse_ring():
    assert parse_ring("Z/12") == Zmod(12)
    assert parse_ring("Z/4 x Z/9") == ProductRing([Zmod(4), Zmod(9)])
    assert parse_ring("Z/3[u]/(u^2)") == TruncatedPolynomialRing(3, 2)
    with pytest.raises(ValueError):
        parse_ring("GF(8)")


def test_product_ring_componentwise():
    ring = ProductRing([Zmod(4), Zmod(9)])
    a = ring.pack((2, 5))
    b = ring.pack((3, 7))
    assert ring.unpack(ring.add(a, b)) == (1, 3)
    assert ring.unpack(ring.mul(a, b)) == (2, 8)
    assert ring.element_name(a) == "(2,5)"


def test_truncated_polynomial_nilpotent_variable():
    ring = TruncatedPolynomialRing(3, 2)
    u = ring.u
    assert ring.mul(u, u) == ring.zero
    assert ring.element_name(ring.add(ring.one, u)) == "1+u"


def test_quotient_project_lift_roundtrip():
    loc = localise_finite(Zmod(12), 2)
    for t in range(loc.target.size):
        assert loc(loc.lift(t)) == t


def test_units_and_inverse():
    z12 = Zmod(12)
    assert z12.units == (1, 5, 7, 11)
    for u in z12.units:
        assert z12.mul(u, z12.inv(u)) == 1
