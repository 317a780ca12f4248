"""Root systems: counts, chains, lacing, signed constants, decompositions."""

import pytest

from chevring.errors import OppositeOrEqual, UnsupportedRank
from chevring.roots import (
    build,
    commutator_index_set,
    decompose_opposite,
    i_phi,
    root_chain,
    structure_constants,
)

FULL_TABLE_SYSTEMS = ["A2", "A3", "B2", "C2", "G2"]


def test_root_counts_frozen():
    a2 = build("A2")
    assert len(a2.roots) == 6
    assert len({r.length_class for r in a2.roots}) == 1

    g2 = build("G2")
    assert len(g2.roots) == 12
    assert sum(1 for r in g2.roots if r.length_class == "short") == 6
    assert sum(1 for r in g2.roots if r.length_class == "long") == 6

    b2 = build("B2")
    assert len(b2.roots) == 8
    assert sum(1 for r in b2.roots if r.length_class == "short") == 4


def test_unsupported_ranks():
    for bad in ["A1", "D3", "E9", "F5", "G3", "H4"]:
        with pytest.raises(UnsupportedRank):
            build(bad)


def test_i_phi_frozen():
    assert i_phi(build("A3")) == 1
    assert i_phi(build("B2")) == 2
    assert i_phi(build("G2")) == 3


def test_root_chain_frozen_examples():
    a2 = build("A2")
    assert root_chain(a2.simple_roots[0], a2.simple_roots[1], a2) == (0, 1)

    g2 = build("G2")
    short, long = g2.simple_roots
    assert (short.length_class, long.length_class) == ("short", "long")
    assert root_chain(short, long, g2) == (0, 3)

    b2 = build("B2")
    long, short = b2.simple_roots
    assert (long.length_class, short.length_class) == ("long", "short")
    assert root_chain(short, long, b2) == (0, 2)


def test_root_chain_rejects_equal_and_opposite():
    a2 = build("A2")
    a = a2.simple_roots[0]
    with pytest.raises(OppositeOrEqual):
        root_chain(a, a, a2)
    with pytest.raises(OppositeOrEqual):
        root_chain(a, a2.negate(a), a2)


def test_sign_invariant_and_negation_closure():
    for name in FULL_TABLE_SYSTEMS + ["B3", "D4", "F4"]:
        system = build(name)
        for r in system.roots:
            assert all(c >= 0 for c in r.coords) or all(c <= 0 for c in r.coords)
            assert system.is_root(tuple(-c for c in r.coords))
            assert not system.is_root(tuple(2 * c for c in r.coords))


def test_cartan_matrices():
    assert build("A2").cartan.tolist() == [[2, -1], [-1, 2]]
    assert build("G2").cartan.tolist() == [[2, -1], [-3, 2]]
    assert build("B2").cartan.tolist() == [[2, -2], [-1, 2]]
    assert build("C2").cartan.tolist() == [[2, -1], [-2, 2]]


@pytest.mark.parametrize("name", FULL_TABLE_SYSTEMS)
def test_pair_constants_magnitude_and_antisymmetry(name):
    system = build(name)
    constants = structure_constants(system)
    table = constants.pair_table()
    assert table, "empty pair table"
    for (ac, bc), n in table.items():
        a, b = system.root(ac), system.root(bc)
        p, _ = root_chain(a, b, system)
        assert abs(n) == p + 1
        assert table[(bc, ac)] == -n


def test_pair_table_total_on_domain():
    for name in FULL_TABLE_SYSTEMS:
        system = build(name)
        table = structure_constants(system).pair_table()
        expected_keys = {
            (a.coords, b.coords)
            for a in system.roots
            for b in system.roots
            if a.coords != b.coords
            and a.coords != tuple(-c for c in b.coords)
            and system.add(a, b) is not None
        }
        assert set(table.keys()) == expected_keys


def test_a2_extraspecial_constant_is_plus_one():
    a2 = build("A2")
    constants = structure_constants(a2)
    gamma = a2.root((1, 1))
    eps, eta = constants.extraspecial_pair(gamma)
    assert constants.pair(eps, eta) == 1


def test_g2_reaches_magnitude_three():
    table = structure_constants(build("G2")).comm_table()
    assert 3 in {abs(v) for v in table.values()}


@pytest.mark.parametrize("name,want", [("A3", 1), ("B2", 2), ("C3", 2), ("G2", 3)])
def test_i_phi_equals_max_commutator_index(name, want):
    system = build(name)
    table = structure_constants(system).comm_table()
    assert max(i for (_, _, i, _) in table.keys()) == want == i_phi(system)


def test_commutator_constants_magnitudes_bounded():
    for name in FULL_TABLE_SYSTEMS:
        table = structure_constants(build(name)).comm_table()
        assert all(1 <= abs(v) <= 3 for v in table.values())
        for (ac, bc, i, j), v in table.items():
            if (i, j) == (1, 1):
                system = build(name)
                assert v == structure_constants(system).pair(system.root(ac), system.root(bc))


def test_commutator_index_set_order():
    g2 = build("G2")
    short, long = g2.simple_roots
    idx = commutator_index_set(g2, short, long)
    assert idx == sorted(idx, key=lambda ij: (ij[0] + ij[1], ij[0]))
    assert max(i for i, _ in idx) == 3


def test_decompose_opposite_frozen_a2():
    a2 = build("A2")
    alpha = a2.simple_roots[0]
    gamma, delta = decompose_opposite(a2, alpha)
    assert gamma.coords == (-1, -1) and delta.coords == (0, 1)


def test_decompose_opposite_sums_and_preferences():
    for name in FULL_TABLE_SYSTEMS + ["B3", "D4"]:
        system = build(name)
        for alpha in system.roots:
            gamma, delta = decompose_opposite(system, alpha)
            total = tuple(g + d for g, d in zip(gamma.coords, delta.coords))
            assert total == tuple(-c for c in alpha.coords)

    b2 = build("B2")
    for alpha in b2.roots:
        if alpha.length_class == "long":
            gamma, delta = decompose_opposite(b2, alpha)
            assert gamma.length_class == delta.length_class == "short"


def test_exceptional_systems_build_with_correct_counts():
    for name, count in [("E6", 72), ("E7", 126), ("E8", 240), ("F4", 48)]:
        assert len(build(name).roots) == count


def test_json_table_shape():
    dump = structure_constants(build("A2")).to_json_table()
    assert dump["system"] == "A2"
    assert all({"alpha", "beta", "n"} <= set(row) for row in dump["pairs"])
    assert all({"alpha", "beta", "i", "j", "n"} <= set(row) for row in dump["commutator"])
