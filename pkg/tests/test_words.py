"""Words, the line format, and the commutator-formula rewrite."""

import pytest

from chevring.errors import AmbientMismatch, OppositeOrEqual
from chevring.poly import PolyRing, standard_ring
from chevring.rings import Ideal, Zmod
from chevring.roots import build
from chevring.words import Generator, Word, chevalley_commutator, generator

AB = PolyRing(("a", "b"), ())


def nonopposite_pairs(system):
    for x in system.roots:
        for y in system.roots:
            if x.coords == y.coords or x.coords == tuple(-c for c in y.coords):
                continue
            yield x, y


def test_line_format_frozen():
    a2 = build("A2")
    R = Zmod(6)
    w = generator(R, a2.simple_roots[0], 3)
    assert w.to_lines() == ["x[1, 0](3)"]

    sym = chevalley_commutator(a2, a2.simple_roots[0], a2.simple_roots[1], AB.var("a"), AB.var("b"), AB)
    assert sym.to_lines() == ["x[1, 1](-a*b)"]


def test_concat_and_ring_mismatch():
    a2 = build("A2")
    r6, r4 = Zmod(6), Zmod(4)
    w = generator(r6, a2.simple_roots[0], 1) * generator(r6, a2.simple_roots[1], 2)
    assert len(w) == 2 and [g.param for g in w] == [1, 2]
    with pytest.raises(AmbientMismatch):
        generator(r6, a2.simple_roots[0], 1) * generator(r4, a2.simple_roots[0], 1)


def test_inverse_reverses_and_negates():
    a2 = build("A2")
    R = Zmod(6)
    w = generator(R, a2.simple_roots[0], 2) * generator(R, a2.simple_roots[1], 5)
    inv = w.inverse()
    assert [(g.root.coords, g.param) for g in inv] == [((0, 1), 1), ((1, 0), 4)]

    sym = generator(AB, a2.simple_roots[0], AB.var("a"))
    assert sym.inverse()[0].param == -AB.var("a")


def test_declared_level_checks():
    S = standard_ring()
    a2 = build("A2")
    root = a2.simple_roots[0]
    inside = Word(S, (Generator(root, S.monomial(1, s=2, t=1, a=1)),), ("level", 2, 1))
    assert inside.check_level()
    assert not inside.with_level(("level", 3, 1)).check_level()
    assert inside.with_level(("marker", "a")).check_level()
    assert not Word(S, (Generator(root, S.var("s")),), ("marker", "a")).check_level()

    R = Zmod(12)
    ideal = Ideal(R, [4])
    w = Word(R, (Generator(root, 8),), ("ideal", ideal))
    assert w.check_level()
    assert not Word(R, (Generator(root, 3),), ("ideal", ideal)).check_level()

    assert Word(R, (Generator(root, 3),)).check_level()


def test_commutator_rejects_equal_and_opposite():
    a2 = build("A2")
    alpha = a2.simple_roots[0]
    R = Zmod(5)
    with pytest.raises(OppositeOrEqual):
        chevalley_commutator(a2, alpha, alpha, 1, 1, R)
    with pytest.raises(OppositeOrEqual):
        chevalley_commutator(a2, alpha, a2.negate(alpha), 1, 1, R)


def test_symbolic_length_distribution_frozen():
    a, b = AB.var("a"), AB.var("b")
    want = {"A2": {1}, "A3": {1}, "B2": {1, 2}, "C2": {1, 2}, "G2": {1, 3, 4}}
    for name, lengths in want.items():
        system = build(name)
        seen = set()
        for x, y in nonopposite_pairs(system):
            w = chevalley_commutator(system, x, y, a, b, AB)
            assert len(w) <= 4
            if len(w):
                seen.add(len(w))
        assert seen == lengths, name


def test_g2_four_factor_word():
    """The full four-root chain comes from a short root against a long one.
    Two short roots never span more than three of the intermediate roots."""
    g2 = build("G2")
    a, b = AB.var("a"), AB.var("b")
    by_class = {}
    for x, y in nonopposite_pairs(g2):
        w = chevalley_commutator(g2, x, y, a, b, AB)
        if len(w):
            by_class.setdefault((x.length_class, y.length_class), set()).add(len(w))
    assert by_class[("short", "long")] == {4}
    assert by_class[("long", "short")] == {4}
    assert by_class[("short", "short")] == {1, 3}
    assert by_class[("long", "long")] == {1}

    short = next(r for r in g2.roots if r.length_class == "short" and r.is_positive)
    mates = [
        y
        for y in g2.roots
        if y.length_class == "long"
        and len(chevalley_commutator(g2, short, y, a, b, AB)) == 4
    ]
    assert mates
    w = chevalley_commutator(g2, short, mates[0], a, b, AB)
    degrees = []
    for g in w:
        (term,) = g.param.terms.keys()
        degrees.append(tuple(term))
    assert degrees == [(1, 1), (2, 1), (3, 1), (3, 2)]


def test_zero_parameters_dropped():
    a2 = build("A2")
    R = Zmod(4)
    w = chevalley_commutator(a2, a2.simple_roots[0], a2.simple_roots[1], 2, 2, R)
    assert len(w) == 0  # -4 = 0 mod 4
