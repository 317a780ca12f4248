"""Finite-ring evaluation, reduction homomorphisms, and the relation suite."""

import random
from fractions import Fraction

import numpy as np
import pytest

from chevring.errors import RelationFailure
from chevring.groups import (
    GroupElement,
    evaluate,
    evaluate_poly,
    identity,
    reduce_mod,
    steinberg_suite,
    unipotent,
)
from chevring.poly import PolyRing
from chevring.reps import poly_identity, poly_mat_equal, representation_for
from chevring.rings import Ideal, TruncatedPolynomialRing, Zmod
from chevring.roots import build
from chevring.words import Word, chevalley_commutator, generator


def rep_ring(name, m):
    system = build(name)
    return representation_for(system), Zmod(m)


def test_unipotent_frozen_sl3():
    rep, R = rep_ring("A2", 5)
    g = unipotent(rep, R, rep.system.simple_roots[0], 2)
    assert g.matrix.tolist() == [[1, 2, 0], [0, 1, 0], [0, 0, 1]]
    assert unipotent(rep, R, rep.system.simple_roots[0], 0).is_identity


def test_additivity_c2_long_root():
    rep, R = rep_ring("C2", 9)
    long_root = next(r for r in rep.system.roots if r.length_class == "long" and r.is_positive)
    e = rep.root_element(long_root)
    assert len(np.nonzero(e)[0]) == 1
    for a in range(9):
        for b in range(9):
            lhs = unipotent(rep, R, long_root, a) * unipotent(rep, R, long_root, b)
            assert lhs == unipotent(rep, R, long_root, R.add(a, b))


def test_evaluate_empty_and_cancellation():
    rep, R = rep_ring("A2", 6)
    assert evaluate(rep, Word(R)).is_identity
    alpha = rep.system.simple_roots[0]
    w = generator(R, alpha, 4) * generator(R, alpha, 2)
    assert evaluate(rep, w).is_identity


def test_evaluate_inverse_word():
    rep, R = rep_ring("A3", 6)
    rng = random.Random(0)
    roots = rep.system.roots
    for _ in range(20):
        w = Word(R)
        for _ in range(rng.randrange(1, 6)):
            w = w * generator(R, roots[rng.randrange(len(roots))], rng.randrange(6))
        assert evaluate(rep, w * w.inverse()).is_identity
        assert evaluate(rep, w.inverse() * w).is_identity


def test_a2_word_example_against_raw_matrices():
    """x_12(a) x_23(b) x_12(-a) x_23(-b) lands on a single parameter ab in the
    corner, checked against plain integer matrices."""
    rep, R = rep_ring("A2", 6)
    alpha, beta = rep.system.simple_roots

    def raw(i, j, t):
        m = np.eye(3, dtype=np.int64)
        m[i, j] = t % 6
        return m

    for a in range(6):
        for b in range(6):
            w = (
                generator(R, alpha, a)
                * generator(R, beta, b)
                * generator(R, alpha, R.neg(a))
                * generator(R, beta, R.neg(b))
            )
            expected = raw(0, 1, a) @ raw(1, 2, b) @ raw(0, 1, -a) @ raw(1, 2, -b) % 6
            assert evaluate(rep, w).matrix.tolist() == expected.tolist()
            corner = np.eye(3, dtype=np.int64)
            corner[0, 2] = (a * b) % 6
            assert expected.tolist() == corner.tolist()


def test_evaluate_poly_with_denominators():
    S = PolyRing(("s", "a"), ("s",))
    rep = representation_for(build("A2"))
    param = S.monomial(1, a=1, s=-1)
    w = generator(S, rep.system.simple_roots[0], param)
    prod = evaluate_poly(rep, w * w.inverse())
    assert poly_mat_equal(prod, poly_identity(S, 3))


def test_evaluate_rejects_symbolic_words():
    rep = representation_for(build("A2"))
    S = PolyRing(("a",), ())
    with pytest.raises(TypeError):
        evaluate(rep, generator(S, rep.system.simple_roots[0], S.var("a")))


def test_reduce_mod_frozen_examples():
    rep, R6 = rep_ring("A2", 6)
    alpha = rep.system.simple_roots[0]
    g = unipotent(rep, R6, alpha, 3)

    assert reduce_mod(Ideal(R6, [3]), g).is_identity
    h = reduce_mod(Ideal(R6, [2]), g)
    assert not h.is_identity and h.ring.size == 2

    untouched = reduce_mod(Ideal(R6, [0]), g)
    assert untouched.ring.size == 6
    assert untouched.matrix.tolist() == g.matrix.tolist()

    R12 = Zmod(12)
    g12 = unipotent(rep, R12, alpha, 4)
    assert reduce_mod(Ideal(R12, [4]), g12).is_identity
    assert not reduce_mod(Ideal(R12, [4]), unipotent(rep, R12, alpha, 2)).is_identity


def test_reduce_mod_is_multiplicative():
    rep, R12 = rep_ring("A2", 12)
    ideal = Ideal(R12, [4])
    rng = random.Random(1)
    roots = rep.system.roots
    for _ in range(15):
        g = evaluate(rep, generator(R12, roots[rng.randrange(6)], rng.randrange(12)))
        h = evaluate(rep, generator(R12, roots[rng.randrange(6)], rng.randrange(12)))
        assert reduce_mod(ideal, g * h) == reduce_mod(ideal, g) * reduce_mod(ideal, h)


@pytest.mark.parametrize(
    "name,m",
    [("A2", 4), ("B2", 3), ("G2", 2), ("C2", 2), ("A3", 3)],
)
def test_steinberg_suite_passes(name, m):
    rep, R = rep_ring(name, m)
    report = steinberg_suite(rep, R)
    assert report["pass"] and report["failures"] == 0
    assert report["exhaustive"]
    assert report["instances"] > 0
    assert all(r["failures"] == [] for r in report["relations"])


def test_steinberg_suite_nonprincipal_ring():
    rep = representation_for(build("A2"))
    R = TruncatedPolynomialRing(2, 2)
    report = steinberg_suite(rep, R)
    assert report["pass"]


def test_steinberg_suite_sampling_mode():
    rep, R = rep_ring("A2", 8)
    report = steinberg_suite(rep, R, limit=300, seed=7)
    assert not report["exhaustive"]
    assert report["pass"]
    again = steinberg_suite(rep, R, limit=300, seed=7)
    assert report == again


def test_steinberg_suite_catches_wrong_sign(monkeypatch):
    import chevring.groups as groups_mod
    from chevring.words import Generator
    from chevring.words import chevalley_commutator as real

    def corrupted(system, alpha, beta, a, b, ring):
        w = real(system, alpha, beta, a, b, ring)
        if len(w) == 0:
            return w
        first = w[0]
        bad = Generator(first.root, ring.neg(first.param))
        return Word(ring, (bad,) + w.factors[1:])

    monkeypatch.setattr(groups_mod, "chevalley_commutator", corrupted)
    rep, R = rep_ring("A2", 3)
    report = steinberg_suite(rep, R)
    assert not report["pass"] and report["failures"] > 0
    with pytest.raises(RelationFailure):
        steinberg_suite(rep, R, strict=True)


def _det(matrix) -> Fraction:
    m = [[Fraction(int(v)) for v in row] for row in matrix]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col]), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            factor = m[r][col] * inv
            if factor:
                m[r] = [x - factor * y for x, y in zip(m[r], m[col])]
    return det


def test_generator_determinants_are_one():
    for name in ["A2", "A3", "C2", "B2"]:
        rep = representation_for(build(name))
        for root in rep.system.roots:
            tower = rep.towers[root.coords]
            for xi in (1, 2, -1):
                m = np.eye(rep.dim, dtype=object)
                for k in range(1, len(tower)):
                    m = m + (xi**k) * tower[k]
                assert _det(m) == 1, (name, root.coords, xi)


def test_group_element_immutability_and_hash():
    rep, R = rep_ring("A2", 5)
    g = unipotent(rep, R, rep.system.simple_roots[0], 2)
    with pytest.raises(AttributeError):
        g.ring = R
    with pytest.raises(ValueError):
        g.matrix[0, 0] = 3
    assert hash(g) == hash(unipotent(rep, R, rep.system.simple_roots[0], 2))
    assert len({g, identity(rep, R), g * g}) == 3
