"""Finite enumeration layer: subgroup tables, congruence filters, widths,
normality certificates, and the localisation-kernel reports."""

import numpy as np
import pytest

from chevring import kernels, subgroups
from chevring.errors import AmbientMismatch, CapExceeded, NotUnitIdeal
from chevring.rings import Ideal, Zmod, maximal_ideals, parse_ring
from chevring.subgroups import (
    DEFAULT_SEED,
    ambient_table,
    commutator_width,
    congruence_subgroup,
    centre_of,
    descriptor,
    enumerate_elementary,
    full_congruence_subgroup,
    group_order,
    inverse_stack,
    mutual_commutator,
    normality_decompose,
    theorem2_verify,
    verify_theorem_3C,
    verify_theorem_4C,
    verify_theorem_8C,
)


def desc_for(system, ringtxt):
    return descriptor(system, parse_ring(ringtxt))


# -- orders: closed form against BFS enumeration --------------------------------

FROZEN_ORDERS = {
    ("A2", "Z/2"): 168,
    ("A2", "Z/3"): 5616,
    ("A2", "Z/4"): 43008,
    ("A2", "Z/6"): 943488,
    ("C2", "Z/2"): 720,
    ("C2", "Z/3"): 51840,
}


@pytest.mark.parametrize("system,ringtxt", sorted(FROZEN_ORDERS), ids="-".join)
def test_ambient_order_formula_vs_enumeration(system, ringtxt):
    desc = desc_for(system, ringtxt)
    amb = ambient_table(desc)
    assert amb.order == FROZEN_ORDERS[(system, ringtxt)]
    assert group_order(desc) == amb.order


def test_group_order_multiplicative_beyond_enumeration():
    # 12 = 4 * 3, so the order must be the product of the frozen factors
    assert group_order(desc_for("A2", "Z/12")) == 43008 * 5616 == 241532928
    assert group_order(desc_for("C2", "Z/6")) == 720 * 51840
    # no closed form for adjoint images or non-cyclic rings
    assert group_order(desc_for("G2", "Z/2")) is None
    assert group_order(desc_for("A2", "Z/3[u]/(u^2)")) is None


def test_ambient_formula_guard_raises_before_work():
    with pytest.raises(CapExceeded):
        ambient_table(desc_for("A2", "Z/12"), cap=1_000_000)


def test_bfs_identity_and_inverse_distances():
    amb = ambient_table(desc_for("A2", "Z/2"))
    assert amb.dist[0] == 0 and (amb.dist[1:] > 0).all()
    # the generator list is inverse-closed, so dist(g) == dist(g^-1)
    data = kernels.ring_data(amb.desc.ring)
    inv = inverse_stack(amb.mats, data, amb.mats[0])
    idx = np.array([amb.index_of(inv[i]) for i in range(amb.order)])
    assert (amb.dist[idx] == amb.dist).all()


def test_bfs_triangle_inequality_sampled():
    amb = ambient_table(desc_for("A2", "Z/3"))
    rng = np.random.default_rng(DEFAULT_SEED)
    data = kernels.ring_data(amb.desc.ring)
    xs, ys = rng.integers(0, amb.order, 300), rng.integers(0, amb.order, 300)
    prods = kernels.matmul_batch(amb.mats[xs], amb.mats[ys], data)
    for i in range(300):
        d = amb.distance(prods[i])
        assert d is not None and d <= int(amb.dist[xs[i]]) + int(amb.dist[ys[i]])


# -- congruence and relative levels ----------------------------------------------

def test_principal_congruence_kernel_frozen_sl3_z4():
    desc = desc_for("A2", "Z/4")
    amb = ambient_table(desc)
    ker = congruence_subgroup(desc, Ideal(desc.ring, (2,)))
    # independent oracle: entrywise predicate on the enumerated ambient group
    ident = amb.mats[0]
    oracle = int(np.sum(np.all((amb.mats - ident) % 2 == 0, axis=(1, 2))))
    assert ker.order == oracle == 256
    assert amb.order // ker.order == 168  # image is the whole mod-2 group


def test_relative_closure_strictly_above_plain_level_sl3_z4():
    desc = desc_for("A2", "Z/4")
    I = Ideal(desc.ring, (2,))
    plain = enumerate_elementary(desc, I)
    relative = enumerate_elementary(desc, ("relative", I))
    kernel = congruence_subgroup(desc, I)
    assert plain.order == 64
    assert relative.order == kernel.order == 256
    assert relative.same_elements(kernel)
    # E(I) really is a subgroup of E(R, I), not just smaller
    assert relative.contains_keys(plain.key_array()).all()


def test_subgroup_chain_e_rel_g_c():
    desc = desc_for("A2", "Z/6")
    I = Ideal(desc.ring, (2,))
    plain = enumerate_elementary(desc, I)
    relative = enumerate_elementary(desc, ("relative", I))
    kernel = congruence_subgroup(desc, I)
    fullc = full_congruence_subgroup(desc, I)
    assert relative.contains_keys(plain.key_array()).all()
    assert kernel.contains_keys(relative.key_array()).all()
    assert fullc.contains_keys(kernel.key_array()).all()
    # SL3(Z/2) has trivial centre, so C(R, I) collapses onto G(R, I)
    assert fullc.order == kernel.order == group_order(desc) // 168
    for part in (plain, relative, kernel, fullc):
        assert group_order(desc) % part.order == 0  # Lagrange


def test_relative_levels_frozen_z12():
    desc = desc_for("A2", "Z/12")
    orders = {
        g: enumerate_elementary(desc, ("relative", Ideal(desc.ring, (g,)))).order
        for g in (3, 4, 6)
    }
    # CRT: reduction mod g kills exactly the complementary factor
    assert orders == {3: 43008, 4: 5616, 6: 256}
    full = group_order(desc)
    assert full // orders[3] == 5616 and full // orders[4] == 43008


def test_centre_of_sp4_z3():
    amb = ambient_table(desc_for("C2", "Z/3"))
    centre = centre_of(amb)
    assert len(centre) == 2  # {I, -I}
    assert 0 in centre


def test_congruence_rejects_foreign_ideal():
    desc = desc_for("A2", "Z/4")
    with pytest.raises(AmbientMismatch):
        congruence_subgroup(desc, Ideal(parse_ring("Z/6"), (2,)))


def test_shape_path_matches_filter_path():
    # same kernel computed with and without the ambient enumeration
    desc = desc_for("A2", "Z/9")
    I = Ideal(desc.ring, (3,))
    filtered = congruence_subgroup(desc, I)
    shaped = congruence_subgroup(desc, I, cap=10_000)  # forces the shape route
    assert shaped.order == filtered.order == 6561
    assert shaped.same_elements(filtered)


def test_dimension_scaled_cap_bounds_memory():
    # the dim-10 adjoint over Z/6 must fail by cap, not by exhausting memory
    with pytest.raises(CapExceeded):
        ambient_table(desc_for("B2", "Z/6"), cap=200_000)


# -- mutual commutators and the two theorems over finite rings -------------------

def test_mutual_commutator_against_exhaustive_pairs():
    desc = desc_for("A2", "Z/2")
    amb = ambient_table(desc)
    comm = mutual_commutator(amb, amb)
    # independent oracle: every pairwise commutator, then plain closure
    data = kernels.ring_data(desc.ring)
    inv = amb.inverses()
    seen = set()
    for i in range(amb.order):
        a = kernels.matmul_batch(
            np.repeat(amb.mats[i][None], amb.order, axis=0), amb.mats, data
        )
        b = kernels.matmul_batch(
            np.repeat(inv[i][None], amb.order, axis=0), inv, data
        )
        keys = comm.codec.encode(kernels.matmul_batch(a, b, data))
        seen.update(int(k) for k in keys)
    assert comm.order == 168  # SL3(F2) is perfect
    assert seen <= set(int(k) for k in comm.key_array())


def test_theorem_3c_sl3_z4_degenerate_flagged():
    desc = desc_for("A2", "Z/4")
    I = Ideal(desc.ring, (2,))
    report = verify_theorem_3C(desc, I, I)
    assert report["equal"] is True
    assert report["degenerate"] is True  # G(R,B) = E(R,B) here, so 3C is forced
    assert report["lhs_order"] == report["rhs_order"]


def test_theorem_4c_z6_and_sp4():
    desc = desc_for("A2", "Z/6")
    A, B = Ideal(desc.ring, (2,)), Ideal(desc.ring, (3,))
    report = verify_theorem_4C(desc, A, B)
    assert report["equal"] is True
    assert report["lhs_order"] == report["rhs_order"] == 1
    sp = desc_for("C2", "Z/6")
    report = verify_theorem_4C(sp, Ideal(sp.ring, (2,)), Ideal(sp.ring, (3,)))
    assert report["equal"] is True


def test_theorem_4c_rejects_non_comaximal():
    desc = desc_for("A2", "Z/12")
    with pytest.raises(NotUnitIdeal):
        verify_theorem_4C(desc, Ideal(desc.ring, (2,)), Ideal(desc.ring, (6,)))


# -- commutator width -------------------------------------------------------------

def test_width_sl3_z2_exhaustive_frozen():
    report = commutator_width(desc_for("A2", "Z/2"))
    assert report["exhaustive"] and report["pairs"] == 168 * 168
    assert report["width"] == 6
    assert report["histogram"] == {
        0: 1008, 1: 528, 2: 4626, 3: 7680, 4: 10728, 5: 3312, 6: 342
    }
    # Burnside: pairs with [x, y] = 1 are |G| * (number of conjugacy classes)
    assert report["histogram"][0] == 168 * conjugacy_class_count(desc_for("A2", "Z/2"))


def conjugacy_class_count(desc):
    amb = ambient_table(desc)
    data = kernels.ring_data(desc.ring)
    inv = amb.inverses()
    unclaimed = np.ones(amb.order, dtype=bool)
    classes = 0
    while unclaimed.any():
        i = int(np.nonzero(unclaimed)[0][0])
        g = np.repeat(amb.mats[i][None], amb.order, axis=0)
        orbit = kernels.matmul_batch(kernels.matmul_batch(amb.mats, g, data), inv, data)
        idx = [amb.index_of(orbit[j]) for j in range(amb.order)]
        unclaimed[idx] = False
        classes += 1
    return classes


def test_width_sampled_mode_is_seeded_and_bounded():
    desc = desc_for("A2", "Z/3")
    first = commutator_width(desc, pair_cap=50_000)
    again = commutator_width(desc, pair_cap=50_000)
    assert not first["exhaustive"] and first["seed"] == DEFAULT_SEED
    assert first["histogram"] == again["histogram"]
    assert first["width"] <= 7
    other = commutator_width(desc, pair_cap=50_000, seed=99)
    assert other["histogram"] != first["histogram"]


# -- normality decomposition -------------------------------------------------------

def normality_spot(desc, seed, n):
    amb = ambient_table(desc)
    rng = np.random.default_rng(seed)
    roots = desc.system.roots
    for _ in range(n):
        g = amb.mats[int(rng.integers(0, amb.order))]
        alpha = roots[int(rng.integers(0, len(roots)))]
        xi = int(rng.integers(1, desc.ring.size))
        report = normality_decompose(desc, g, alpha, xi)
        assert report["oracle_checked"] is True
        assert report["provenance"]["partition_sum_is_one"] is True
        yield report


def test_normality_decompose_z6_two_charts():
    desc = desc_for("A2", "Z/6")
    seen_charts = set()
    for report in normality_spot(desc, DEFAULT_SEED, 8):
        charts = report["provenance"]["charts"]
        seen_charts.update(c["s"] for c in charts)
        assert len(charts) == 2
    assert seen_charts == {"2", "3"}  # one chart per maximal ideal, fixed s choices


def test_normality_decompose_z4_single_chart():
    desc = desc_for("A2", "Z/4")
    for report in normality_spot(desc, DEFAULT_SEED + 1, 8):
        assert len(report["provenance"]["charts"]) == 1


def test_normality_identity_conjugator_short_circuit():
    desc = desc_for("A2", "Z/6")
    amb = ambient_table(desc)
    alpha = desc.system.roots[0]
    report = normality_decompose(desc, amb.mats[0], alpha, 5)
    assert report["oracle_checked"] and report["word_length"] == 1


# -- localisation-kernel reports ----------------------------------------------------

def test_theorem2_nilpotent_and_unit_degeneracies():
    nil = theorem2_verify("A2", parse_ring("Z/4"), 2)
    assert nil["holds"] and nil["minimal_r"] == 0
    assert "nilpotent" in nil["degenerate"]
    unit = theorem2_verify("A2", parse_ring("Z/6"), 5)
    assert unit["holds"] and unit["minimal_r"] == 0
    assert "unit" in unit["degenerate"]
    assert unit["level_order"] == 943488


def test_theorem2_proper_localisation_still_unit_level():
    report = theorem2_verify("A2", parse_ring("Z/12"), 2)
    assert report["holds"] and report["minimal_r"] == 0
    assert report["degenerate"] is None  # the localisation is a real quotient
    assert report["level_order"] == 5616  # E of the target Z/3
    assert "unit ideal" in report["note"]


def test_theorem_8c_reports():
    r = verify_theorem_8C(desc_for("A2", "Z/4"), 2)
    assert r["containment_in_E"]["holds"] is True
    assert r["first_kernel"]["equals_whole_group"] is True
    assert r["second_kernel_order"] == 1  # stabilised quotient is R itself
    r12 = verify_theorem_8C(desc_for("A2", "Z/12"), 2)
    assert r12["containment_in_E"]["holds"] is True
    assert r12["second_kernel_order"] == 5616  # kernel to the stabilised Z/3 quotient


# -- maximal ideals (ring support used by the charts) --------------------------------

def test_maximal_ideals_frozen():
    z6 = parse_ring("Z/6")
    carriers = [sorted(m.carrier) for m in maximal_ideals(z6)]
    assert carriers == [[0, 2, 4], [0, 3]]
    z4 = parse_ring("Z/4")
    assert [sorted(m.carrier) for m in maximal_ideals(z4)] == [[0, 2]]
    local = parse_ring("Z/3[u]/(u^2)")
    (m,) = maximal_ideals(local)
    assert len(m.carrier) == 3  # the ideal (u)
    prod = parse_ring("Z/2 x Z/3")
    assert sorted(len(m.carrier) for m in maximal_ideals(prod)) == [2, 3]


# -- backend fallback ------------------------------------------------------------------

def test_numpy_fallback_matches_numba(monkeypatch):
    desc = desc_for("A2", "Z/3")
    baseline = commutator_width(desc, pair_cap=20_000)
    monkeypatch.setattr(kernels, "BACKEND", "numpy")
    subgroups._TABLE_CACHE.clear()
    fallback = commutator_width(desc, pair_cap=20_000)
    assert fallback["backend"] == "numpy"
    assert fallback["histogram"] == baseline["histogram"]
    assert fallback["width"] == baseline["width"]
