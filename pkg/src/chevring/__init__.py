"""Exact computation in Chevalley groups over commutative rings: structure
constants, certificate-producing commutator calculus over localised
polynomial rings, and brute-force verification over finite rings."""

from .calculus import (
    ExponentBudget,
    RewriteCertificate,
    commutator_general,
    commutator_single,
    conjugate_single,
    conjugate_word,
    crude_single_bound,
    length_audit,
    plan_exponents,
    relative_commutator,
    relative_conjugate,
    relative_generator,
)
from .errors import (
    AmbientMismatch,
    BudgetTooSmall,
    CapExceeded,
    ChevringError,
    NilpotentDenominator,
    NotUnitIdeal,
    OppositeOrEqual,
    RelationFailure,
    UnsupportedLacing,
    UnsupportedRank,
    VerificationFailed,
)
from .groups import evaluate, reduce_mod, steinberg_suite, unipotent
from .poly import Poly, PolyRing, level_membership, marker_membership, standard_ring
from .reps import representation_for
from .rings import (
    FiniteRing,
    Ideal,
    LocalisationMap,
    ProductRing,
    QuotientRing,
    TruncatedPolynomialRing,
    Zmod,
    ann_stabilize,
    ideal_ops,
    is_semisimple,
    localise_finite,
    maximal_ideals,
    parse_ring,
    partition_of_one,
)
from .roots import build, commutator_index_set, i_phi, structure_constants
from .subgroups import (
    ambient_table,
    commutator_width,
    congruence_subgroup,
    descriptor,
    enumerate_elementary,
    full_congruence_subgroup,
    group_order,
    mutual_commutator,
    normality_decompose,
    theorem2_verify,
    verify_theorem_3C,
    verify_theorem_4C,
    verify_theorem_8C,
)
from .words import Word, chevalley_commutator, generator

__version__ = "0.1.0"
