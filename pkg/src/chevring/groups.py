"""Group elements over finite rings: evaluation, reduction, relation checks.

Matrices hold element indices of the working FiniteRing (for Zmod the index
is the residue, so plain integer matmul mod m applies; other rings go through
the cached operation tables).  Symbolic verification lives in evaluate_poly.
"""

from __future__ import annotations

import random

import numpy as np

from .errors import AmbientMismatch, RelationFailure
from .poly import PolyRing
from .reps import Representation, poly_identity, poly_matmul
from .rings import FiniteRing, Ideal, QuotientRing, Zmod
from .roots import Root
from .words import Word, chevalley_commutator


def matmul_ring(ring: FiniteRing, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if isinstance(ring, Zmod):
        return (A @ B) % ring.size
    mt, at = ring.mul_table, ring.add_table
    # prods[i, k, j] = A[i, k] * B[k, j]
    prods = mt[A[:, :, None], B[None, :, :]]
    acc = prods[:, 0, :]
    for k in range(1, A.shape[1]):
        acc = at[acc, prods[:, k, :]]
    return acc


class GroupElement:
    """Immutable matrix over a finite ring, tied to its representation."""

    __slots__ = ("rep", "ring", "matrix")

    def __init__(self, rep: Representation, ring: FiniteRing, matrix: np.ndarray):
        object.__setattr__(self, "rep", rep)
        object.__setattr__(self, "ring", ring)
        m = np.asarray(matrix, dtype=np.int64)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __setattr__(self, name, value):
        raise AttributeError("GroupElement is immutable")

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        if not isinstance(other, GroupElement):
            return NotImplemented
        if other.ring != self.ring or other.rep is not self.rep:
            raise AmbientMismatch("elements live in different groups")
        return GroupElement(self.rep, self.ring, matmul_ring(self.ring, self.matrix, other.matrix))

    def __eq__(self, other):
        return (
            isinstance(other, GroupElement)
            and self.ring == other.ring
            and self.rep is other.rep
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self):
        return hash((self.ring, self.matrix.tobytes()))

    @property
    def is_identity(self) -> bool:
        return np.array_equal(self.matrix, _identity_matrix(self.rep, self.ring))

    def entry_names(self) -> list[list[str]]:
        return [[self.ring.element_name(int(v)) for v in row] for row in self.matrix]

    def __repr__(self):
        return f"GroupElement({self.rep.name} over {self.ring.name})"


def _identity_matrix(rep: Representation, ring: FiniteRing) -> np.ndarray:
    m = np.full((rep.dim, rep.dim), ring.zero, dtype=np.int64)
    np.fill_diagonal(m, ring.one)
    return m


def identity(rep: Representation, ring: FiniteRing) -> GroupElement:
    return GroupElement(rep, ring, _identity_matrix(rep, ring))


def unipotent(rep: Representation, ring: FiniteRing, root: Root, xi: int) -> GroupElement:
    """x_root(xi) = sum of xi^k times the k-th divided power, exact over ring."""
    tower = rep.towers[root.coords]
    m = _identity_matrix(rep, ring)
    for k in range(1, len(tower)):
        coeff = ring.pow(xi, k)
        if coeff == ring.zero:
            continue
        mk = tower[k]
        for i, j in zip(*np.nonzero(mk)):
            v = ring.mul(coeff, ring.from_int(int(mk[i, j])))
            m[i, j] = ring.add(int(m[i, j]), v)
    return GroupElement(rep, ring, m)


def evaluate(rep: Representation, word: Word) -> GroupElement:
    """Ordered product of the factors; the semantic oracle for word identities."""
    ring = word.ring
    if isinstance(ring, PolyRing):
        raise TypeError("symbolic words go through evaluate_poly")
    out = identity(rep, ring)
    for g in word:
        out = out * unipotent(rep, ring, g.root, g.param)
    return out


def evaluate_poly(rep: Representation, word: Word) -> np.ndarray:
    """Same product with Poly entries; exact, denominators allowed."""
    ring = word.ring
    out = poly_identity(ring, rep.dim)
    for g in word:
        out = poly_matmul(out, rep.unipotent_poly(g.root, g.param))
    return out


def reduce_mod(ideal: Ideal, g: GroupElement) -> GroupElement:
    """Entrywise reduction to R/I.  g is congruent to 1 mod I exactly when
    the result is the identity."""
    if ideal.ambient != g.ring:
        raise AmbientMismatch("ideal and element live over different rings")
    target = QuotientRing(g.ring, ideal.carrier)
    proj = np.array([target.project(x) for x in range(g.ring.size)], dtype=np.int64)
    return GroupElement(g.rep, target, proj[g.matrix])


def _commutator(x: GroupElement, y: GroupElement, x_inv: GroupElement, y_inv: GroupElement):
    return x * y * x_inv * y_inv


def steinberg_suite(
    rep: Representation,
    ring: FiniteRing,
    limit: int = 200_000,
    seed: int = 0,
    strict: bool = False,
) -> dict:
    """Check additivity on every root and the commutator formula on every
    non-opposite ordered pair, exhaustively when the instance count fits under
    limit and by seeded sampling otherwise.  A failure here means a structure
    constant is wrong, so strict mode raises with the witness."""
    system = rep.system
    n = ring.size
    roots = system.roots
    pairs = [
        (a, b)
        for a in roots
        for b in roots
        if a.coords != b.coords and a.coords != tuple(-c for c in b.coords)
    ]
    total = (len(roots) + len(pairs)) * n * n
    exhaustive = total <= limit
    rng = random.Random(seed)
    per_family = n * n if exhaustive else max(1, limit // (len(roots) + len(pairs)))

    def params():
        if exhaustive:
            return [(x, z) for x in range(n) for z in range(n)]
        return [(rng.randrange(n), rng.randrange(n)) for _ in range(per_family)]

    cache: dict[tuple, GroupElement] = {}

    def gen(root, xi):
        key = (root.coords, xi)
        if key not in cache:
            cache[key] = unipotent(rep, ring, root, xi)
        return cache[key]

    relations = []
    failures = 0
    witness = None

    for root in roots:
        fails = []
        sample = params()
        for x, z in sample:
            if gen(root, x) * gen(root, z) != gen(root, ring.add(x, z)):
                fails.append({"params": [ring.element_name(x), ring.element_name(z)]})
        failures += len(fails)
        if fails and witness is None:
            witness = ("additivity", root.coords, fails[0])
        relations.append(
            {
                "relation": "additivity",
                "roots": [list(root.coords)],
                "instances": len(sample),
                "failures": fails,
            }
        )

    for alpha, beta in pairs:
        fails = []
        sample = params()
        for a, b in sample:
            lhs = _commutator(gen(alpha, a), gen(beta, b), gen(alpha, ring.neg(a)), gen(beta, ring.neg(b)))
            rhs = evaluate(rep, chevalley_commutator(system, alpha, beta, a, b, ring))
            if lhs != rhs:
                fails.append({"params": [ring.element_name(a), ring.element_name(b)]})
        failures += len(fails)
        if fails and witness is None:
            witness = ("commutator", (alpha.coords, beta.coords), fails[0])
        relations.append(
            {
                "relation": "commutator",
                "roots": [list(alpha.coords), list(beta.coords)],
                "instances": len(sample),
                "failures": fails,
            }
        )

    report = {
        "system": system.name,
        "representation": rep.name,
        "ring": ring.name,
        "exhaustive": exhaustive,
        "instances": sum(r["instances"] for r in relations),
        "failures": failures,
        "relations": relations,
        "pass": failures == 0,
    }
    if strict and failures:
        raise RelationFailure(f"relation {witness[0]} fails at {witness[1]}: {witness[2]}")
    return report
