"""Words in elementary root unipotents and the commutator-formula rewrite."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import AmbientMismatch, OppositeOrEqual
from .poly import Poly, PolyRing, level_membership, marker_membership
from .rings import FiniteRing, Ideal
from .roots import Root, RootSystem, commutator_index_set


@dataclass(frozen=True)
class Generator:
    """One factor x_root(param).  The param lives in whatever ring the
    enclosing Word declares (a finite-ring element index or a Poly)."""

    root: Root
    param: object

    def line(self, ring=None) -> str:
        if isinstance(ring, FiniteRing):
            shown = ring.element_name(self.param)
        else:
            shown = repr(self.param)
        coords = ", ".join(str(c) for c in self.root.coords)
        return f"x[{coords}]({shown})"


class Word:
    """Ordered product of elementary generators.

    The factor count is the length every bound in the calculus talks about.
    declared_level is advisory metadata: ("level", p, q) for divisibility by
    s^p t^q, ("marker", name) for membership in the marked ideal, or
    ("ideal", Ideal) over a finite ring.  check_level validates it on demand;
    construction never enforces it because rewriting builds words piecemeal.
    """

    __slots__ = ("ring", "factors", "declared_level")

    def __init__(self, ring, factors=(), declared_level=None):
        self.ring = ring
        self.factors = tuple(factors)
        self.declared_level = declared_level

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)

    def __getitem__(self, i):
        return self.factors[i]

    def __mul__(self, other: "Word") -> "Word":
        if not isinstance(other, Word):
            return NotImplemented
        if other.ring != self.ring:
            raise AmbientMismatch("words over different rings")
        return Word(self.ring, self.factors + other.factors)

    def inverse(self) -> "Word":
        if isinstance(self.ring, PolyRing):
            flipped = [Generator(g.root, -g.param) for g in reversed(self.factors)]
        else:
            flipped = [Generator(g.root, self.ring.neg(g.param)) for g in reversed(self.factors)]
        return Word(self.ring, flipped, self.declared_level)

    def with_level(self, declared_level) -> "Word":
        return Word(self.ring, self.factors, declared_level)

    def check_level(self) -> bool:
        if self.declared_level is None:
            return True
        tag = self.declared_level[0]
        if tag == "level":
            _, p, q = self.declared_level
            return all(level_membership(g.param, p, q) for g in self.factors)
        if tag == "marker":
            return all(marker_membership(g.param, self.declared_level[1]) for g in self.factors)
        if tag == "ideal":
            ideal: Ideal = self.declared_level[1]
            return all(g.param in ideal.carrier for g in self.factors)
        raise ValueError(f"unknown level tag {tag!r}")

    def to_lines(self) -> list[str]:
        return [g.line(self.ring) for g in self.factors]

    def __repr__(self) -> str:
        inside = " ".join(self.to_lines()) or "<empty>"
        return f"Word({inside})"


def generator(ring, root: Root, param) -> Word:
    """Length-one word."""
    return Word(ring, (Generator(root, param),))


def param_is_zero(ring, param) -> bool:
    if isinstance(ring, PolyRing):
        return param.is_zero
    return param == ring.zero


def scaled_power(ring, n: int, a, b, i: int, j: int):
    """n * a^i * b^j in either parameter ring."""
    if isinstance(ring, PolyRing):
        return (a**i) * (b**j) * n
    return ring.mul(ring.from_int(n), ring.mul(ring.pow(a, i), ring.pow(b, j)))


def chevalley_commutator(system: RootSystem, alpha: Root, beta: Root, a, b, ring) -> Word:
    """[x_alpha(a), x_beta(b)] rewritten as the product of x_{i*alpha+j*beta}
    factors in (i+j, i) order.  Zero parameters are dropped, so the length is
    at most the size of the index set (4 in the worst, triply laced, case)."""
    if alpha.coords == beta.coords:
        raise OppositeOrEqual("commutator formula needs distinct roots")
    if alpha.coords == tuple(-c for c in beta.coords):
        raise OppositeOrEqual("commutator formula does not apply to an opposite pair")
    constants = system.constants()
    factors = []
    for i, j in commutator_index_set(system, alpha, beta):
        coords = tuple(i * x + j * y for x, y in zip(alpha.coords, beta.coords))
        n = constants.comm(alpha, beta, i, j)
        param = scaled_power(ring, n, a, b, i, j)
        if not param_is_zero(ring, param):
            factors.append(Generator(system.root(coords), param))
    return Word(ring, factors)
