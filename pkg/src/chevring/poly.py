"""Multivariate polynomials over Z with denominators restricted to powers
of designated variables.

This is the exact arithmetic the rewriting calculus runs on: parameters
live in Z[s,t,a,b] localised at s and t, levels are divisibility by
s^p t^q, and ideal markers are divisibility by a or b.  Every element is
kept in a unique normal form (numerator, denominator exponents) with the
numerator not divisible by an inverted variable while its denominator
exponent is positive.
"""

from __future__ import annotations

from functools import lru_cache


class PolyRing:
    """Z[vars] with powers of the inverted variables allowed as denominators."""

    def __init__(self, variables=("s", "t", "a", "b"), inverted=("s", "t")):
        self.variables = tuple(variables)
        self.inverted = tuple(inverted)
        if any(v not in self.variables for v in self.inverted):
            raise ValueError("inverted variables must be ring variables")
        self.nvars = len(self.variables)
        self._index = {v: i for i, v in enumerate(self.variables)}
        self._inv_idx = tuple(self._index[v] for v in self.inverted)
        self.zero = Poly(self, {}, (0,) * len(self.inverted))
        self.one = self.const(1)

    def const(self, c: int) -> "Poly":
        if c == 0:
            return self.zero
        return Poly(self, {(0,) * self.nvars: int(c)}, (0,) * len(self.inverted))

    def var(self, name: str) -> "Poly":
        exp = [0] * self.nvars
        exp[self._index[name]] = 1
        return Poly(self, {tuple(exp): 1}, (0,) * len(self.inverted))

    def monomial(self, coeff: int = 1, **powers) -> "Poly":
        """monomial(2, s=3, a=1) = 2 s^3 a; negative powers of inverted
        variables go to the denominator."""
        if coeff == 0:
            return self.zero
        exp = [0] * self.nvars
        den = [0] * len(self.inverted)
        for name, p in powers.items():
            i = self._index[name]
            if p >= 0:
                exp[i] = p
            else:
                j = self.inverted.index(name)
                den[j] = -p
        return Poly(self, {tuple(exp): int(coeff)}, tuple(den))

    def __eq__(self, other):
        return (
            isinstance(other, PolyRing)
            and self.variables == other.variables
            and self.inverted == other.inverted
        )

    def __hash__(self):
        return hash((self.variables, self.inverted))

    def __repr__(self):
        inv = ",".join(self.inverted)
        return f"Z[{','.join(self.variables)}] loc {inv}"


def _normalize(ring: PolyRing, terms: dict, den: tuple) -> tuple[dict, tuple]:
    terms = {e: c for e, c in terms.items() if c != 0}
    if not terms:
        return {}, (0,) * len(ring.inverted)
    den = list(den)
    for j, vi in enumerate(ring._inv_idx):
        if den[j] == 0:
            continue
        low = min(e[vi] for e in terms)
        shift = min(low, den[j])
        if shift:
            den[j] -= shift
            terms = {e[:vi] + (e[vi] - shift,) + e[vi + 1 :]: c for e, c in terms.items()}
    return terms, tuple(den)


class Poly:
    """Immutable normal-form element of a PolyRing."""

    __slots__ = ("ring", "terms", "den", "_hash")

    def __init__(self, ring: PolyRing, terms: dict, den: tuple):
        terms, den = _normalize(ring, terms, den)
        self.ring = ring
        self.terms = terms
        self.den = den
        self._hash = None

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        assert self.ring == other.ring
        if not self.terms:
            return other
        if not other.terms:
            return self
        den = tuple(max(d1, d2) for d1, d2 in zip(self.den, other.den))
        lift1 = tuple(d - d1 for d, d1 in zip(den, self.den))
        lift2 = tuple(d - d2 for d, d2 in zip(den, other.den))
        terms = {}
        for src, lift in ((self, lift1), (other, lift2)):
            for e, c in src.terms.items():
                if any(lift):
                    e = list(e)
                    for j, vi in enumerate(self.ring._inv_idx):
                        e[vi] += lift[j]
                    e = tuple(e)
                terms[e] = terms.get(e, 0) + c
        return Poly(self.ring, terms, den)

    def __neg__(self) -> "Poly":
        return Poly(self.ring, {e: -c for e, c in self.terms.items()}, self.den)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other) -> "Poly":
        if isinstance(other, int):
            if other == 0:
                return self.ring.zero
            return Poly(self.ring, {e: c * other for e, c in self.terms.items()}, self.den)
        assert self.ring == other.ring
        if not self.terms or not other.terms:
            return self.ring.zero
        terms = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        den = tuple(d1 + d2 for d1, d2 in zip(self.den, other.den))
        return Poly(self.ring, terms, den)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        result = self.ring.one
        for _ in range(n):
            result = result * self
        return result

    def exact_div_int(self, k: int) -> "Poly":
        """Divide every coefficient by the integer k; must be exact."""
        assert k != 0
        for c in self.terms.values():
            if c % k:
                raise ArithmeticError(f"coefficient {c} not divisible by {k}")
        return Poly(self.ring, {e: c // k for e, c in self.terms.items()}, self.den)

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def has_denominator(self) -> bool:
        return any(self.den)

    def numerator_min_power(self, name: str) -> int:
        """Smallest exponent of the variable across numerator monomials."""
        if not self.terms:
            return 0
        vi = self.ring._index[name]
        return min(e[vi] for e in self.terms)

    def divisible_by(self, name: str, power: int = 1) -> bool:
        """Divisibility of the numerator; a denominator defeats it for
        inverted variables."""
        if power == 0:
            return True
        if name in self.ring.inverted and self.den[self.ring.inverted.index(name)] > 0:
            return False
        if not self.terms:
            return True
        return self.numerator_min_power(name) >= power

    def substitute_one(self, name: str) -> "Poly":
        """Set a non-inverted variable to 1 (used to erase ideal markers)."""
        assert name not in self.ring.inverted
        vi = self.ring._index[name]
        terms = {}
        for e, c in self.terms.items():
            e2 = e[:vi] + (0,) + e[vi + 1 :]
            terms[e2] = terms.get(e2, 0) + c
        return Poly(self.ring, terms, self.den)

    def evaluate(self, ring, assignment: dict) -> int:
        """Evaluate in a finite ring; inverted variables with denominator
        exponents must map to units there."""
        acc = ring.zero
        for e, c in self.terms.items():
            term = ring.from_int(c)
            for name, power in zip(self.ring.variables, e):
                if power:
                    term = ring.mul(term, ring.pow(assignment[name], power))
            acc = ring.add(acc, term)
        for j, d in enumerate(self.den):
            if d:
                sval = assignment[self.ring.inverted[j]]
                acc = ring.mul(acc, ring.pow(ring.inv(sval), d))
        return acc

    # -- comparison and display ---------------------------------------------

    def _key(self):
        return (self.den, tuple(sorted(self.terms.items())))

    def __eq__(self, other):
        return isinstance(other, Poly) and self.ring == other.ring and self._key() == other._key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items()):
            factors = []
            for name, power in zip(self.ring.variables, e):
                if power == 1:
                    factors.append(name)
                elif power > 1:
                    factors.append(f"{name}^{power}")
            if not factors:
                parts.append(str(c))
            else:
                head = "" if c == 1 else ("-" if c == -1 else str(c) + "*")
                parts.append(head + "*".join(factors))
        num = "+".join(parts).replace("+-", "-")
        if not self.has_denominator:
            return num
        dfac = []
        for j, d in enumerate(self.den):
            if d == 1:
                dfac.append(self.ring.inverted[j])
            elif d > 1:
                dfac.append(f"{self.ring.inverted[j]}^{d}")
        return f"({num})/({'*'.join(dfac)})"


@lru_cache(maxsize=None)
def standard_ring() -> PolyRing:
    """Z[s,t,a,b] localised at s and t: denominators, levels, and the two
    ideal markers the calculus uses."""
    return PolyRing(("s", "t", "a", "b"), ("s", "t"))


def level_membership(x: Poly, p: int, q: int) -> bool:
    """x lies in s^p t^q R: no denominator and numerator divisible by s^p t^q."""
    if x.has_denominator:
        return False
    return x.divisible_by("s", p) and x.divisible_by("t", q)


def marker_membership(x: Poly, marker: str) -> bool:
    """x lies in marker*R, i.e. every monomial carries the ideal marker."""
    return not x.has_denominator and x.divisible_by(marker, 1)
