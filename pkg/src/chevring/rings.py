"""Finite commutative rings with enumerable carriers, plus ideals and
principal localisation.

Elements of a :class:`FiniteRing` are plain integers indexing a stable
carrier enumeration, so matrices over the ring are just integer arrays.
For ``Zmod`` the index of an element equals its value, which keeps the
hot matrix kernels free of table lookups.
"""

from __future__ import annotations

import math
import re
from functools import lru_cache

import numpy as np

from .errors import AmbientMismatch, NilpotentDenominator, NotUnitIdeal


class FiniteRing:
    """Base class: finite commutative ring with 1, elements 0..size-1.

    Subclasses implement the raw pair operations and a printable form;
    everything else (units, annihilators, cached operation tables) is shared.
    """

    size: int
    zero: int = 0
    one: int

    def add(self, a: int, b: int) -> int:
        raise NotImplementedError

    def mul(self, a: int, b: int) -> int:
        raise NotImplementedError

    def neg(self, a: int) -> int:
        # brute search is fine as a default; subclasses override with arithmetic
        for b in range(self.size):
            if self.add(a, b) == self.zero:
                return b
        raise ArithmeticError("no additive inverse; not a ring")

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def pow(self, a: int, n: int) -> int:
        result = self.one
        for _ in range(n):
            result = self.mul(result, a)
        return result

    def from_int(self, n: int) -> int:
        """Image of the integer n under the unique map from Z."""
        result = self.zero
        step = self.one if n >= 0 else self.neg(self.one)
        for _ in range(abs(n)):
            result = self.add(result, step)
        return result

    def element_name(self, a: int) -> str:
        return str(a)

    # -- derived structure ------------------------------------------------

    def is_unit(self, a: int) -> bool:
        return any(self.mul(a, b) == self.one for b in range(self.size))

    def inv(self, a: int) -> int:
        for b in range(self.size):
            if self.mul(a, b) == self.one:
                return b
        raise ArithmeticError(f"{self.element_name(a)} is not a unit")

    def annihilator(self, a: int) -> frozenset[int]:
        return frozenset(b for b in range(self.size) if self.mul(a, b) == self.zero)

    def is_nilpotent(self, a: int) -> bool:
        # squaring log2(size)+1 times reaches exponent >= size, enough for
        # any nilpotent in a ring of this size
        x = a
        for _ in range(self.size.bit_length() + 1):
            x = self.mul(x, x)
            if x == self.zero:
                return True
        return False

    @property
    def units(self) -> tuple[int, ...]:
        if not hasattr(self, "_units"):
            self._units = tuple(a for a in range(self.size) if self.is_unit(a))
        return self._units

    @property
    def add_table(self) -> np.ndarray:
        if not hasattr(self, "_add_table"):
            n = self.size
            t = np.empty((n, n), dtype=np.int64)
            for a in range(n):
                for b in range(a, n):
                    t[a, b] = t[b, a] = self.add(a, b)
            self._add_table = t
        return self._add_table

    @property
    def mul_table(self) -> np.ndarray:
        if not hasattr(self, "_mul_table"):
            n = self.size
            t = np.empty((n, n), dtype=np.int64)
            for a in range(n):
                for b in range(a, n):
                    t[a, b] = t[b, a] = self.mul(a, b)
            self._mul_table = t
        return self._mul_table

    @property
    def neg_table(self) -> np.ndarray:
        if not hasattr(self, "_neg_table"):
            self._neg_table = np.array([self.neg(a) for a in range(self.size)], dtype=np.int64)
        return self._neg_table

    def check_axioms(self) -> None:
        """Exhaustive ring-axiom check; intended for carriers up to ~10^3."""
        n = self.size
        assert n >= 2 and self.one != self.zero
        add, mul = self.add, self.mul
        for a in range(n):
            assert add(a, self.zero) == a
            assert mul(a, self.one) == a
            assert add(a, self.neg(a)) == self.zero
            for b in range(n):
                assert add(a, b) == add(b, a)
                assert mul(a, b) == mul(b, a)
                for c in range(n):
                    assert add(add(a, b), c) == add(a, add(b, c))
                    assert mul(mul(a, b), c) == mul(a, mul(b, c))
                    assert mul(a, add(b, c)) == add(mul(a, b), mul(a, c))

    def __eq__(self, other):
        return type(self) is type(other) and self._key() == other._key()

    def __hash__(self):
        return hash((type(self).__name__, self._key()))

    def _key(self):
        raise NotImplementedError

    def __repr__(self):
        return self.name

    def describe(self) -> dict:
        return {"ring": self.name, "size": self.size}


class Zmod(FiniteRing):
    """Z/m with elements 0..m-1 under arithmetic mod m."""

    def __init__(self, m: int):
        if m < 2:
            raise ValueError("modulus must be at least 2")
        self.m = m
        self.size = m
        self.one = 1
        self.name = f"Z/{m}"

    def add(self, a, b):
        return (a + b) % self.m

    def mul(self, a, b):
        return (a * b) % self.m

    def neg(self, a):
        return (-a) % self.m

    def pow(self, a, n):
        return pow(a, n, self.m)

    def from_int(self, n):
        return n % self.m

    def is_unit(self, a):
        return math.gcd(a, self.m) == 1

    def inv(self, a):
        try:
            return pow(a, -1, self.m)
        except ValueError:
            raise ArithmeticError(f"{a} is not a unit")

    def _key(self):
        return self.m


class ProductRing(FiniteRing):
    """Direct product of finite rings; element index packs the component
    indices most-significant-first, so enumeration is lexicographic."""

    def __init__(self, factors):
        self.factors = tuple(factors)
        if len(self.factors) < 2:
            raise ValueError("need at least two factors")
        self.size = 1
        for f in self.factors:
            self.size *= f.size
        self.one = self.pack(tuple(f.one for f in self.factors))
        self.name = " x ".join(f.name for f in self.factors)

    def pack(self, parts) -> int:
        idx = 0
        for f, p in zip(self.factors, parts):
            idx = idx * f.size + p
        return idx

    def unpack(self, a: int) -> tuple[int, ...]:
        parts = []
        for f in reversed(self.factors):
            a, r = divmod(a, f.size)
            parts.append(r)
        return tuple(reversed(parts))

    def add(self, a, b):
        return self.pack(tuple(f.add(x, y) for f, x, y in zip(self.factors, self.unpack(a), self.unpack(b))))

    def mul(self, a, b):
        return self.pack(tuple(f.mul(x, y) for f, x, y in zip(self.factors, self.unpack(a), self.unpack(b))))

    def neg(self, a):
        return self.pack(tuple(f.neg(x) for f, x in zip(self.factors, self.unpack(a))))

    def from_int(self, n):
        return self.pack(tuple(f.from_int(n) for f in self.factors))

    def element_name(self, a):
        return "(" + ",".join(f.element_name(x) for f, x in zip(self.factors, self.unpack(a))) + ")"

    def _key(self):
        return self.factors


class TruncatedPolynomialRing(FiniteRing):
    """Z/m[u]/(u^d): coefficient tuples (c_0,...,c_{d-1}), c_0 the constant
    term; the index packs coefficients least-significant-first so small
    indices are small constants."""

    def __init__(self, m: int, d: int, var: str = "u"):
        if d < 2:
            raise ValueError("truncation degree must be at least 2")
        self.m = m
        self.d = d
        self.var = var
        self.size = m**d
        self.one = 1
        self.name = f"Z/{m}[{var}]/({var}^{d})"

    def pack(self, coeffs) -> int:
        idx = 0
        for c in reversed(coeffs):
            idx = idx * self.m + c
        return idx

    def unpack(self, a: int) -> tuple[int, ...]:
        coeffs = []
        for _ in range(self.d):
            a, r = divmod(a, self.m)
            coeffs.append(r)
        return tuple(coeffs)

    @property
    def u(self) -> int:
        return self.pack(tuple(1 if i == 1 else 0 for i in range(self.d)))

    def add(self, a, b):
        ca, cb = self.unpack(a), self.unpack(b)
        return self.pack(tuple((x + y) % self.m for x, y in zip(ca, cb)))

    def mul(self, a, b):
        ca, cb = self.unpack(a), self.unpack(b)
        out = [0] * self.d
        for i, x in enumerate(ca):
            if x == 0:
                continue
            for j, y in enumerate(cb):
                if i + j < self.d:
                    out[i + j] = (out[i + j] + x * y) % self.m
        return self.pack(tuple(out))

    def neg(self, a):
        return self.pack(tuple((-c) % self.m for c in self.unpack(a)))

    def from_int(self, n):
        return n % self.m

    def element_name(self, a):
        coeffs = self.unpack(a)
        parts = []
        for i, c in enumerate(coeffs):
            if c == 0:
                continue
            if i == 0:
                parts.append(str(c))
            else:
                head = "" if c == 1 else str(c)
                exp = "" if i == 1 else f"^{i}"
                parts.append(f"{head}{self.var}{exp}")
        return "+".join(parts) if parts else "0"

    def _key(self):
        return (self.m, self.d, self.var)


class QuotientRing(FiniteRing):
    """R/I for a finite ring R; cosets are labelled by their minimal source
    index, sorted, so the carrier enumeration is deterministic."""

    def __init__(self, source: FiniteRing, kernel_carrier: frozenset[int]):
        self.source = source
        self.kernel_carrier = frozenset(kernel_carrier)
        rep = {}
        for a in range(source.size):
            rep[a] = min(source.add(a, k) for k in self.kernel_carrier)
        reps = sorted(set(rep.values()))
        self._rep_of_source = rep
        self._reps = reps
        self._label = {r: i for i, r in enumerate(reps)}
        self.size = len(reps)
        self.one = self._label[rep[source.one]]
        self.name = f"{source.name}/suppressed({len(self.kernel_carrier)})"

    def project(self, a: int) -> int:
        """Image in the quotient of a source-ring element."""
        return self._label[self._rep_of_source[a]]

    def lift(self, t: int) -> int:
        """The minimal source-ring representative of a quotient element."""
        return self._reps[t]

    def add(self, a, b):
        return self.project(self.source.add(self._reps[a], self._reps[b]))

    def mul(self, a, b):
        return self.project(self.source.mul(self._reps[a], self._reps[b]))

    def neg(self, a):
        return self.project(self.source.neg(self._reps[a]))

    def element_name(self, a):
        return self.source.element_name(self._reps[a])

    def _key(self):
        return (self.source, self.kernel_carrier)


class Ideal:
    """Ideal of a finite ring, with its carrier materialized eagerly."""

    def __init__(self, ambient: FiniteRing, generators):
        self.ambient = ambient
        self.generators = tuple(generators)
        seeds = {ambient.zero}
        for g in self.generators:
            for r in range(ambient.size):
                seeds.add(ambient.mul(r, g))
        # close the multiples under addition
        carrier = set(seeds)
        frontier = list(seeds)
        while frontier:
            x = frontier.pop()
            for y in seeds:
                z = ambient.add(x, y)
                if z not in carrier:
                    carrier.add(z)
                    frontier.append(z)
        self.carrier = frozenset(carrier)

    @classmethod
    def from_carrier(cls, ambient: FiniteRing, carrier) -> "Ideal":
        """Rebuild an ideal from its element set, with a greedy minimal
        generating list for readable display."""
        carrier = frozenset(carrier)
        gens = []
        spanned = {ambient.zero}
        for x in sorted(carrier):
            if x not in spanned:
                gens.append(x)
                spanned = set(cls(ambient, gens).carrier)
        ideal = cls(ambient, gens)
        assert ideal.carrier == carrier, "carrier is not an ideal"
        return ideal

    def __contains__(self, a: int) -> bool:
        return a in self.carrier

    @property
    def size(self) -> int:
        return len(self.carrier)

    @property
    def is_unit_ideal(self) -> bool:
        return self.ambient.one in self.carrier

    @property
    def is_zero(self) -> bool:
        return self.size == 1

    def __eq__(self, other):
        return (
            isinstance(other, Ideal)
            and self.ambient == other.ambient
            and self.carrier == other.carrier
        )

    def __hash__(self):
        return hash((self.ambient, self.carrier))

    def __repr__(self):
        gens = ",".join(self.ambient.element_name(g) for g in self.generators)
        return f"({gens})<{self.ambient.name}"

    def describe(self) -> dict:
        return {
            "generators": [self.ambient.element_name(g) for g in self.generators],
            "size": self.size,
        }


# -- spec operations -------------------------------------------------------


def ann_stabilize(ring: FiniteRing, s: int) -> int:
    """Least k with Ann(s^k) = Ann(s^{k+1}); multiplication by s is then
    injective on s^k R."""
    prev = ring.annihilator(ring.one)  # Ann(s^0) = {0}
    power = s
    k = 0
    while True:
        cur = ring.annihilator(power)
        if cur == prev:
            return k
        prev = cur
        power = ring.mul(power, s)
        k += 1


def is_semisimple(ring: FiniteRing) -> bool:
    """True iff the ring has no nonzero nilpotent element."""
    return all(not ring.is_nilpotent(a) for a in range(1, ring.size))


class LocalisationMap:
    """The canonical map R -> R_s realised, for finite R, as the quotient by
    the s-power torsion.  s becomes a unit in the target."""

    def __init__(self, source: FiniteRing, s: int):
        self.source = source
        self.s = s
        k = ann_stabilize(source, s)
        self.stable_exponent = k
        torsion = source.annihilator(source.pow(s, k))
        if source.one in torsion:
            raise NilpotentDenominator(
                f"{source.element_name(s)} is nilpotent in {source.name}; the localisation is the zero ring"
            )
        self.kernel = Ideal.from_carrier(source, torsion)
        self.target = QuotientRing(source, self.kernel.carrier)
        self.image_of_s = self.target.project(s)
        self.image_of_s_inverse = self.target.inv(self.image_of_s)

    def __call__(self, a: int) -> int:
        return self.target.project(a)

    def lift(self, t: int) -> int:
        return self.target.lift(t)

    def describe(self) -> dict:
        return {
            "source": self.source.name,
            "s": self.source.element_name(self.s),
            "stable_exponent": self.stable_exponent,
            "kernel": sorted(self.kernel.carrier),
            "target_size": self.target.size,
            "image_of_s": self.image_of_s,
            "image_of_s_inverse": self.image_of_s_inverse,
        }


def localise_finite(ring: FiniteRing, s: int) -> LocalisationMap:
    return LocalisationMap(ring, s)


def ideal_ops(A: Ideal, B: Ideal) -> dict:
    """Sum, product and comaximality of two ideals of the same ring."""
    if A.ambient != B.ambient:
        raise AmbientMismatch(f"{A!r} and {B!r} live in different rings")
    ring = A.ambient
    total = Ideal(ring, A.generators + B.generators)
    product = Ideal(ring, tuple(ring.mul(a, b) for a in A.generators for b in B.generators))
    return {"sum": total, "product": product, "comaximal": total.is_unit_ideal}


def partition_of_one(ring: FiniteRing, pairs) -> tuple[int, ...]:
    """Coefficients eta with sum(s_i^{l_i} * eta_i) = 1, chosen as the
    lexicographically smallest tuple in carrier order."""
    powers = [ring.pow(s, l) for s, l in pairs]
    if not Ideal(ring, powers).is_unit_ideal:
        raise NotUnitIdeal(
            "powers "
            + ", ".join(ring.element_name(p) for p in powers)
            + f" do not generate the unit ideal of {ring.name}"
        )
    m = len(powers)

    def search(prefix_sum: int, i: int, chosen: tuple[int, ...]):
        if i == m:
            return chosen if prefix_sum == ring.one else None
        for eta in range(ring.size):
            found = search(ring.add(prefix_sum, ring.mul(powers[i], eta)), i + 1, chosen + (eta,))
            if found is not None:
                return found
        return None

    found = search(ring.zero, 0, ())
    assert found is not None, "unit ideal but exhaustive search failed"
    return found


def maximal_ideals(ring: FiniteRing) -> list[Ideal]:
    """Every maximal ideal, by enumeration through the reduced quotient.

    Maximal ideals contain all nilpotents, so they biject with the maximal
    ideals of R mod its nilradical; a finite reduced commutative ring is a
    product of fields, where they are exactly the annihilators of the
    primitive idempotents."""
    if ring.size == 1:
        return []
    nil = frozenset(a for a in range(ring.size) if ring.is_nilpotent(a))
    reduced = QuotientRing(ring, nil) if len(nil) > 1 else ring
    idem = [e for e in range(1, reduced.size) if reduced.mul(e, e) == e]
    primitive = [
        e for e in idem if all(reduced.mul(e, f) in (reduced.zero, e) for f in idem)
    ]
    out = []
    for e in primitive:
        killed = frozenset(x for x in range(reduced.size) if reduced.mul(x, e) == reduced.zero)
        if len(nil) > 1:
            carrier = frozenset(y for y in range(ring.size) if reduced.project(y) in killed)
        else:
            carrier = killed
        out.append(Ideal.from_carrier(ring, carrier))
    return sorted(out, key=lambda m: sorted(m.carrier))


# -- parsing ---------------------------------------------------------------

_ZMOD_RE = re.compile(r"^Z/(\d+)$")
_TRUNC_RE = re.compile(r"^Z/(\d+)\[([a-zA-Z])\]/\(\2\^(\d+)\)$")


@lru_cache(maxsize=None)
def parse_ring(text: str) -> FiniteRing:
    """Parse 'Z/12', 'Z/4 x Z/9', or 'Z/3[u]/(u^2)'."""
    text = text.strip()
    if " x " in text:
        return ProductRing([parse_ring(part) for part in text.split(" x ")])
    m = _ZMOD_RE.match(text)
    if m:
        return Zmod(int(m.group(1)))
    m = _TRUNC_RE.match(text)
    if m:
        return TruncatedPolynomialRing(int(m.group(1)), int(m.group(3)), m.group(2))
    raise ValueError(f"cannot parse ring description {text!r}")
