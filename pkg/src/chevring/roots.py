"""Reduced irreducible root systems of rank >= 2, root chains, and signed
structure constants.

Roots are stored as integer coordinate vectors in the simple-root basis.
Pair constants are fixed combinatorially: extraspecial pairs get +(p+1) and
every other sign follows from the antisymmetry / opposite-pair / zero-sum
recurrences.  The commutator-formula constants are read off inside a
faithful representation (see reps.py) so the whole table is certified by
matrix arithmetic rather than by convention-chasing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import OppositeOrEqual, UnsupportedRank

EXPECTED_COUNTS = {
    "A": lambda l: l * (l + 1),
    "B": lambda l: 2 * l * l,
    "C": lambda l: 2 * l * l,
    "D": lambda l: 2 * l * (l - 1),
    "E": lambda l: {6: 72, 7: 126, 8: 240}[l],
    "F": lambda l: 48,
    "G": lambda l: 12,
}

RANK_BOUNDS = {
    "A": (2, 8),
    "B": (2, 8),
    "C": (2, 8),
    "D": (4, 8),
    "E": (6, 8),
    "F": (4, 4),
    "G": (2, 2),
}


@dataclass(frozen=True)
class Root:
    """A root in simple-root coordinates."""

    coords: tuple
    length_class: str
    height: int
    norm2: int  # normalized so short roots have squared length 2

    @property
    def is_positive(self) -> bool:
        return any(c > 0 for c in self.coords)

    @property
    def order_key(self):
        return (self.height, self.coords)

    def __repr__(self):
        return str(list(self.coords))


def _euclidean_data(char: str, l: int):
    """Simple roots and the full root list in an integral Euclidean
    realization (F4 and the E series are scaled by 2)."""

    def e(i, dim, scale=1):
        v = [0] * dim
        v[i] = scale
        return np.array(v)

    if char == "A":
        dim = l + 1
        simples = [e(i, dim) - e(i + 1, dim) for i in range(l)]
        roots = [e(i, dim) - e(j, dim) for i in range(dim) for j in range(dim) if i != j]
    elif char == "B":
        dim = l
        simples = [e(i, dim) - e(i + 1, dim) for i in range(l - 1)] + [e(l - 1, dim)]
        roots = [s * e(i, dim) for i in range(l) for s in (1, -1)]
        roots += [
            s1 * e(i, dim) + s2 * e(j, dim)
            for i in range(l)
            for j in range(i + 1, l)
            for s1 in (1, -1)
            for s2 in (1, -1)
        ]
    elif char == "C":
        dim = l
        simples = [e(i, dim) - e(i + 1, dim) for i in range(l - 1)] + [2 * e(l - 1, dim)]
        roots = [2 * s * e(i, dim) for i in range(l) for s in (1, -1)]
        roots += [
            s1 * e(i, dim) + s2 * e(j, dim)
            for i in range(l)
            for j in range(i + 1, l)
            for s1 in (1, -1)
            for s2 in (1, -1)
        ]
    elif char == "D":
        dim = l
        simples = [e(i, dim) - e(i + 1, dim) for i in range(l - 1)] + [e(l - 2, dim) + e(l - 1, dim)]
        roots = [
            s1 * e(i, dim) + s2 * e(j, dim)
            for i in range(l)
            for j in range(i + 1, l)
            for s1 in (1, -1)
            for s2 in (1, -1)
        ]
    elif char == "G":
        dim = 3
        simples = [e(0, dim) - e(1, dim), -2 * e(0, dim) + e(1, dim) + e(2, dim)]
        short = [e(i, dim) - e(j, dim) for i in range(3) for j in range(3) if i != j]
        long = []
        for i in range(3):
            j, k = [x for x in range(3) if x != i]
            long += [2 * e(i, dim) - e(j, dim) - e(k, dim), -2 * e(i, dim) + e(j, dim) + e(k, dim)]
        roots = short + long
    elif char == "F":
        dim = 4
        simples = [
            2 * e(1, dim) - 2 * e(2, dim),
            2 * e(2, dim) - 2 * e(3, dim),
            2 * e(3, dim),
            e(0, dim) - e(1, dim) - e(2, dim) - e(3, dim),
        ]
        roots = [2 * s * e(i, dim) for i in range(4) for s in (1, -1)]
        roots += [
            2 * s1 * e(i, dim) + 2 * s2 * e(j, dim)
            for i in range(4)
            for j in range(i + 1, 4)
            for s1 in (1, -1)
            for s2 in (1, -1)
        ]
        roots += [np.array(signs) for signs in product((1, -1), repeat=4)]
    elif char == "E":
        dim = 8
        alpha1 = np.array([1, -1, -1, -1, -1, -1, -1, 1])
        alpha2 = 2 * e(0, dim) + 2 * e(1, dim)
        simples = [alpha1, alpha2] + [2 * e(i + 1, dim) - 2 * e(i, dim) for i in range(l - 2)]
        pair_roots = [
            2 * s1 * e(i, dim) + 2 * s2 * e(j, dim)
            for i in range(8)
            for j in range(i + 1, 8)
            for s1 in (1, -1)
            for s2 in (1, -1)
        ]
        spin_roots = [
            np.array(signs) for signs in product((1, -1), repeat=8) if signs.count(-1) % 2 == 0
        ]
        if l == 8:
            roots = pair_roots + spin_roots
        else:
            # cut down to the span of the chosen simple roots
            basis = np.array(simples).T
            roots = []
            for r in pair_roots + spin_roots:
                sol, res, *_ = np.linalg.lstsq(basis, r, rcond=None)
                if np.allclose(basis @ sol, r, atol=1e-8):
                    roots.append(r)
    else:
        raise UnsupportedRank(f"unknown type {char!r}")
    return simples, roots


class RootSystem:
    """Root system with chains, constants, and the opposite-root scan."""

    def __init__(self, char: str, rank: int):
        lo, hi = RANK_BOUNDS.get(char, (0, -1))
        if not lo <= rank <= hi:
            raise UnsupportedRank(f"{char}{rank} is outside the supported table")
        self.char = char
        self.rank = rank
        self.name = f"{char}{rank}"

        simples, euclid_roots = _euclidean_data(char, rank)
        self._simple_euclid = [np.asarray(s, dtype=np.int64) for s in simples]
        basis = np.array(self._simple_euclid, dtype=np.int64).T

        norms = sorted({int(np.dot(r, r)) for r in euclid_roots})
        min_norm = norms[0]
        assert len(norms) <= 2, "more than two root lengths"

        self._euclid_by_coords = {}
        roots = []
        for r in euclid_roots:
            sol, *_ = np.linalg.lstsq(basis.astype(float), r.astype(float), rcond=None)
            coords = tuple(int(round(x)) for x in sol)
            assert np.array_equal(basis @ np.array(coords), r), f"non-integral coords for {r}"
            nonneg = all(c >= 0 for c in coords)
            nonpos = all(c <= 0 for c in coords)
            assert nonneg or nonpos, f"mixed-sign root coordinates {coords}"
            n2 = int(np.dot(r, r))
            length_class = "short" if (len(norms) == 2 and n2 == min_norm) else "long"
            root = Root(coords, length_class, sum(coords), 2 * n2 // min_norm)
            roots.append(root)
            self._euclid_by_coords[coords] = np.asarray(r, dtype=np.int64)

        expected = EXPECTED_COUNTS[char](rank)
        assert len(roots) == expected, f"{self.name}: {len(roots)} roots, expected {expected}"
        self.roots = tuple(sorted(roots, key=lambda r: r.order_key))
        self.positive = tuple(r for r in self.roots if r.is_positive)
        self._by_coords = {r.coords: r for r in self.roots}
        assert len(self._by_coords) == expected

        for r in self.roots:
            assert self.negate(r) in self._by_coords.values()
            assert tuple(2 * c for c in r.coords) not in self._by_coords, "non-reduced"

        self.simple_roots = tuple(
            self._by_coords[tuple(1 if j == i else 0 for j in range(rank))] for i in range(rank)
        )
        self.cartan = np.array(
            [[self.pairing(a, b) for b in self.simple_roots] for a in self.simple_roots],
            dtype=np.int64,
        )
        self._constants = None

    # -- lookups -----------------------------------------------------------

    def root(self, coords) -> Root:
        return self._by_coords[tuple(coords)]

    def is_root(self, coords) -> bool:
        return tuple(coords) in self._by_coords

    def negate(self, r: Root) -> Root:
        return self._by_coords[tuple(-c for c in r.coords)]

    def add(self, a: Root, b: Root):
        """a + b as a Root, or None when the sum is not a root."""
        return self._by_coords.get(tuple(x + y for x, y in zip(a.coords, b.coords)))

    def euclid(self, r: Root) -> np.ndarray:
        return self._euclid_by_coords[r.coords]

    def pairing(self, beta: Root, alpha: Root) -> int:
        """<beta, alpha-check> = 2(beta,alpha)/(alpha,alpha)."""
        ea, eb = self.euclid(alpha), self.euclid(beta)
        num = 2 * int(np.dot(eb, ea))
        den = int(np.dot(ea, ea))
        assert num % den == 0
        return num // den

    def coroot_coords(self, alpha: Root) -> tuple:
        """alpha-check written in the basis of simple coroots (integers)."""
        targets = [Fraction(2 * int(x), int(np.dot(self.euclid(alpha), self.euclid(alpha)))) for x in self.euclid(alpha)]
        cols = [
            [Fraction(2 * int(x), int(np.dot(s, s))) for x in s]
            for s in self._simple_euclid
        ]
        sol = _solve_exact(cols, targets)
        assert all(f.denominator == 1 for f in sol), "non-integral coroot coordinates"
        return tuple(int(f) for f in sol)

    @property
    def is_simply_laced(self) -> bool:
        return all(r.length_class == "long" for r in self.roots)

    @property
    def lacing(self) -> int:
        if self.is_simply_laced:
            return 1
        return 3 if self.char == "G" else 2

    def constants(self) -> "ChevalleyConstants":
        if self._constants is None:
            self._constants = ChevalleyConstants(self)
        return self._constants

    def __repr__(self):
        return self.name

    def describe(self) -> dict:
        return {
            "system": self.name,
            "roots": len(self.roots),
            "short": sum(1 for r in self.roots if r.length_class == "short"),
            "long": sum(1 for r in self.roots if r.length_class == "long"),
            "cartan": self.cartan.tolist(),
        }


def _solve_exact(cols, target):
    """Solve sum_i x_i * cols[i] = target over the rationals (exact)."""
    m, n = len(target), len(cols)
    aug = [[cols[j][i] for j in range(n)] + [target[i]] for i in range(m)]
    row = 0
    pivots = []
    for col in range(n):
        piv = next((r for r in range(row, m) if aug[r][col] != 0), None)
        if piv is None:
            continue
        aug[row], aug[piv] = aug[piv], aug[row]
        pv = aug[row][col]
        aug[row] = [x / pv for x in aug[row]]
        for r in range(m):
            if r != row and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[row])]
        pivots.append(col)
        row += 1
    sol = [Fraction(0)] * n
    for r, col in enumerate(pivots):
        sol[col] = aug[r][n]
    # consistency of the remaining rows
    for r in range(row, m):
        assert aug[r][n] == 0
    return sol


_TYPE_RE = re.compile(r"^([A-G])_?(\d+)$")


@lru_cache(maxsize=None)
def build(type_rank: str) -> RootSystem:
    """Build 'A2', 'B3', 'G2', ... (an underscore before the rank is fine)."""
    m = _TYPE_RE.match(type_rank.strip())
    if not m:
        raise UnsupportedRank(f"cannot parse root system name {type_rank!r}")
    return RootSystem(m.group(1), int(m.group(2)))


def i_phi(system: RootSystem) -> int:
    """Largest i in any root i*alpha + j*beta: 1, 2, or 3 by lacing."""
    return system.lacing


def root_chain(alpha: Root, beta: Root, system: RootSystem) -> tuple[int, int]:
    """(p, q): p = max with beta - p*alpha a root, q = max with beta + q*alpha."""
    if alpha.coords == beta.coords or alpha.coords == tuple(-c for c in beta.coords):
        raise OppositeOrEqual("root chain needs alpha != +-beta")
    p = 0
    cur = tuple(b - a for a, b in zip(alpha.coords, beta.coords))
    while system.is_root(cur):
        p += 1
        cur = tuple(c - a for a, c in zip(alpha.coords, cur))
    q = 0
    cur = tuple(b + a for a, b in zip(alpha.coords, beta.coords))
    while system.is_root(cur):
        q += 1
        cur = tuple(c + a for a, c in zip(alpha.coords, cur))
    return p, q


def commutator_index_set(system: RootSystem, alpha: Root, beta: Root):
    """All (i,j), i,j >= 1, with i*alpha + j*beta a root, in the product
    order (i+j, i) the commutator formula uses."""
    out = []
    for i in range(1, 4):
        for j in range(1, 4):
            coords = tuple(i * a + j * b for a, b in zip(alpha.coords, beta.coords))
            if system.is_root(coords):
                out.append((i, j))
    out.sort(key=lambda ij: (ij[0] + ij[1], ij[0]))
    return out


class ChevalleyConstants:
    """Signed structure constants N_{alpha,beta} and the commutator-formula
    constants N_{alpha,beta,i,j}, lazily computed and cached."""

    def __init__(self, system: RootSystem):
        self.system = system
        self._pair_cache = {}
        self._comm_cache = {}
        # extraspecial pair for each positive root of height >= 2: the
        # decomposition with the smallest first summand in the root order
        self._extraspecial = {}
        for gamma in system.positive:
            if gamma.height < 2:
                continue
            best = None
            for eps in system.positive:
                eta = system._by_coords.get(
                    tuple(g - e for e, g in zip(eps.coords, gamma.coords))
                )
                if eta is None or not eta.is_positive:
                    continue
                if eps.order_key >= eta.order_key:
                    continue
                if best is None or eps.order_key < best[0].order_key:
                    best = (eps, eta)
            assert best is not None, f"no decomposition of positive root {gamma}"
            self._extraspecial[gamma.coords] = best

    def extraspecial_pair(self, gamma: Root):
        return self._extraspecial[gamma.coords]

    def pair(self, a: Root, b: Root) -> int:
        """N_{a,b} for a+b a root; |N| = p+1 with p from the chain."""
        key = (a.coords, b.coords)
        if key in self._pair_cache:
            return self._pair_cache[key]
        system = self.system
        gamma = system.add(a, b)
        assert gamma is not None, "pair constant needs a+b to be a root"
        value = self._pair_value(a, b, gamma)
        p, _ = root_chain(a, b, system)
        assert abs(value) == p + 1, f"|N({a},{b})| = {abs(value)} but chain gives {p + 1}"
        self._pair_cache[key] = value
        return value

    def _pair_value(self, a: Root, b: Root, gamma: Root) -> int:
        system = self.system
        if a.is_positive and b.is_positive:
            es = self._extraspecial[gamma.coords]
            if (a, b) == es:
                p, _ = root_chain(a, b, system)
                return p + 1
            if (b, a) == es or a.order_key > b.order_key:
                return -self.pair(b, a)
            # special pair: reduce through the extraspecial pair of the sum
            eps, eta = es
            neg_a = system.negate(a)
            acc = Fraction(0)
            diff = system.add(eta, neg_a)
            if diff is not None:
                acc += self.pair(eta, neg_a) * self.pair(diff, eps)
            diff = system.add(eps, neg_a)
            if diff is not None:
                acc += self.pair(neg_a, eps) * self.pair(diff, eta)
            n_gamma_nega = -acc / self.pair(eps, eta)
            # zero-sum rule on (gamma, -a, -b), then flip both signs
            n_nega_negb = n_gamma_nega * gamma.norm2 / Fraction(b.norm2)
            assert n_nega_negb.denominator == 1
            return -int(n_nega_negb)
        if not a.is_positive and not b.is_positive:
            return -self.pair(system.negate(a), system.negate(b))
        if not a.is_positive:
            return -self.pair(b, a)
        # a positive, b negative
        if gamma.is_positive:
            # zero-sum rule on (a, b, -gamma)
            value = Fraction(-gamma.norm2 * self.pair(system.negate(b), gamma), a.norm2)
            assert value.denominator == 1
            return int(value)
        return -self.pair(system.negate(a), system.negate(b))

    def comm(self, a: Root, b: Root, i: int, j: int) -> int:
        """N_{a,b,i,j} in [x_a(u), x_b(v)] = prod x_{ia+jb}(N u^i v^j)."""
        return self.comm_row(a, b)[(i, j)]

    def comm_row(self, a: Root, b: Root) -> dict:
        """Full {(i, j): N} map for the pair, keys in formula order."""
        key = (a.coords, b.coords)
        if key not in self._comm_cache:
            self._comm_cache[key] = self._commutator_row(a, b)
        return self._comm_cache[key]

    def _commutator_row(self, a: Root, b: Root) -> dict:
        index_set = commutator_index_set(self.system, a, b)
        if not index_set:
            return {}
        if self.system.is_simply_laced:
            assert index_set == [(1, 1)]
            return {(1, 1): self.pair(a, b)}
        from .reps import peel_commutator_constants  # lazy: reps builds on this module

        row = peel_commutator_constants(self.system, self, a, b)
        assert list(row.keys()) == index_set
        assert row[(1, 1)] == self.pair(a, b)
        assert all(1 <= abs(v) <= 3 for v in row.values())
        return row

    def pair_table(self) -> dict:
        for a in self.system.roots:
            for b in self.system.roots:
                if a.coords != b.coords and self.system.add(a, b) is not None and not (
                    a.coords == tuple(-c for c in b.coords)
                ):
                    self.pair(a, b)
        return dict(self._pair_cache)

    def comm_table(self) -> dict:
        out = {}
        for a in self.system.roots:
            for b in self.system.roots:
                if a.coords == b.coords or a.coords == tuple(-c for c in b.coords):
                    continue
                if self.system.add(a, b) is None:
                    continue
                for (i, j) in commutator_index_set(self.system, a, b):
                    out[(a.coords, b.coords, i, j)] = self.comm(a, b, i, j)
        return out

    def to_json_table(self) -> dict:
        pairs = [
            {"alpha": list(a), "beta": list(b), "n": v}
            for (a, b), v in sorted(self.pair_table().items())
        ]
        commutator = [
            {"alpha": list(a), "beta": list(b), "i": i, "j": j, "n": v}
            for (a, b, i, j), v in sorted(self.comm_table().items())
        ]
        return {"system": self.system.name, "pairs": pairs, "commutator": commutator}


def structure_constants(system: RootSystem) -> ChevalleyConstants:
    return system.constants()


def decompose_opposite(system: RootSystem, alpha: Root) -> tuple[Root, Root]:
    """(gamma, delta) with gamma + delta = -alpha, equal-length summands
    preferred, smallest gamma in the root order among the candidates."""
    target = system.negate(alpha)
    candidates = []
    for gamma in system.roots:
        delta = system._by_coords.get(
            tuple(t - g for g, t in zip(gamma.coords, target.coords))
        )
        if delta is None:
            continue
        candidates.append((gamma, delta))
    assert candidates, "rank >= 2 irreducible systems always decompose"
    equal = [c for c in candidates if c[0].length_class == c[1].length_class]
    pool = equal if equal else candidates
    return min(pool, key=lambda c: c[0].order_key)
