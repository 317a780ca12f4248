"""Exhaustive verification inside finite Chevalley groups.

Everything here is brute force on purpose: groups are enumerated as Cayley
tables over their elementary generators, subgroup identities are checked by
comparing element sets, and word lengths come from breadth-first search, so
they are exact minima.  The symbolic certificates in calculus.py prove the
general identities; this module measures them on concrete finite rings.

Elements are dim x dim matrices of ring element indices packed into int64
keys (row-major, radix = ring size).  Tables keep a dense index array when
the key space is small and fall back to a dict otherwise.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import AmbientMismatch, CapExceeded, NotUnitIdeal, VerificationFailed
from .groups import GroupElement, identity, unipotent
from .reps import Representation, representation_for
from .rings import (
    FiniteRing,
    Ideal,
    NilpotentDenominator,
    QuotientRing,
    Zmod,
    ann_stabilize,
    ideal_ops,
    localise_finite,
    maximal_ideals,
    partition_of_one,
)
from .roots import Root, RootSystem, build
from .words import Word, generator

CAP_DEFAULT = 10_000_000
WIDTH_PAIR_CAP = 10_000_000
DENSE_INDEX_LIMIT = 16_000_000
SHAPE_CANDIDATE_CAP = 2_000_000
PRODUCT_CHUNK = 1_500_000
MAT_BYTES_BUDGET = 1_200_000_000
DEFAULT_SEED = 1729


def _effective_cap(cap: int, dim: int) -> int:
    """Count cap adjusted so the stored matrix block stays inside the byte
    budget; a dim-10 adjoint table would exhaust memory far below the count
    cap calibrated for 3x3 and 4x4 representations."""
    return min(cap, max(1, MAT_BYTES_BUDGET // (dim * dim * 8)))


def _chunk_rows(n_cols: int, dim: int) -> int:
    """Frontier rows per expansion block, scaled down for wide matrices so a
    block of rows x n_cols products stays near the 3x3 working-set size."""
    return max(1, PRODUCT_CHUNK // (max(1, n_cols) * max(1, dim * dim // 9)))


class GroupDescriptor(NamedTuple):
    """A finite Chevalley group pinned down by system, representation, ring."""

    system: RootSystem
    rep: Representation
    ring: FiniteRing

    @property
    def group_name(self) -> str:
        name = self.rep.name
        if name.startswith("natural-sl"):
            return "SL" + name.removeprefix("natural-sl")
        if name.startswith("natural-sp"):
            return "Sp" + name.removeprefix("natural-sp")
        return f"{self.system.name}-adjoint"

    @property
    def label(self) -> str:
        return f"{self.group_name}({self.ring.name})"

    def describe(self) -> dict:
        return {"system": self.system.name, "rep": self.rep.name, "ring": self.ring.name}


_DESC_CACHE: dict = {}


def descriptor(system, ring: FiniteRing) -> GroupDescriptor:
    if isinstance(system, str):
        system = build(system)
    key = (system.name, ring)
    if key not in _DESC_CACHE:
        _DESC_CACHE[key] = GroupDescriptor(system, representation_for(system), ring)
    return _DESC_CACHE[key]


def group_order(desc: GroupDescriptor) -> int | None:
    """Closed-form order of the full group, where one is known.

    Natural SL_n and Sp_4 over Z/m only: the order is multiplicative over
    the prime-power factors of m, and each factor is the residue-field order
    scaled by p^((e-1)*dim) for the congruence kernels.  Returns None for
    other rings or representations; callers then fall back to enumeration.
    """
    ring = desc.ring
    name = desc.rep.name
    base = ring
    while isinstance(base, QuotientRing):
        base = base.source
    if not isinstance(base, Zmod):
        return None
    # Quotients of Z/m are again cyclic, so only the size matters.
    m = ring.size
    if m == 1:
        return 1

    def field_order(p: int) -> int | None:
        if name.startswith("natural-sl"):
            n = desc.rep.dim
            out = p ** (n * (n - 1) // 2)
            for i in range(2, n + 1):
                out *= p**i - 1
            return out
        if name == "natural-sp4":
            return p**4 * (p**2 - 1) * (p**4 - 1)
        return None

    if name.startswith("natural-sl"):
        dim_alg = desc.rep.dim**2 - 1
    elif name == "natural-sp4":
        dim_alg = 10
    else:
        return None

    total = 1
    rest = m
    p = 2
    while rest > 1:
        if rest % p == 0:
            e = 0
            while rest % p == 0:
                rest //= p
                e += 1
            base = field_order(p)
            if base is None:
                return None
            total *= base * p ** ((e - 1) * dim_alg)
        p += 1 if p == 2 else 2
    return total


# -- generators --------------------------------------------------------------


@dataclass(frozen=True)
class GenSpec:
    """One generator of a table: matrix, exact inverse, and (when the
    generator is elementary or a conjugate of one) its expansion into
    elementary letters.  Letters are (root, xi, kind) with kind 'core' for
    the level-carrying letter and 'conj' for conjugator letters."""

    label: str
    matrix: np.ndarray
    inverse: np.ndarray
    letters: tuple | None = None
    letters_inv: tuple | None = None


def _elementary_spec(desc: GroupDescriptor, root: Root, xi: int) -> GenSpec:
    ring = desc.ring
    mat = unipotent(desc.rep, ring, root, xi).matrix
    inv = unipotent(desc.rep, ring, root, ring.neg(xi)).matrix
    name = f"x_{root.coords}({ring.element_name(xi)})"
    return GenSpec(
        label=name,
        matrix=mat,
        inverse=inv,
        letters=((root, xi, "core"),),
        letters_inv=((root, ring.neg(xi), "core"),),
    )


def _conjugated_spec(conj: GenSpec, inner: GenSpec, data) -> GenSpec:
    mat = kernels.matmul_batch(
        kernels.matmul_batch(conj.matrix[None], inner.matrix[None], data),
        conj.inverse[None],
        data,
    )[0]
    inv = kernels.matmul_batch(
        kernels.matmul_batch(conj.matrix[None], inner.inverse[None], data),
        conj.inverse[None],
        data,
    )[0]
    letters = letters_inv = None
    if conj.letters is not None and inner.letters is not None:
        wrap = tuple((r, x, "conj") for r, x, _ in conj.letters)
        wrap_inv = tuple((r, x, "conj") for r, x, _ in conj.letters_inv)
        letters = wrap + inner.letters + wrap_inv
        letters_inv = wrap + inner.letters_inv + wrap_inv
    return GenSpec(f"{conj.label}*{inner.label}*{conj.label}^-1", mat, inv, letters, letters_inv)


def elementary_specs(desc: GroupDescriptor, params: list[int] | None = None) -> list[GenSpec]:
    """x_alpha(xi) for every root and every listed nonzero parameter."""
    ring = desc.ring
    if params is None:
        params = [x for x in range(1, ring.size)]
    return [
        _elementary_spec(desc, root, xi)
        for root in desc.system.roots
        for xi in params
        if xi != ring.zero
    ]


def _identity_mat(desc: GroupDescriptor) -> np.ndarray:
    return identity(desc.rep, desc.ring).matrix


def inverse_stack(mats: np.ndarray, data, ident: np.ndarray) -> np.ndarray:
    """Inverses by walking powers: g^(ord-1), with ord found per row."""
    n = mats.shape[0]
    inv = np.empty_like(mats)
    done = np.zeros(n, dtype=bool)
    flat_id = ident.ravel()
    prev = np.tile(ident, (n, 1, 1))
    acc = mats.copy()
    for _ in range(100_000):
        hit = ~done & np.all(acc.reshape(n, -1) == flat_id, axis=1)
        if hit.any():
            inv[hit] = prev[hit]
            done |= hit
            if done.all():
                return inv
        prev = acc
        acc = kernels.matmul_batch(acc, mats, data)
    raise VerificationFailed("element order exceeded the walk limit; not a finite group?")


# -- the table ---------------------------------------------------------------


class _Codec:
    def __init__(self, ring: FiniteRing, dim: int):
        self.radix = ring.size
        self.dim = dim
        self.packable = self.radix ** (dim * dim) < 2**63
        self.dense_size = self.radix ** (dim * dim) if self.packable else 0

    def encode(self, mats: np.ndarray):
        if self.packable:
            return kernels.pack_keys(mats, self.radix)
        return [m.tobytes() for m in mats]

    def encode_one(self, mat: np.ndarray):
        if self.packable:
            return int(kernels.pack_keys(mat[None], self.radix)[0])
        return mat.tobytes()


class SubgroupTable:
    """Enumerated subgroup: matrices, packed keys, and BFS word lengths.

    dist[i] is the Cayley distance from the identity over the table's own
    generator list, exact because the enumeration is breadth first; it is
    None for tables built by filtering (no generating set) or invalidated
    by incremental extension.  parent/genid arrays are kept when word
    reconstruction was requested and allow reading off an exact shortest
    word in the generators.
    """

    def __init__(self, desc: GroupDescriptor, label: str):
        self.desc = desc
        self.label = label
        self.codec = _Codec(desc.ring, desc.rep.dim)
        self.gens: list[GenSpec] = []
        self.mats = np.empty((0, desc.rep.dim, desc.rep.dim), dtype=np.int64)
        self.dist: np.ndarray | None = None
        self.parent: np.ndarray | None = None
        self.genid: np.ndarray | None = None
        self._data = kernels.ring_data(desc.ring)
        self._dense = self.codec.packable and self.codec.dense_size <= DENSE_INDEX_LIMIT
        if self._dense:
            self._index = np.full(self.codec.dense_size, -1, dtype=np.int32)
        else:
            self._index = {}
        self.keys = np.empty(0, dtype=np.int64) if self.codec.packable else []
        self._inverse_cache: np.ndarray | None = None

    # construction ----------------------------------------------------------

    @classmethod
    def generate(
        cls,
        desc: GroupDescriptor,
        gens: list[GenSpec],
        cap: int = CAP_DEFAULT,
        label: str = "",
        want_words: bool = False,
    ) -> "SubgroupTable":
        t = cls(desc, label)
        t.gens = list(gens)
        t.dist = np.zeros(0, dtype=np.int16)
        if want_words:
            t.parent = np.zeros(0, dtype=np.int32)
            t.genid = np.zeros(0, dtype=np.int16)
        t._append(_identity_mat(desc)[None], dist=0, parent=-1, genid=-1)
        if not gens:
            return t
        cap = _effective_cap(cap, desc.rep.dim)
        gen_mats = np.stack([g.matrix for g in t.gens])
        frontier = np.array([0], dtype=np.int64)
        level = 0
        while frontier.size:
            level += 1
            next_start = t.mats.shape[0]
            chunk = _chunk_rows(gen_mats.shape[0], desc.rep.dim)
            for lo in range(0, frontier.size, chunk):
                rows = frontier[lo : lo + chunk]
                prods = kernels.expand_products(t.mats[rows], gen_mats, t._data)
                fresh = t._filter_new(prods)
                if fresh.size:
                    if want_words:
                        g = gen_mats.shape[0]
                        t._append(
                            prods[fresh],
                            dist=level,
                            parent=rows[fresh // g],
                            genid=(fresh % g).astype(np.int16),
                        )
                    else:
                        t._append(prods[fresh], dist=level)
                if t.mats.shape[0] > cap:
                    raise CapExceeded(
                        f"{label or 'enumeration'} passed {t.mats.shape[0]} elements (cap {cap})"
                    )
            frontier = np.arange(next_start, t.mats.shape[0], dtype=np.int64)
        return t

    def _filter_new(self, prods: np.ndarray) -> np.ndarray:
        """Indices into prods of rows not yet in the table, first hit only."""
        keys = self.codec.encode(prods)
        if self._dense:
            order = np.argsort(keys, kind="stable")
            sk = np.asarray(keys)[order]
            first = np.ones(sk.size, dtype=bool)
            first[1:] = sk[1:] != sk[:-1]
            cand = order[first]
            mask = self._index[np.asarray(keys)[cand]] == -1
            return np.sort(cand[mask])
        out = []
        seen = set()
        for i, k in enumerate(keys):
            kk = int(k) if self.codec.packable else k
            if kk not in seen and kk not in self._index:
                seen.add(kk)
                out.append(i)
        return np.array(out, dtype=np.int64)

    def _append(self, mats: np.ndarray, dist: int, parent=None, genid=None):
        start = self.mats.shape[0]
        keys = self.codec.encode(mats)
        self.mats = np.concatenate([self.mats, mats]) if start else mats.copy()
        if self.codec.packable:
            self.keys = np.concatenate([self.keys, keys]) if start else np.asarray(keys)
        else:
            self.keys.extend(keys)
        idx = np.arange(start, start + mats.shape[0], dtype=np.int32)
        if self._dense:
            self._index[keys] = idx
        else:
            for i, k in zip(idx, keys):
                self._index[int(k) if self.codec.packable else k] = int(i)
        if self.dist is not None:
            self.dist = np.concatenate([self.dist, np.full(mats.shape[0], dist, dtype=np.int16)])
        if self.parent is not None:
            p = np.broadcast_to(np.asarray(parent, dtype=np.int32), (mats.shape[0],))
            g = np.broadcast_to(np.asarray(genid, dtype=np.int16), (mats.shape[0],))
            self.parent = np.concatenate([self.parent, p])
            self.genid = np.concatenate([self.genid, g])
        self._inverse_cache = None

    @classmethod
    def from_rows(
        cls, desc: GroupDescriptor, mats: np.ndarray, label: str, dist: np.ndarray | None = None
    ) -> "SubgroupTable":
        """Table from an explicit element list (filter paths); no generators."""
        t = cls(desc, label)
        t.dist = None
        t._append(mats, dist=0)
        t.dist = dist
        return t

    def extend(self, new_gens: list[GenSpec], cap: int = CAP_DEFAULT):
        """Close under the enlarged generator list, keeping what is known.

        Distances and words are invalidated: the new generators may create
        shortcuts, so exact values need a fresh generate() pass.
        """
        fresh = list(new_gens)
        self.gens.extend(fresh)
        self.dist = None
        self.parent = None
        self.genid = None
        cap = _effective_cap(cap, self.desc.rep.dim)
        new_mats = np.stack([g.matrix for g in fresh])
        add = self._filter_new(new_mats)
        if add.size:
            self._append(new_mats[add], dist=0)
        gen_mats = np.stack([g.matrix for g in self.gens])
        # seed: products of every known element with the new generators
        chunk = _chunk_rows(new_mats.shape[0], self.desc.rep.dim)
        start = self.mats.shape[0]
        for lo in range(0, start, chunk):
            prods = kernels.expand_products(self.mats[lo : lo + chunk], new_mats, self._data)
            keep = self._filter_new(prods)
            if keep.size:
                self._append(prods[keep], dist=0)
        # then ordinary closure of everything new under the full list
        frontier = np.arange(start, self.mats.shape[0], dtype=np.int64)
        while frontier.size:
            next_start = self.mats.shape[0]
            chunk = _chunk_rows(gen_mats.shape[0], self.desc.rep.dim)
            for lo in range(0, frontier.size, chunk):
                rows = frontier[lo : lo + chunk]
                prods = kernels.expand_products(self.mats[rows], gen_mats, self._data)
                keep = self._filter_new(prods)
                if keep.size:
                    self._append(prods[keep], dist=0)
                if self.mats.shape[0] > cap:
                    raise CapExceeded(
                        f"{self.label} passed {self.mats.shape[0]} elements (cap {cap})"
                    )
            frontier = np.arange(next_start, self.mats.shape[0], dtype=np.int64)

    # queries ----------------------------------------------------------------

    @property
    def order(self) -> int:
        return self.mats.shape[0]

    def index_of(self, mat: np.ndarray) -> int | None:
        key = self.codec.encode_one(np.asarray(mat, dtype=np.int64))
        if self._dense:
            i = int(self._index[key])
            return None if i < 0 else i
        i = self._index.get(key)
        return i

    def __contains__(self, mat) -> bool:
        if isinstance(mat, GroupElement):
            mat = mat.matrix
        return self.index_of(mat) is not None

    def contains_keys(self, keys) -> np.ndarray:
        """Vectorised membership for packed keys (dense tables only)."""
        if self._dense:
            return self._index[np.asarray(keys)] >= 0
        return np.array(
            [(int(k) if self.codec.packable else k) in self._index for k in keys], dtype=bool
        )

    def distance(self, mat: np.ndarray) -> int | None:
        i = self.index_of(mat)
        if i is None or self.dist is None:
            return None
        return int(self.dist[i])

    def key_array(self) -> np.ndarray:
        assert self.codec.packable
        return np.asarray(self.keys)

    def same_elements(self, other: "SubgroupTable") -> bool:
        if self.order != other.order:
            return False
        if self.codec.packable and other.codec.packable:
            return bool(np.array_equal(np.sort(self.key_array()), np.sort(other.key_array())))
        return set(self.keys) == set(other.keys)

    def inverses(self) -> np.ndarray:
        if self._inverse_cache is None:
            self._inverse_cache = inverse_stack(self.mats, self._data, _identity_mat(self.desc))
        return self._inverse_cache

    def generating_specs(self) -> list[GenSpec]:
        """Declared generators, or every element when built by filtering."""
        if self.gens:
            return self.gens
        invs = self.inverses()
        return [
            GenSpec(f"{self.label}[{i}]", self.mats[i], invs[i])
            for i in range(self.order)
        ]

    def word_letters(self, i: int) -> list[tuple]:
        """Elementary letters of a shortest generator word for element i."""
        assert self.parent is not None, "table was built without word tracking"
        letters: list[tuple] = []
        while i != 0:
            spec = self.gens[int(self.genid[i])]
            assert spec.letters is not None
            letters = list(spec.letters) + letters
            i = int(self.parent[i])
        return letters

    def describe(self) -> dict:
        return {
            "label": self.label,
            "group": self.desc.label,
            "order": self.order,
            "generators": len(self.gens),
            "diameter": None if self.dist is None else int(self.dist.max(initial=0)),
            "backend": kernels.BACKEND,
        }


# -- enumerations -------------------------------------------------------------

_TABLE_CACHE: dict = {}


def _level_key(level) -> tuple:
    if level is None:
        return ("R",)
    if isinstance(level, Ideal):
        return ("I", frozenset(level.carrier))
    kind, ideal = level
    return (kind, frozenset(ideal.carrier))


def enumerate_elementary(
    desc: GroupDescriptor,
    level=None,
    cap: int = CAP_DEFAULT,
    want_words: bool = False,
) -> SubgroupTable:
    """E at the requested level, as an explicit table.

    level None enumerates E(R) itself; an Ideal I gives the subgroup
    generated by the level-I generators alone; ("relative", I) additionally
    closes under conjugation by every elementary generator of the ring,
    which is the relative elementary subgroup (smallest E(R)-normalized
    subgroup containing the level-I generators).  Closure under conjugation
    by the generators suffices: a subgroup fixed by every generator
    conjugation is fixed by conjugation with arbitrary products of them.
    """
    key = (desc, _level_key(level), want_words)
    if key in _TABLE_CACHE:
        return _TABLE_CACHE[key]
    ring = desc.ring
    if level is None:
        gens = elementary_specs(desc)
        table = SubgroupTable.generate(desc, gens, cap, f"E({desc.label})", want_words)
        _TABLE_CACHE[key] = table
        return table
    if isinstance(level, Ideal):
        ideal, relative = level, False
    else:
        tag, ideal = level
        assert tag == "relative"
        relative = True
    if ideal.ambient != ring:
        raise AmbientMismatch("level ideal lives over a different ring")
    params = sorted(ideal.carrier - {ring.zero})
    base = elementary_specs(desc, params)
    name = f"E({desc.label}, {ideal!r})" if not relative else f"E({desc.label}, rel {ideal!r})"
    table = SubgroupTable.generate(desc, base, cap, name, want_words and not relative)
    if relative:
        _normalize_under(table, elementary_specs(desc), cap)
        if want_words:
            table = SubgroupTable.generate(desc, table.gens, cap, name, want_words=True)
    _TABLE_CACHE[key] = table
    return table


def _normalize_under(table: SubgroupTable, conjugators: list[GenSpec], cap: int, batch: int = 64):
    """Grow the table until its generator set is closed under conjugation by
    every listed conjugator; then the whole subgroup is, and so it is fixed
    by conjugation with any product of conjugators."""
    data = kernels.ring_data(table.desc.ring)
    e_mats = np.stack([c.matrix for c in conjugators])
    e_invs = np.stack([c.inverse for c in conjugators])
    while table.gens:
        gen_list = list(table.gens)
        gen_mats = np.stack([g.matrix for g in gen_list])
        ng = gen_mats.shape[0]
        added: list[GenSpec] = []
        seen: set = set()
        chunk = _chunk_rows(ng, table.desc.rep.dim)
        for lo in range(0, e_mats.shape[0], chunk):
            emc = e_mats[lo : lo + chunk]
            conj = kernels.expand_products(emc, gen_mats, data)
            rows = np.repeat(np.arange(emc.shape[0]), ng)
            conj = kernels.matmul_batch(conj, e_invs[lo : lo + chunk][rows], data)
            inside = table.contains_keys(table.codec.encode(conj))
            for row in np.nonzero(~inside)[0]:
                key = table.codec.encode_one(conj[row])
                if key in seen:
                    continue
                seen.add(key)
                added.append(
                    _conjugated_spec(conjugators[lo + row // ng], gen_list[row % ng], data)
                )
                if len(added) >= batch:
                    break
            if len(added) >= batch:
                break
        if not added:
            return
        table.extend(added, cap)


def ambient_table(desc: GroupDescriptor, cap: int = CAP_DEFAULT) -> SubgroupTable:
    known = group_order(desc)
    if known is not None and known > cap:
        raise CapExceeded(f"|{desc.label}| = {known} exceeds cap {cap}")
    return enumerate_elementary(desc, None, cap)


def _det(ring: FiniteRing, mat: np.ndarray) -> int:
    d = mat.shape[0]
    if d == 1:
        return int(mat[0, 0])
    total = ring.zero
    for j in range(d):
        minor = np.delete(np.delete(mat, 0, axis=0), j, axis=1)
        term = ring.mul(int(mat[0, j]), _det(ring, minor))
        total = ring.add(total, term) if j % 2 == 0 else ring.sub(total, term)
    return total


def _membership_mask(desc: GroupDescriptor, mats: np.ndarray) -> np.ndarray:
    """Which of the candidate matrices lie in the group; natural SL only.

    Simply connected type A in its natural representation is exactly the
    determinant-1 matrices; no similarly cheap predicate is wired up for
    the other representations, and callers fall back to enumeration there.
    """
    ring = desc.ring
    if not desc.rep.name.startswith("natural-sl"):
        raise CapExceeded(
            f"no matrix membership predicate for {desc.rep.name}; ambient enumeration needed"
        )
    return np.array([_det(ring, m) == ring.one for m in mats], dtype=bool)


def _projection_table(ring: FiniteRing, ideal: Ideal) -> tuple[QuotientRing, np.ndarray]:
    target = QuotientRing(ring, ideal.carrier)
    proj = np.array([target.project(x) for x in range(ring.size)], dtype=np.int64)
    return target, proj


def congruence_subgroup(desc: GroupDescriptor, ideal: Ideal, cap: int = CAP_DEFAULT) -> SubgroupTable:
    """G(R, I): kernel of entrywise reduction mod I.

    Preferred route: enumerate the ambient group and filter, which inherits
    exact BFS distances.  When the ambient order provably exceeds the cap,
    fall back to direct shape enumeration (identity + matrix over I) filtered
    by the determinant predicate; that path carries no distances.
    """
    if ideal.ambient != desc.ring:
        raise AmbientMismatch("ideal lives over a different ring")
    key = (desc, ("cong", frozenset(ideal.carrier)))
    if key in _TABLE_CACHE:
        return _TABLE_CACHE[key]
    ring = desc.ring
    label = f"G({desc.label}, {ideal!r})"
    known = group_order(desc)
    if known is None or known <= cap:
        amb = ambient_table(desc, cap)
        target, proj = _projection_table(ring, ideal)
        reduced = proj[amb.mats]
        red_id = proj[_identity_mat(desc)]
        mask = np.all(reduced.reshape(amb.order, -1) == red_id.ravel(), axis=1)
        table = SubgroupTable.from_rows(
            desc, amb.mats[mask], label, None if amb.dist is None else amb.dist[mask]
        )
    else:
        d = desc.rep.dim
        carrier = sorted(ideal.carrier)
        if len(carrier) ** (d * d) > SHAPE_CANDIDATE_CAP:
            raise CapExceeded(
                f"{label}: ambient over cap and {len(carrier)}^{d * d} shape candidates too many"
            )
        grids = np.meshgrid(*([np.array(carrier, dtype=np.int64)] * (d * d)), indexing="ij")
        cands = np.stack([g.ravel() for g in grids], axis=1).reshape(-1, d, d)
        ident = _identity_mat(desc)
        add_t = None if isinstance(ring, Zmod) else ring.add_table
        if add_t is None:
            cands = (cands + ident[None]) % ring.size
        else:
            cands = add_t[cands, ident[None]]
        mask = _membership_mask(desc, cands)
        mats = cands[mask]
        # identity first, as every table expects
        keyc = _Codec(ring, d)
        keys = keyc.encode(mats)
        id_key = keyc.encode_one(ident)
        order = np.argsort(keys != id_key, kind="stable")
        table = SubgroupTable.from_rows(desc, mats[order], label)
        # kernels of ring homomorphisms are closed; spot-check inverses anyway
        inv_keys = keyc.encode(inverse_stack(table.mats, kernels.ring_data(ring), ident))
        assert table.contains_keys(inv_keys).all(), "kernel not inverse-closed?"
    _TABLE_CACHE[key] = table
    return table


def centre_of(table: SubgroupTable) -> np.ndarray:
    """Indices of elements commuting with every generator of the table."""
    data = kernels.ring_data(table.desc.ring)
    mask = np.ones(table.order, dtype=bool)
    for spec in table.generating_specs():
        g = np.tile(spec.matrix, (table.order, 1, 1))
        left = kernels.matmul_batch(table.mats, g, data)
        right = kernels.matmul_batch(g, table.mats, data)
        mask &= np.all(left.reshape(table.order, -1) == right.reshape(table.order, -1), axis=1)
    return np.nonzero(mask)[0]


def full_congruence_subgroup(
    desc: GroupDescriptor, ideal: Ideal, cap: int = CAP_DEFAULT
) -> SubgroupTable:
    """C(R, I): preimage of the centre of the reduced group."""
    if ideal.ambient != desc.ring:
        raise AmbientMismatch("ideal lives over a different ring")
    amb = ambient_table(desc, cap)
    target, proj = _projection_table(desc.ring, ideal)
    red_desc = descriptor(desc.system, target)
    red = ambient_table(red_desc, cap)
    central = centre_of(red)
    central_keys = set(int(k) for k in np.asarray(red.keys)[central])
    reduced = proj[amb.mats]
    red_keys = red.codec.encode(reduced)
    mask = np.array([int(k) in central_keys for k in red_keys], dtype=bool)
    return SubgroupTable.from_rows(
        desc,
        amb.mats[mask],
        f"C({desc.label}, {ideal!r})",
        None if amb.dist is None else amb.dist[mask],
    )


# -- mixed commutator subgroups ----------------------------------------------


def mutual_commutator(H: SubgroupTable, K: SubgroupTable, cap: int = CAP_DEFAULT) -> SubgroupTable:
    """[H, K] as a subgroup table.

    The commutators of generator pairs normally generate [H, K] only after
    closing under conjugation by the join <H, K>: in the quotient of the
    join by that normal closure the images of H and K commute elementwise,
    so every [h, k] dies, and conversely each seed lies in [H, K], which is
    itself normal in the join.  The loop below is exactly that closure and
    never enumerates the join.
    """
    if H.desc != K.desc:
        raise AmbientMismatch("subgroups live in different groups")
    desc = H.desc
    data = kernels.ring_data(desc.ring)
    hg = H.generating_specs()
    kg = K.generating_specs()
    hmat = np.stack([g.matrix for g in hg])
    hinv = np.stack([g.inverse for g in hg])
    kmat = np.stack([g.matrix for g in kg])
    kinv = np.stack([g.inverse for g in kg])
    nh, nk = hmat.shape[0], kmat.shape[0]
    codec = _Codec(desc.ring, desc.rep.dim)
    ident_key = codec.encode_one(_identity_mat(desc))
    seen = {ident_key}
    specs: list[GenSpec] = []
    chunk = _chunk_rows(nk, desc.rep.dim)
    for lo in range(0, nh, chunk):
        hm = hmat[lo : lo + chunk]
        hi = np.repeat(np.arange(lo, min(lo + chunk, nh)), nk)
        ki = np.tile(np.arange(nk), hm.shape[0])
        seeds = kernels.matmul_batch(
            kernels.matmul_batch(kernels.expand_products(hm, kmat, data), hinv[hi], data),
            kinv[ki],
            data,
        )
        keys = codec.encode(seeds)
        for row in range(seeds.shape[0]):
            k = int(keys[row]) if codec.packable else keys[row]
            if k in seen:
                continue
            seen.add(k)
            inv = kernels.matmul_batch(
                kernels.matmul_batch(
                    kernels.matmul_batch(kmat[ki[row]][None], hmat[hi[row]][None], data),
                    kinv[ki[row]][None],
                    data,
                ),
                hinv[hi[row]][None],
                data,
            )[0]
            specs.append(GenSpec(f"[{hg[hi[row]].label},{kg[ki[row]].label}]", seeds[row], inv))
    label = f"[{H.label}, {K.label}]"
    table = SubgroupTable.generate(desc, specs, cap, label)
    _normalize_under(table, hg + kg, cap)
    table.label = label
    return table


def verify_theorem_3C(
    desc: GroupDescriptor, A: Ideal, B: Ideal, cap: int = CAP_DEFAULT
) -> dict:
    """Check [E(R,A), G(R,B)] = [E(R,A), E(R,B)] by enumeration."""
    t0 = time.perf_counter()
    EA = enumerate_elementary(desc, ("relative", A), cap)
    EB = enumerate_elementary(desc, ("relative", B), cap)
    GB = congruence_subgroup(desc, B, cap)
    lhs = mutual_commutator(EA, GB, cap)
    rhs = mutual_commutator(EA, EB, cap)
    equal = lhs.same_elements(rhs)
    degenerate = GB.same_elements(EB)
    return {
        "theorem": "3C",
        "instance": f"{desc.label}, A={A!r}, B={B!r}",
        "lhs_order": lhs.order,
        "rhs_order": rhs.order,
        "equal": bool(equal),
        "degenerate": bool(degenerate),
        "degenerate_reason": "G(R,B) = E(R,B)" if degenerate else None,
        "orders": {
            "E(R,A)": EA.order,
            "E(R,B)": EB.order,
            "G(R,B)": GB.order,
        },
        "runtime_ms": round(1000 * (time.perf_counter() - t0), 2),
    }


def verify_theorem_4C(
    desc: GroupDescriptor, A: Ideal, B: Ideal, cap: int = CAP_DEFAULT
) -> dict:
    """Check [E(R,A), E(R,B)] = E(R, AB) for comaximal A, B by enumeration."""
    ops = ideal_ops(A, B)
    if not ops["comaximal"]:
        raise NotUnitIdeal(f"A + B must be the unit ideal; got {ops['sum']!r}")
    t0 = time.perf_counter()
    AB = ops["product"]
    EA = enumerate_elementary(desc, ("relative", A), cap)
    EB = enumerate_elementary(desc, ("relative", B), cap)
    lhs = mutual_commutator(EA, EB, cap)
    rhs = enumerate_elementary(desc, ("relative", AB), cap)
    equal = lhs.same_elements(rhs)
    return {
        "theorem": "4C",
        "instance": f"{desc.label}, A={A!r}, B={B!r}",
        "lhs_order": lhs.order,
        "rhs_order": rhs.order,
        "equal": bool(equal),
        "product_ideal": sorted(AB.carrier),
        "product_note": "AB = BA over a commutative ring; the symmetrised product adds nothing",
        "orders": {"E(R,A)": EA.order, "E(R,B)": EB.order},
        "runtime_ms": round(1000 * (time.perf_counter() - t0), 2),
    }


# -- commutator width ---------------------------------------------------------


def commutator_width(
    desc: GroupDescriptor,
    X: SubgroupTable | None = None,
    Y: SubgroupTable | None = None,
    pair_cap: int = WIDTH_PAIR_CAP,
    seed: int = DEFAULT_SEED,
    cap: int = CAP_DEFAULT,
) -> dict:
    """Max BFS length of [x, y] over x in X, y in Y (default: whole group).

    Lengths are measured in the ambient table's own elementary generators,
    so they are exact word-length minima.  All pairs are scanned when their
    count fits under pair_cap; otherwise a seeded uniform sample of pair_cap
    pairs is measured and reported as such.
    """
    t0 = time.perf_counter()
    amb = ambient_table(desc, cap)
    X = X or amb
    Y = Y or amb
    assert amb.dist is not None
    diameter = int(amb.dist.max(initial=0))
    if not amb._dense:
        raise CapExceeded(f"width scan needs a dense key index; {desc.label} is too large")
    dense_dist = np.full(amb.codec.dense_size, diameter + 1, dtype=np.int16)
    dense_dist[amb.key_array()] = amb.dist
    data = kernels.ring_data(desc.ring)
    xinv = X.inverses()
    yinv = Y.inverses()
    pairs = X.order * Y.order
    exhaustive = pairs <= pair_cap
    if exhaustive:
        hist = kernels.commutator_hist(
            X.mats, xinv, Y.mats, yinv, data, amb.codec.radix, dense_dist, diameter + 1
        )
        counted = pairs
    else:
        rng = np.random.default_rng(seed)
        hist = np.zeros(diameter + 2, dtype=np.int64)
        counted = pair_cap
        chunk = 1_000_000
        for lo in range(0, pair_cap, chunk):
            n = min(chunk, pair_cap - lo)
            xs = rng.integers(0, X.order, n)
            ys = rng.integers(0, Y.order, n)
            hist += kernels.commutator_hist_pairs(
                X.mats[xs], xinv[xs], Y.mats[ys], yinv[ys],
                data, amb.codec.radix, dense_dist, diameter + 1,
            )
    assert hist[diameter + 1] == 0, "a commutator fell outside the enumerated group"
    hist = hist[: diameter + 1]
    width = int(np.nonzero(hist)[0].max(initial=0))
    return {
        "group": desc.label,
        "order": amb.order,
        "diameter": diameter,
        "pairs": int(counted),
        "exhaustive": bool(exhaustive),
        "seed": None if exhaustive else seed,
        "width": width,
        "histogram": {int(i): int(c) for i, c in enumerate(hist) if c},
        "backend": kernels.BACKEND,
        "runtime_ms": round(1000 * (time.perf_counter() - t0), 2),
    }


# -- normality decomposition ---------------------------------------------------

_CHART_CACHE: dict = {}


def _chart(desc: GroupDescriptor, s: int, cap: int) -> dict:
    """Localisation chart at s: the level table with word tracking plus the
    lifting maps back to the source ring."""
    key = (desc, s)
    if key in _CHART_CACHE:
        return _CHART_CACHE[key]
    ring = desc.ring
    loc = localise_finite(ring, s)
    k = loc.stable_exponent
    target = loc.target
    s_pow = ring.pow(s, k)
    level_image = Ideal(target, (loc(s_pow),))
    loc_desc = descriptor(desc.system, target)
    table = enumerate_elementary(loc_desc, ("relative", level_image), cap, want_words=True)
    proj = np.array([loc(x) for x in range(ring.size)], dtype=np.int64)
    core_lift = {}
    for r in range(ring.size):
        u = ring.mul(s_pow, r)
        v = int(proj[u])
        if v not in core_lift:
            core_lift[v] = u
    conj_lift = {v: loc.lift(v) for v in range(target.size)}
    chart = {
        "loc": loc,
        "stable_exponent": k,
        "s_power": s_pow,
        "table": table,
        "proj": proj,
        "core_lift": core_lift,
        "conj_lift": conj_lift,
    }
    _CHART_CACHE[key] = chart
    return chart


def normality_decompose(
    desc: GroupDescriptor,
    g: GroupElement | np.ndarray,
    alpha: Root,
    xi: int,
    cap: int = CAP_DEFAULT,
) -> dict:
    """Rewrite g x_alpha(xi) g^-1 as an explicit elementary word over R.

    One chart per maximal ideal M: pick s not in M, so the localisations
    jointly see every unit.  With k the annihilator-stabilising exponent,
    the powers s_i^k generate the unit ideal, giving a partition of one
    zeta_i = s_i^k eta_i.  Splitting xi along the partition, each factor
    g x_alpha(zeta_i xi) g^-1 is congruent to 1 mod s_i^k R; its image in
    the localisation lies in the enumerated level subgroup there, and the
    BFS word lifts letter by letter.  The lifted word is congruent to 1 at
    the same level and has the same image, and the localisation map is
    injective on that congruence level once annihilators have stabilised,
    so the lift is exactly the conjugate.  The identity is then re-checked
    by multiplying matrices, so the certificate never rests on the argument
    above alone.
    """
    t0 = time.perf_counter()
    ring = desc.ring
    gmat = g.matrix if isinstance(g, GroupElement) else np.asarray(g, dtype=np.int64)
    gel = GroupElement(desc.rep, ring, gmat)
    data = kernels.ring_data(ring)
    ginv = inverse_stack(gmat[None], data, _identity_mat(desc))[0]
    target_el = GroupElement(desc.rep, ring, gmat) * unipotent(desc.rep, ring, alpha, xi)
    target_el = target_el * GroupElement(desc.rep, ring, ginv)

    if np.array_equal(gmat, _identity_mat(desc)):
        factors = [] if xi == ring.zero else [(alpha, xi)]
        word = Word(ring, tuple(generator(ring, r, x)[0] for r, x in factors))
        ok = np.array_equal(_evaluate_mat(desc, word), target_el.matrix)
        return {
            "word": word,
            "word_length": len(word),
            "oracle_checked": bool(ok),
            "provenance": {
                "charts": [],
                "trivial": "g is the identity; the conjugate is the generator itself",
                "partition_sum_is_one": True,
            },
            "runtime_ms": round(1000 * (time.perf_counter() - t0), 2),
        }

    ideals = maximal_ideals(ring)
    charts = []
    pairs = []
    for M in ideals:
        candidates = [x for x in range(ring.size) if x not in M.carrier]
        # prefer an s supported away from the other charts: the localisation
        # then genuinely quotients the ring and keeps the level table small.
        others = [x for x in candidates if all(x in N.carrier for N in ideals if N != M)]
        s = min(others) if others else min(candidates)
        chart = _chart(desc, s, cap)
        charts.append((M, s, chart))
        pairs.append((s, chart["stable_exponent"]))
    etas = partition_of_one(ring, pairs)
    zetas = [ring.mul(ring.pow(s, k), eta) for (s, k), eta in zip(pairs, etas)]
    total = ring.zero
    for z in zetas:
        total = ring.add(total, z)
    assert total == ring.one, "partition of one failed"

    letters: list[tuple[Root, int]] = []
    chart_reports = []
    for (M, s, chart), eta, zeta in zip(charts, etas, zetas):
        piece_param = ring.mul(zeta, xi)
        piece = (
            gel
            * unipotent(desc.rep, ring, alpha, piece_param)
            * GroupElement(desc.rep, ring, ginv)
        )
        table: SubgroupTable = chart["table"]
        proj = chart["proj"]
        image = proj[piece.matrix]
        idx = table.index_of(image)
        if idx is None:
            raise VerificationFailed(
                f"localised conjugate not in the enumerated level subgroup at s={s}"
            )
        chart_letters = table.word_letters(idx)
        lifted = []
        for root, v, kind in chart_letters:
            u = chart["core_lift"][int(v)] if kind == "core" else chart["conj_lift"][int(v)]
            lifted.append((root, u))
        letters.extend(lifted)
        chart_reports.append(
            {
                "maximal_ideal": sorted(M.carrier),
                "s": ring.element_name(s),
                "stable_exponent": chart["stable_exponent"],
                "eta": ring.element_name(eta),
                "zeta": ring.element_name(zeta),
                "target_ring": chart["loc"].target.name,
                "piece_letters": len(lifted),
            }
        )

    word = Word(ring, tuple(generator(ring, r, x)[0] for r, x in letters))
    ok = np.array_equal(_evaluate_mat(desc, word), target_el.matrix)
    if not ok:
        raise VerificationFailed("normality decomposition failed the matrix oracle")
    return {
        "word": word,
        "word_length": len(word),
        "oracle_checked": True,
        "provenance": {
            "charts": chart_reports,
            "partition": [ring.element_name(z) for z in zetas],
            "partition_sum_is_one": True,
        },
        "runtime_ms": round(1000 * (time.perf_counter() - t0), 2),
    }


def _evaluate_mat(desc: GroupDescriptor, word: Word) -> np.ndarray:
    out = identity(desc.rep, desc.ring)
    for f in word:
        out = out * unipotent(desc.rep, desc.ring, f.root, f.param)
    return out.matrix


# -- localisation theorems ------------------------------------------------------


def theorem2_verify(
    system,
    ring: FiniteRing,
    s: int,
    p: int = 1,
    k: int = 1,
    r_max: int = 4,
    cap: int = CAP_DEFAULT,
) -> dict:
    """Containment [e, F_s(g)] in E(F_s(s^p R)) by enumeration.

    e runs over the elementary generators with denominator s^k (units after
    localising, so the k only relabels parameters over a finite ring), and g
    over the congruence subgroup of level s^r R; the minimal working r is
    found by increasing r from 0.  A nilpotent s makes the localisation the
    zero ring and the containment vacuous, which is reported as degenerate.
    """
    desc = descriptor(system, ring)
    t0 = time.perf_counter()
    report = {
        "theorem": "2",
        "instance": f"{desc.label}, s={ring.element_name(s)}, p={p}, k={k}",
        "degenerate": None,
    }
    try:
        loc = localise_finite(ring, s)
    except NilpotentDenominator:
        report.update(
            {
                "degenerate": "s is nilpotent; the localisation is the zero ring",
                "holds": True,
                "minimal_r": 0,
                "checked": {0: True},
                "runtime_ms": round(1000 * (time.perf_counter() - t0), 2),
            }
        )
        return report
    target = loc.target
    loc_desc = descriptor(desc.system, target)
    if loc.kernel.is_zero:
        report["degenerate"] = "s is a unit; localisation is an isomorphism"
    level = Ideal(target, (target.pow(loc(s), p),))
    if level.is_unit_ideal:
        # s is a unit after localising, so the level subgroup is all of
        # E(R_s); commutators of group elements stay in the group, and the
        # containment holds with no scan.  This is every finite ring.
        order = group_order(loc_desc)
        if order is None:
            try:
                # cosmetic report field; keep the budget small, the
                # containment is settled either way
                order = ambient_table(loc_desc, min(cap, 200_000)).order
            except CapExceeded:
                order = None
        report.update(
            {
                "holds": True,
                "minimal_r": 0,
                "checked": {0: True},
                "level_order": order,
                "note": "level ideal becomes the unit ideal in the localisation; "
                "containment is group closure",
                "runtime_ms": round(1000 * (time.perf_counter() - t0), 2),
            }
        )
        return report
    E_level = enumerate_elementary(loc_desc, level, cap)
    s_inv_k = target.pow(loc.image_of_s_inverse, k)
    e_specs = [
        _elementary_spec(loc_desc, root, target.mul(target.project(a), s_inv_k))
        for root in desc.system.roots
        for a in range(ring.size)
        if target.mul(target.project(a), s_inv_k) != target.zero
    ]
    # dedupe: different a can hit the same localised parameter
    e_unique = {}
    for spec in e_specs:
        e_unique.setdefault(spec.label, spec)
    e_specs = list(e_unique.values())
    data = kernels.ring_data(target)
    proj = np.array([loc(x) for x in range(ring.size)], dtype=np.int64)
    checked = {}
    minimal_r = None
    for r in range(r_max + 1):
        if r == 0:
            images = ambient_table(loc_desc, cap)
            img_mats = images.mats
        else:
            Gr = congruence_subgroup(desc, Ideal(ring, (ring.pow(s, r),)), cap)
            img = proj[Gr.mats]
            codec = _Codec(target, desc.rep.dim)
            keys = codec.encode(img)
            _, first = np.unique(keys, return_index=True)
            img_mats = img[first]
        img_inv = inverse_stack(img_mats, data, _identity_mat(loc_desc))
        holds = True
        for spec in e_specs:
            e = np.tile(spec.matrix, (img_mats.shape[0], 1, 1))
            ei = np.tile(spec.inverse, (img_mats.shape[0], 1, 1))
            comm = kernels.matmul_batch(
                kernels.matmul_batch(kernels.matmul_batch(e, img_mats, data), ei, data),
                img_inv,
                data,
            )
            if not E_level.contains_keys(E_level.codec.encode(comm)).all():
                holds = False
                break
        checked[r] = holds
        if holds and minimal_r is None:
            minimal_r = r
            break
    report.update(
        {
            "holds": minimal_r is not None,
            "minimal_r": minimal_r,
            "checked": checked,
            "level_order": E_level.order,
            "runtime_ms": round(1000 * (time.perf_counter() - t0), 2),
        }
    )
    return report


def verify_theorem_8C(
    desc: GroupDescriptor,
    s: int,
    cap: int = CAP_DEFAULT,
    seed: int = DEFAULT_SEED,
    samples: int = 64,
) -> dict:
    """The two localisation kernels at s, and [K1, K2] inside E.

    K1 is the preimage of E(R_s) under F_s; over a finite ring E(R_s) is the
    whole localised group, so K1 is all of G and the containment holds
    degenerately.  K2 is the kernel of reduction to the stabilised quotient
    R / s^n R (the power ideals stabilise since R is finite).  Both kernels
    and the containment are computed, and the degeneracies are reported
    rather than hidden.
    """
    ring = desc.ring
    t0 = time.perf_counter()
    report: dict = {"theorem": "8C", "instance": f"{desc.label}, s={ring.element_name(s)}"}
    full_order = group_order(desc)
    try:
        loc = localise_finite(ring, s)
        loc_desc = descriptor(desc.system, loc.target)
        E_loc = ambient_table(loc_desc, cap)
        report["localisation"] = loc.describe()
        report["first_kernel"] = {
            "order": full_order,
            "equals_whole_group": True,
            "reason": "E = G over the finite localisation, so the preimage of E is everything",
            "localised_order": E_loc.order,
        }
        degenerate_first = loc.kernel.is_zero
        if degenerate_first:
            report["first_kernel"]["reason"] = "s is a unit; the localisation changes nothing"
    except NilpotentDenominator:
        report["localisation"] = "zero ring"
        report["first_kernel"] = {
            "order": full_order,
            "equals_whole_group": True,
            "reason": "s is nilpotent, the localisation is the zero ring",
        }
    # stabilised power ideal chain
    n = 1
    current = Ideal(ring, (s,))
    while True:
        nxt = Ideal(ring, (ring.pow(s, n + 1),))
        if nxt.carrier == current.carrier:
            break
        current = nxt
        n += 1
    K2 = congruence_subgroup(desc, current, cap)
    report["stable_power"] = {"exponent": n, "ideal": sorted(current.carrier)}
    report["second_kernel_order"] = K2.order
    # containment [K1, K2] <= E(R): K1 = G, so sample commutators and check
    # they are group elements (E = G for finite rings; membership is the
    # determinant predicate where available, else ambient lookup).
    rng = np.random.default_rng(seed)
    gens = elementary_specs(desc)
    data = kernels.ring_data(ring)
    ident = _identity_mat(desc)
    ok = True
    for _ in range(samples):
        gmat = ident
        for j in rng.integers(0, len(gens), 6):
            gmat = kernels.matmul_batch(gmat[None], gens[j].matrix[None], data)[0]
        k2 = K2.mats[int(rng.integers(0, K2.order))]
        ginv = inverse_stack(gmat[None], data, ident)[0]
        k2inv = inverse_stack(k2[None], data, ident)[0]
        comm = kernels.matmul_batch(
            kernels.matmul_batch(
                kernels.matmul_batch(gmat[None], k2[None], data), ginv[None], data
            ),
            k2inv[None],
            data,
        )[0]
        try:
            member = bool(_membership_mask(desc, comm[None])[0])
        except CapExceeded:
            member = comm in ambient_table(desc, cap)
        ok &= member
    report["containment_in_E"] = {
        "holds": bool(ok),
        "checked_pairs": samples,
        "note": "K1 is the whole group, so the containment is the degenerate case",
    }
    report["runtime_ms"] = round(1000 * (time.perf_counter() - t0), 2)
    return report
