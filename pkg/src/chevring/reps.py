"""Faithful representations with integral divided-power towers.

Each root gets a tower [I, e, e^2/2!, e^3/3!, ...] of integer matrices, so
the root element x_alpha(xi) = sum xi^k * tower[k] can be evaluated exactly
over any coefficient ring.  A_l and C_l use their natural representations;
everything else uses the adjoint representation built from the pair-constant
table, whose bracket check doubles as a Jacobi verification of that table.
"""

from __future__ import annotations

import numpy as np

from .poly import Poly, PolyRing
from .roots import ChevalleyConstants, Root, RootSystem, commutator_index_set

MAX_TOWER = 5


# -- exact matrices over a PolyRing -----------------------------------------


def poly_identity(ring: PolyRing, n: int):
    out = np.full((n, n), ring.zero, dtype=object)
    for i in range(n):
        out[i, i] = ring.one
    return out


def poly_matmul(A, B):
    n, m = A.shape
    m2, k = B.shape
    assert m == m2
    zero = None
    for row in A:
        for x in row:
            zero = x.ring.zero
            break
        break
    out = np.full((n, k), zero, dtype=object)
    for i in range(n):
        for j in range(m):
            a = A[i, j]
            if a.is_zero:
                continue
            row = B[j]
            for c in range(k):
                b = row[c]
                if not b.is_zero:
                    out[i, c] = out[i, c] + a * b
    return out

def poly_mat_equal(A, B) -> bool:
    if A.shape != B.shape:
        return False
    return all(x == y for x, y in zip(A.flat, B.flat))


def _divided_tower(e: np.ndarray) -> list[np.ndarray]:
    """[I, e, e^2/2!, ...] with exact integer divisions, ending before 0."""
    n = e.shape[0]
    tower = [np.eye(n, dtype=np.int64)]
    power = np.eye(n, dtype=np.int64)
    for k in range(1, MAX_TOWER + 1):
        power = power @ e
        div = power.copy()
        for f in range(2, k + 1):
            assert np.all(div % f == 0), "divided power is not integral"
            div = div // f
        if not div.any():
            return tower
        tower.append(div)
    raise AssertionError("root element is not nilpotent of small order")


class Representation:
    """System + integer divided-power towers, one per root."""

    def __init__(self, system: RootSystem, name: str, dim: int, towers: dict, h_matrices):
        self.system = system
        self.name = name
        self.dim = dim
        self.towers = towers
        self.h_matrices = h_matrices  # one per simple root

    def unipotent_poly(self, root: Root, xi: Poly):
        tower = self.towers[root.coords]
        ring = xi.ring
        out = poly_identity(ring, self.dim)
        power = ring.one
        for k in range(1, len(tower)):
            power = power * xi
            mk = tower[k]
            for i, j in zip(*np.nonzero(mk)):
                out[i, j] = out[i, j] + power * int(mk[i, j])
        return out

    def root_element(self, root: Root) -> np.ndarray:
        return self.towers[root.coords][1]

    def verify_bracket_table(self, constants: ChevalleyConstants) -> None:
        """[e_a, e_b] must match the constant table for every root pair, and
        the h's must act by the pairing integers.  For the adjoint this is
        exactly the Jacobi identity for the table."""
        system = self.system
        mats = {r.coords: self.root_element(r) for r in system.roots}
        for a in system.roots:
            ea = mats[a.coords]
            for i, simple in enumerate(system.simple_roots):
                h = self.h_matrices[i]
                got = h @ ea - ea @ h
                assert np.array_equal(got, system.pairing(a, simple) * ea)
            for b in system.roots:
                if a.coords == b.coords:
                    continue
                eb = mats[b.coords]
                got = ea @ eb - eb @ ea
                if b.coords == tuple(-c for c in a.coords):
                    want = sum(
                        c * h for c, h in zip(system.coroot_coords(a), self.h_matrices)
                    )
                elif system.add(a, b) is not None:
                    want = constants.pair(a, b) * mats[system.add(a, b).coords]
                else:
                    want = np.zeros_like(got)
                assert np.array_equal(got, want), f"bracket [{a},{b}] disagrees with table"


def _from_seed_matrices(system, constants, name, dim, seeds) -> Representation:
    """Extend seed matrices for the +-simple roots to all roots by the
    extraspecial recursion e_gamma = [e_eps, e_eta] / N_{eps,eta}."""
    mats = dict(seeds)
    for gamma in sorted(system.positive, key=lambda r: r.height):
        if gamma.coords in mats:
            continue
        eps, eta = constants.extraspecial_pair(gamma)
        br = mats[eps.coords] @ mats[eta.coords] - mats[eta.coords] @ mats[eps.coords]
        n = constants.pair(eps, eta)
        assert np.all(br % n == 0)
        mats[gamma.coords] = br // n
        neps, neta = system.negate(eps), system.negate(eta)
        br = mats[neps.coords] @ mats[neta.coords] - mats[neta.coords] @ mats[neps.coords]
        n = constants.pair(neps, neta)
        assert np.all(br % n == 0)
        mats[system.negate(gamma).coords] = br // n
    h_matrices = []
    for s in system.simple_roots:
        e, f = mats[s.coords], mats[system.negate(s).coords]
        h_matrices.append(e @ f - f @ e)
    towers = {c: _divided_tower(m) for c, m in mats.items()}
    rep = Representation(system, name, dim, towers, h_matrices)
    rep.verify_bracket_table(constants)
    return rep


def _natural_sl(system: RootSystem, constants) -> Representation:
    n = system.rank + 1
    seeds = {}
    for i, s in enumerate(system.simple_roots):
        e = np.zeros((n, n), dtype=np.int64)
        e[i, i + 1] = 1
        seeds[s.coords] = e
        seeds[system.negate(s).coords] = e.T.copy()
    return _from_seed_matrices(system, constants, f"natural-sl{n}", n, seeds)


def _natural_sp(system: RootSystem, constants) -> Representation:
    l = system.rank
    n = 2 * l

    def E(i, j):
        m = np.zeros((n, n), dtype=np.int64)
        m[i - 1, j - 1] = 1
        return m

    seeds = {}
    for i in range(1, l):  # alpha_i = eps_i - eps_{i+1}
        s = system.simple_roots[i - 1]
        seeds[s.coords] = E(i, i + 1) - E(n - i, n + 1 - i)
        seeds[system.negate(s).coords] = E(i + 1, i) - E(n + 1 - i, n - i)
    s = system.simple_roots[l - 1]  # alpha_l = 2 eps_l
    seeds[s.coords] = E(l, l + 1)
    seeds[system.negate(s).coords] = E(l + 1, l)
    return _from_seed_matrices(system, constants, f"natural-sp{n}", n, seeds)


def _adjoint(system: RootSystem, constants) -> Representation:
    l = system.rank
    dim = l + len(system.roots)
    root_index = {r.coords: l + k for k, r in enumerate(system.roots)}

    def ad(alpha: Root) -> np.ndarray:
        m = np.zeros((dim, dim), dtype=np.int64)
        row_alpha = root_index[alpha.coords]
        for i, simple in enumerate(system.simple_roots):
            m[row_alpha, i] = -system.pairing(alpha, simple)
        for b in system.roots:
            col = root_index[b.coords]
            if b.coords == tuple(-c for c in alpha.coords):
                for i, c in enumerate(system.coroot_coords(alpha)):
                    m[i, col] = c
            else:
                s = system.add(alpha, b)
                if s is not None:
                    m[root_index[s.coords], col] = constants.pair(alpha, b)
        return m

    towers = {r.coords: _divided_tower(ad(r)) for r in system.roots}
    h_matrices = []
    for i in range(l):
        h = np.zeros((dim, dim), dtype=np.int64)
        for b in system.roots:
            h[root_index[b.coords], root_index[b.coords]] = system.pairing(b, system.simple_roots[i])
        h_matrices.append(h)
    rep = AdjointRepresentation(system, f"adjoint-{system.name}", dim, towers, h_matrices)
    rep.root_index = root_index
    rep.verify_bracket_table(constants)
    return rep


class AdjointRepresentation(Representation):
    root_index: dict


_REP_CACHE: dict = {}


def representation_for(system: RootSystem) -> Representation:
    """Natural representation for A_l and C_l, adjoint otherwise."""
    key = system.name
    if key not in _REP_CACHE:
        constants = system.constants()
        if system.char == "A":
            _REP_CACHE[key] = _natural_sl(system, constants)
        elif system.char == "C":
            _REP_CACHE[key] = _natural_sp(system, constants)
        else:
            _REP_CACHE[key] = _adjoint_cached(system, constants)
    return _REP_CACHE[key]


def _adjoint_cached(system, constants):
    key = "adjoint:" + system.name
    if key not in _REP_CACHE:
        _REP_CACHE[key] = _adjoint(system, constants)
    return _REP_CACHE[key]


_PEEL_RING = PolyRing(("x", "y"), ())


def peel_commutator_constants(system: RootSystem, constants, a: Root, b: Root) -> dict:
    """Read the constants of [x_a(x), x_b(y)] = prod x_{ia+jb}(N x^i y^j) off
    the adjoint matrices, peeling factors in the (i+j, i) product order.

    At each stage the (h-row, column of e_{-gamma}) entry of the remaining
    product is exactly linear in the leading factor's parameter: any other
    contribution would need two remaining roots summing to gamma, which the
    strictly increasing (i+j)-grading rules out.
    """
    rep = _adjoint_cached(system, constants)
    X, Y = _PEEL_RING.var("x"), _PEEL_RING.var("y")
    D = poly_matmul(
        poly_matmul(rep.unipotent_poly(a, X), rep.unipotent_poly(b, Y)),
        poly_matmul(rep.unipotent_poly(a, -X), rep.unipotent_poly(b, -Y)),
    )
    row = {}
    for (i, j) in commutator_index_set(system, a, b):
        gamma = system.root(tuple(i * x + j * y for x, y in zip(a.coords, b.coords)))
        col = rep.root_index[system.negate(gamma).coords]
        coweights = system.coroot_coords(gamma)
        h_row = next(k for k, c in enumerate(coweights) if c != 0)
        entry = D[h_row, col]
        param = entry.exact_div_int(coweights[h_row])
        if param.is_zero:
            raise AssertionError(f"vanishing commutator factor at {gamma}")
        ((exps, coeff),) = param.terms.items()
        assert exps == (i, j), f"factor at {gamma} is not of bidegree {(i, j)}"
        row[(i, j)] = coeff
        D = poly_matmul(rep.unipotent_poly(gamma, -param), D)
    assert poly_mat_equal(D, poly_identity(_PEEL_RING, rep.dim)), "peel left a remainder"
    return row
