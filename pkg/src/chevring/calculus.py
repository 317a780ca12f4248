"""Certificate-producing conjugation and commutator rewriting for root
unipotents with denominators.

Parameters live in Z[s, t, markers] localised at s and t.  A level (p, q)
means "divisible by s^p t^q with no denominator left"; an ideal marker is
a designated variable every monomial of a parameter must carry.  Each
public operation plans exponent budgets, rewrites its input into a word
of level generators, and checks the rewrite against the input in a
faithful representation: exact polynomial matrices for words of moderate
size, and otherwise evaluation at several random modular points, which
is decisive up to an error probability far below the degrees involved.

The planner formulas for the non-opposite cases are exact; the opposite
cases extract the target generator from a commutator with a unit
structure constant, splitting the parameter into explicit monomial
pieces, and their budgets come from deterministic searches that are
memoized and monotonized in (p, q).
"""

from __future__ import annotations

import random
import time
from dataclasses import asdict, dataclass, field

from .errors import BudgetTooSmall, OppositeOrEqual, UnsupportedLacing
from .groups import evaluate, evaluate_poly
from .poly import Poly, PolyRing, level_membership, marker_membership, standard_ring
from .reps import poly_mat_equal, representation_for
from .rings import Zmod
from .roots import Root, RootSystem, commutator_index_set
from .words import Generator, Word, chevalley_commutator

CONJUGATE_BOUND = 24

# worst-case single-commutator lengths by lacing class
_CRUDE_SINGLE = {1: 585, 2: 61882, 3: 797647204}

# words longer than this skip the polynomial oracle for the modular one
ORACLE_POLY_LIMIT = 600

_SPOT_PRIME = 805_306_457  # 14 * (P-1)^2 still fits in a signed 64-bit matmul
_SPOT_TRIALS = 3

_SEARCH_MULTIPLIERS = (
    1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256,
    384, 512, 768, 1024, 1536, 2048, 3072, 4096,
)

PLANNED_OPS = (
    "conjugate_single",
    "commutator_single",
    "relative_conjugate",
    "relative_commutator",
)


def crude_single_bound(system: RootSystem) -> int:
    return _CRUDE_SINGLE[system.lacing]


def conjugate_word_base(system: RootSystem) -> int:
    """Per-factor base of the conjugate-word length bound base^L * K."""
    if system.is_simply_laced or system.char == "F":
        return 8
    return 24 if system.char == "G" else 13


def split_factor(system: RootSystem) -> int:
    """How many monomial pieces an opposite-root extraction consumes.

    Extraction sits at index (i0, 1) of a commutator row with a unit
    constant; doubly laced long roots force i0 = 2, everything else
    admits i0 = 1, and the budget multiplies by i0 + 1.
    """
    return 3 if system.lacing == 2 else 2


@dataclass(frozen=True)
class ExponentBudget:
    """Numerator exponents sufficient for one rewriting operation.

    (p, q) is the divisibility target; h, k, m are the given denominator
    exponents; o, r, l, n are the planned numerator exponents (which of
    them is set depends on the operation).
    """

    op: str
    system: str
    p: int
    q: int
    h: int = 0
    k: int = 0
    m: int = 0
    o: int | None = None
    r: int | None = None
    l: int | None = None
    n: int | None = None
    opposite: bool = False

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass
class RewriteCertificate:
    """What one rewriting operation established, with the evidence attached.

    output_word is the complete rewritten word; nothing is certified by
    bound arithmetic alone.  achieved_level is ("level", p, q) for plain
    divisibility and ("relative", p, q, markers...) for marked outputs.
    """

    op: str
    system: str
    case: str
    budget: object
    input_description: str
    input_word: Word
    output_word: Word
    achieved_level: tuple
    bound: int | None
    oracle_checked: bool = False
    oracle_kind: str = "polynomial"
    relative_output: object = None
    extras: dict = field(default_factory=dict, repr=False)

    @property
    def length(self) -> int:
        return len(self.output_word)

    def to_json(self) -> dict:
        budget = (
            self.budget.to_json()
            if isinstance(self.budget, ExponentBudget)
            else dict(self.budget)
        )
        return {
            "lemma": self.op,
            "system": self.system,
            "case": self.case,
            "budget": budget,
            "level": list(self.achieved_level),
            "length": self.length,
            "bound": self.bound,
            "oracle_checked": self.oracle_checked,
        }


# --------------------------------------------------------------------------
# oracle


def _oracle(system: RootSystem, lhs: Word, rhs: Word) -> str:
    """Prove lhs = rhs in a faithful representation; returns the oracle kind.

    Raises AssertionError on mismatch: a failed oracle is a bug in the
    construction, never a recoverable condition.
    """
    rep = representation_for(system)
    if len(lhs) + len(rhs) <= ORACLE_POLY_LIMIT:
        assert poly_mat_equal(
            evaluate_poly(rep, lhs), evaluate_poly(rep, rhs)
        ), "polynomial oracle rejected the rewrite"
        return "polynomial"
    ring = lhs.ring
    zp = Zmod(_SPOT_PRIME)
    rng = random.Random(1000003 * len(lhs) + len(rhs))
    for _ in range(_SPOT_TRIALS):
        assignment = {v: rng.randrange(1, _SPOT_PRIME) for v in ring.variables}
        sides = []
        for word in (lhs, rhs):
            vals = [
                Generator(g.root, g.param.evaluate(zp, assignment)) for g in word
            ]
            sides.append(evaluate(rep, Word(zp, vals)))
        assert sides[0] == sides[1], "modular oracle rejected the rewrite"
    return "modular"


def _level_require(gens, p: int, q: int) -> None:
    for g in gens:
        if not level_membership(g.param, p, q):
            raise BudgetTooSmall(
                f"factor x[{list(g.root.coords)}]({g.param!r}) misses level ({p},{q})"
            )


def _inv_gens(gens) -> list:
    return [Generator(g.root, -g.param) for g in reversed(gens)]


def _den_profile(param: Poly) -> tuple[int, int]:
    """(s, t) denominator exponents of a parameter."""
    ds = dict(zip(param.ring.inverted, param.den))
    return ds.get("s", 0), ds.get("t", 0)


# --------------------------------------------------------------------------
# opposite-root extraction

_EXTRACT_CACHE: dict = {}


def extraction_candidates(system: RootSystem, beta: Root) -> tuple:
    """All (gamma, delta, i0) with i0*gamma + delta = beta and a unit
    structure constant at index (i0, 1), in deterministic order."""
    key = (system.name, beta.coords)
    hit = _EXTRACT_CACHE.get(key)
    if hit is not None:
        return hit
    constants = system.constants()
    neg_beta = system.negate(beta)
    out = []
    for gamma in system.roots:
        if gamma in (beta, neg_beta):
            continue
        for i0 in (1, 2, 3):
            coords = tuple(b - i0 * g for g, b in zip(gamma.coords, beta.coords))
            if not system.is_root(coords):
                continue
            delta = system.root(coords)
            if delta.coords == gamma.coords or delta == system.negate(gamma):
                continue
            if delta in (beta, neg_beta):
                continue
            row = constants.comm_row(gamma, delta)
            if abs(row.get((i0, 1), 0)) != 1:
                continue
            out.append((gamma, delta, i0))
    out.sort(key=lambda c: (c[2], c[0].order_key))
    result = tuple(out)
    _EXTRACT_CACHE[key] = result
    return result


def _extraction_word(system, ring, beta, M, u, v, gamma, delta, i0):
    """x_beta(M) written as prefix^-1 . [x_gamma(u), x_delta(v)] . suffix^-1.

    The commutator formula word for (gamma, delta) contains x_beta(M) at
    slot (i0, 1); peeling the other factors off both sides isolates it.
    Returns (prefix_gens, middle_pair, suffix_gens) where middle_pair is
    (Generator(gamma, u), Generator(delta, v)).
    """
    constants = system.constants()
    row = constants.comm_row(gamma, delta)
    order = commutator_index_set(system, gamma, delta)
    prefix, suffix, seen = [], [], False
    for i, j in order:
        coords = tuple(i * g + j * d for g, d in zip(gamma.coords, delta.coords))
        param = (u**i) * (v**j) * row[(i, j)]
        if (i, j) == (i0, 1):
            assert param == M, "extraction slot must reproduce the parameter"
            seen = True
            continue
        if param.is_zero:
            continue
        (suffix if seen else prefix).append(Generator(system.root(coords), param))
    assert seen
    return prefix, (Generator(gamma, u), Generator(delta, v)), suffix


# --------------------------------------------------------------------------
# single-generator conjugation

def _conj_gen(system, ring, w_root, w_param, z: Generator, p: int, q: int) -> list:
    """Word for w z w^-1 at level (p, q); w may carry denominators, z is a
    level generator."""
    if z.root.coords == w_root.coords:
        out = [z]
        _level_require(out, p, q)
        return out
    if z.root == system.negate(w_root):
        return _conj_opposite(system, ring, w_root, w_param, z, p, q)
    comm = chevalley_commutator(system, w_root, z.root, w_param, z.param, ring)
    out = list(comm.factors) + [z]
    _level_require(out, p, q)
    return out


def _conj_gen_list(system, ring, w_root, w_param, gens, p: int, q: int) -> list:
    out = []
    for z in gens:
        out.extend(_conj_gen(system, ring, w_root, w_param, z, p, q))
    return out


def _conj_opposite(system, ring, w_root, w_param, z: Generator, p: int, q: int) -> list:
    """Conjugation across an opposite pair.

    z sits at -w_root with a clean parameter M.  Rewrite z as
    prefix^-1 [x_gamma(u), x_delta(v)] suffix^-1 with u a plain monomial
    and v = M/(N u^{i0}); every root in sight is neither w_root nor its
    opposite, so conjugating the pieces falls back to the easy cases.
    The shortest candidate wins; ties keep the enumeration order.
    """
    ds, dt = _den_profile(w_param)
    iphi = system.lacing
    o1 = iphi * ds + p + 1
    r1 = iphi * dt + q
    M = z.param
    best = None
    for gamma, delta, i0 in extraction_candidates(system, z.root):
        if M.numerator_min_power("s") < (i0 + 1) * o1:
            continue
        if M.numerator_min_power("t") < (i0 + 1) * r1:
            continue
        if M.has_denominator:
            continue
        constants = system.constants()
        n11 = constants.comm_row(gamma, delta)[(i0, 1)]
        u = ring.monomial(1, s=o1, t=r1)
        v = M * ring.monomial(n11, s=-i0 * o1, t=-i0 * r1)
        prefix, (gu, gv), suffix = _extraction_word(
            system, ring, z.root, M, u, v, gamma, delta, i0
        )
        out = []
        for g in _inv_gens(prefix):
            out.extend(_conj_gen(system, ring, w_root, w_param, g, p, q))
        a_side = _conj_gen(system, ring, w_root, w_param, gu, p, q)
        b_side = _conj_gen(system, ring, w_root, w_param, gv, p, q)
        out.extend(a_side + b_side + _inv_gens(a_side) + _inv_gens(b_side))
        for g in _inv_gens(suffix):
            out.extend(_conj_gen(system, ring, w_root, w_param, g, p, q))
        if best is None or len(out) < len(best):
            best = out
    if best is None:
        raise BudgetTooSmall(
            f"no unit extraction of {z.root} splits {M!r} "
            f"against denominators (s^{ds}, t^{dt}) at level ({p},{q})"
        )
    return best


# --------------------------------------------------------------------------
# opposite-root commutation

def _comm_head(system, ring, alpha, xi, w: Generator, p: int, q: int) -> list:
    if w.root.coords == alpha.coords:
        return []
    comm = chevalley_commutator(system, alpha, w.root, xi, w.param, ring)
    out = list(comm.factors)
    _level_require(out, p, q)
    return out


def _comm_fold(system, ring, alpha, xi, ws, p: int, q: int) -> list:
    """[x, w_1 ... w_T] = [x, w_1] . conj_{w_1}([x, w_2 ... w_T]).

    The tail is built at whatever level the w_1-conjugation consumes.
    When the tail stays clear of the root opposite to w_1 the shifted
    level (p + i_Phi ds, q + i_Phi dt) is enough; if conjugation then
    hits an opposite pair it needs extraction headroom, so the tail is
    rebuilt once at the split-safe level before giving up.
    """
    if not ws:
        return []
    w = ws[0]
    ds, dt = _den_profile(w.param)
    iphi = system.lacing
    f = split_factor(system)
    head = _comm_head(system, ring, alpha, xi, w, p, q)
    levels = (
        (p + iphi * ds, q + iphi * dt),
        (f * (iphi * ds + p + 1), f * (iphi * dt + q)),
    )
    for attempt, (pp, qq) in enumerate(levels):
        try:
            tail = _comm_fold(system, ring, alpha, xi, ws[1:], pp, qq)
            return head + _conj_gen_list(system, ring, w.root, w.param, tail, p, q)
        except BudgetTooSmall:
            if attempt:
                raise
    raise AssertionError("unreachable")


def _commutator_opposite(system, ring, alpha, xi, zeta, p: int, q: int) -> tuple:
    """[x_alpha(xi), x_{-alpha}(zeta)] at level (p, q).

    zeta is rewritten as a word W in non-opposite generators (extraction
    with the s-clean piece u pure, so only v inherits the t-denominator),
    then the commutator folds over W one factor at a time.  Returns
    (gens, (gamma, delta, i0)) for the winning candidate.
    """
    beta = system.negate(alpha)
    n_s = zeta.numerator_min_power("s")
    best = None
    for gamma, delta, i0 in extraction_candidates(system, beta):
        n_u = n_s // (i0 + 1)
        constants = system.constants()
        n11 = constants.comm_row(gamma, delta)[(i0, 1)]
        u = ring.monomial(1, s=n_u)
        v = zeta * ring.monomial(n11, s=-i0 * n_u)
        try:
            prefix, (gu, gv), suffix = _extraction_word(
                system, ring, beta, zeta, u, v, gamma, delta, i0
            )
            ws = (
                _inv_gens(prefix)
                + [gu, gv, Generator(gamma, -u), Generator(delta, -v)]
                + _inv_gens(suffix)
            )
            gens = _comm_fold(system, ring, alpha, xi, ws, p, q)
        except BudgetTooSmall:
            continue
        if best is None or len(gens) < len(best[0]):
            best = (gens, (gamma, delta, i0))
    if best is None:
        raise BudgetTooSmall(
            f"opposite commutation at {alpha} needs a larger budget than "
            f"{zeta!r} provides for level ({p},{q})"
        )
    return best


# --------------------------------------------------------------------------
# planner

_L5_SEARCH_MEMO: dict = {}
_L5_PLAN_MEMO: dict = {}


def _class_representatives(system: RootSystem) -> list:
    reps = {}
    for r in system.roots:
        reps.setdefault(r.length_class, r)
    return list(reps.values())


def _search_opposite_commutator(system, p, q, k, m) -> tuple[int, int]:
    key = (system.name, p, q, k, m)
    hit = _L5_SEARCH_MEMO.get(key)
    if hit is not None:
        return hit
    ring = standard_ring()
    iphi = system.lacing
    for mult in _SEARCH_MULTIPLIERS:
        l = mult * (iphi * m + q + 1)
        n = mult * (iphi * k + p + 1)
        ok = True
        for alpha in _class_representatives(system):
            xi = ring.monomial(1, a=1, t=l, s=-k)
            zeta = ring.monomial(1, b=1, s=n, t=-m)
            try:
                _commutator_opposite(system, ring, alpha, xi, zeta, p, q)
            except BudgetTooSmall:
                ok = False
                break
        if ok:
            _L5_SEARCH_MEMO[key] = (l, n)
            return l, n
    raise BudgetTooSmall(
        f"opposite commutation in {system.name} found no budget up to "
        f"{_SEARCH_MULTIPLIERS[-1]}x the non-opposite formulas"
    )


def _plan_opposite_commutator(system, p, q, k, m) -> tuple[int, int]:
    """Searched budget, monotonized over (p, q) by running maxima."""
    key = (system.name, p, q, k, m)
    hit = _L5_PLAN_MEMO.get(key)
    if hit is not None:
        return hit
    l, n = _search_opposite_commutator(system, p, q, k, m)
    if p:
        l0, n0 = _plan_opposite_commutator(system, p - 1, q, k, m)
        l, n = max(l, l0), max(n, n0)
    if q:
        l0, n0 = _plan_opposite_commutator(system, p, q - 1, k, m)
        l, n = max(l, l0), max(n, n0)
    _L5_PLAN_MEMO[key] = (l, n)
    return l, n


def plan_exponents(
    op: str,
    system: RootSystem,
    p: int,
    q: int,
    h: int = 0,
    k: int = 0,
    m: int = 0,
    opposite: bool = False,
    minimize: bool = False,
) -> ExponentBudget:
    """Numerator exponents that let `op` reach level (p, q).

    Non-opposite conjugation and commutation use the exact formulas
    (o = i_Phi*h + p + 1, r = q and l = i_Phi*m + q + 1, n = i_Phi*k + p + 1);
    opposite cases multiply by the extraction split or search upward.
    The relative planners return safe defaults inflated by the split
    factor; they never read ideal markers, so their output cannot depend
    on the ideals.  minimize=True binary-searches the relative budgets
    downward against the actual construction and reports the empirical
    minimum (no monotonicity promise on that path).
    """
    for name, val in (("p", p), ("q", q), ("h", h), ("k", k), ("m", m)):
        if not isinstance(val, int) or val < 0:
            raise ValueError(f"{name} must be a nonnegative integer, got {val!r}")
    if op not in PLANNED_OPS:
        raise ValueError(f"no planner for {op!r}; one of {PLANNED_OPS}")
    iphi = system.lacing
    if op == "conjugate_single":
        if opposite:
            f = split_factor(system)
            o, r = f * (iphi * h + p + 1), f * q
        else:
            o, r = iphi * h + p + 1, q
        return ExponentBudget(op, system.name, p, q, h=h, o=o, r=r, opposite=opposite)
    if op == "commutator_single":
        if opposite:
            l, n = _plan_opposite_commutator(system, p, q, k, m)
        else:
            l, n = iphi * m + q + 1, iphi * k + p + 1
        return ExponentBudget(op, system.name, p, q, k=k, m=m, l=l, n=n, opposite=opposite)
    if op == "relative_conjugate":
        f = split_factor(system)
        h_out, m_out = f * (iphi * k + p + 1), f * q
        if minimize:
            h_out = _binary_search_min(
                0, h_out, lambda v: _probe_relative_conjugate(system, k, p, q, v, m_out)
            )
            m_out = _binary_search_min(
                0, m_out, lambda v: _probe_relative_conjugate(system, k, p, q, h_out, v)
            )
        return ExponentBudget(op, system.name, p, q, k=k, h=h_out, m=m_out)
    # relative_commutator
    l = 2 * (iphi * m + q + 1)
    n = 2 * (iphi * k + p + 1)
    if minimize:
        n = _binary_search_min(
            0, n, lambda v: _probe_relative_commutator(system, k, m, p, q, l, v)
        )
        l = _binary_search_min(
            0, l, lambda v: _probe_relative_commutator(system, k, m, p, q, v, n)
        )
    return ExponentBudget(op, system.name, p, q, k=k, m=m, l=l, n=n, opposite=opposite)


def _binary_search_min(lo: int, hi: int, ok) -> int:
    """Smallest v in [lo, hi] with ok(v); assumes ok(hi) holds."""
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


# --------------------------------------------------------------------------
# public operations: conjugation

def conjugate_single(
    system: RootSystem,
    x_root: Root,
    y_root: Root,
    h: int = 1,
    p: int = 1,
    q: int = 1,
    budget: ExponentBudget | None = None,
) -> RewriteCertificate:
    """Rewrite x y x^-1 at level (p, q) for x = x_{x_root}(a/s^h) and
    y = x_{y_root}(s^o t^r b).

    Same root commutes (length 1), non-opposite roots append the
    commutator formula (length <= 5), and the opposite pair goes through
    extraction.  Length never exceeds 24.
    """
    opposite = y_root == system.negate(x_root)
    if budget is None:
        budget = plan_exponents("conjugate_single", system, p, q, h=h, opposite=opposite)
    ring = standard_ring()
    xi = ring.monomial(1, a=1, s=-h)
    M = ring.monomial(1, b=1, s=budget.o, t=budget.r)
    x = Generator(x_root, xi)
    y = Generator(y_root, M)
    if y_root.coords == x_root.coords:
        case = "same-root"
        gens = [y]
        _level_require(gens, p, q)
    elif opposite:
        case = "opposite"
        gens = _conj_opposite(system, ring, x_root, xi, y, p, q)
    else:
        case = "non-opposite"
        gens = _conj_gen(system, ring, x_root, xi, y, p, q)
    lhs = Word(ring, [x, y, Generator(x_root, -xi)])
    out = Word(ring, gens, ("level", p, q))
    assert out.check_level()
    assert len(out) <= CONJUGATE_BOUND
    cert = RewriteCertificate(
        op="conjugate_single",
        system=system.name,
        case=case,
        budget=budget,
        input_description=f"{x.line()} . {y.line()} . inverse",
        input_word=lhs,
        output_word=out,
        achieved_level=("level", p, q),
        bound=CONJUGATE_BOUND,
    )
    cert.oracle_kind = _oracle(system, lhs, out)
    cert.oracle_checked = True
    return cert


def conjugate_word(
    system: RootSystem,
    x_spec: list,
    y_roots: list,
    p: int = 1,
    q: int = 1,
) -> RewriteCertificate:
    """Conjugate a level word by a word of denominatored generators.

    x_spec is a list of (root, h) pairs, outermost first, each standing
    for x_root(a_f / s^h); y_roots lists the roots of the level word
    being conjugated.  Levels are scheduled per layer so the innermost
    conjugation output already carries what the next layer consumes.
    """
    L, K = len(x_spec), len(y_roots)
    names = (
        ("s", "t")
        + tuple(f"a{i + 1}" for i in range(L))
        + tuple(f"b{j + 1}" for j in range(K))
    )
    ring = PolyRing(names, ("s", "t"))
    iphi = system.lacing
    f = split_factor(system)
    schedule = [(p, q)]
    for root, h in reversed(x_spec):  # schedule[i] is the level after layer L-i
        pp, qq = schedule[-1]
        schedule.append((f * (iphi * h + pp + 1), f * qq))
    schedule.reverse()  # schedule[0] = y level, schedule[L] = (p, q)
    y_level = schedule[0]
    x_gens = [
        Generator(root, ring.monomial(1, **{f"a{i + 1}": 1, "s": -h}))
        for i, (root, h) in enumerate(x_spec)
    ]
    cur = [
        Generator(root, ring.monomial(1, **{f"b{j + 1}": 1, "s": y_level[0], "t": y_level[1]}))
        for j, root in enumerate(y_roots)
    ]
    lhs_gens = list(x_gens) + list(cur)
    lhs_gens += [Generator(g.root, -g.param) for g in reversed(x_gens)]
    lhs = Word(ring, lhs_gens)
    for i in range(L - 1, -1, -1):  # innermost layer first
        pp, qq = schedule[i + 1]
        w = x_gens[i]
        cur = _conj_gen_list(system, ring, w.root, w.param, cur, pp, qq)
    out = Word(ring, cur, ("level", p, q))
    assert out.check_level()
    bound = conjugate_word_base(system) ** L * max(K, 1)
    assert len(out) <= bound
    cert = RewriteCertificate(
        op="conjugate_word",
        system=system.name,
        case=f"layers={L}",
        budget={"schedule": [list(s) for s in schedule], "p": p, "q": q},
        input_description=f"{L}-fold conjugation of a {K}-generator level word",
        input_word=lhs,
        output_word=out,
        achieved_level=("level", p, q),
        bound=bound,
    )
    cert.oracle_kind = _oracle(system, lhs, out)
    cert.oracle_checked = True
    return cert


# --------------------------------------------------------------------------
# public operations: commutators

def commutator_single(
    system: RootSystem,
    x_root: Root,
    y_root: Root,
    k: int = 1,
    m: int = 1,
    p: int = 1,
    q: int = 1,
    budget: ExponentBudget | None = None,
) -> RewriteCertificate:
    """Rewrite [x_{x_root}(t^l a / s^k), x_{y_root}(s^n b / t^m)] at level
    (p, q).

    Equal roots commute; non-opposite pairs are one application of the
    commutator formula (length <= 4); the opposite pair decomposes the
    second argument and folds, staying under the crude bound for the
    lacing class.
    """
    opposite = y_root == system.negate(x_root)
    if budget is None:
        budget = plan_exponents(
            "commutator_single", system, p, q, k=k, m=m, opposite=opposite
        )
    ring = standard_ring()
    xi = ring.monomial(1, a=1, t=budget.l, s=-k)
    zeta = ring.monomial(1, b=1, s=budget.n, t=-m)
    x = Generator(x_root, xi)
    y = Generator(y_root, zeta)
    extras = {}
    if y_root.coords == x_root.coords:
        case = "same-root"
        gens = []
        bound = 0
    elif opposite:
        case = "opposite"
        gens, chosen = _commutator_opposite(system, ring, x_root, xi, zeta, p, q)
        extras["extraction"] = {
            "gamma": list(chosen[0].coords),
            "delta": list(chosen[1].coords),
            "i0": chosen[2],
        }
        bound = crude_single_bound(system)
    else:
        case = "non-opposite"
        comm = chevalley_commutator(system, x_root, y_root, xi, zeta, ring)
        gens = list(comm.factors)
        _level_require(gens, p, q)
        bound = 4
    lhs = Word(ring, [x, y, Generator(x_root, -xi), Generator(y_root, -zeta)])
    out = Word(ring, gens, ("level", p, q))
    assert out.check_level()
    assert len(out) <= bound or case == "same-root"
    cert = RewriteCertificate(
        op="commutator_single",
        system=system.name,
        case=case,
        budget=budget,
        input_description=f"[{x.line()}, {y.line()}]",
        input_word=lhs,
        output_word=out,
        achieved_level=("level", p, q),
        bound=bound,
        extras=extras,
    )
    cert.oracle_kind = _oracle(system, lhs, out)
    cert.oracle_checked = True
    return cert


def commutator_general(
    system: RootSystem,
    x_root: Root,
    y_roots: list,
    k: int = 1,
    p: int = 1,
    q: int = 1,
) -> RewriteCertificate:
    """[x, y_1 ... y_K] as the product of conjugated single commutators.

    [x, y_1 ... y_K] = prod_i (y_1..y_{i-1}) [x, y_i] (y_1..y_{i-1})^-1;
    the conjugators are level generators and are emitted literally, so
    each piece costs 2(i-1) plus a single-commutator length, total under
    (L+1)^K - 1 for L the crude single bound.
    """
    K = len(y_roots)
    names = ("s", "t", "a") + tuple(f"b{j + 1}" for j in range(K))
    ring = PolyRing(names, ("s", "t"))
    budgets = [
        plan_exponents(
            "commutator_single",
            system,
            p,
            q,
            k=k,
            m=0,
            opposite=(root == system.negate(x_root)),
        )
        for root in y_roots
    ]
    l = max((b.l for b in budgets), default=q + 1)
    xi = ring.monomial(1, a=1, t=l, s=-k)
    x = Generator(x_root, xi)
    ys = [
        Generator(root, ring.monomial(1, **{f"b{j + 1}": 1, "s": budgets[j].n, "t": q}))
        for j, root in enumerate(y_roots)
    ]
    gens = []
    for i, y in enumerate(ys):
        if y.root.coords == x_root.coords:
            piece = []
        elif y.root == system.negate(x_root):
            piece, _ = _commutator_opposite(system, ring, x_root, xi, y.param, p, q)
        else:
            comm = chevalley_commutator(system, x_root, y.root, xi, y.param, ring)
            piece = list(comm.factors)
            _level_require(piece, p, q)
        if not piece:
            continue
        prefix = ys[:i]
        gens.extend(prefix)
        gens.extend(piece)
        gens.extend(_inv_gens(prefix))
    lhs_gens = [x] + ys + [Generator(x_root, -xi)] + _inv_gens(ys)
    lhs = Word(ring, lhs_gens)
    out = Word(ring, gens, ("level", p, q))
    assert out.check_level()
    bound = (crude_single_bound(system) + 1) ** K - 1 if K else 0
    assert len(out) <= bound or K == 0
    cert = RewriteCertificate(
        op="commutator_general",
        system=system.name,
        case=f"K={K}",
        budget={"l": l, "k": k, "pieces": [b.to_json() for b in budgets]},
        input_description=f"[{x.line()}, product of {K} level generators]",
        input_word=lhs,
        output_word=out,
        achieved_level=("level", p, q),
        bound=bound,
    )
    cert.oracle_kind = _oracle(system, lhs, out)
    cert.oracle_checked = True
    return cert


# --------------------------------------------------------------------------
# relative words

@dataclass(frozen=True)
class RelativeFactor:
    """One conjugate C x_root(marked) C^-1 with the conjugator explicit."""

    conjugator: tuple
    core: Generator


class RelativeWord:
    """Product of conjugates of marked generators, the shape relative
    subgroup elements take.  Cores must carry the ideal marker and the
    divisibility level; conjugators only the divisibility."""

    __slots__ = ("ring", "marker", "factors")

    def __init__(self, ring, marker: str, factors):
        self.ring = ring
        self.marker = marker
        self.factors = tuple(factors)

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)

    def flatten(self) -> Word:
        gens = []
        for f in self.factors:
            gens.extend(f.conjugator)
            gens.append(f.core)
            gens.extend(_inv_gens(list(f.conjugator)))
        return Word(self.ring, gens)

    def check(self, p: int, q: int) -> bool:
        for f in self.factors:
            if not marker_membership(f.core.param, self.marker):
                return False
            if not level_membership(f.core.param, p, q):
                return False
            for g in f.conjugator:
                if not level_membership(g.param, p, q):
                    return False
        return True

    def __repr__(self) -> str:
        return f"RelativeWord<{self.marker}>({len(self.factors)} factors)"


def relative_generator(ring, root: Root, param: Poly, marker: str) -> RelativeWord:
    return RelativeWord(ring, marker, [RelativeFactor((), Generator(root, param))])


def _marked_level_require(gens, marker: str, p: int, q: int) -> None:
    _level_require(gens, p, q)
    for g in gens:
        if not marker_membership(g.param, marker):
            raise BudgetTooSmall(
                f"factor x[{list(g.root.coords)}]({g.param!r}) lost the "
                f"{marker!r} marker"
            )


def _core_expand_opposite(system, ring, x_root, k_den, core, p, q, marker):
    """Extraction of a marked core at the root opposite to the conjugating
    generator: returns relative factors whose cores keep the marker and
    whose conjugators are plain."""
    iphi = system.lacing
    o1 = iphi * k_den + p + 1
    r1 = q
    M = core.param
    constants = system.constants()
    best = None
    for gamma, delta, i0 in extraction_candidates(system, core.root):
        if M.numerator_min_power("s") < (i0 + 1) * o1:
            continue
        if M.numerator_min_power("t") < (i0 + 1) * r1:
            continue
        n11 = constants.comm_row(gamma, delta)[(i0, 1)]
        u = ring.monomial(1, s=o1, t=r1)
        v = M * ring.monomial(n11, s=-i0 * o1, t=-i0 * r1)
        prefix, (gu, gv), suffix = _extraction_word(
            system, ring, core.root, M, u, v, gamma, delta, i0
        )
        factors = []
        for g in _inv_gens(prefix):
            factors.append(RelativeFactor((), g))
        factors.append(RelativeFactor((gu,), gv))
        factors.append(RelativeFactor((), Generator(gv.root, -gv.param)))
        for g in _inv_gens(suffix):
            factors.append(RelativeFactor((), g))
        try:
            for f in factors:
                _marked_level_require([f.core], marker, p, q)
        except BudgetTooSmall:
            continue
        size = sum(2 * len(f.conjugator) + 1 for f in factors)
        if best is None or size < best[0]:
            best = (size, factors)
    if best is None:
        raise BudgetTooSmall(
            f"no unit extraction splits the marked core {M!r} at level ({p},{q})"
        )
    return best[1]


def relative_conjugate(
    system: RootSystem,
    x_root: Root,
    relword: RelativeWord,
    k: int = 1,
    p: int = 1,
    q: int = 1,
    budget: ExponentBudget | None = None,
    x_param: Poly | None = None,
) -> RewriteCertificate:
    """Conjugate a relative word by x_{x_root}(c/s^k), keeping the output
    relative: cores stay marked, conjugators stay plain level words.

    x (C g C^-1) x^-1 = (xC) (x g x^-1) (xC)^-1 and x g x^-1 expands to
    marked generators (corrections inherit the core's marker because
    every correction parameter contains a positive power of it).  The
    planner never reads the marker, so budgets cannot depend on the
    ideal.  A zero x parameter leaves the input unchanged.
    """
    marker = relword.marker
    if budget is None:
        budget = plan_exponents("relative_conjugate", system, p, q, k=k)
    ring = relword.ring
    if x_param is None:
        other = "b" if marker == "a" else "a"
        x_param = ring.monomial(1, **{other: 1, "s": -k})
    if x_param.is_zero:
        out_rel = relword
        case = "trivial"
        if not out_rel.check(p, q):
            raise BudgetTooSmall("input relative word already misses the target level")
        lhs = relword.flatten()
    else:
        x = Generator(x_root, x_param)
        out_factors = []
        for f in relword.factors:
            conj = tuple(
                _conj_gen_list(system, ring, x_root, x_param, list(f.conjugator), p, q)
            )
            core = f.core
            if core.root.coords == x_root.coords:
                pieces = [RelativeFactor(conj, core)]
                _marked_level_require([core], marker, p, q)
            elif core.root == system.negate(x_root):
                inner = _core_expand_opposite(
                    system, ring, x_root, k, core, p, q, marker
                )
                pieces = []
                for g in inner:
                    lifted = tuple(
                        _conj_gen_list(system, ring, x_root, x_param, list(g.conjugator), p, q)
                    )
                    expanded = _conj_gen(system, ring, x_root, x_param, g.core, p, q)
                    _marked_level_require(expanded, marker, p, q)
                    pieces.extend(
                        RelativeFactor(conj + lifted, e) for e in expanded
                    )
            else:
                comm = chevalley_commutator(
                    system, x_root, core.root, x_param, core.param, ring
                )
                expanded = list(comm.factors) + [core]
                _marked_level_require(expanded, marker, p, q)
                pieces = [RelativeFactor(conj, e) for e in expanded]
            out_factors.extend(pieces)
        out_rel = RelativeWord(ring, marker, out_factors)
        assert out_rel.check(p, q)
        case = "opposite" if any(
            f.core.root == system.negate(x_root) for f in relword.factors
        ) else "non-opposite"
        inner_word = relword.flatten()
        lhs = Word(ring, [x] + list(inner_word) + [Generator(x_root, -x_param)])
    out = out_rel.flatten().with_level(None)
    cert = RewriteCertificate(
        op="relative_conjugate",
        system=system.name,
        case=case,
        budget=budget,
        input_description=(
            f"conjugation of a {len(relword)}-factor relative word "
            f"(marker {marker!r}) by x[{list(x_root.coords)}]({x_param!r})"
        ),
        input_word=lhs,
        output_word=out,
        achieved_level=("relative", p, q, marker),
        bound=None,
        relative_output=out_rel,
    )
    cert.oracle_kind = _oracle(system, lhs, out)
    cert.oracle_checked = True
    return cert


def relative_commutator(
    system: RootSystem,
    x_root: Root,
    y_root: Root,
    k: int = 1,
    m: int = 1,
    p: int = 1,
    q: int = 1,
    budget: ExponentBudget | None = None,
    x_param: Poly | None = None,
    y_param: Poly | None = None,
) -> RewriteCertificate:
    """Certify [x_{x_root}((t^l/s^k) a), x_{y_root}((s^n/t^m) b)] as a
    product of brackets of relative words, one marked per ideal.

    Non-opposite pairs whose commutator is a single unit-coefficient
    factor become one bracket of proper marked generators whose
    parameters split the exponents.  Other chain shapes cannot be
    reproduced by proper brackets (the extraction routes cycle) and
    raise UnsupportedLacing.  The opposite pair certifies the auxiliary
    containment its induction actually consumes: with g carrying the
    denominators and commuting with the marked generator U at x_root,
    g [U, y'] g^-1 = [U, g y' g^-1], and the right side is a bracket of
    a proper marked generator with a relative_conjugate output.
    """
    opposite = y_root == system.negate(x_root)
    if budget is None:
        budget = plan_exponents(
            "relative_commutator", system, p, q, k=k, m=m, opposite=opposite
        )
    ring = standard_ring()
    if x_param is None:
        x_param = ring.monomial(1, a=1, t=budget.l, s=-k)
    if y_param is None:
        y_param = ring.monomial(1, b=1, s=budget.n, t=-m)
    x = Generator(x_root, x_param)
    y = Generator(y_root, y_param)
    lhs = Word(
        ring, [x, y, Generator(x_root, -x_param), Generator(y_root, -y_param)]
    )
    pairs: list = []
    extras: dict = {}
    if x_param.is_zero or y_param.is_zero or y_root.coords == x_root.coords:
        case = "trivial" if (x_param.is_zero or y_param.is_zero) else "same-root"
        out = Word(ring, ())
    elif opposite:
        case = "opposite"
        sub_budget = plan_exponents("relative_conjugate", system, p, q, k=k)
        g_param = ring.monomial(1, t=budget.l, s=-k)
        u_gen = Generator(x_root, ring.monomial(1, a=1, s=p, t=q))
        nu = ring.monomial(1, b=1, s=sub_budget.h, t=sub_budget.m)
        y_prime = relative_generator(ring, y_root, nu, "b")
        sub = relative_conjugate(
            system, x_root, y_prime, k=k, p=p, q=q, budget=sub_budget, x_param=g_param
        )
        v_rel = sub.relative_output
        u_rel = RelativeWord(ring, "a", [RelativeFactor((), u_gen)])
        pairs.append((u_rel, v_rel))
        flat_v = v_rel.flatten()
        out = Word(
            ring,
            [u_gen]
            + list(flat_v)
            + [Generator(u_gen.root, -u_gen.param)]
            + list(flat_v.inverse()),
        )
        # the certified input: g [U, y'] g^-1 with [g, U] = 1
        lhs = Word(
            ring,
            [Generator(x_root, g_param), u_gen]
            + [y_prime.factors[0].core]
            + [Generator(u_gen.root, -u_gen.param)]
            + [Generator(y_root, -nu)]
            + [Generator(x_root, -g_param)],
        )
        extras["sub_certificate"] = sub.to_json()
    else:
        index_set = commutator_index_set(system, x_root, y_root)
        if not index_set:
            case = "disjoint"
            out = Word(ring, ())
        else:
            constants = system.constants()
            n11 = constants.comm(x_root, y_root, 1, 1) if (1, 1) in index_set else 0
            if index_set != [(1, 1)] or abs(n11) != 1:
                raise UnsupportedLacing(
                    f"the {system.name} pair {x_root},{y_root} expands to "
                    f"indices {index_set}; only a single unit factor admits a "
                    "proper bracket certificate"
                )
            case = "non-opposite"
            n_s = x_param.numerator_min_power("s") + y_param.numerator_min_power("s")
            n_t = x_param.numerator_min_power("t") + y_param.numerator_min_power("t")
            ds = x_param.den[0] + y_param.den[0]
            dt = x_param.den[1] + y_param.den[1]
            total_s, total_t = n_s - ds, n_t - dt
            if total_s < 2 * p or total_t < 2 * q:
                raise BudgetTooSmall(
                    f"product exponents (s^{total_s}, t^{total_t}) cannot split "
                    f"into two level-({p},{q}) parameters"
                )
            u_gen = Generator(
                x_root, ring.monomial(1, a=1, s=total_s - p, t=total_t - q)
            )
            v_gen = Generator(y_root, ring.monomial(1, b=1, s=p, t=q))
            u_rel = RelativeWord(ring, "a", [RelativeFactor((), u_gen)])
            v_rel = RelativeWord(ring, "b", [RelativeFactor((), v_gen)])
            pairs.append((u_rel, v_rel))
            out = Word(
                ring,
                [
                    u_gen,
                    v_gen,
                    Generator(u_gen.root, -u_gen.param),
                    Generator(v_gen.root, -v_gen.param),
                ],
            )
            expansion = chevalley_commutator(
                system, x_root, y_root, x_param, y_param, ring
            )
            for gen in expansion:
                assert marker_membership(gen.param, "a") and marker_membership(
                    gen.param, "b"
                ), "expansion factors must carry the product marker"
            extras["expansion"] = [g.line() for g in expansion]
    for u_rel, v_rel in pairs:
        assert u_rel.check(p, q) and v_rel.check(p, q)
    cert = RewriteCertificate(
        op="relative_commutator",
        system=system.name,
        case=case,
        budget=budget,
        input_description=f"[{x.line()}, {y.line()}] into marked brackets",
        input_word=lhs,
        output_word=out,
        achieved_level=("relative", p, q, "a", "b"),
        bound=None,
        relative_output=pairs,
        extras=extras,
    )
    cert.oracle_kind = _oracle(system, lhs, out)
    cert.oracle_checked = True
    return cert


# --------------------------------------------------------------------------
# planner probes (binary-search support)

def _probe_relative_conjugate(system, k, p, q, h_try, m_try) -> bool:
    ring = standard_ring()
    marker = "a"
    non_opp = next(
        r
        for r in system.roots
        if r.coords != system.roots[0].coords and r != system.negate(system.roots[0])
    )
    x_root = system.roots[0]
    param = ring.monomial(1, a=1, s=h_try, t=m_try)
    factors = [
        RelativeFactor((), Generator(x_root, param)),
        RelativeFactor(
            (Generator(non_opp, ring.monomial(1, s=h_try, t=m_try)),),
            Generator(non_opp, param),
        ),
        RelativeFactor((), Generator(system.negate(x_root), param)),
    ]
    relword = RelativeWord(ring, marker, factors)
    try:
        relative_conjugate(system, x_root, relword, k=k, p=p, q=q)
        return True
    except BudgetTooSmall:
        return False


def _probe_relative_commutator(system, k, m, p, q, l_try, n_try) -> bool:
    ring = standard_ring()
    x_root = system.roots[0]
    candidates = [
        r
        for r in system.roots
        if commutator_index_set(system, x_root, r) == [(1, 1)]
        and abs(system.constants().comm(x_root, r, 1, 1)) == 1
    ]
    if not candidates:
        return True
    y_root = candidates[0]
    xi = ring.monomial(1, a=1, t=l_try, s=-k)
    zeta = ring.monomial(1, b=1, s=n_try, t=-m)
    try:
        relative_commutator(
            system, x_root, y_root, k=k, m=m, p=p, q=q, x_param=xi, y_param=zeta
        )
        return True
    except BudgetTooSmall:
        return False


# --------------------------------------------------------------------------
# audit

def _max_len(certs) -> int:
    return max((c.length for c in certs), default=0)


def length_audit(
    systems=("A2", "A3", "B2", "C2", "G2"),
    p: int = 1,
    q: int = 1,
    include_heavy: bool = True,
) -> list:
    """Empirical length maxima against the stated bounds, one row per
    (operation, system, case).

    Conjugation rows sweep every ordered root pair; opposite commutator
    rows sweep one root per length class (the construction is length-
    class invariant).  Columns: lemma, phi, case, bound, empirical,
    runtime_ms, and bfs (exact finite-group distance where computed,
    otherwise None).
    """
    from .roots import build

    rows = []

    def add_row(op, system, case, bound, certs, started):
        rows.append(
            {
                "lemma": op,
                "phi": system.name,
                "case": case,
                "bound": bound,
                "empirical": _max_len(certs),
                "runtime_ms": round(1000 * (time.perf_counter() - started), 3),
                "bfs": None,
            }
        )

    for name in systems:
        system = build(name)
        roots = system.roots
        alpha = roots[0]

        t0 = time.perf_counter()
        certs = [
            conjugate_single(system, a, b, h=1, p=p, q=q)
            for a in roots
            for b in roots
            if b.coords != a.coords and b != system.negate(a)
        ]
        add_row("conjugate_single", system, "non-opposite", CONJUGATE_BOUND, certs, t0)

        t0 = time.perf_counter()
        certs = [
            conjugate_single(system, a, system.negate(a), h=1, p=p, q=q) for a in roots
        ]
        add_row("conjugate_single", system, "opposite", CONJUGATE_BOUND, certs, t0)

        t0 = time.perf_counter()
        non_opp = next(
            r for r in roots if r.coords != alpha.coords and r != system.negate(alpha)
        )
        certs = [
            conjugate_word(system, [(alpha, 1), (non_opp, 1)], [roots[-1]], p=p, q=q)
        ]
        add_row(
            "conjugate_word",
            system,
            "L=2 K=1",
            conjugate_word_base(system) ** 2,
            certs,
            t0,
        )

        t0 = time.perf_counter()
        certs = [
            commutator_single(system, a, b, k=1, m=1, p=p, q=q)
            for a in roots
            for b in roots
            if b.coords != a.coords and b != system.negate(a)
        ]
        add_row("commutator_single", system, "non-opposite", 4, certs, t0)

        if include_heavy:
            t0 = time.perf_counter()
            certs = [
                commutator_single(system, a, system.negate(a), k=1, m=1, p=p, q=q)
                for a in _class_representatives(system)
            ]
            add_row(
                "commutator_single",
                system,
                "opposite",
                crude_single_bound(system),
                certs,
                t0,
            )

            t0 = time.perf_counter()
            certs = [
                commutator_general(
                    system, alpha, [non_opp, system.negate(alpha)], k=1, p=p, q=q
                )
            ]
            add_row(
                "commutator_general",
                system,
                "K=2",
                (crude_single_bound(system) + 1) ** 2 - 1,
                certs,
                t0,
            )

    for row in rows:
        assert row["empirical"] <= row["bound"], "empirical length exceeded the bound"
    return rows


def audit_to_csv(rows) -> str:
    header = "lemma,phi,case,bound,empirical,runtime_ms,bfs"
    lines = [header]
    for r in rows:
        bfs = "" if r["bfs"] is None else str(r["bfs"])
        lines.append(
            f"{r['lemma']},{r['phi']},{r['case']},{r['bound']},"
            f"{r['empirical']},{r['runtime_ms']},{bfs}"
        )
    return "\n".join(lines) + "\n"
