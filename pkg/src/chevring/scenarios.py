"""Scenario catalog and command dispatch for the CLI.

Everything here is a pure builder: a validated config goes in, a payload
dict and a verdict come out.  Argument parsing, report assembly, file
writing, and exit codes all live in cli.py, so payloads stay testable
without touching the filesystem.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import calculus
from .groups import evaluate_poly, steinberg_suite
from .poly import PolyRing
from .reps import poly_mat_equal
from .reps import representation_for
from .rings import FiniteRing, Ideal, parse_ring
from .roots import RootSystem, build, commutator_index_set, i_phi
from .subgroups import (
    CAP_DEFAULT,
    DEFAULT_SEED,
    WIDTH_PAIR_CAP,
    ambient_table,
    commutator_width,
    descriptor,
    normality_decompose,
    theorem2_verify,
    verify_theorem_3C,
    verify_theorem_4C,
    verify_theorem_8C,
)
from .words import Generator, Word, chevalley_commutator

COMMANDS = (
    "roots",
    "constants",
    "steinberg",
    "conjcalc",
    "commcalc",
    "relcalc",
    "audit",
    "verify3c",
    "verify4c",
    "width",
    "normality",
    "thm2",
    "thm8",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment, fully pinned down.

    ideals are tuples of generator tuples in the named ring; p/q/k/m/h are
    the budget exponents the calculus commands accept; the seed drives every
    sampling decision, so equal configs give equal payloads.
    """

    command: str
    system: str = "A2"
    ring: str | None = None
    ideals: tuple = ()
    p: int = 1
    q: int = 1
    k: int = 1
    m: int = 1
    h: int = 1
    cap: int = CAP_DEFAULT
    pair_cap: int = WIDTH_PAIR_CAP
    samples: int = 100
    seed: int = DEFAULT_SEED
    out: str | None = None
    format: str = "json"

    def echo(self) -> dict:
        return {
            "command": self.command,
            "system": self.system,
            "ring": self.ring,
            "ideals": [list(gens) for gens in self.ideals],
            "budgets": {"p": self.p, "q": self.q, "k": self.k, "m": self.m, "h": self.h},
            "cap": self.cap,
            "pair_cap": self.pair_cap,
            "samples": self.samples,
            "seed": self.seed,
        }


class ConfigError(ValueError):
    """The config names something that does not exist or cannot combine."""


def _require_ring(config: ExperimentConfig) -> FiniteRing:
    if config.ring is None:
        raise ConfigError(f"command {config.command!r} needs --ring")
    try:
        return parse_ring(config.ring)
    except Exception as e:
        raise ConfigError(f"cannot parse ring {config.ring!r}: {e}") from e


def _require_ideals(config: ExperimentConfig, ring: FiniteRing, n: int) -> list[Ideal]:
    if len(config.ideals) != n:
        raise ConfigError(
            f"command {config.command!r} needs exactly {n} --ideal flags, got {len(config.ideals)}"
        )
    out = []
    for gens in config.ideals:
        bad = [g for g in gens if not 0 <= g < ring.size]
        if bad:
            raise ConfigError(f"ideal generators {bad} outside ring {ring.name}")
        out.append(Ideal(ring, tuple(gens)))
    return out


def _system(config: ExperimentConfig) -> RootSystem:
    try:
        return build(config.system)
    except Exception as e:
        raise ConfigError(f"unknown root system {config.system!r}: {e}") from e


def _class_pairs(system: RootSystem):
    """One ordered root pair per case the calculus distinguishes: the same
    root, one non-opposite pair per ordered length-class pair, and one
    opposite pair per length class."""
    seen = {}
    alpha = system.roots[0]
    pairs = [("same", alpha, alpha)]
    for x in system.roots:
        for y in system.roots:
            if x.coords == y.coords:
                continue
            if y.coords == tuple(-c for c in x.coords):
                key = ("opp", x.length_class)
            else:
                key = ("non", x.length_class, y.length_class)
            if key not in seen:
                seen[key] = (x, y)
    for key in sorted(seen, key=str):
        kind = "opposite" if key[0] == "opp" else "nonopposite"
        pairs.append((kind, *seen[key]))
    return pairs


# -- command builders, one per COMMANDS entry ---------------------------------


def _cmd_roots(config: ExperimentConfig):
    system = _system(config)
    payload = {
        "system": system.name,
        "rank": system.rank,
        "count": len(system.roots),
        "i_phi": i_phi(system),
        "simple": [list(r.coords) for r in system.simple_roots],
        "roots": [
            {"coords": list(r.coords), "length_class": r.length_class, "positive": r.is_positive}
            for r in system.roots
        ],
    }
    return payload, True


def _cmd_constants(config: ExperimentConfig):
    system = _system(config)
    rep = representation_for(system)
    AB = PolyRing(("a", "b"), ())
    a, b = AB.var("a"), AB.var("b")
    rows = []
    lengths = set()
    ok = True
    for x in system.roots:
        for y in system.roots:
            if x.coords == y.coords or y.coords == tuple(-c for c in x.coords):
                continue
            word = chevalley_commutator(system, x, y, a, b, AB)
            bracket = Word(
                AB,
                [Generator(x, a), Generator(y, b), Generator(x, -a), Generator(y, -b)],
            )
            ok = ok and poly_mat_equal(evaluate_poly(rep, bracket), evaluate_poly(rep, word))
            if len(word):
                lengths.add(len(word))
            rows.append(
                {
                    "pair": [list(x.coords), list(y.coords)],
                    "classes": [x.length_class, y.length_class],
                    "index_set": [list(ij) for ij in commutator_index_set(system, x, y)],
                    "formula_length": len(word),
                }
            )
    payload = {
        "system": system.name,
        "pairs": rows,
        "attained_lengths": sorted(lengths),
        "formula_verified": ok,
    }
    return payload, ok


def _cmd_steinberg(config: ExperimentConfig):
    system = _system(config)
    ring = _require_ring(config)
    report = steinberg_suite(representation_for(system), ring, seed=config.seed)
    return report, report["failures"] == 0


def _certificates_payload(certs):
    rows = [c.to_json() for c in certs]
    ok = all(c.oracle_checked for c in certs)
    return {
        "certificates": rows,
        "max_length": max((c.length for c in certs), default=0),
        "all_oracle_checked": ok,
    }, ok


def _cmd_conjcalc(config: ExperimentConfig):
    system = _system(config)
    certs = []
    planned = []
    for kind, x, y in _class_pairs(system):
        certs.append(
            calculus.conjugate_single(system, x, y, h=config.h, p=config.p, q=config.q)
        )
        planned.append(
            {
                "case": kind,
                "pair": [list(x.coords), list(y.coords)],
                "budget": calculus.plan_exponents(
                    "conjugate_single", system, config.p, config.q,
                    h=config.h, opposite=(kind == "opposite"),
                ).to_json(),
            }
        )
    payload, ok = _certificates_payload(certs)
    payload["planned"] = planned
    return payload, ok


def _cmd_commcalc(config: ExperimentConfig):
    system = _system(config)
    certs = []
    for kind, x, y in _class_pairs(system):
        certs.append(
            calculus.commutator_single(
                system, x, y, k=config.k, m=config.m, p=config.p, q=config.q
            )
        )
    return _certificates_payload(certs)


def _cmd_relcalc(config: ExperimentConfig):
    system = _system(config)
    x, y = system.simple_roots[0], system.simple_roots[1]
    S = calculus.standard_ring()
    budget = calculus.plan_exponents(
        "relative_conjugate", system, config.p, config.q, k=config.k
    )
    rel = calculus.relative_generator(
        S, y, S.monomial(1, a=1, s=budget.h, t=budget.m), "a"
    )
    conj = calculus.relative_conjugate(
        system, x, rel, k=config.k, p=config.p, q=config.q
    )
    comm = calculus.relative_commutator(
        system, x, y, k=config.k, m=config.m, p=config.p, q=config.q
    )
    certs = [conj, comm]
    payload, ok = _certificates_payload(certs)
    payload["planned_input"] = budget.to_json()
    payload["markers"] = {
        "conjugate": list(conj.achieved_level),
        "commutator": list(comm.achieved_level),
    }
    return payload, ok


def _cmd_audit(config: ExperimentConfig):
    rows = calculus.length_audit(systems=(config.system,), p=config.p, q=config.q)
    ok = all(r["empirical"] <= r["bound"] for r in rows)
    return {"rows": rows, "all_within_bounds": ok}, ok


def _cmd_verify3c(config: ExperimentConfig):
    ring = _require_ring(config)
    A, B = _require_ideals(config, ring, 2)
    report = verify_theorem_3C(descriptor(config.system, ring), A, B, config.cap)
    return report, report["equal"]


def _cmd_verify4c(config: ExperimentConfig):
    ring = _require_ring(config)
    A, B = _require_ideals(config, ring, 2)
    report = verify_theorem_4C(descriptor(config.system, ring), A, B, config.cap)
    return report, report["equal"]


def _cmd_width(config: ExperimentConfig):
    ring = _require_ring(config)
    desc = descriptor(config.system, ring)
    report = commutator_width(
        desc, pair_cap=config.pair_cap, seed=config.seed, cap=config.cap
    )
    return report, True


def _cmd_normality(config: ExperimentConfig):
    ring = _require_ring(config)
    desc = descriptor(config.system, ring)
    amb = ambient_table(desc, config.cap)
    rng = np.random.default_rng(config.seed)
    roots = desc.system.roots
    runs = []
    ok = True
    for _ in range(config.samples):
        g = amb.mats[int(rng.integers(0, amb.order))]
        alpha = roots[int(rng.integers(0, len(roots)))]
        xi = int(rng.integers(1, ring.size))
        report = normality_decompose(desc, g, alpha, xi, config.cap)
        ok = ok and report["oracle_checked"] and report["provenance"]["partition_sum_is_one"]
        runs.append(
            {
                "root": list(alpha.coords),
                "xi": ring.element_name(xi),
                "word": report["word"].to_lines(),
                "word_length": report["word_length"],
                "oracle_checked": report["oracle_checked"],
                "partition": report["provenance"]["partition"],
                "charts": report["provenance"]["charts"],
            }
        )
    payload = {
        "group": desc.label,
        "samples": config.samples,
        "all_oracle_checked": ok,
        "runs": runs,
    }
    return payload, ok


def _s_from_ideals(config: ExperimentConfig, ring: FiniteRing) -> int:
    ideals = _require_ideals(config, ring, 1)
    gens = ideals[0].generators
    if len(gens) != 1:
        raise ConfigError("this command wants one principal ideal (s)")
    return gens[0]


def _cmd_thm2(config: ExperimentConfig):
    ring = _require_ring(config)
    s = _s_from_ideals(config, ring)
    report = theorem2_verify(
        config.system, ring, s, p=config.p, k=config.k, cap=config.cap
    )
    return report, report["holds"]


def _cmd_thm8(config: ExperimentConfig):
    ring = _require_ring(config)
    s = _s_from_ideals(config, ring)
    report = verify_theorem_8C(
        descriptor(config.system, ring), s, cap=config.cap,
        seed=config.seed, samples=config.samples,
    )
    return report, report["containment_in_E"]["holds"]


_BUILDERS = {
    "roots": _cmd_roots,
    "constants": _cmd_constants,
    "steinberg": _cmd_steinberg,
    "conjcalc": _cmd_conjcalc,
    "commcalc": _cmd_commcalc,
    "relcalc": _cmd_relcalc,
    "audit": _cmd_audit,
    "verify3c": _cmd_verify3c,
    "verify4c": _cmd_verify4c,
    "width": _cmd_width,
    "normality": _cmd_normality,
    "thm2": _cmd_thm2,
    "thm8": _cmd_thm8,
}


def run_command(config: ExperimentConfig):
    """Dispatch to the owning module.  Returns (payload, verified)."""
    if config.command not in _BUILDERS:
        raise ConfigError(f"unknown command {config.command!r}; choose from {COMMANDS}")
    return _BUILDERS[config.command](config)


# -- built-in scenario grid ------------------------------------------------------

_GROUP_SLUG = {"A2": "SL3", "C2": "Sp4", "G2": "G2-adjoint", "B2": "B2-adjoint"}


def _slug(ring: str | None) -> str:
    return "sym" if ring is None else ring.replace("Z/", "Z").replace(" ", "")


def _scenario(command: str, system: str, ring: str | None = None, suffix: str = "", **kw):
    cfg = ExperimentConfig(command=command, system=system, ring=ring, **kw)
    group = _GROUP_SLUG.get(system, system)
    return (f"{command}/{group}/{_slug(ring)}{suffix}", cfg)


def builtin_scenarios() -> list[tuple[str, ExperimentConfig]]:
    """The acceptance grid, with stable ids; CI and humans run the same set."""
    out = [
        # relation suite, one per group/ring in the acceptance list
        _scenario("steinberg", "A2", "Z/2"),
        _scenario("steinberg", "A2", "Z/3"),
        _scenario("steinberg", "A2", "Z/4"),
        _scenario("steinberg", "A2", "Z/6"),
        _scenario("steinberg", "C2", "Z/2"),
        _scenario("steinberg", "C2", "Z/3"),
        _scenario("steinberg", "G2", "Z/2"),
        # root systems and the symbolic commutator formula
        _scenario("roots", "A2"),
        _scenario("roots", "B2"),
        _scenario("roots", "G2"),
        _scenario("constants", "A2"),
        _scenario("constants", "B2"),
        _scenario("constants", "G2"),
        # rewriting certificates at the default budget point
        _scenario("conjcalc", "A2"),
        _scenario("conjcalc", "B2"),
        _scenario("conjcalc", "G2"),
        _scenario("commcalc", "A2"),
        _scenario("commcalc", "B2"),
        _scenario("commcalc", "G2"),
        _scenario("relcalc", "A2"),
        _scenario("audit", "A2"),
        _scenario("audit", "B2"),
        _scenario("audit", "G2"),
        # finite theorem instances
        _scenario("verify4c", "A2", "Z/6", ideals=((2,), (3,))),
        _scenario("verify4c", "A2", "Z/12", suffix="-i3i4", ideals=((3,), (4,))),
        _scenario("verify4c", "A2", "Z/12", suffix="-i3i2", ideals=((3,), (2,))),
        _scenario("verify4c", "C2", "Z/6", ideals=((2,), (3,))),
        _scenario("verify3c", "A2", "Z/4", ideals=((2,), (2,))),
        _scenario("verify3c", "A2", "Z/9", ideals=((3,), (3,))),
        # normality certificates, width scans, localisation reports
        _scenario("normality", "A2", "Z/6", samples=100),
        _scenario("normality", "A2", "Z/4", samples=100),
        _scenario("width", "A2", "Z/2"),
        _scenario("width", "A2", "Z/3", pair_cap=40_000_000),
        _scenario("thm2", "A2", "Z/12", ideals=((2,),)),
        _scenario("thm8", "A2", "Z/12", ideals=((2,),)),
    ]
    ids = [sid for sid, _ in out]
    assert len(ids) == len(set(ids)), "scenario ids must be unique"
    return out


def list_scenarios() -> list[dict]:
    """Catalog rows for --list: stable id plus the config echo."""
    return [
        {"id": sid, **{k: v for k, v in cfg.echo().items() if v not in (None, [], {})}}
        for sid, cfg in builtin_scenarios()
    ]
