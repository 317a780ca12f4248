"""Command-line entry point: configs in, machine-readable reports out.

This is the only place in the package that touches the filesystem or the
process exit code.  Reports are JSON with a stable schema number and a
determinism fingerprint: a hash of the payload with timing fields removed,
so two runs with the same config and seed must produce the same value.

Exit codes: 0 success, 1 verification failure (a theorem check came back
unequal or an oracle rejected a certificate), 2 configuration error,
3 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import (
    AmbientMismatch,
    BudgetTooSmall,
    CapExceeded,
    NilpotentDenominator,
    NotUnitIdeal,
    OppositeOrEqual,
    RelationFailure,
    UnsupportedLacing,
    UnsupportedRank,
    VerificationFailed,
)
from .calculus import audit_to_csv
from .scenarios import (
    COMMANDS,
    ConfigError,
    ExperimentConfig,
    builtin_scenarios,
    list_scenarios,
    run_command,
)

SCHEMA = 1

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_CONFIG = 2
EXIT_CAP = 3

_CONFIG_ERRORS = (
    ConfigError,
    AmbientMismatch,
    BudgetTooSmall,
    NilpotentDenominator,
    NotUnitIdeal,
    OppositeOrEqual,
    UnsupportedLacing,
    UnsupportedRank,
)
_VERIFICATION_ERRORS = (VerificationFailed, RelationFailure, AssertionError)


def _jsonable(obj):
    """Payloads may carry numpy scalars or containers; normalise once."""
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, str) else k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (frozenset, set)):
        return sorted(_jsonable(v) for v in obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def _strip_timing(obj):
    if isinstance(obj, dict):
        return {k: _strip_timing(v) for k, v in obj.items() if k != "runtime_ms"}
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


def fingerprint(payload) -> str:
    """sha256 over the canonical payload with timing removed; equal configs
    and seeds must reproduce this exactly."""
    canon = json.dumps(_strip_timing(payload), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canon.encode()).hexdigest()


def run(config: ExperimentConfig) -> tuple[dict, int]:
    """Build the payload, assemble the report, write it if asked.

    Never raises for expected failure classes; the error appears in the
    payload and the exit code, and any output file is still complete.
    """
    t0 = time.perf_counter()
    try:
        payload, verified = run_command(config)
        code = EXIT_OK if verified else EXIT_VERIFICATION
        status = "ok" if verified else "verification-failed"
    except CapExceeded as e:
        payload, code, status = {"error": _err(e)}, EXIT_CAP, "cap-exceeded"
    except _CONFIG_ERRORS as e:
        payload, code, status = {"error": _err(e)}, EXIT_CONFIG, "config-error"
    except _VERIFICATION_ERRORS as e:
        payload, code, status = {"error": _err(e)}, EXIT_VERIFICATION, "verification-failed"
    payload = _jsonable(payload)
    report = {
        "schema": SCHEMA,
        "config": config.echo(),
        "status": status,
        "payload": payload,
        "wall_time_ms": round(1000 * (time.perf_counter() - t0), 2),
        "version": __version__,
        "fingerprint": fingerprint(payload),
    }
    if config.out:
        _write_atomic(config, report)
    return report, code


def _err(e: BaseException) -> dict:
    return {"type": type(e).__name__, "message": str(e)}


def _csv_text(config: ExperimentConfig, report: dict) -> str:
    payload = report["payload"]
    if config.command == "audit" and "rows" in payload:
        return audit_to_csv(payload["rows"])
    if config.command == "width" and "histogram" in payload:
        lines = ["length,count"]
        lines += [f"{k},{v}" for k, v in sorted(payload["histogram"].items(), key=lambda kv: int(kv[0]))]
        return "\n".join(lines) + "\n"
    # generic fallback: top-level payload fields, nested values as JSON
    lines = ["key,value"]
    for k, v in payload.items():
        val = json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else str(v)
        lines.append(f"{k},\"{val}\"" if "," in str(val) else f"{k},{val}")
    return "\n".join(lines) + "\n"


def _write_atomic(config: ExperimentConfig, report: dict) -> None:
    """Full bytes under a temp name, then rename: a crash mid-write leaves
    no partial file at the target path."""
    text = (
        _csv_text(config, report)
        if config.format == "csv"
        else json.dumps(report, indent=1, sort_keys=False) + "\n"
    )
    out = config.out
    tmp = f"{out}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, out)


# -- argument and config-file parsing ---------------------------------------------


def _parse_ideal(text: str) -> tuple:
    try:
        return tuple(int(g) for g in text.split(",") if g.strip() != "")
    except ValueError as e:
        raise ConfigError(f"bad ideal generator list {text!r}: {e}") from e


_INT_KEYS = {"p", "q", "k", "m", "h", "cap", "pair_cap", "samples", "seed"}


def _read_config_file(path: str) -> dict:
    """key=value lines; '#' comments; ideal= may repeat, one ideal per line."""
    values: dict = {}
    ideals: list = []
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path!r}: {e}") from e
    for ln, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{ln}: expected key=value, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "ideal":
            ideals.append(_parse_ideal(value))
        elif key in _INT_KEYS:
            try:
                values[key] = int(value)
            except ValueError as e:
                raise ConfigError(f"{path}:{ln}: {key} must be an integer") from e
        elif key in {"command", "system", "ring", "out", "format"}:
            values[key] = value
        else:
            raise ConfigError(f"{path}:{ln}: unknown key {key!r}")
    if ideals:
        values["ideals"] = tuple(ideals)
    return values


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {}
    if args.config:
        values.update(_read_config_file(args.config))
    flag_map = {
        "command": args.command,
        "system": args.system,
        "ring": args.ring,
        "p": args.p,
        "q": args.q,
        "k": args.k,
        "m": args.m,
        "h": args.h,
        "cap": args.cap,
        "seed": args.seed,
        "samples": args.samples,
        "out": args.out,
        "format": args.format,
    }
    values.update({k: v for k, v in flag_map.items() if v is not None})
    if args.ideal:
        values["ideals"] = tuple(_parse_ideal(t) for t in args.ideal)
    if "command" not in values:
        raise ConfigError("no command given (use --command, --config, or --scenario)")
    if values["command"] not in COMMANDS:
        raise ConfigError(f"unknown command {values['command']!r}; choose from {COMMANDS}")
    if values.get("format", "json") not in ("json", "csv"):
        raise ConfigError(f"format must be json or csv, got {values['format']!r}")
    return ExperimentConfig(**values)


def _scenario_config(scenario_id: str) -> ExperimentConfig:
    for sid, cfg in builtin_scenarios():
        if sid == scenario_id:
            return cfg
    raise ConfigError(f"no built-in scenario {scenario_id!r} (see --list)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chevring",
        description="Exact Chevalley-group calculus and finite verification.",
    )
    parser.add_argument("--command", choices=COMMANDS, help="what to run")
    parser.add_argument("--system", help="root system, e.g. A2, B2, C2, G2")
    parser.add_argument("--ring", help='finite ring, e.g. "Z/6", "Z/4 x Z/9", "Z/3[u]/(u^2)"')
    parser.add_argument(
        "--ideal",
        action="append",
        metavar="GENS",
        help="ideal generators, comma separated; repeat the flag for more ideals",
    )
    parser.add_argument("--p", type=int, help="target s-exponent (level)")
    parser.add_argument("--q", type=int, help="target t-exponent (level)")
    parser.add_argument("--k", type=int, help="denominator exponent of the first argument")
    parser.add_argument("--m", type=int, help="denominator exponent of the second argument")
    parser.add_argument("--h", type=int, help="denominator exponent of the conjugator")
    parser.add_argument("--cap", type=int, help="enumeration order cap")
    parser.add_argument("--seed", type=int, help="seed for any sampling (fixed default)")
    parser.add_argument("--samples", type=int, help="sample count for normality/thm8")
    parser.add_argument("--out", help="write the report to this path (atomic)")
    parser.add_argument("--format", choices=("json", "csv"), help="output format")
    parser.add_argument("--config", metavar="FILE", help="key=value file; flags override it")
    parser.add_argument("--scenario", metavar="ID", help="run one built-in scenario by id")
    parser.add_argument(
        "--list", action="store_true", help="print the built-in scenario grid and exit"
    )
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    if args.list:
        for row in list_scenarios():
            rest = {k: v for k, v in row.items() if k != "id"}
            print(f"{row['id']:28s} {json.dumps(rest, sort_keys=True)}")
        return EXIT_OK
    try:
        if args.scenario:
            config = _scenario_config(args.scenario)
            overrides = {
                k: v
                for k, v in {"out": args.out, "format": args.format, "seed": args.seed}.items()
                if v is not None
            }
            if overrides:
                from dataclasses import replace

                config = replace(config, **overrides)
        else:
            config = build_config(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    report, code = run(config)
    if config.out:
        print(f"{report['status']}  {config.out}  {report['fingerprint']}")
    else:
        print(json.dumps(report, indent=1))
    return code


if __name__ == "__main__":
    sys.exit(main())
