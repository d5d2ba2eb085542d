"""Command-line entry point: ``slap {run,attack,bench,vectors}``.

Exit codes: 0 success, 1 a rejection in an honest scenario (or a failed
attack or bench check), 2 configuration error.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import attacks, bench, report, vectors
from .protocol import PROFILES
from .scenario import BUNDLED, ScenarioError, load_scenario, run_scenario
from .tlp import calibrate_rate

EXIT_OK, EXIT_REJECTED, EXIT_CONFIG = 0, 1, 2
PROFILE_ENV = "SLAP_PROFILE"


class ConfigError(Exception):
    pass


def _profile_override(args) -> Optional[str]:
    """--profile, else the environment default, else None."""
    if args.profile:
        return args.profile
    value = os.environ.get(PROFILE_ENV)
    if value is not None and value not in PROFILES:
        raise ConfigError(f"{PROFILE_ENV}={value!r} is not one of {', '.join(PROFILES)}")
    return value


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: scenario seed or 0)")
    common.add_argument("--profile", choices=sorted(PROFILES), default=None,
                        help=f"parameter profile (default: ${PROFILE_ENV} or toy)")
    common.add_argument("--out", type=Path, default=None, help="directory for JSON, summary and trace files")

    p = argparse.ArgumentParser(prog="slap", description="Anonymous, location-verified spectrum access simulator")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run a scenario file or a bundled scenario by name")
    run.add_argument("scenario", help="path to a YAML scenario, or a bundled name: " + ", ".join(BUNDLED))

    att = sub.add_parser("attack", parents=[common], help="run an adversarial trial suite")
    att.add_argument("kind", choices=list(attacks.KINDS) + ["all"])
    att.add_argument("--trials", type=int, default=1000)

    b = sub.add_parser("bench", parents=[common], help="wall-clock benchmarks")
    b.add_argument("phase", choices=list(bench.PHASES) + ["tlp_ladder", "all"])
    b.add_argument("--reps", type=int, default=bench.MIN_REPS)
    b.add_argument("--bits", type=int, default=2048, help="modulus size for the tlp ladder")

    v = sub.add_parser("vectors", parents=[common], help="regenerate hex test vectors")
    v.add_argument("--module", choices=list(vectors.MODULES), action="append",
                   help="limit to one module (repeatable)")
    return p


def cmd_run(args, profile: Optional[str]) -> int:
    sc = load_scenario(args.scenario)
    result = run_scenario(sc, seed=args.seed, profile=profile, capture=True)
    rep = report.run_report(result)
    rows = [{**p, "sim_ms": p["sim_ns"] / 1e6} for p in rep["phases"]]
    text = "\n\n".join([
        f"scenario {rep['scenario']}  seed {rep['seed']}  profile {rep['profile']}  "
        f"trace {rep['trace_digest'][:16]}  {'ACCEPTED' if rep['accepted'] else 'REJECTED'}",
        report.summary_table(rows, ["index", "phase", "client", "accepted", "bytes", "messages",
                                    "sim_ms", "wall_ms", "reason"]),
        "communication (bytes): measured vs analytical; the reference column is an externally\n"
        "reported total, shown for comparison only",
        report.summary_table(rep["communication"], ["phase", "measured_bytes", "analytic_bytes",
                                                "reference_bytes", "formula"]),
        f"host squaring rate: {rep['host_squarings_per_s']:,} /s ({result.world.config.profile.rsa_bits}-bit)",
        f"size reconciliation: {rep['reconciliation'] if isinstance(rep['reconciliation'], str) else 'MISMATCH'}",
    ])
    print(text)
    if isinstance(rep["reconciliation"], list):
        for line in rep["reconciliation"]:
            print("  " + line, file=sys.stderr)
    report.write_outputs(args.out, sc.id, rep, text, result.net.trace_jsonl())
    ok = rep["accepted"] and rep["reconciliation"] == "exact"
    return EXIT_OK if ok else EXIT_REJECTED


def cmd_attack(args, profile: str) -> int:
    if args.trials < 1:
        raise ConfigError("--trials must be positive")
    kinds = attacks.KINDS if args.kind == "all" else (args.kind,)
    seed = args.seed or 0
    results = [attacks.run_attack(k, args.trials, seed, profile) for k in kinds]
    rows = []
    for s in results:
        lo, hi = s.interval
        rows.append({"kind": s.kind, "trials": s.trials, "accepted": s.accepted, "rate": s.rate,
                     "wilson_lo": lo, "wilson_hi": hi, "expected": s.expected_rate,
                     "passed": s.passed, "wall_s": s.wall_s})
    text = report.summary_table(rows, ["kind", "trials", "accepted", "rate", "wilson_lo", "wilson_hi",
                                       "expected", "passed", "wall_s"])
    for s in results:
        if s.kind == "dos_flood":
            text += "\n\ndos_flood cost ladder\n" + report.summary_table(
                s.extra["ladder"], ["kappa", "attacker_squarings", "attacker_solve_s", "server_median_s",
                                    "server_cred_verifications_per_request", "server_modexps_per_request"])
            text += f"\nserver cost ratio across ladder: {s.extra['server_cost_ratio']:.3f}"
        for line in s.unexpected[:5]:
            text += f"\n{s.kind}: unexpected rejection {line}"
    print(text)
    report.write_outputs(args.out, "attack", {"seed": seed, "profile": profile,
                                              "results": [s.as_dict() for s in results]}, text)
    return EXIT_OK if all(s.passed for s in results) else EXIT_REJECTED


def cmd_bench(args, profile: str) -> int:
    if args.reps < bench.MIN_REPS:
        raise ConfigError(f"--reps must be at least {bench.MIN_REPS}")
    seed = args.seed or 0
    phases = list(bench.PHASES) + ["tlp_ladder"] if args.phase == "all" else [args.phase]
    out: dict = {"seed": seed, "profile": profile, "reps": args.reps,
                 "host_squarings_per_s": round(calibrate_rate(args.bits)),
                 "note": "reference_ms values were measured on other hardware and are shown for reference only"}
    chunks = []
    ok = True
    for phase in phases:
        if phase == "tlp_ladder":
            ladder = bench.tlp_ladder(reps=args.reps, bits=args.bits, seed=seed)
            out["tlp_ladder"] = ladder
            ok = ok and ladder["r_squared"] >= 0.95 and ladder["verify_ratio"] < 2.0
            chunks.append(f"tlp ladder ({ladder['bits']}-bit, {ladder['reps']} reps)\n" + report.summary_table(
                ladder["rows"], ["kappa", "squarings_per_solve", "solve_median_ms", "verify_median_ms",
                                 "reference_solve_ms"])
                + f"\nlinear fit R^2 = {ladder['r_squared']:.4f}; verify time ratio = {ladder['verify_ratio']:.3f}")
        else:
            rows = bench.bench_phase(phase, args.reps, seed, profile)
            out[phase] = rows
            chunks.append(f"{phase}\n" + report.summary_table(
                rows, ["operation", "median_ms", "q1_ms", "q3_ms", "reps", "reference_ms"]))
    text = "\n\n".join(chunks) + "\n\n(reference_ms: figures measured on different hardware; not a target)"
    print(text)
    report.write_outputs(args.out, "bench", out, text)
    return EXIT_OK if ok else EXIT_REJECTED


def cmd_vectors(args, profile: str) -> int:
    out = args.out or Path("vectors")
    for path in vectors.write_vectors(out, args.module):
        print(path)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        profile = _profile_override(args)
        if args.command == "run":
            return cmd_run(args, profile)
        handler = {"attack": cmd_attack, "bench": cmd_bench, "vectors": cmd_vectors}[args.command]
        return handler(args, profile or "toy")
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
