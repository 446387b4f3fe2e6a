"""Command line entry point.

Exit codes: 0 success, 1 invariant violation / strict-mode step error /
oracle mismatch, 2 bad scenario or config input.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from likerent import economics as econ
from likerent.errors import ParseError, SimError
from likerent.exhibitor import PolicySet
from likerent.harness.fuzz import fuzz
from likerent.harness.oracle import comparable, replay_oracle
from likerent.harness.runner import run_scenario
from likerent.harness.scenario import load_scenario

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _profile(value: Optional[str]) -> econ.ChainProfile:
    if value is None:
        return econ.ETHEREUM
    if value in econ.BUNDLED_PROFILES:
        return econ.BUNDLED_PROFILES[value]
    return econ.ChainProfile.load(value)


def _schedule(value: Optional[str]) -> econ.GasSchedule:
    return econ.default_gas_schedule() if value is None else econ.GasSchedule.load(value)


def _policies(args: argparse.Namespace) -> PolicySet:
    return PolicySet.parse(args.policies, args.rate, args.window)


def _add_world_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--chain", help="chain profile JSON or bundled name (ethereum, binance-like)")
    p.add_argument("--gas", help="gas schedule JSON; missing ops fall back to defaults")
    p.add_argument("--batch-k", type=int, default=1, help="likes per on-chain counter update")
    p.add_argument("--policies", default="auth,dedupe,rate", help="comma list of auth,dedupe,rate")
    p.add_argument("--rate", type=int, default=5, help="clicks allowed per user per window")
    p.add_argument("--window", type=int, default=60, help="rate-limit window in seconds")


def cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    profile, schedule, policies = _profile(args.chain), _schedule(args.gas), _policies(args)
    code = EXIT_OK
    try:
        report = run_scenario(scenario, profile, schedule, args.batch_k, policies, strict=args.strict)
    except SimError as exc:
        report = exc.report
        code = EXIT_FAIL
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
    sys.stdout.write(report.to_json() + "\n" if args.json else report.to_text())
    return code


def cmd_check(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    profile, schedule, policies = _profile(args.chain), _schedule(args.gas), _policies(args)
    engine = comparable(run_scenario(scenario, profile, schedule, args.batch_k, policies))
    expected = replay_oracle(scenario, args.batch_k, policies, profile, schedule)
    if engine == expected:
        print("engine and replay oracle agree")
        return EXIT_OK
    for key in expected:
        if engine.get(key) != expected[key]:
            print(f"mismatch in {key}:\n  engine: {engine.get(key)}\n  oracle: {expected[key]}")
    return EXIT_FAIL


def cmd_fuzz(args: argparse.Namespace) -> int:
    report = fuzz(args.seed, args.sequences, args.max_ops)
    out = json.dumps(report.to_dict(), indent=2)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(out + "\n")
    print(
        f"seed {report.seed}: {report.sequences} sequences, {report.steps_run} steps, "
        f"{report.step_errors} rejected steps, {len(report.violations)} violations"
    )
    for v in report.violations:
        print(f"  sequence {v.sequence}: {v.invariant} at step {v.step_index}; minimal repro:")
        for s in v.steps:
            print("    " + s.to_json())
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_economics(args: argparse.Namespace) -> int:
    profile, schedule = _profile(args.profile), _schedule(args.gas)
    cents = econ.round_cents
    if args.analysis == "break-even":
        p = econ.break_even_price_per_like(profile, schedule, args.likes)
        cost = econ.order_lifecycle_cost(profile, schedule, "lender").total_usd
        print(f"lender gas per order: ${cents(cost)}")
        print(f"break-even price at {args.likes} likes: {p} RNT/like (RNT = ${profile.rnt_usd})")
    elif args.analysis == "trust-curve":
        verified = args.verified if args.verified is not None else args.likes
        curve = econ.trust_cost_curve(profile, schedule, args.likes, verified, args.k)
        for mode, usd in curve.rows():
            print(f"{mode:<18} ${cents(usd):>12}")
        print(f"{'trust cost':<18} ${cents(curve.trust_cost):>12}")
        if curve.factor is not None:
            print(f"full_metadata / counter_batched = {curve.factor:.2f}x")
    elif args.analysis == "compare":
        other = _profile(args.against)
        ratio = econ.compare_chains(schedule, profile, other, args.op)
        print(f"{args.op}: {profile.name} ${cents(econ.tx_cost_usd(schedule.gas(args.op), profile))} vs "
              f"{other.name} ${cents(econ.tx_cost_usd(schedule.gas(args.op), other))}, ratio {ratio:.2f}")
    else:
        for role in ("lender", "renter", "exhibitor"):
            rep = econ.order_lifecycle_cost(profile, schedule, role, args.likes, args.k)
            print(f"{role:<10} ${cents(rep.total_usd)}")
        for op in sorted(schedule):
            print(f"  {op:<22} {schedule[op]:>10} gas  ${cents(econ.tx_cost_usd(schedule[op], profile))}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="likerent", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a JSON-lines scenario and print a report")
    p.add_argument("scenario")
    _add_world_options(p)
    p.add_argument("--strict", action="store_true", help="stop at the first failing step")
    p.add_argument("--report", help="also write the JSON report here")
    p.add_argument("--json", action="store_true", help="print JSON instead of a table")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="compare a scenario run against the replay oracle")
    p.add_argument("scenario")
    _add_world_options(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fuzz", help="random step sequences with invariant checks")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--sequences", type=int, default=1000)
    p.add_argument("--max-ops", type=int, default=40)
    p.add_argument("--report", help="write the JSON violation report here")
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("economics", help="gas cost analyses")
    p.add_argument("analysis", choices=("break-even", "trust-curve", "compare", "lifecycle"))
    p.add_argument("--profile", help="chain profile JSON or bundled name")
    p.add_argument("--against", default="binance-like", help="second profile for compare")
    p.add_argument("--gas", help="gas schedule JSON")
    p.add_argument("--likes", type=int, default=100, help="expected likes / total clicks")
    p.add_argument("--verified", type=int, help="verified likes for trust-curve")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--op", default="increase_count")
    p.set_defaults(func=cmd_economics)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SimError as exc:
        # bad numbers in a config or analysis request
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
