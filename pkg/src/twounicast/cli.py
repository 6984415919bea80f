"""Command-line front end: generate, analyze, bound, and simulate.

Every subcommand is a thin composition of library calls; all randomness
is seeded (flag `--seed`, falling back to the TWOUNICAST_SEED
environment variable, then 0) and the seed is echoed in the output.
Exit status: 0 on success, 1 on a validation problem with the inputs,
2 on an internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .cuts import BottleneckReport, IndegreeBudgetError, detect_bottlenecks
from .dof import DofRegion, build_region, sum_dof_membership
from .network import LayeredNetwork, NetworkError, parse_network, serialize_network
from .scheme import (
    BUILTIN_FAMILIES,
    Scheme,
    SchemeError,
    builtin_network,
    builtin_scheme,
    check_csit_legality,
    parse_scheme,
)
from .sim import SimulationError, monte_carlo


def _default_seed() -> int:
    try:
        return int(os.environ.get("TWOUNICAST_SEED", "0"))
    except ValueError:
        return 0


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write_out(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_network(path: str) -> LayeredNetwork:
    return parse_network(_read(path))


def _load_scheme(spec: str) -> Scheme:
    """`builtin:FAMILY[:M]` or a path to a scheme JSON document."""
    if spec.startswith("builtin:"):
        parts = spec.split(":")
        family = parts[1] if len(parts) > 1 else ""
        m = int(parts[2]) if len(parts) > 2 else None
        return builtin_scheme(family, m)
    return parse_scheme(_read(spec))


def _fmt_constraint(c) -> str:
    if c.a1 < 0:
        return "D1 >= 0"
    if c.a2 < 0:
        return "D2 >= 0"
    terms = []
    if c.a1:
        terms.append("D1" if c.a1 == 1 else f"{c.a1}*D1")
    if c.a2:
        terms.append("D2" if c.a2 == 1 else f"{c.a2}*D2")
    return f"{' + '.join(terms)} <= {c.rhs}"


def _fmt_point(p) -> str:
    return f"({p[0]}, {p[1]})"


def _print_report(report: BottleneckReport, out) -> None:
    if report.bottlenecks:
        out.write("bottlenecks:\n")
        for r in report.bottlenecks:
            witness = ", ".join(sorted(r.witness))
            out.write(
                f"  {r.node}: destination d{r.destination_index}, "
                f"minimal m = {r.minimal_m}, witness {{{witness}}}\n"
            )
    else:
        out.write("bottlenecks: none\n")
    if report.omniscient:
        out.write("omniscient:\n")
        for r in report.omniscient:
            out.write(
                f"  {r.node}: destination d{r.destination_index}, witness {r.witness_u}\n"
            )
    else:
        out.write("omniscient: none\n")


def _print_region(region: DofRegion, out) -> None:
    out.write("constraints:\n")
    for c in region.constraints:
        out.write(f"  {_fmt_constraint(c)}   [{c.provenance}]\n")
    out.write("vertices: " + ", ".join(_fmt_point(p) for p in region.vertices) + "\n")
    out.write(f"max sum DoF: {region.max_sum} at {_fmt_point(region.argmax_vertex)}\n")
    member, k = sum_dof_membership(region.max_sum)
    if member:
        detail = f"k = {k}" if k is not None else "limit value 2"
        out.write(f"attainable sum-DoF level: yes ({detail})\n")
    else:
        out.write("attainable sum-DoF level: no\n")


def _cmd_gen(args) -> int:
    net = builtin_network(args.family, args.m)
    _write_out(serialize_network(net), args.output)
    return 0


def _cmd_analyze(args) -> int:
    net = _load_network(args.network)
    report = detect_bottlenecks(net, args.max_indegree)
    if args.json:
        sys.stdout.write(report.to_json())
    else:
        _print_report(report, sys.stdout)
    return 0


def _cmd_region(args) -> int:
    net = _load_network(args.network)
    report = detect_bottlenecks(net, args.max_indegree)
    region = build_region(net, report)
    if args.json:
        doc = json.loads(region.to_json())
        member, k = sum_dof_membership(region.max_sum)
        doc["attainable_sum"] = {"member": member, "k": k}
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    else:
        _print_region(region, sys.stdout)
    return 0


def _cmd_simulate(args) -> int:
    net = _load_network(args.network)
    sch = _load_scheme(args.scheme)
    legality = check_csit_legality(net, sch)
    if not legality.ok:
        raise SchemeError(
            "scheme is not CSIT-legal: "
            + "; ".join(v.reason for v in legality.violations)
        )
    report = monte_carlo(
        net, sch, trials=args.trials, seed=args.seed, mode=args.mode,
        power=args.power, tol=args.tol,
    )
    region = build_region(net, detect_bottlenecks(net, args.max_indegree))
    if args.csv:
        _write_out(report.to_csv(), args.csv)
    if args.json:
        doc = json.loads(report.to_json())
        doc["region_max_sum"] = str(region.max_sum)
        doc["matches_outer_bound"] = (
            report.achieved_dof is not None
            and sum(report.achieved_dof, Fraction(0)) == region.max_sum
        )
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
        return 0
    out = sys.stdout
    out.write(f"trials: {report.trials} (seed {report.seed}, mode {report.mode})\n")
    out.write(
        f"decodable: d1 {report.decodable_trials[0]}/{report.trials}, "
        f"d2 {report.decodable_trials[1]}/{report.trials}\n"
    )
    if report.achieved_dof is None:
        out.write("achieved DoF: none (not all trials decodable)\n")
        out.write(f"matches outer bound: no (outer bound {region.max_sum})\n")
    else:
        d1, d2 = report.achieved_dof
        total = d1 + d2
        out.write(f"achieved DoF: ({d1}, {d2}), sum {total}\n")
        match = "yes" if total == region.max_sum else f"no (outer bound {region.max_sum})"
        out.write(f"matches outer bound: {match}\n")
    return 0


def _cmd_check_scheme(args) -> int:
    net = _load_network(args.network)
    sch = parse_scheme(_read(args.scheme))
    report = check_csit_legality(net, sch, min_delay=args.delay, stretch=args.stretch)
    if args.json:
        sys.stdout.write(report.to_json())
    elif report.ok:
        sys.stdout.write("legal\n")
    else:
        sys.stdout.write("illegal:\n")
        for v in report.violations:
            gain = f" {v.gain}" if v.gain else ""
            sys.stdout.write(f"  {v.node} at slot {v.slot}:{gain} {v.reason}\n")
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twounicast",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a generator network as JSON")
    p.add_argument("--family", required=True, choices=BUILTIN_FAMILIES)
    p.add_argument("--m", type=int, default=None, help="family parameter (ignored for no-bottleneck)")
    p.add_argument("-o", "--output", default=None, help="output path (default stdout)")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("analyze", help="detect choke points and omniscient nodes")
    p.add_argument("network")
    p.add_argument("--max-indegree", type=int, default=16)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("region", help="outer-bound DoF region (exact rationals)")
    p.add_argument("network")
    p.add_argument("--max-indegree", type=int, default=16)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_region)

    p = sub.add_parser(
        "simulate",
        help="Monte Carlo decodability of a scheme over random channels",
        epilog=(
            "CSV columns: trial, seed, d1_decodable, d2_decodable, "
            "d1_sigma_min, d2_sigma_min (smallest singular value the rank "
            "decision kept at each destination)."
        ),
    )
    p.add_argument("network")
    p.add_argument("--scheme", required=True, help="builtin:FAMILY[:M] or a scheme JSON path")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--mode", choices=("noiseless", "noisy"), default="noiseless")
    p.add_argument("--power", type=float, default=100.0, help="transmit power in noisy mode")
    p.add_argument("--tol", type=float, default=1e-8, help="relative rank threshold")
    p.add_argument("--max-indegree", type=int, default=16)
    p.add_argument("--csv", default=None, help="write per-trial singular values here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("check-scheme", help="check a scheme against the delayed-CSIT model")
    p.add_argument("scheme")
    p.add_argument("network")
    p.add_argument("--delay", type=int, default=1, help="minimum CSIT delay in slots")
    p.add_argument("--stretch", type=int, default=1, help="interleaving factor for the slot axis")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_check_scheme)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NetworkError, SchemeError, SimulationError, IndegreeBudgetError,
            ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        sys.stderr.write(f"internal error: {exc!r}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
