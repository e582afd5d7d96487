"""Command line entry point: ``hhh run | oracle | compare | merge | tcam``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import distributed, io, oracle
from .core import HierarchicalHeavyHitters
from .lattice import Dimension, Hierarchy
from .tcam import TcamCostModel, TcamSimulator
from .validation import as_fraction, check_unit_interval

SEED_ENV = "HHH_SEED"


class ConfigError(Exception):
    pass


def _hierarchy(args) -> Hierarchy:
    step = args.step if args.step is not None else {"byte": 8, "bit": 1}[args.granularity]
    if args.dim < 1:
        raise ConfigError(f"--dim must be at least 1, got {args.dim}")
    try:
        return Hierarchy(tuple(Dimension(args.width, step) for _ in range(args.dim)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _stream(args, hierarchy: Hierarchy) -> list:
    """Records as ``(element, count)`` pairs from --input or a generator."""
    if args.input:
        try:
            records = io.parse_trace(args.input, hierarchy, args.format)
        except (ValueError, OSError) as exc:
            raise ConfigError(str(exc)) from None
        return [(r.element, r.count) for r in records]
    if args.generate:
        seed = args.seed if args.seed is not None else int(os.environ.get(SEED_ENV, "0"))
        if args.generate == "zipf":
            elements = io.gen_zipf(args.universe, args.n, args.alpha, seed, hierarchy)
        else:
            elements = io.gen_uniform(args.universe, args.n, seed, hierarchy)
        return [(e, 1) for e in elements]
    raise ConfigError("either --input or --generate is required")


def _write(text: str, out) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fit(args, hierarchy, records) -> HierarchicalHeavyHitters:
    try:
        check_unit_interval("epsilon", args.epsilon)
        check_unit_interval("phi", args.phi)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    est = HierarchicalHeavyHitters(hierarchy=hierarchy, epsilon=as_fraction(args.epsilon),
                                   phi=as_fraction(args.phi), mode=args.mode,
                                   capacity=args.capacity)
    est._initialize()
    for element, count in records:
        if count != 1 and args.mode == "unitary":
            raise ConfigError("unitary mode cannot ingest weighted records")
        est.insert(element, count)
    return est


def _render(report, fmt: str) -> str:
    return io.report_to_csv(report) if fmt == "csv" else io.report_to_json(report)


def cmd_run(args) -> int:
    hierarchy = _hierarchy(args)
    records = _stream(args, hierarchy)
    est = _fit(args, hierarchy, records)
    report = est.output(method=args.method)
    _write(_render(report, args.report_format), args.out)
    if args.save_state:
        distributed.save_state(est, args.save_state)
    return 0


def _verdict(args, hierarchy, records):
    exact = oracle.exact_counts(records, hierarchy)
    phi = check_unit_interval("phi", args.phi, closed_right=True)
    report = io.read_report(args.report) if args.report else None
    if report is not None and report.hierarchy != hierarchy:
        raise ConfigError("report hierarchy does not match the command line hierarchy")
    return exact, phi, report


def cmd_oracle(args) -> int:
    hierarchy = _hierarchy(args)
    records = _stream(args, hierarchy)
    exact, phi, report = _verdict(args, hierarchy, records)
    found = oracle.exact_hhh(exact, phi)
    out = {
        "N": exact.total,
        "phi": str(phi),
        "exact_hhh": [{"prefix": hierarchy.format(p), "label": list(p.label),
                       "f": exact.f(p), "F": F}
                      for p, F in sorted(found.items(), key=lambda kv: (-kv[0].level, hierarchy.format(kv[0])))],
    }
    status = 0
    if report is not None:
        eps = as_fraction(args.epsilon) if args.epsilon is not None else report.epsilon
        verdict = oracle.check_report(exact, phi, eps, report)
        out["verdict"] = verdict.to_dict(hierarchy)
        status = 0 if verdict.passed else 1
    _write(json.dumps(out, indent=2) + "\n", args.out)
    return status


def cmd_compare(args) -> int:
    hierarchy = _hierarchy(args)
    records = _stream(args, hierarchy)
    exact, phi, report = _verdict(args, hierarchy, records)
    if report is None:
        raise ConfigError("compare needs --report")
    eps = report.epsilon
    widths = [e.f_max - e.f_min for e in report.entries]
    scale = eps * exact.total
    rel = float(Fraction(max(widths)) / scale) if widths and scale else 0.0
    verdict = oracle.check_report(exact, phi, eps, report)
    out = {
        "N": exact.total,
        "epsilon": str(eps),
        "phi": str(phi),
        "output_size": len(report.entries),
        "exact_size": len(oracle.exact_hhh(exact, phi)),
        "relative_error": rel,
        "passed": verdict.passed,
    }
    _write(json.dumps(out, indent=2) + "\n", args.out)
    return 0 if verdict.passed else 1


def cmd_merge(args) -> int:
    try:
        states = [distributed.load_state(p) for p in args.states]
        merged = distributed.merge_states(states)
    except (ValueError, OSError, KeyError) as exc:
        raise ConfigError(str(exc)) from None
    if args.out:
        distributed.save_state(merged, args.out)
    if args.report:
        phi = as_fraction(args.phi) if args.phi is not None else None
        report = merged.output(phi=phi)
        _write(_render(report, args.report_format), args.report)
    summary = {"k": merged.merge_plan_.k, "N": merged.total_,
               "capacity": merged.capacity_, "max_width": merged.max_width_,
               "epsilon_measured": str(Fraction(merged.max_width_, merged.total_ or 1))}
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return 0


def cmd_tcam(args) -> int:
    hierarchy = _hierarchy(args)
    records = _stream(args, hierarchy)
    try:
        cost = TcamCostModel.from_file(args.cost_table) if args.cost_table else TcamCostModel()
    except (ValueError, OSError, TypeError) as exc:
        raise ConfigError(f"bad cost table: {exc}") from None
    sim = TcamSimulator(hierarchy, as_fraction(args.epsilon), include_root=not args.exclude_root,
                        single_instance=args.single_instance, cost=cost)
    try:
        sim.run(records)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _write(json.dumps(sim.report(), indent=2) + "\n", args.out)
    return 0


def _add_hierarchy(p):
    p.add_argument("--dim", type=int, default=1, help="number of dimensions")
    p.add_argument("--granularity", choices=["byte", "bit"], default="byte")
    p.add_argument("--width", type=int, default=32, help="bits per dimension")
    p.add_argument("--step", type=int, default=None, help="bits per level (overrides --granularity)")


def _add_input(p):
    p.add_argument("--input", help="CSV trace path")
    p.add_argument("--format", choices=list(io.FORMATS), default="csv")
    p.add_argument("--generate", choices=["zipf", "uniform"], help="synthesize a stream instead")
    p.add_argument("--n", type=int, default=100_000, help="synthetic stream length")
    p.add_argument("--alpha", type=float, default=1.1, help="Zipf skew")
    p.add_argument("--universe", type=int, default=10_000, help="distinct synthetic elements")
    p.add_argument("--seed", type=int, default=None, help=f"generator seed (default ${SEED_ENV} or 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hhh", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="compute approximate HHHs")
    _add_hierarchy(run)
    _add_input(run)
    run.add_argument("--epsilon", default="0.01")
    run.add_argument("--phi", default="0.05")
    run.add_argument("--mode", choices=["weighted", "unitary"], default="weighted")
    run.add_argument("--capacity", type=int, default=None, help="counters per node")
    run.add_argument("--method", choices=["auto", "1d", "2d", "nd"], default="auto")
    run.add_argument("--report-format", choices=["json", "csv"], default="json")
    run.add_argument("--out")
    run.add_argument("--save-state", help="write the summaries for a later merge")
    run.set_defaults(func=cmd_run)

    orc = sub.add_parser("oracle", help="exact HHHs and verdict on a report")
    _add_hierarchy(orc)
    _add_input(orc)
    orc.add_argument("--phi", default="0.05")
    orc.add_argument("--epsilon", default=None, help="accuracy width (default: the report's)")
    orc.add_argument("--report", help="JSON report to check")
    orc.add_argument("--out")
    orc.set_defaults(func=cmd_oracle)

    cmp_ = sub.add_parser("compare", help="output size and relative error of a report")
    _add_hierarchy(cmp_)
    _add_input(cmp_)
    cmp_.add_argument("--phi", default="0.05")
    cmp_.add_argument("--report", required=True)
    cmp_.add_argument("--out")
    cmp_.set_defaults(func=cmd_compare)

    mrg = sub.add_parser("merge", help="merge saved states from distributed sites")
    mrg.add_argument("states", nargs="+")
    mrg.add_argument("--out", help="write the merged state here")
    mrg.add_argument("--report", help="write a report of the merged state here")
    mrg.add_argument("--report-format", choices=["json", "csv"], default="json")
    mrg.add_argument("--phi", default=None)
    mrg.set_defaults(func=cmd_merge)

    tc = sub.add_parser("tcam", help="count TCAM operations for a unit stream")
    _add_hierarchy(tc)
    _add_input(tc)
    tc.add_argument("--epsilon", default="0.01")
    tc.add_argument("--exclude-root", action="store_true")
    tc.add_argument("--single-instance", action="store_true")
    tc.add_argument("--cost-table", help="JSON file of per-event operation costs")
    tc.add_argument("--out")
    tc.set_defaults(func=cmd_tcam)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
