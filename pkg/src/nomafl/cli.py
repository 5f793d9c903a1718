"""Command-line entry points: solve one instance, run a sweep, plot, and
regenerate the high-precision oracle values frozen in the test suite."""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from . import io as nio
from . import oracles
from .sampling import config_from_json
from .schemes import SchemeId, run_scheme
from .sweep import run_sweep, write_rows_csv


def _cmd_solve(args) -> int:
    inst = nio.load_instance(args.instance)
    if args.scheme == "all":
        schemes = list(SchemeId)
    else:
        schemes = [SchemeId(args.scheme)]
    reports = [run_scheme(inst, s) for s in schemes]
    if args.out:
        nio.save_reports(reports, args.out)
    else:
        doc = {"schema_version": nio.SCHEMA_VERSION,
               "reports": [nio.report_to_dict(r) for r in reports]}
        print(json.dumps(doc, indent=2, sort_keys=True))
    for r in reports:
        status = "feasible" if r.feasible else "infeasible"
        print(f"{r.scheme}: {status}, learning error {r.learning_error:.6g}, "
              f"{r.iterations} iterations", file=sys.stderr)
    return 0


def _cmd_sweep(args) -> int:
    with open(args.config) as fh:
        config = config_from_json(fh.read())
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    rows = run_sweep(config)
    write_rows_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return 0


def _cmd_plot(args) -> int:
    from .plotting import emit_plot
    emit_plot(args.csv, args.out)
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


def _oracle_model() -> list[tuple[str, object]]:
    return [
        ("learning_error(K=1, D=400)",
         float(oracles.learning_error_mp([400.0], 100, 3.819, 0.198, 0.231, 50.0))),
        ("learning_error(K=3, D=[350,420,4000])",
         float(oracles.learning_error_mp([350.0, 420.0, 4000.0], 100,
                                         3.819, 0.198, 0.231, 50.0))),
        ("broadcast_time(h=6.6e-11, P=3.162)",
         float(oracles.broadcast_time_mp(6.6e-11, 3.162, 1e6, 1e-19, 2e6))),
    ]


def _oracle_links() -> list[tuple[str, object]]:
    theta = oracles.uplink_theta_two_device_mp(4.0, 2.0, 1.0, 1.0)
    eta, powers = oracles.downlink_root_mp(
        [0.1, 1.0], [1.5, 0.5], 2.0, 1.0, 1.0)
    eta_f, powers_f = oracles.fdma_downlink_root_mp(
        [1e-10, 3e-10], [800.0, 1200.0], 3.1622776601683795, 1e6, 1e-13)
    cap = oracles.slotted_energy_cap_mp(1e-11, 0.05, 2e6, 1e6, 1e-13)
    return [
        ("uplink_theta(gq=[4,2], B=1, n0=1)", float(theta)),
        ("downlink_eta(unit toy)", float(eta)),
        ("downlink_powers(unit toy)", [float(p) for p in powers]),
        ("fdma_downlink_eta(two devices)", float(eta_f)),
        ("fdma_downlink_powers(two devices)", [float(p) for p in powers_f]),
        ("slotted_energy_cap(g=1e-11, budget=0.05 J)", float(cap)),
    ]


def _oracle_harness() -> list[tuple[str, object]]:
    return [
        ("pathloss_db(200 m)", oracles.pathloss_db(200.0)),
        ("mean_gain(200 m)", oracles.mean_gain(200.0)),
    ]


_SUITES = {"model": _oracle_model, "links": _oracle_links,
           "harness": _oracle_harness}


def _cmd_oracle(args) -> int:
    names = list(_SUITES) if args.suite == "all" else [args.suite]
    for name in names:
        print(f"[{name}]")
        for label, value in _SUITES[name]():
            print(f"{label} = {value!r}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nomafl",
        description="Resource allocation and Monte-Carlo benchmarking for "
                    "federated learning over shared wireless links.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one instance file")
    p_solve.add_argument("instance", help="instance JSON file")
    p_solve.add_argument("--scheme", default="NomaAigc",
                         choices=[s.value for s in SchemeId] + ["all"])
    p_solve.add_argument("--out", help="report JSON path (default: stdout)")
    p_solve.set_defaults(func=_cmd_solve)

    p_sweep = sub.add_parser("sweep", help="run a Monte-Carlo sweep to CSV")
    p_sweep.add_argument("config", help="scenario config JSON file")
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.add_argument("--seed", type=int, help="override the config seed")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_plot = sub.add_parser("plot", help="render a sweep CSV to SVG")
    p_plot.add_argument("csv", help="sweep CSV file")
    p_plot.add_argument("--out", required=True, help="output SVG path")
    p_plot.set_defaults(func=_cmd_plot)

    p_oracle = sub.add_parser("oracle",
                              help="print high-precision reference values")
    p_oracle.add_argument("suite", choices=list(_SUITES) + ["all"])
    p_oracle.set_defaults(func=_cmd_oracle)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
