"""Command-line entry point.

Subcommands: discover (print each source's path set), allocate (per-path
quotas), run (one simulation, metrics CSV + summary), experiment (scheme or
framework suite), gen-topology (seeded uniform deployment).

Exit codes: 0 success, 1 usage error, 2 scenario error, 3 simulation error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

from .allocator import AllocationInput, PathParams, scheme_allocation
from .engine import Engine, LivelockError
from .experiments import (
    Report,
    configured,
    metrics_rows,
    run_multisource_frameworks,
    run_scheme_comparison,
    write_plot_data,
    write_rows_csv,
)
from .model import ScenarioError
from .scenario import (
    build_scenario,
    generate_random_scenario,
    load_scenario,
    save_scenario,
    scenario_hash,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SCENARIO = 2
EXIT_SIMULATION = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="wsn-multipath",
                     description="multi-source multipath routing simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("--scenario", required=True, help="scenario YAML file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--format", choices=("csv", "text", "json-lines"),
                       default="text")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("-v", "--verbose", action="count", default=0)

    p = sub.add_parser("discover", help="print discovered/declared path sets")
    common(p)

    p = sub.add_parser("allocate", help="per-path packet quotas")
    common(p)
    p.add_argument("--packets", type=int, default=None,
                   help="override packets per source")
    p.add_argument("--scheme", type=int, choices=(1, 2, 3), default=None)
    p.add_argument("--source", type=int, default=None,
                   help="restrict output to one source")
    p.add_argument("--choke", action="store_true",
                   help="probe contention after a warmup run before allocating")

    p = sub.add_parser("run", help="simulate one scenario")
    common(p)
    p.add_argument("--packets", type=int, default=None)
    p.add_argument("--scheme", type=int, choices=(1, 2, 3), default=None)
    p.add_argument("--trace", action="store_true", help="write the event trace")
    p.add_argument("--plot-data", action="store_true")

    p = sub.add_parser("experiment", help="run a packaged suite")
    common(p)
    p.add_argument("--suite", choices=("schemes", "frameworks"), required=True)
    p.add_argument("--packets", type=int, nargs="+", default=[100, 200])
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--plot-data", action="store_true")

    p = sub.add_parser("gen-topology", help="write a seeded uniform deployment")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--area", type=float, required=True, help="square side, meters")
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--packets", type=int, default=100)
    p.add_argument("--out", required=True, help="output scenario file")
    return parser


def _out_dir(args) -> str:
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def _load(args):
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario.seed = args.seed
    return scenario


def _emit_rows(rows: list[dict], args, name: str) -> None:
    if args.format == "csv":
        if args.out:
            write_rows_csv(rows, os.path.join(_out_dir(args), name))
        else:
            cols: list[str] = []
            for row in rows:
                for key in row:
                    if key not in cols:
                        cols.append(key)
            writer = csv.writer(sys.stdout)
            writer.writerow(cols)
            for row in rows:
                writer.writerow([row.get(c, "") for c in cols])
    elif args.format == "json-lines":
        import json
        for row in rows:
            print(json.dumps(row, sort_keys=True))
    else:
        cols = []
        for row in rows:
            for key in row:
                if key not in cols:
                    cols.append(key)
        table = [cols] + [[str(r.get(c, "")) for c in cols] for r in rows]
        widths = [max(len(line[i]) for line in table) for i in range(len(cols))]
        for line in table:
            print("  ".join(v.ljust(w) for v, w in zip(line, widths)).rstrip())


def cmd_discover(args) -> int:
    scenario = _load(args)
    topology, specs = build_scenario(scenario)
    rows = []
    for spec in specs:
        for idx, path in enumerate(spec.paths):
            rows.append({
                "source": spec.node_id, "path": idx,
                "route": "-".join(str(n) for n in path.nodes),
                "hops": path.hops, "tau_s": path.tau_s,
                "hop_dist_m": round(path.hop_dist_m, 6),
                "sensing_w": scenario.params.sensing_w,
                "tx_electronics_w": scenario.params.tx_electronics_w,
                "tx_amp_w_per_mk": scenario.params.tx_amp_w_per_mk,
                "tx_bit_time_s": scenario.params.tx_bit_time_s,
                "rx_bit_time_s": scenario.params.rx_bit_time_s,
            })
    _emit_rows(rows, args, "paths.csv")
    return EXIT_OK


def cmd_allocate(args) -> int:
    scenario = _load(args)
    if args.packets is not None or args.scheme is not None:
        scenario = configured(scenario,
                              packets=args.packets,
                              **({"scheme": args.scheme} if args.scheme else {}))
    topology, specs = build_scenario(scenario)
    contention: dict[tuple[int, int], int] = {}
    if args.choke:
        # probe mid-run: a first pass finds the completion time, a second
        # pass samples queue occupancy halfway through the transfer
        first = Engine(scenario).run()
        if first.completion_s > 0.0:
            probing = configured(scenario)
            probing.engine.probe_times = [first.completion_s / 2.0]
            warm = Engine(probing).run()
            for key, history in warm.contention_history.items():
                contention[key] = history[-1]
    rows = []
    for spec in specs:
        if args.source is not None and spec.node_id != args.source:
            continue
        paths = [PathParams(p.hops, p.tau_s,
                            contention.get((spec.node_id, i), p.contention))
                 for i, p in enumerate(spec.paths)]
        alloc = scheme_allocation(
            scenario.engine.scheme,
            AllocationInput(params=scenario.params, total_packets=spec.packets,
                            paths=paths, source_sink_dist_m=spec.source_sink_dist_m))
        for idx, (p, quota) in enumerate(zip(spec.paths, alloc.quotas)):
            rows.append({
                "source": spec.node_id, "path": idx,
                "route": "-".join(str(n) for n in p.nodes),
                "hops": p.hops, "contention": paths[idx].contention,
                "quota": quota, "raw_bound": alloc.raw_quotas[idx],
                "budget_edp_js": alloc.budget_edp,
                "exceeds_bound": alloc.exceeds_bound[idx],
            })
    _emit_rows(rows, args, "allocation.csv")
    return EXIT_OK


def cmd_run(args) -> int:
    scenario = _load(args)
    overrides = {}
    if args.trace:
        overrides["record_trace"] = True
    if args.scheme is not None:
        overrides["scheme"] = args.scheme
    if args.packets is not None or overrides:
        scenario = configured(scenario, packets=args.packets, **overrides)
    engine = Engine(scenario, seed=args.seed)
    metrics = engine.run()
    rows = metrics_rows(metrics)
    out = _out_dir(args) if args.out else None
    if out:
        write_rows_csv(rows, os.path.join(out, "metrics.csv"))
        with open(os.path.join(out, "summary.txt"), "w") as fh:
            fh.write(_summary_text(metrics))
        if args.trace:
            with open(os.path.join(out, "trace.txt"), "w") as fh:
                fh.write("\n".join(metrics.trace) + ("\n" if metrics.trace else ""))
        if args.plot_data:
            _run_plot_data(metrics, out)
        if args.verbose:
            print(f"wrote {out}/metrics.csv")
    else:
        _emit_rows(rows, args, "metrics.csv")
    return EXIT_OK


def _summary_text(metrics) -> str:
    lines = [
        f"scenario: {metrics.scenario_name} ({metrics.scenario_hash}) seed {metrics.seed}",
        f"completion: {metrics.completion_s!r} s over {metrics.event_count} events",
        f"delivered {metrics.total_delivered} / injected {metrics.total_injected} "
        f"(overflow {metrics.dropped_overflow}, fault {metrics.dropped_fault}, "
        f"retransmissions {metrics.retransmissions}, duplicates {metrics.duplicates})",
        f"energy spent: {metrics.energy_spent_j!r} J "
        f"{ {k: round(v, 9) for k, v in metrics.energy_breakdown_j.items()} }",
    ]
    for src in sorted(metrics.per_source_completion_s):
        lines.append(
            f"source {src}: completion {metrics.per_source_completion_s[src]!r} s, "
            f"comm energy {metrics.per_source_comm_j[src]!r} J")
    return "\n".join(lines) + "\n"


def _run_plot_data(metrics, out: str) -> None:
    alloc = [(idx + 1, stats["quota"])
             for (_, idx), stats in sorted(metrics.per_path.items())]
    delay = [(idx + 1, stats["sim_delay_s"])
             for (_, idx), stats in sorted(metrics.per_path.items())]
    for name, series in (("allocation_per_path.dat", alloc),
                         ("delay_per_path.dat", delay)):
        with open(os.path.join(out, name), "w") as fh:
            for x, y in series:
                fh.write(f"{x} {y!r}\n")


def cmd_experiment(args) -> int:
    scenario = _load(args)
    if args.suite == "schemes":
        report = run_scheme_comparison(scenario, args.packets, jobs=args.jobs)
    else:
        report = run_multisource_frameworks(scenario, args.packets, jobs=args.jobs)
    out = _out_dir(args) if args.out else None
    if out:
        report.to_csv(os.path.join(out, f"{args.suite}.csv"))
        with open(os.path.join(out, f"{args.suite}.txt"), "w") as fh:
            fh.write(report.to_text())
        if args.plot_data:
            write_plot_data(report, out)
        if args.verbose:
            print(f"wrote {out}/{args.suite}.csv")
    else:
        sys.stdout.write(report.to_text())
    return EXIT_OK


def cmd_gen_topology(args) -> int:
    scenario, connected = generate_random_scenario(
        args.count, args.area, args.radius, args.seed, packets=args.packets)
    if not connected:
        print(f"warning: source {scenario.sources[0].id} cannot reach sink "
              f"{scenario.sink} at radius {args.radius}", file=sys.stderr)
    out_parent = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(out_parent, exist_ok=True)
    save_scenario(scenario, args.out)
    print(f"{args.out}: {args.count} nodes, seed {args.seed}, "
          f"hash {scenario_hash(scenario)}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "discover": cmd_discover,
        "allocate": cmd_allocate,
        "run": cmd_run,
        "experiment": cmd_experiment,
        "gen-topology": cmd_gen_topology,
    }
    try:
        return handlers[args.command](args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except (ValueError, KeyError) as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except LivelockError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION


if __name__ == "__main__":
    raise SystemExit(main())
