"""Command-line front end: ``ilclab run|compare|sweep|presets``."""
from __future__ import annotations

import argparse
import json
import math
import platform
import sys
from dataclasses import replace
from pathlib import Path

import networkx
import numpy
import scipy
import yaml

from . import __version__
from .config import ConfigError, Scenario, load_scenario
from .constellation import load_presets, preset_pairs
from .optimizer.common import InfeasibleError
from .optimizer.exact import BudgetExceeded
from .optimizer.strategies import STRATEGIES
from .runner import (analytic_bound, build_stack, evaluate_run, log_fit, rate_params, run_stack,
                     traffic_inputs, write_csv)

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2
ARTIFACTS = ("metrics.json", "apl_vs_k.csv", "cost_vs_k.csv", "handovers_vs_capability.csv",
             "throughput_vs_k.csv", "hops_vs_time.csv", "manifest.json")


def parse_k_range(text: str) -> tuple[int, int]:
    for sep in ("..", ":", "-"):
        if sep in text:
            lo, hi = text.split(sep, 1)
            break
    else:
        raise argparse.ArgumentTypeError(f"expected LOW..HIGH, got {text!r}")
    try:
        lo_i, hi_i = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers in {text!r}") from None
    if lo_i < 0 or hi_i < lo_i:
        raise argparse.ArgumentTypeError(f"need 0 <= LOW <= HIGH, got {text!r}")
    return lo_i, hi_i


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ilclab", description="Inter-layer link deployment experiments.")
    sub = p.add_subparsers(dest="verb", required=True)
    for verb, text in (("run", "run one algorithm at k or over a k range"),
                       ("compare", "run several algorithms on the same scenario"),
                       ("sweep", "run one algorithm over a k range")):
        s = sub.add_parser(verb, help=text)
        s.add_argument("--config", required=True, help="scenario YAML")
        s.add_argument("--seed", type=int, help="override the scenario seed")
        s.add_argument("--out", help="output directory (default: scenario output)")
        s.add_argument("--algorithm", help="strategy name" + (", comma-separated" if verb == "compare" else ""))
        s.add_argument("--k", type=int, help="number of ILCs per interface")
        s.add_argument("--k-range", type=parse_k_range, help="LOW..HIGH inclusive")
        s.add_argument("--slots", type=int, help="horizon length in slots")
    sub.add_parser("presets", help="list built-in layers and pairs")
    return p


def apply_overrides(sc: Scenario, args) -> Scenario:
    opt, time = sc.optimizer, sc.time
    if args.algorithm:
        names = [a.strip() for a in args.algorithm.split(",") if a.strip()]
        for n in names:
            if n not in STRATEGIES:
                raise ConfigError("--algorithm", f"unknown algorithm {n!r}; choose from {', '.join(STRATEGIES)}")
        opt = replace(opt, algorithm=names[0], compare=tuple(names))
    if args.k is not None:
        if args.k < 0:
            raise ConfigError("--k", "must be >= 0")
        opt = replace(opt, k=args.k, k_range=None)
    if args.k_range is not None:
        opt = replace(opt, k_range=args.k_range)
    if args.slots is not None:
        if args.slots < 1:
            raise ConfigError("--slots", "must be >= 1")
        time = replace(time, n_slots=args.slots)
    seed = sc.seed if args.seed is None else args.seed
    if seed < 0:
        raise ConfigError("--seed", "must be >= 0")
    return replace(sc, optimizer=opt, time=time, seed=seed, output=args.out or sc.output)


def manifest(sc: Scenario, verb: str) -> dict:
    return {
        "verb": verb,
        "scenario": sc.canonical(),
        "config_sha256": sc.digest(),
        "seed": sc.seed,
        "versions": {
            "ilclab": __version__,
            "python": platform.python_version(),
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
            "networkx": networkx.__version__,
            "pyyaml": yaml.__version__,
        },
    }


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, (numpy.integer,)):
        return int(obj)
    if isinstance(obj, (numpy.floating,)):
        return _clean(float(obj))
    return obj


def execute(sc: Scenario, algorithms: list[str], verb: str) -> dict:
    """Run every algorithm at every k and write the artifact set into ``sc.output``."""
    out = Path(sc.output)
    out.mkdir(parents=True, exist_ok=True)
    stack = build_stack(sc)
    params, ref_km = rate_params(stack)
    flows, cities = traffic_inputs(sc)
    ks = sc.optimizer.ks()

    base_run = run_stack(stack, "none", 0, sc.seed)
    base = evaluate_run(stack, base_run, params, flows, cities)
    base_bps = base.extra["throughput"].network_bps

    results = []
    for algo in algorithms:
        for k in ks:
            ev = base if k == 0 else evaluate_run(stack, run_stack(stack, algo, k, sc.seed), params,
                                                  flows, cities, base_bps)
            results.append((algo, k, ev))

    rows_apl, rows_cost, rows_tp, rows_hops, table = [], [], [], [], []
    metrics = {"scenario": sc.name, "verb": verb, "reference_km": ref_km, "runs": []}
    for algo, k, ev in results:
        r, tp = ev.report, ev.extra["throughput"]
        rows_apl.append([algo, k, r.apl_exact, r.apl_analytic])
        rows_cost.append([algo, k, r.cost])
        gain = tp.network_bps / base_bps - 1.0
        rows_tp.append([algo, k, tp.crosslayer_bps, tp.isl_sum_bps, tp.literal_bps, tp.network_bps, gain])
        for t, h in enumerate(r.series.get("mean_hops", [])):
            rows_hops.append([algo, k, t, h, r.series["served_flows"][t], r.series["total_throughput_bps"][t]])
        table.append([algo, k, r.apl_exact, r.cost, r.handover_count, tp.network_bps])
        metrics["runs"].append({"algorithm": algo, "k": k, "throughput_gain": gain, **r.to_dict()})
    fits = {}
    for algo in algorithms:
        pts = [(k, ev.report.apl_exact) for a, k, ev in results if a == algo and k >= 1]
        if len(pts) >= 2:
            fits[algo] = log_fit(*zip(*pts))
    metrics["apl_log_fit"] = fits
    metrics["k_bound"] = analytic_bound(stack)
    metrics["baseline"] = {"apl_reachable": base.report.apl_exact, "throughput_proxy_bps": base_bps}

    rows_cap = []
    smaller_layer_n = min(min(p.topo_a.n, p.topo_b.n) for p in stack.pairs)
    planes = min(min(p.candidates.eph_a.layer.spec.planes, p.candidates.eph_b.layer.spec.planes)
                 for p in stack.pairs)
    for c in sc.optimizer.capabilities:
        k = min(c * planes, smaller_layer_n)
        for algo in algorithms:
            try:
                run = run_stack(stack, algo, k, sc.seed, max_per_plane=c)
            except (InfeasibleError, BudgetExceeded) as exc:
                print(f"capability {c}, {algo}: skipped ({exc})", file=sys.stderr)
                continue
            ho = evaluate_run(stack, run, params).report.handover_count
            rows_cap.append([algo, c, k, ho])

    write_csv(out / "apl_vs_k.csv", ["algorithm", "k", "apl_bfs", "apl_analytic"], rows_apl)
    write_csv(out / "cost_vs_k.csv", ["algorithm", "k", "cost"], rows_cost)
    write_csv(out / "throughput_vs_k.csv", ["algorithm", "k", "crosslayer_bps", "isl_sum_bps",
                                            "literal_bps", "network_bps", "gain_vs_isolated"], rows_tp)
    write_csv(out / "hops_vs_time.csv", ["algorithm", "k", "slot", "mean_hops", "served_flows",
                                         "total_throughput_bps"], rows_hops)
    write_csv(out / "handovers_vs_capability.csv", ["algorithm", "capability", "k", "handovers"], rows_cap)
    if verb == "compare":
        write_csv(out / "comparison.csv", ["algorithm", "k", "apl", "cost", "handovers",
                                           "throughput_proxy_bps"], table)
    _dump(out / "metrics.json", metrics)
    _dump(out / "manifest.json", manifest(sc, verb))
    return {"table": table, "metrics": metrics}


def print_table(table) -> None:
    head = f"{'algorithm':<16} {'k':>4} {'apl':>8} {'cost':>9} {'handovers':>9} {'proxy_Gbps':>11}"
    print(head)
    for algo, k, apl, c, ho, tp in table:
        cs = "-" if c is None or (isinstance(c, float) and math.isnan(c)) else f"{c:.3f}"
        print(f"{algo:<16} {k:>4} {apl:>8.4f} {cs:>9} {ho:>9} {tp / 1e9:>11.3f}")


def cmd_presets() -> int:
    for name, spec in load_presets().items():
        print(f"{name:<18} {spec.label()}")
    print()
    for name, layers in preset_pairs().items():
        print(f"{name:<22} {' + '.join(layers)}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verb == "presets":
        return cmd_presets()
    try:
        sc = apply_overrides(load_scenario(args.config), args)
        if args.verb == "sweep" and sc.optimizer.k_range is None:
            raise ConfigError("optimizer.k_range", "sweep needs a k range (config or --k-range)")
        algos = list(sc.optimizer.compare) if args.verb == "compare" else [sc.optimizer.algorithm]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        res = execute(sc, algos, args.verb)
    except (InfeasibleError, BudgetExceeded, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print_table(res["table"])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
