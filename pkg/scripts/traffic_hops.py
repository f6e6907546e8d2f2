"""Mean hop count of city-to-city flows per slot for several strategies."""
import argparse

import numpy as np

from ilclab.constellation import TimeGrid, load_presets
from ilclab.optimizer import build_layer_pair, run_strategy
from ilclab.traffic import generate_flows, hop_series, load_cities, sample_cities_path


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=20)
    ap.add_argument("--slots", type=int, default=60)
    ap.add_argument("--flows", type=int, default=1000)
    ap.add_argument("--access", type=int, nargs="+", default=[1])
    ap.add_argument("--strategies", nargs="+", default=["none", "greedy", "max-time-weight", "tpilcd"])
    args = ap.parse_args()
    p = load_presets()
    pair = build_layer_pair(p["kuiper-b-reduced"], p["kuiper-c-reduced"], TimeGrid(n_slots=args.slots), lookahead=30)
    cities = load_cities(sample_cities_path())
    flows = generate_flows(cities, args.flows, 0)
    ephs = [pair.candidates.eph_a, pair.candidates.eph_b]
    series = {}
    for name in args.strategies:
        sched = run_strategy(name, pair, args.k, 0)
        series[name] = hop_series(flows, cities, ephs, [pair.supra(a) for a in sched.assignments],
                                  range(args.slots), tuple(args.access))
    print("slot," + ",".join(series))
    for t in range(args.slots):
        print(f"{t}," + ",".join(f"{s.mean_hops[t]:.4f}" for s in series.values()))
    for name, s in series.items():
        print(f"# {name}: mean {np.nanmean(s.mean_hops):.4f} std {s.std:.4f}")


if __name__ == "__main__":
    main()
