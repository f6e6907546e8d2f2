"""Handover counts per strategy and per-plane capability on the reduced Kuiper pair."""
import argparse

from ilclab.constellation import TimeGrid, load_presets
from ilclab.evaluation import handover_count
from ilclab.optimizer import InfeasibleError, TpilcdConfig, build_layer_pair, run_strategy

STRATEGIES = ("greedy", "random", "max-time-weight", "tpilcd")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--slots", type=int, default=60)
    ap.add_argument("--capabilities", type=int, nargs="+", default=[1, 2])
    args = ap.parse_args()
    p = load_presets()
    pair = build_layer_pair(p["kuiper-b-reduced"], p["kuiper-c-reduced"], TimeGrid(n_slots=args.slots), lookahead=30)
    planes = min(pair.candidates.eph_a.layer.spec.planes, pair.candidates.eph_b.layer.spec.planes)
    print("capability,k,strategy,handovers")
    for c in args.capabilities:
        k = c * planes
        for name in STRATEGIES:
            try:
                s = run_strategy(name, pair, k, 0, TpilcdConfig(max_per_plane=c))
            except InfeasibleError as exc:
                print(f"# {name} at capability {c}: {exc}")
                continue
            print(f"{c},{k},{name},{handover_count(s.assignments).total}", flush=True)


if __name__ == "__main__":
    main()
