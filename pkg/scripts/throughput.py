"""Throughput proxy gain over isolated layers against k on Globalstar + Celestri."""
import argparse
from dataclasses import replace
from importlib import resources

from ilclab.config import load_scenario
from ilclab.runner import build_stack, evaluate_run, rate_params, run_stack


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ks", type=int, nargs="+", default=[4, 8, 12, 16, 24])
    ap.add_argument("--algorithm", default="tpilcd")
    args = ap.parse_args()
    with resources.as_file(resources.files("ilclab") / "data" / "scenarios" / "globalstar-celestri.yaml") as p:
        sc = load_scenario(p)
    sc = replace(sc, time=replace(sc.time, n_slots=20, lookahead=20))
    stack = build_stack(sc)
    params, ref = rate_params(stack)
    base = evaluate_run(stack, run_stack(stack, "none", 0, 0), params).extra["throughput"].network_bps
    print(f"# reference link {ref:.1f} km, isolated proxy {base / 1e9:.3f} Gbps")
    print("k,network_gbps,gain")
    for k in args.ks:
        ev = evaluate_run(stack, run_stack(stack, args.algorithm, k, 0), params, baseline_bps=base)
        print(f"{k},{ev.extra['throughput'].network_bps / 1e9:.3f},{ev.extra['throughput_gain']:.4f}", flush=True)


if __name__ == "__main__":
    main()
