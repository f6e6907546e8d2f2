"""APL against ILC count on Globalstar + Celestri, measured and analytic."""
import argparse
import csv
import sys

from ilclab.constellation import TimeGrid, load_presets
from ilclab.optimizer import TpilcdConfig, build_layer_pair, run_strategy, tpilcd
from ilclab.optimizer.tpilcd import analytic_apl
from ilclab.runner import log_fit
from ilclab.topology import bfs_apl


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k-max", type=int, default=24)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    p = load_presets()
    pair = build_layer_pair(p["globalstar"], p["celestri"], TimeGrid(n_slots=20), lookahead=20)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["k", "tpilcd_bfs", "tpilcd_analytic", "greedy_bfs", "random_bfs"])
    ks, measured = [], []
    for k in range(1, args.k_max + 1):
        res = tpilcd(pair, k, TpilcdConfig(n_slots=1))
        others = [bfs_apl(pair.supra(run_strategy(n, pair, k, args.seed).snapshot)).apl
                  for n in ("greedy", "random")]
        out.writerow([k, f"{res.apl_bfs:.5f}", f"{analytic_apl(pair, res.snapshot):.5f}",
                      *(f"{v:.5f}" for v in others)])
        ks.append(k)
        measured.append(res.apl_bfs)
    fit = log_fit(ks, measured)
    print(f"# fit a + b ln k: a={fit['a']:.4f} b={fit['b']:.4f} R2={fit['r2']:.4f}", file=sys.stderr)


if __name__ == "__main__":
    main()
