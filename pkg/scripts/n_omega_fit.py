"""Squarefree sweep for one curve and the log-power fits of its counting functions.

    python scripts/n_omega_fit.py --label 53a1 --limit 10000000 --targets 1,3,5 --tsv fit.tsv
"""

import argparse
import os

from twistlab.census import squarefree_census
from twistlab.lmfdb import fetch_curve
from twistlab.verify import profile_from_record


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--label", default="53a1")
    ap.add_argument("--limit", type=int, default=10**7)
    ap.add_argument("--targets", default="")
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--tsv", default=None)
    args = ap.parse_args(argv)
    targets = [int(t) for t in args.targets.split(",") if t]
    P = profile_from_record(fetch_curve(args.label, offline=True))
    r = squarefree_census(P, args.limit, targets, workers=args.workers)
    print(f"{P.name}: X={r.X} population={r.population} n_Omega={r.n_Omega} n_E1_lower={r.n_E1_lower}")
    for name, fit in sorted(r.fit.items()):
        if "exponent_hat" not in fit:
            print(f"  {name}: {fit['diagnostics']}")
            continue
        ratios = fit["ratio_series"]
        print(f"  {name}: exponent {fit['exponent_hat']:.4f} expected {fit['alpha_expected']} "
              f"c_hat {fit['c_hat']:.4f} last ratio {ratios[-1][1]:.4f}")
    if args.tsv:
        with open(args.tsv, "w") as fh:
            fh.write("series\tX\tcount\tratio\n")
            for name, fit in sorted(r.fit.items()):
                counts = dict(r.series[name])
                for x, v in fit.get("ratio_series", []):
                    fh.write(f"{name}\t{x}\t{counts[x]}\t{v:.6g}\n")


if __name__ == "__main__":
    main()
