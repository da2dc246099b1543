"""Empirical prime-set densities for the fixture curves at successive doublings.

    python scripts/density_experiment.py [--limit 1000000] [--out densities.tsv]
"""

import argparse
import sys

from twistlab.census import prime_census
from twistlab.lmfdb import fetch_curve, fixture_labels
from twistlab.verify import profile_from_record

SETS = ("omega", "M", "P", "Q")


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--limit", type=int, default=10**6)
    ap.add_argument("--out", default=None)
    args = ap.parse_args(argv)
    out = open(args.out, "w") if args.out else sys.stdout
    out.write("curve\tX\tprimes\t" + "\t".join(SETS) + "\n")
    for label in fixture_labels():
        P = profile_from_record(fetch_curve(label, offline=True))
        X = 1000
        while X <= args.limit:
            pc = prime_census(P, X)
            dens = pc.densities
            out.write(f"{label}\t{X}\t{pc.population}\t" + "\t".join(f"{dens[k]:.5f}" for k in SETS) + "\n")
            X *= 2
        print(f"{label}: image {P.mod2_image.value}, predicted density(Omega) {P.mod2_image.omega_density}",
              file=sys.stderr)


if __name__ == "__main__":
    main()
