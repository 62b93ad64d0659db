"""Splitting, commuting and reversing verdicts for every demo field.

Prints one row per demo; for splitting fields all three should agree.
"""

import argparse
import sys

from loewner.demos import demo_catalog
from loewner.evolution import commuting_report, family, reversing_field_identity, reversing_report
from loewner.fields import make_field, splitting_residual
from loewner.holo import polar_grid


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radii", type=int, default=5, help="number of grid radii")
    args = ap.parse_args(argv)
    grid = polar_grid([0.9 * (k + 1) / args.radii for k in range(args.radii)], 16)

    print(f"{'demo':<24} {'bracket':>9} {'split':>6} {'commute':>9} {'reverse':>8} {'identity':>9}")
    disagree = 0
    for d in demo_catalog():
        F = make_field(d.field)
        fam = family(F)
        res, split = splitting_residual(F, sorted(set(d.times) | set(d.s_samples)), grid)
        comm = commuting_report(fam, d.pairs, grid)
        rev = reversing_report(fam, d.triples, grid)
        ident = reversing_field_identity(fam, 0.0, max(d.times), d.u_samples, grid)
        verdicts = (split, comm.verdict, rev.verdict, ident.verdict)
        disagree += len(set(verdicts)) > 1
        print(f"{d.name:<24} {res:9.2e} {str(split):>6} {comm.sup_residual:9.2e} "
              f"{str(rev.verdict):>8} {str(ident.verdict):>9}")
    return 1 if disagree else 0


if __name__ == "__main__":
    sys.exit(main())
