"""Deviation of the product formula from the frozen semigroup as n doubles."""

import argparse

from loewner.evolution import family, frozen_semigroup, product_formula_map
from loewner.fields import make_field


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--expr", default="(1+i*t)*(z-1)^2")
    ap.add_argument("-t", type=float, default=0.0)
    ap.add_argument("-r", type=float, default=1.0)
    ap.add_argument("-z", type=complex, default=0j)
    ap.add_argument("--max-n", type=int, default=64)
    args = ap.parse_args(argv)

    F = make_field({"kind": "general", "expr": args.expr})
    fam = family(F)
    exact = complex(frozen_semigroup(F, args.t, args.r, args.z))
    print(f"frozen semigroup value {exact:.12g}")
    print(f"{'n':>5} {'deviation':>12} {'ratio':>7}")
    prev, n = None, 1
    while n <= args.max_n:
        dev = abs(product_formula_map(fam, args.t, args.r, n, args.z) - exact)
        ratio = f"{dev / prev:7.3f}" if prev else ""
        print(f"{n:5d} {dev:12.4e} {ratio}")
        prev, n = dev, 2 * n


if __name__ == "__main__":
    main()
