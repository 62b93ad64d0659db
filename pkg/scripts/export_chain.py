"""Write the affine Loewner chain of a splitting field to CSV."""

import argparse

import numpy as np

from loewner.chains import affine_chain, write_chain_csv
from loewner.demos import get_demo
from loewner.fields import make_field
from loewner.holo import polar_grid


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out")
    ap.add_argument("--demo", default="splitting-parabolic")
    ap.add_argument("--s-max", type=float, default=2.0)
    ap.add_argument("--steps", type=int, default=9)
    args = ap.parse_args(argv)

    chain = affine_chain(make_field(get_demo(args.demo).field))
    s_values = np.linspace(0.0, args.s_max, args.steps)
    z = polar_grid([0.3, 0.6, 0.9], 16)
    write_chain_csv(chain, s_values, z, args.out)
    lam = chain.lam(args.s_max)
    print(f"{chain.case} chain, lambda({args.s_max:g}) = {lam:.8g}; "
          f"{len(s_values) * len(z)} rows -> {args.out}")


if __name__ == "__main__":
    main()
