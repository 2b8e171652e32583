"""Contraction ratio of the first-order tail map as the exterior radius grows.

    python3 scripts/contraction_sweep.py --alpha 0.2 --radii 0.5 1 2 4
"""

import argparse
import json

from nonrad.extsolve import Nonlinearity
from nonrad.fixpoint import FixpointConfig, iterate_to_fixed_point


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--alpha", type=float, default=0.2)
    ap.add_argument("--radii", type=float, nargs="+", default=[0.5, 1.0, 2.0, 4.0])
    ap.add_argument("--step", type=float, default=1 / 16)
    ap.add_argument("--s-max", type=float, default=32.0)
    args = ap.parse_args()
    F = Nonlinearity("focusing")
    rows = []
    for R in args.radii:
        res = iterate_to_fixed_point(FixpointConfig(args.alpha, R=R, step=args.step, s_max=args.s_max), F)
        rows.append({"R": R, "iters": res.iters, "max_ratio": res.max_ratio, "tail_norm": res.tail_norms[-1]})
        print(f"R={R:6.3f}  iters={res.iters:2d}  max_ratio={res.max_ratio:.3e}  tail={res.tail_norms[-1]:.3e}")
    print(json.dumps(rows))


if __name__ == "__main__":
    main()
