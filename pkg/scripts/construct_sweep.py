"""Build first-order solutions for several alpha and report the recovered numbers.

    python3 scripts/construct_sweep.py --alphas 0.02 0.05 0.1
"""

import argparse

from nonrad.charnum import alpha_of
from nonrad.dynamics import measure_charnums
from nonrad.extsolve import Nonlinearity
from nonrad.fixpoint import FixpointConfig, extract_scatter_profiles, iterate_to_fixed_point


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.02, 0.05, 0.1])
    ap.add_argument("--step", type=float, default=1 / 16)
    ap.add_argument("--s-max", type=float, default=32.0)
    ap.add_argument("--kind", choices=["focusing", "defocusing"], default="focusing")
    args = ap.parse_args()
    F = Nonlinearity(args.kind)
    print("alpha      R      iters  ratio      alpha(G*)   alpha(ext)  C")
    for a in args.alphas:
        cfg = FixpointConfig(a, step=args.step, s_max=args.s_max)
        res = iterate_to_fixed_point(cfg, F)
        a_ext, _, _ = measure_charnums(res.sol, 0.0, res.G_star)
        C = extract_scatter_profiles(res.sol, cfg.grid).norm_bound_constant
        print(f"{a:<9.4g}  {res.R:<5.3g}  {res.iters:<5d}  {res.max_ratio:.2e}   {alpha_of(res.G_star):.6f}    {a_ext:.6f}    {C}")


if __name__ == "__main__":
    main()
