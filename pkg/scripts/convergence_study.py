"""Grid refinement of the Duhamel solver against the leapfrog oracle, plus
profile tail decay of a first-order construction.

    python3 scripts/convergence_study.py
"""

import numpy as np

from nonrad.charnum import decay_rate_fit
from nonrad.extsolve import Nonlinearity, fd_oracle_solve, solve_exterior
from nonrad.fixpoint import FixpointConfig, iterate_to_fixed_point
from nonrad.grid_profile import l2_tail_many
from nonrad.suites import bump_data


def solver_ladder() -> None:
    F = Nonlinearity("focusing")
    prev = None
    for h in (1 / 16, 1 / 32, 1 / 64):
        d = bump_data(h)
        kw = dict(snapshot_dt=0.5, mask="smooth", mask_width=0.5)
        a = solve_exterior(d, F, 0.5, 4.0, h, **kw)
        b = fd_oracle_solve(d, F, 0.5, 4.0, h / 2, **kw)
        err = float(np.nanmax(np.abs(a.u - b.u)))
        rate = "" if prev is None else f"  order={np.log2(prev / err):.2f}"
        print(f"h=1/{round(1 / h):<3d} sup|duhamel - leapfrog| = {err:.3e}{rate}")
        prev = err


def tail_decay() -> None:
    res = iterate_to_fixed_point(FixpointConfig(0.05, s_max=64.0), Nonlinearity("focusing"))
    r = np.geomspace(2 * res.R, 24.0, 12)
    tails = l2_tail_many(res.G_star, r)
    print(f"tail L2 slope over [{r[0]:.2f}, {r[-1]:.0f}]: {decay_rate_fit((r, tails)):.3f}")


if __name__ == "__main__":
    solver_ladder()
    tail_decay()
