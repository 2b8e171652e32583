"""Command-line front end.

Subcommands: construct, evolve, charnums, translate, verify, decayfit.
Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 numerical non-convergence. Artifacts go to --out, else $NONRAD_OUT_DIR,
else ./nonrad_out.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .charnum import ConvergenceError, alpha_fit, beta_fit, charnums_exterior, decay_rate_fit, default_window
from .extsolve import DivergenceError, Nonlinearity, snapshot_csv_columns, solve_exterior
from .fixpoint import ExtractionError, FixpointConfig, NonContractionError, iterate_to_fixed_point
from .freewave import load_data_csv, save_data_csv
from .grid_profile import GridDomainError, l2_tail_many, load_profile_csv, save_profile_csv
from .io_utils import atomic_write_json, to_json, write_csv

log = logging.getLogger("nonrad")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NONCONV = 0, 1, 2, 3


class InputError(Exception):
    pass


def _out_dir(args: argparse.Namespace) -> Path:
    base = args.out or os.environ.get("NONRAD_OUT_DIR") or "nonrad_out"
    return Path(base)


def _merge_config(args: argparse.Namespace, keys: Sequence[str]) -> dict[str, Any]:
    """Flat JSON config file, overridden by flags given on the command line."""
    cfg: dict[str, Any] = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config: {exc}") from exc
        if not isinstance(cfg, dict):
            raise InputError("config must be a flat JSON object")
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


_FIX_KEYS = ("alpha", "beta", "R", "c", "tol", "max_iters", "T_extract", "step", "s_max", "r_max", "mask", "fill")


def _fix_config(cfg: dict[str, Any]) -> FixpointConfig:
    known = {k: cfg[k] for k in _FIX_KEYS if k in cfg}
    known.setdefault("alpha", 0.0)
    try:
        return FixpointConfig(**known)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def _nonlinearity(cfg: dict[str, Any]) -> Nonlinearity:
    return Nonlinearity(cfg.get("kind", "focusing"), float(cfg.get("gamma", 1.0)))


# ---------------------------------------------------------------- commands


def cmd_construct(args: argparse.Namespace) -> int:
    cfg = _merge_config(args, _FIX_KEYS + ("kind", "order", "gamma"))
    order = cfg.get("order", "first")
    if order not in ("first", "second"):
        raise InputError("order must be 'first' or 'second'")
    fc = _fix_config(cfg)
    F = _nonlinearity(cfg)
    res = iterate_to_fixed_point(fc, F, order, keep_iterates=True)
    out = _out_dir(args)
    rec = res.record()
    rec["resolved_config"] = {**cfg, "order": order, "kind": F.kind, "gamma": F.gamma}
    from .dynamics import measure_charnums

    ref_G = res.reference.G_alpha if res.reference is not None else res.G_star
    a, b, rho = measure_charnums(res.sol, 0.0, ref_G)
    rec["recovered"] = {"alpha": a, "beta": b if order == "second" else None, "rho": rho}
    atomic_write_json(out / "run.json", rec)
    save_profile_csv(out / "profile.csv", res.G_star)
    for k, G in enumerate(res.iterates):
        save_profile_csv(out / "iterates" / f"iterate_{k:03d}.csv", G)
    header, cols = snapshot_csv_columns(res.sol)
    write_csv(out / "snapshots.csv", header, cols)
    from .dynamics import snapshot_data

    save_data_csv(out / "data_t0.csv", snapshot_data(res.sol, 0.0))
    print(to_json({k: rec[k] for k in ("alpha", "beta", "order", "R", "iters", "recovered")}), end="")
    return EXIT_OK


def cmd_evolve(args: argparse.Namespace) -> int:
    cfg = _merge_config(args, ("R", "T", "dt", "kind", "gamma", "mask", "snapshot_dt", "r_max"))
    try:
        init = load_data_csv(args.data) if args.data else load_profile_csv(args.profile)
    except (OSError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    F = _nonlinearity(cfg)
    step = init.step if hasattr(init, "u0") else init.grid.step
    sol = solve_exterior(
        init,
        F,
        float(cfg.get("R", 1.0)),
        float(cfg.get("T", 1.0)),
        float(cfg.get("dt", step)),
        mask=cfg.get("mask", "sharp"),
        r_max=cfg.get("r_max"),
        snapshot_dt=cfg.get("snapshot_dt"),
    )
    out = _out_dir(args)
    header, cols = snapshot_csv_columns(sol)
    write_csv(out / "snapshots.csv", header, cols)
    summary = {"config": sol.config, "diagnostics": sol.diagnostics, "window": [-sol.T, sol.T]}
    atomic_write_json(out / "evolve.json", summary)
    print(to_json(summary), end="")
    return EXIT_OK


def cmd_charnums(args: argparse.Namespace) -> int:
    try:
        d = load_data_csv(args.data)
        d_ref = load_data_csv(args.reference) if args.reference else None
    except (OSError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    if args.method == "fit":
        window = tuple(args.window) if args.window else default_window(d.r_grid[0], d.r_max)
        alpha, res = alpha_fit(d, window)
        beta, res_b = (0.0, 0.0) if d_ref is None else beta_fit(d, d_ref, window)
        out = {"alpha": alpha, "beta": beta, "method": "asymptotic_fit", "window": list(window), "residual": max(res, res_b)}
    else:
        rho = args.rho if args.rho is not None else _default_rho(d)
        G_ref = None
        if d_ref is not None:
            from .freewave import profile_from_data

            G_ref = profile_from_data(d_ref)
        out = charnums_exterior(d, rho, G_ref).to_dict()
    text = to_json(out)
    if args.out:
        atomic_write_json(Path(args.out) / "charnums.json", out)
    print(text, end="")
    return EXIT_OK


def _default_rho(d) -> float:
    """First node with data, but no closer to the origin than r_max/16."""
    nz = np.nonzero((d.u0 != 0) | (d.u1 != 0))[0]
    first = float(d.r_grid[nz[0]]) if nz.size else float(d.r_grid[0])
    target = max(first, d.r_max / 16)
    return float(d.r_grid[np.searchsorted(d.r_grid, target - 1e-12)])


def cmd_translate(args: argparse.Namespace) -> int:
    from .dynamics import translate_and_measure

    cfg = _merge_config(args, _FIX_KEYS + ("kind", "gamma"))
    fc = _fix_config(cfg)
    F = _nonlinearity(cfg)
    ref = iterate_to_fixed_point(FixpointConfig(**{**fc.to_dict(), "beta": 0.0}), F, "first")
    res = ref if fc.beta == 0 else iterate_to_fixed_point(fc, F, "second", ref.as_reference())
    reports = [translate_and_measure(res.sol, t0, ref.G_star).to_dict() for t0 in args.t0]
    out = {"alpha": fc.alpha, "beta": fc.beta, "reference_id": ref.run_id, "reports": reports}
    atomic_write_json(_out_dir(args) / "translate.json", out)
    print(to_json(out), end="")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    from .suites import SUITES, run_suite

    if not args.suite or args.suite not in SUITES:
        print(f"usage: nonrad verify {{{','.join(SUITES)}}} [--fast]", file=sys.stderr)
        return EXIT_USAGE
    results = run_suite(args.suite, fast=args.fast)
    for r in results:
        print(r.line())
    if args.json:
        atomic_write_json(Path(args.json), [r.to_dict() for r in results])
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_decayfit(args: argparse.Namespace) -> int:
    try:
        if args.profile:
            G = load_profile_csv(args.profile)
            r = np.geomspace(args.r_min, args.r_max, args.n)
            values = (r, l2_tail_many(G, r))
        else:
            rows = np.loadtxt(args.csv, delimiter=",", skiprows=1, ndmin=2)
            values = (rows[:, 0], rows[:, 1])
    except (OSError, ValueError, IndexError) as exc:
        raise InputError(str(exc)) from exc
    slope = decay_rate_fit(values)
    print(to_json({"slope": slope, "radii": [float(values[0][0]), float(values[0][-1])]}), end="")
    return EXIT_OK


# ----------------------------------------------------------------- parser


def _fix_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat JSON config; flags override it")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--R", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--T-extract", dest="T_extract", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--s-max", dest="s_max", type=float)
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--mask", choices=["sharp", "smooth"])
    p.add_argument("--fill", choices=["affine", "parabolic"])
    p.add_argument("--kind", choices=["focusing", "defocusing"])
    p.add_argument("--gamma", type=float)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nonrad", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="fixed-point construction")
    _fix_flags(p)
    p.add_argument("--order", choices=["first", "second"])
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("evolve", help="exterior evolution from data or a profile")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="CSV r,u0,u1")
    src.add_argument("--profile", help="CSV s,value")
    p.add_argument("--config")
    p.add_argument("--R", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--snapshot-dt", dest="snapshot_dt", type=float)
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--mask", choices=["sharp", "smooth"])
    p.add_argument("--kind", choices=["focusing", "defocusing"])
    p.add_argument("--gamma", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("charnums", help="characteristic numbers of a data file")
    p.add_argument("data", help="CSV r,u0,u1")
    p.add_argument("--reference", help="reference data CSV for beta")
    p.add_argument("--method", choices=["exterior", "fit"], default="exterior")
    p.add_argument("--rho", type=float)
    p.add_argument("--window", type=float, nargs=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_charnums)

    p = sub.add_parser("translate", help="translation law for a constructed solution")
    _fix_flags(p)
    p.add_argument("--t0", type=float, nargs="+", default=[0.25, 0.5, 1.0])
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("verify", help="acceptance suites")
    p.add_argument("suite", nargs="?", default="")
    p.add_argument("--fast", action="store_true")
    p.add_argument("--json", help="write results to this path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("decayfit", help="log-log decay slope")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--csv", help="CSV r,norm")
    g.add_argument("--profile", help="profile CSV; fits its L2 tails")
    p.add_argument("--r-min", dest="r_min", type=float, default=2.0)
    p.add_argument("--r-max", dest="r_max", type=float, default=20.0)
    p.add_argument("--n", type=int, default=12)
    p.set_defaults(func=cmd_decayfit)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GridDomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonContractionError, DivergenceError, ConvergenceError, ExtractionError) as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONV


if __name__ == "__main__":
    raise SystemExit(main())
