"""Command-line interface: evolve / slab / eigen / scan / check.

All numeric output goes to files (CSV for arrays, JSON sidecars for
metadata); stdout carries a one-line human summary.  Exit codes: 0 success,
2 invalid configuration, 3 solver non-convergence, 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .convolve import advection, advection_gradient
from .diagnostics import decay_fit, monotonicity_check, moment_check
from .evolver import EvolveConfig, evolve, measure_speed, speed_from_integral
from .grids import Field, Grid1D
from .kernels import ChemoParams, parse_kernel, validate_kernel
from .scan import ScanConfig, run_scan, sandwich_table, write_scan_csv
from .slab import SlabConfig, fixed_point, slab_bounds_check
from .spectral import principal_eigenpair, assemble_potential, slab_drift, slow_regime_certificate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3
EXIT_INTERNAL = 4


def _out_path(name: str, out: str | None) -> Path:
    root = Path(os.environ.get("FKPP_OUT_DIR", "."))
    path = Path(out) if out else Path(name)
    if not path.is_absolute():
        path = root / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_profile(u: Field, v: Field, vx: Field, path: Path, meta: dict) -> None:
    """CSV (x,u,v,v_x at 17 significant digits) plus a JSON metadata sidecar."""
    if u.grid != v.grid or u.grid != vx.grid:
        raise ValueError("profile fields must share a grid")
    with open(path, "w", newline="") as fh:
        fh.write("x,u,v,v_x\n")
        for xi, ui, vi, gi in zip(u.grid.x, u.values, v.values, vx.values):
            fh.write("%.17g,%.17g,%.17g,%.17g\n" % (xi, ui, vi, gi))
    sidecar = dict(meta)
    sidecar["versions"] = {
        "chemofront": __version__,
        "numpy": np.__version__,
    }
    with open(str(path) + ".meta.json", "w") as fh:
        json.dump(sidecar, fh, indent=2, default=str)
        fh.write("\n")


def read_profile(path: str) -> tuple[Field, Field, Field]:
    data = np.genfromtxt(path, delimiter=",", names=True)
    x = data["x"]
    grid = Grid1D(float(x[0]), float(x[-1]), x.size)
    if np.max(np.abs(grid.x - x)) > 1e-9 * max(1.0, grid.dx):
        raise ValueError("profile grid is not uniform")
    u = Field(grid, data["u"], left_ext=1.0, right_ext=0.0)
    v = Field(grid, data["v"])
    vx = Field(grid, data["v_x"])
    return u, v, vx


def _build_parser(defaults: dict | None = None) -> argparse.ArgumentParser:
    """Build the argument parser, optionally seeding flag defaults from a config.

    Defaults must be pushed into every subparser as well: a subcommand parses
    into its own namespace, so main-parser ``set_defaults`` alone is ignored.
    """
    parser = argparse.ArgumentParser(
        prog="chemofront",
        description="Front-speed laboratory for the FKPP equation with nonlocal advection",
    )
    parser.add_argument("--config", help="JSON file with flag defaults (flags override)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--chi", type=float, default=0.0)
        p.add_argument("--sigma", type=float, default=1.0)
        p.add_argument("--kernel", default="exp")
        p.add_argument("--out", help="output file (relative paths land in FKPP_OUT_DIR)")

    p_evolve = sub.add_parser("evolve", help="time-dependent run with front tracking")
    common(p_evolve)
    p_evolve.add_argument("--xmin", type=float, default=-50.0)
    p_evolve.add_argument("--xmax", type=float, default=350.0)
    p_evolve.add_argument("--dx", type=float, default=0.1)
    p_evolve.add_argument("--dt", type=float, default=0.002)
    p_evolve.add_argument("--tmax", type=float, default=150.0)
    p_evolve.add_argument("--snapshot-every", type=float, default=1.0)
    p_evolve.add_argument("--level", type=float, default=0.5)

    p_slab = sub.add_parser("slab", help="traveling-wave slab solve")
    common(p_slab)
    p_slab.add_argument("--a", type=float, default=60.0)
    p_slab.add_argument("--theta", type=float, default=0.005)
    p_slab.add_argument("--dx", type=float, default=0.05)
    p_slab.add_argument("--tau", type=float, default=1.0)

    p_eigen = sub.add_parser("eigen", help="potential and principal eigenpair of a slab wave")
    common(p_eigen)
    p_eigen.add_argument("--a", type=float, default=60.0)
    p_eigen.add_argument("--theta", type=float, default=0.005)
    p_eigen.add_argument("--dx", type=float, default=0.05)
    p_eigen.add_argument("--ctest", type=float, default=2.0)

    p_scan = sub.add_parser("scan", help="(chi, sigma) sweep with regime classification")
    p_scan.add_argument("--chis", required=True, help="comma-separated chi values")
    p_scan.add_argument("--sigmas", required=True, help="comma-separated sigma values")
    p_scan.add_argument("--kernel", default="exp")
    p_scan.add_argument("--mode", choices=("slab", "evolve", "both"), default="slab")
    p_scan.add_argument("--workers", type=int, default=1)
    p_scan.add_argument("--a", type=float, default=60.0)
    p_scan.add_argument("--dx", type=float, default=0.05)
    p_scan.add_argument("--theta", type=float, default=0.005)
    p_scan.add_argument("--out")

    p_check = sub.add_parser("check", help="diagnostics on a stored profile")
    p_check.add_argument("--input", required=True)
    p_check.add_argument("--chi", type=float, required=True)
    p_check.add_argument("--sigma", type=float, required=True)
    p_check.add_argument("--kernel", default="exp")
    p_check.add_argument("--theta", type=float, default=0.005)
    p_check.add_argument("--out")

    if defaults:
        parser.set_defaults(**defaults)
        for sub_parser in (p_evolve, p_slab, p_eigen, p_scan, p_check):
            sub_parser.set_defaults(**defaults)
    return parser


def _cmd_evolve(args) -> int:
    spec = parse_kernel(args.kernel)
    params = ChemoParams(args.chi, args.sigma)
    grid = Grid1D.from_spacing(args.xmin, args.xmax, args.dx)
    config = EvolveConfig(
        grid=grid,
        dt=args.dt,
        t_max=args.tmax,
        snapshot_every=args.snapshot_every,
        params=params,
        spec=spec,
        track_level=args.level,
    )
    traj = evolve(config)
    est = measure_speed(traj, args.level, 0.4)
    u = traj.final()
    v = advection(u, spec, params)
    vx = advection_gradient(u, spec, params)
    path = _out_path("evolve.csv", args.out)
    write_profile(
        u,
        v,
        vx,
        path,
        {
            "command": "evolve",
            "config": vars(args),
            "c": est.c,
            "stderr": est.stderr,
            "window": est.window,
            "clipped_mass": traj.clipped_mass,
            "abort_reason": traj.abort_reason,
        },
    )
    print(f"evolve: c = {est.c:.6f} (stderr {est.stderr:.2e}) -> {path}")
    if traj.abort_reason is not None:
        print(f"aborted: {traj.abort_reason}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def _cmd_slab(args) -> int:
    spec = parse_kernel(args.kernel)
    params = ChemoParams(args.chi, args.sigma)
    config = SlabConfig(
        a=args.a, params=params, spec=spec, theta=args.theta, tau=args.tau, dx=args.dx
    )
    sol = fixed_point(config)
    v = advection(sol.u, spec, params)
    vx = advection_gradient(sol.u, spec, params)
    path = _out_path("slab.csv", args.out)
    write_profile(
        sol.u,
        v,
        vx,
        path,
        {
            "command": "slab",
            "config": vars(args),
            "c": sol.c,
            "residual": sol.residual,
            "iterations": sol.iterations,
            "converged": sol.converged,
            "tau_path": sol.tau_path,
        },
    )
    print(f"slab: c = {sol.c:.6f} (residual {sol.residual:.2e}) -> {path}")
    return EXIT_OK if sol.converged else EXIT_NO_CONVERGENCE


def _cmd_eigen(args) -> int:
    spec = parse_kernel(args.kernel)
    params = ChemoParams(args.chi, args.sigma)
    config = SlabConfig(a=args.a, params=params, spec=spec, theta=args.theta, dx=args.dx)
    sol = fixed_point(config)
    if not sol.converged:
        print("slab solve did not converge", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    v, vx = slab_drift(sol)
    pot = assemble_potential(sol.u, args.ctest, v, vx)
    pair = principal_eigenpair(pot, validate=False)
    path = _out_path("eigen.csv", args.out)
    with open(path, "w", newline="") as fh:
        fh.write("x,V,phi\n")
        for xi, Vi, pi in zip(pot.grid.x, pot.values, pair.phi.values):
            fh.write("%.17g,%.17g,%.17g\n" % (xi, Vi, pi))
    with open(str(path) + ".meta.json", "w") as fh:
        json.dump(
            {
                "command": "eigen",
                "config": vars(args),
                "lambda": pair.lam,
                "rayleigh_residual": pair.rayleigh_residual,
                "c_test": args.ctest,
                "c_slab": sol.c,
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    print(f"eigen: lambda = {pair.lam:.6e} -> {path}")
    return EXIT_OK


def _cmd_scan(args) -> int:
    spec = parse_kernel(args.kernel)
    config = ScanConfig(
        chi_values=tuple(float(s) for s in args.chis.split(",")),
        sigma_values=tuple(float(s) for s in args.sigmas.split(",")),
        spec=spec,
        mode=args.mode,
        workers=args.workers,
        slab_a=args.a,
        slab_dx=args.dx,
        slab_theta=args.theta,
    )
    records = run_scan(config)
    path = _out_path("scan.csv", args.out)
    write_scan_csv(records, path)
    table = sandwich_table(records)
    n_ok = sum(1 for row in table if row["passed"])
    print(f"scan: {len(records)} cells -> {path} (sandwich ok: {n_ok}/{len(table)})")
    return EXIT_OK


def _cmd_check(args) -> int:
    spec = parse_kernel(args.kernel)
    params = ChemoParams(args.chi, args.sigma)
    u, v, vx = read_profile(args.input)
    kernel_report = validate_kernel(spec)
    mono = monotonicity_check(u, params)
    moment = moment_check(v, params)
    result = {
        "input": args.input,
        "kernel": kernel_report.to_dict(),
        "monotonicity": mono.to_dict(),
        "moment": moment.to_dict(),
        "integral_speed": speed_from_integral(u),
    }
    try:
        mid = 0.5 * (u.grid.x_min + u.grid.x_max)
        mu, r2 = decay_fit(u, mid)
        result["decay"] = {"mu": mu, "r_squared": r2}
    except ValueError as exc:
        result["decay"] = {"error": str(exc)}
    path = _out_path("check.json", args.out)
    with open(path, "w") as fh:
        json.dump(result, fh, indent=2)
        fh.write("\n")
    ok = kernel_report.all_passed and mono.all_passed
    print(f"check: {'ok' if ok else 'FAILED'} -> {path}")
    return EXIT_OK


_DISPATCH = {
    "evolve": _cmd_evolve,
    "slab": _cmd_slab,
    "eigen": _cmd_eigen,
    "scan": _cmd_scan,
    "check": _cmd_check,
}


def parse_and_dispatch(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    # first pass only to find --config; argparse handles unknown flags (exit 2)
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                defaults = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"cannot read config: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        args = _build_parser(defaults).parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
