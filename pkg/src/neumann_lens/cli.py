"""Command line entry point: eigen, tune, solve, shoot, verify, sweep."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from .eigen import log_normalization_constant, radial_eigenpair, tune_annulus
from .grid import RadialDomain, RadialField, build_grid, read_field_csv, write_field_csv
from .operators import laplacian_for


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit(payload: dict, path=None) -> None:
    text = json.dumps(_clean(payload), indent=2)
    if path:
        Path(path).write_text(text + "\n")
    print(text)


def _domain(args) -> RadialDomain:
    return RadialDomain(args.a, args.b, args.N, args.sigma0)


def _add_domain(p: argparse.ArgumentParser, need_b: bool = True) -> None:
    p.add_argument("--N", type=int, required=True, help="space dimension")
    p.add_argument("--a", type=float, default=0.0, help="inner radius (0 for a ball)")
    if need_b:
        p.add_argument("--b", type=float, required=True, help="outer radius")
    p.add_argument("--sigma0", type=float, default=1.0, choices=(1.0, 2.0),
                   help="measure of the 0-sphere when N = 1")


# -- subcommands ------------------------------------------------------------

def cmd_eigen(args) -> int:
    grid = build_grid(_domain(args), args.M)
    ep = radial_eigenpair(laplacian_for(grid), tol=args.tol)
    out = {"mu": ep.mu, "residual": ep.residual, "iterations": ep.iterations,
           "kappa": log_normalization_constant(ep.psi), "M": args.M}
    if args.out:
        write_field_csv(args.out, ep.psi, "psi")
    _emit(out)
    return 0


def cmd_tune(args) -> int:
    t0 = time.perf_counter()
    res = tune_annulus(args.N, args.a, args.target, tol=args.tol, M=args.M, sigma0=args.sigma0)
    _emit({"b": res.b, "mu": res.mu, "target": args.target, "evaluations": len(res.history),
           "monotone": res.monotone, "seconds": time.perf_counter() - t0,
           "history": [{"b": b, "mu": m} for b, m in res.history]})
    return 0


def cmd_solve(args) -> int:
    from .variational import energy_I0, level_record, minimize_L0

    grid = build_grid(_domain(args), args.M)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.p == 0:
        res = minimize_L0(grid)
        write_field_csv(out_dir / "profile_p=0.csv", res.u, "u")
        _emit({"p": 0.0, "L_p": res.level, "Lambda_p": None, "D_p": None, "duality_defect": None,
               "relation_defect": abs(energy_I0(res.u) - res.level) / abs(res.level),
               "method": res.method, "converged": res.converged})
        return 0 if res.converged else 1
    rec, u, direct, dual = level_record(args.p, grid, method=args.method)
    label = f"{args.p:g}"
    write_field_csv(out_dir / f"profile_p={label}.csv", u, "u")
    if direct is not None:
        write_field_csv(out_dir / f"extremizer_p={label}.csv", direct.extremizer, "v")
    if dual is not None:
        write_field_csv(out_dir / f"dual_p={label}.csv", dual.extremizer, "f")
    payload = rec.to_dict()
    ok = all(r.converged for r in (direct, dual) if r is not None)
    payload["converged"] = ok
    _emit(payload)
    return 0 if ok else 1


def _write_trajectory(path, tr) -> None:
    d = tr.domain
    with open(path, "w") as fh:
        fh.write(f"# N={d.N} a={d.a!r} b={d.b!r}\n")
        fh.write("r,u,du\n")
        np.savetxt(fh, np.column_stack([tr.r, tr.u, tr.du]), delimiter=",", fmt="%.17g")


def cmd_shoot(args) -> int:
    from .shooting import ShootingConfig, ShootingError, shoot

    cfg = ShootingConfig(M_ode=args.M_ode)
    try:
        rec = shoot(args.p, _domain(args), cfg)
    except ShootingError as exc:
        _emit({"p": args.p, "converged": False, "error": str(exc)})
        return 1
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_trajectory(out_dir / f"trajectory_p={args.p:g}.csv", rec.trajectory)
    _emit(rec.to_dict())
    return 0 if rec.converged else 1


def cmd_verify(args) -> int:
    from . import qualitative as q

    check = args.check
    if check == "monotone":
        if args.profile:
            u = read_field_csv(args.profile, args.sigma0)
        else:
            from .shooting import shoot

            u = shoot(args.p, _domain(args)).trajectory.u
        ok, worst = q.check_monotone(u, args.tol)
        _emit({"check": check, "monotone": ok, "worst_violation": worst})
        return 0 if ok else 1
    if check == "pohozaev":
        from .shooting import shoot

        d = _domain(args)
        rec = shoot(d.critical_exponent, d)
        prof = q.pohozaev_profile(rec)
        end = q.pohozaev_endpoint(rec)
        ok = prof.relative_deviation <= 1e-2 and end.relative_defect <= 2e-2
        _emit({"check": check, "p": d.critical_exponent, "profile_relative_deviation": prof.relative_deviation,
               "endpoint_inner": end.inner, "endpoint_at_zero": end.at_zero, "r0": end.r0,
               "endpoint_relative_defect": end.relative_defect, "passed": ok})
        return 0 if ok else 1
    if check == "rearrange":
        grid = build_grid(_domain(args), args.M)
        rng = np.random.default_rng(args.seed)
        worst_norm = worst_mean = 0.0
        worst_gain = math.inf
        bad = 0
        for _ in range(args.trials):
            f = rng.standard_normal(grid.r.size)
            f -= np.dot(grid.cell, f) / grid.volume
            res = q.flip_rearrange(RadialField(grid, f))
            worst_norm = max(worst_norm, res.norm_defect)
            worst_mean = max(worst_mean, abs(res.mean_out))
            worst_gain = min(worst_gain, res.gain)
            if res.gain <= 1e-10 * abs(res.q_in) and not q.check_monotone(res.f)[0]:
                bad += 1
        ok = worst_norm <= 1e-10 and worst_mean <= 1e-10 and worst_gain >= -1e-10 and bad == 0
        _emit({"check": check, "trials": args.trials, "max_norm_defect": worst_norm,
               "max_mean": worst_mean, "min_gain": worst_gain, "equality_violations": bad, "passed": ok})
        return 0 if ok else 1
    if check == "nonexistence":
        rep = q.ball_nonexistence_scan(args.p, args.N, args.b)
        _emit({"check": check, **rep.to_dict()})
        return 0
    raise AssertionError(check)


def cmd_sweep(args) -> int:
    from .sweep import SweepConfig, sweep, write_outputs

    rep = sweep(args.p_list, _domain(args), SweepConfig(M=args.M))
    write_outputs(rep, args.out, figure=args.figure1)
    for p in rep.p_values:
        e = rep.entries[p]
        status = "ok" if e.converged else f"FAILED ({e.error or ', '.join(e.flags)})"
        print(f"p={p:g}\t{e.method}\tL_p={e.L_p:.8g}\tsup={e.sup_norm:.6g}\t{status}")
    print(f"wrote {args.out} in {rep.seconds:.1f} s")
    return 0 if rep.all_converged else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="neumann-lens", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigen", help="first nonconstant radial Neumann eigenpair")
    _add_domain(p)
    p.add_argument("--M", type=int, default=4096)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--out", help="CSV path for psi")
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("tune", help="outer radius with a prescribed mu_1,rad")
    _add_domain(p, need_b=False)
    p.add_argument("--target", type=float, default=1.0)
    p.add_argument("--M", type=int, default=4000)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("solve", help="variational levels and profiles at one p")
    _add_domain(p)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--M", type=int, default=2000)
    p.add_argument("--method", choices=("direct", "dual", "both"), default="both")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("shoot", help="radial solution by shooting")
    _add_domain(p)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--M-ode", dest="M_ode", type=int, default=8000)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_shoot)

    p = sub.add_parser("verify", help="qualitative checks")
    p.add_argument("--check", required=True, choices=("monotone", "pohozaev", "rearrange", "nonexistence"))
    p.add_argument("--N", type=int, default=4)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=5.21021)
    p.add_argument("--sigma0", type=float, default=1.0, choices=(1.0, 2.0))
    p.add_argument("--p", type=float, default=3.0)
    p.add_argument("--M", type=int, default=512)
    p.add_argument("--profile", help="CSV profile for --check monotone")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="continuation in p")
    _add_domain(p)
    p.add_argument("--p-list", dest="p_list", type=float, nargs="+", required=True)
    p.add_argument("--M", type=int, default=2000)
    p.add_argument("--out", required=True)
    p.add_argument("--figure1", action="store_true", help="write figure1.svg")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
