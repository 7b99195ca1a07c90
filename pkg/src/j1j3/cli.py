"""Command-line front end: j1j3 {energy,validate,construct,optimize,sweep,gamma-check}."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys

import numpy as np

from . import constructions as cons
from .continuum import ContinuumField, GammaLevel, GammaSchedule, flat_field, gamma_experiment, shear_field
from .energy import energy_direct, energy_reformulated
from .io import FieldParseError, read_field, write_spinfield
from .lattice import AngularField, ModelParams, SpinField, angles_from_spins, check_quantized, make_grid, plaquette_curl, spins_from_angles
from .optimize import OptimizeOptions, minimize
from .sweep import CSV_HEADER, phase_sweep, write_winner_grid
from .topology import vortex_energy_bound_check, vortices

THREADS_ENV = "J1J3_THREADS"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("j1j3")


class UsageError(Exception):
    pass


def _fmt(x):
    return format(float(x), ".17g")


def _params(args) -> ModelParams:
    dh = args.delta_hor if args.delta_hor is not None else args.delta
    dv = args.delta_ver if args.delta_ver is not None else args.delta
    if dh is None or dv is None:
        raise UsageError("need --delta (or both --delta-hor and --delta-ver)")
    try:
        return ModelParams(float(dh), float(dv))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load_spins(path) -> SpinField:
    f = read_field(path)
    if isinstance(f, AngularField):
        return spins_from_angles(f)
    return f


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o).__name__)


def _dump(obj):
    print(json.dumps(obj, indent=2, default=_json_default))


# ---------------------------------------------------------------- subcommands

def cmd_energy(args) -> int:
    u = _load_spins(args.field)
    p = _params(args)
    d = energy_direct(u, p)
    r = energy_reformulated(u, p)
    try:
        d.n_vortices = vortices(angles_from_spins(u)).count
    except ValueError as exc:
        d.reason = str(exc)
    gap = abs(d.total - r.total) / d.total if d.total > 0 else abs(r.total)
    _dump({"direct": d.to_json_dict(), "reformulated": r.to_json_dict(), "relative_gap": gap,
           "n_vortices": d.n_vortices})
    return EXIT_OK


def cmd_validate(args) -> int:
    f = read_field(args.field)
    checks = []
    if isinstance(f, SpinField):
        err = f.norm_error()
        checks.append(("unit norms", err <= 1e-12, f"max | |u| - 1 | = {err:.3e}"))
        if err > 1e-12:
            for c in checks:
                print(f"{'PASS' if c[1] else 'FAIL'} {c[0]}: {c[2]}")
            return EXIT_FAIL
        theta = angles_from_spins(f)
    else:
        theta = f
    checks.append(("angle range [-pi, pi)", theta.in_range(), ""))
    curl = plaquette_curl(theta.theta_hor, theta.theta_ver)
    try:
        check_quantized(curl)
        checks.append(("curl quantization", True, f"{vortices(theta).count} vortices"))
        quantized = True
    except ValueError as exc:
        checks.append(("curl quantization", False, str(exc)))
        quantized = False
    if quantized and (args.delta is not None or args.delta_hor is not None):
        p = _params(args)
        u = spins_from_angles(theta) if isinstance(f, AngularField) else f
        try:
            rep = vortex_energy_bound_check(u, p)
            checks.append(("vortex count bound eps^2 #V <= 64 E", rep.holds,
                           f"{rep.lhs:.6g} <= {rep.rhs:.6g}"))
        except ValueError as exc:
            checks.append(("vortex count bound eps^2 #V <= 64 E", True, f"skipped: {exc}"))
    ok = True
    for name, passed, info in checks:
        ok &= bool(passed)
        print(f"{'PASS' if passed else 'FAIL'} {name}" + (f": {info}" if info else ""))
    return EXIT_OK if ok else EXIT_FAIL


def _construct(kind, grid, p, periodic, sign_hor=1, sign_ver=1) -> SpinField:
    if kind == "ferro":
        return cons.ferromagnet(grid)
    if kind == "helix":
        return cons.helix(grid, p, sign_hor, sign_ver)
    if kind == "branch":
        return cons.branching_periodic(grid, p) if periodic else cons.branching(grid, p)
    if kind == "vortex":
        return cons.vortex_periodic(grid, p) if periodic else cons.vortex_competitor(grid, p)
    raise UsageError(f"unknown construction {kind!r}")


def _grid(args):
    if args.eps is None:
        raise UsageError("need --eps")
    try:
        return make_grid(float(args.eps))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_construct(args) -> int:
    g = _grid(args)
    p = _params(args)
    u = _construct(args.kind, g, p, args.periodic, args.sign_hor, args.sign_ver)
    eb = energy_direct(u, p)
    eb.n_vortices = vortices(angles_from_spins(u)).count
    write_spinfield(args.out, u)
    with open(args.out + ".json", "w") as fh:
        json.dump(eb.to_json_dict(), fh, indent=2)
    _dump(eb.to_json_dict())
    return EXIT_OK


def cmd_optimize(args) -> int:
    p = _params(args)
    if args.init == "file":
        if not args.init_file:
            raise UsageError("--init file needs --init-file")
        u0 = _load_spins(args.init_file)
    else:
        u0 = _construct(args.init, _grid(args), p, False)
    opts = OptimizeOptions(method=args.method, max_iter=args.max_iter, tol=args.tol, seed=args.seed,
                           periodic_weight=args.periodic_weight)
    u, trace = minimize(u0, p, opts)
    write_spinfield(args.out, u)
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iter", "energy", "grad_norm"])
            for r in trace:
                w.writerow([r.iter, _fmt(r.energy), _fmt(r.grad_norm)])
    e0 = energy_direct(u0, p).total
    e1 = energy_direct(u, p).total
    _dump({"initial_energy": e0, "final_energy": e1, "iterations": trace.rows[-1].iter,
           "final_grad_norm": trace.final_grad_norm})
    return EXIT_OK


def _float_list(s):
    out = []
    for tok in str(s).replace(",", " ").split():
        if "/" in tok:
            a, b = tok.split("/")
            out.append(float(a) / float(b))
        elif tok.startswith("2^"):
            out.append(2.0 ** float(tok[2:]))
        else:
            out.append(float(tok))
    return out


def cmd_sweep(args) -> int:
    eps = args.eps_list if isinstance(args.eps_list, list) else _float_list(args.eps_list)
    deltas = args.delta_list if isinstance(args.delta_list, list) else _float_list(args.delta_list)
    strategies = [s for s in str(args.strategies).replace(",", " ").split()]
    recs = phase_sweep(eps, deltas, strategies, optimize=args.optimize, threads=args.threads,
                       opt_options=OptimizeOptions(max_iter=args.max_iter, seed=args.seed),
                       csv_path=args.out)
    if args.out is None:
        w = csv.writer(sys.stdout)
        w.writerow(CSV_HEADER)
        for r in recs:
            w.writerow(r.csv_row())
    if args.plot_data:
        write_winner_grid(recs, args.plot_data)
    for r in recs:
        for k, v in r.errors.items():
            log.warning("cell eps=%g delta=%g %s failed: %s", r.eps, r.delta, k, v)
    return EXIT_OK


def _levels(spec: str):
    if ":" in spec:
        a, b = spec.split(":")
        return list(range(int(a), int(b) + 1))
    return [int(t) for t in spec.replace(",", " ").split()]


def cmd_gamma(args) -> int:
    sigma, gamma = float(args.sigma), float(args.gamma)
    if args.field == "shear":
        f = shear_field(sigma, gamma)
    elif args.field == "flat":
        f = flat_field(sigma, gamma)
    else:
        fld = read_field(args.field)
        if isinstance(fld, SpinField):
            fld = angles_from_spins(fld)
        n = fld.grid.n
        w = np.zeros((n, n))
        z = np.zeros((n, n))
        w[:-1] = fld.theta_hor
        w[-1] = fld.theta_hor[-1]
        z[:, :-1] = fld.theta_ver
        z[:, -1] = fld.theta_ver[:, -1]
        f = ContinuumField.from_samples(w, z, sigma, gamma, name=args.field)
    sched = GammaSchedule.dyadic(_levels(args.levels), sigma, gamma)
    rows = gamma_experiment(f, sched)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["n", "eps", "delta_ver", "H_n", "H", "gap"])
        for r in rows:
            w.writerow([r.n, _fmt(r.eps), _fmt(r.delta_ver), _fmt(r.H_n), _fmt(r.H), _fmt(r.gap)])
            if r.reason:
                log.info("level %d: H_n infinite (%s), raw ratio %.6g", r.n, r.reason, r.H_n_raw)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    def global_opts(q, default):
        q.add_argument("--seed", type=int, default=default, help="seed for stochastic steps (default 0)")
        q.add_argument("--threads", type=int, default=default,
                       help=f"worker bound; env {THREADS_ENV} overrides the config value")
        q.add_argument("--config", default=default, help="JSON file with flag values; flags win")
        q.add_argument("--log-level", default=default, choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    # global options are accepted before or after the subcommand; the
    # subcommand copy must not overwrite a value given before it
    common = argparse.ArgumentParser(add_help=False)
    global_opts(common, argparse.SUPPRESS)

    par = argparse.ArgumentParser(prog="j1j3", description="Anisotropic J1-J3 lattice energy tools")
    global_opts(par, None)
    sub = par.add_subparsers(dest="command", required=True)

    def delta_opts(q):
        q.add_argument("--delta", type=float)
        q.add_argument("--delta-hor", type=float)
        q.add_argument("--delta-ver", type=float)

    q = sub.add_parser("energy", parents=[common], help="energy breakdown of a field file")
    q.add_argument("field")
    delta_opts(q)
    q.set_defaults(func=cmd_energy)

    q = sub.add_parser("validate", parents=[common], help="run the invariant checks on a field file")
    q.add_argument("field")
    delta_opts(q)
    q.set_defaults(func=cmd_validate)

    q = sub.add_parser("construct", parents=[common], help="write a competitor field")
    q.add_argument("--kind", choices=["ferro", "helix", "branch", "vortex"], required=False)
    q.add_argument("--eps", type=float)
    delta_opts(q)
    q.add_argument("--periodic", action="store_true")
    q.add_argument("--sign-hor", type=int, default=1, choices=[1, -1])
    q.add_argument("--sign-ver", type=int, default=1, choices=[1, -1])
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_construct)

    q = sub.add_parser("optimize", parents=[common], help="local descent from a construction or file")
    q.add_argument("--eps", type=float)
    delta_opts(q)
    q.add_argument("--init", choices=["ferro", "branch", "vortex", "file"], default="ferro")
    q.add_argument("--init-file")
    q.add_argument("--method", choices=["gd", "anneal"], default="gd")
    q.add_argument("--max-iter", type=int, default=2000)
    q.add_argument("--tol", type=float, default=1e-12)
    q.add_argument("--periodic-weight", type=float, default=0.0)
    q.add_argument("--out", default=None)
    q.add_argument("--trace", default=None, help="trace CSV iter,energy,grad_norm")
    q.set_defaults(func=cmd_optimize)

    q = sub.add_parser("sweep", parents=[common], help="phase-diagram sweep over (eps, delta)")
    q.add_argument("--eps-list", default="2^-4 2^-5 2^-6 2^-7 2^-8")
    q.add_argument("--delta-list", default="2^-2 2^-3 2^-4 2^-5 2^-6 2^-7 2^-8")
    q.add_argument("--strategies", default="ferro,branch,vortex")
    q.add_argument("--optimize", action="store_true")
    q.add_argument("--max-iter", type=int, default=500)
    q.add_argument("--out", default=None)
    q.add_argument("--plot-data", default=None, help="winner grid CSV")
    q.set_defaults(func=cmd_sweep)

    q = sub.add_parser("gamma-check", parents=[common], help="compare H_n of recovery sequences with H")
    q.add_argument("--field", default="shear", help="flat, shear or a field file")
    q.add_argument("--sigma", type=float, default=1.0)
    q.add_argument("--gamma", type=float, default=1.0)
    q.add_argument("--levels", default="4:8")
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_gamma)
    return par


_REQUIRED_OUT = {"construct", "optimize"}


def _apply_config(par, argv, args):
    if not args.config:
        return args
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    # re-parse with config values as defaults so explicit flags win
    sub = par._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
    known = {a.dest for a in sub._actions}  # noqa: SLF001
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    sub.set_defaults(**cfg)
    par.set_defaults(**{k: v for k, v in cfg.items() if k in ("seed", "threads", "log_level")})
    return par.parse_args(argv)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    par = build_parser()
    try:
        args = par.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        args = _apply_config(par, argv, args)
        cfg_threads = args.threads
        env = os.environ.get(THREADS_ENV)
        flag_threads = any(a == "--threads" or a.startswith("--threads=") for a in argv)
        if env is not None and not flag_threads:
            try:
                cfg_threads = int(env)
            except ValueError:
                raise UsageError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        args.threads = max(1, int(cfg_threads or 1))
        args.seed = 0 if args.seed is None else int(args.seed)
        logging.basicConfig(level=getattr(logging, args.log_level or "WARNING"),
                            format="%(levelname)s %(message)s")
        if args.command == "construct" and not args.kind:
            raise UsageError("construct needs --kind")
        if args.command in _REQUIRED_OUT and not args.out:
            raise UsageError(f"{args.command} needs --out")
        return args.func(args)
    except FieldParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
