"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 numeric failure. Errors are
reported as a single JSON line on standard error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .density import kde, solve_density
from .errors import ConfigError, TarError
from .harness import (
    TABLE_PROBS,
    gamma_weight_sweep,
    limit_sample,
    replicate_seed,
    run_finite_convergence,
    run_limit_table,
)
from .likelihood import Prior, bayes_finite, build_piecewise, mle_finite
from .limit import DEFAULT_GUARD, sample_limit_path
from .model import PRESETS, TarParams, read_trajectory_csv, simulate_tar, write_trajectory_csv

STOCHASTIC = {"simulate", "limit-sim", "table", "converge", "sweep-gamma"}
# execution/I-O knobs that do not change results and are left out of config echoes
_NOT_ECHOED = {"command", "config", "out", "report", "meta", "kde_out", "dump_path", "workers",
               "emit_samples", "format", "input"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def fmt(x) -> str:
    return format(float(x), ".17g")


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, NaN/inf to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _emit(text: str, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_params(p, window=True):
    g = p.add_argument_group("model parameters")
    g.add_argument("--preset", choices=sorted(PRESETS), default="persistent-outer",
                   help="coefficient ordering to start from (default: persistent-outer = rho1 0.15, rho2 0.95)")
    g.add_argument("--rho1", type=float, help="inner-regime coefficient")
    g.add_argument("--rho2", type=float, help="outer-regime coefficient")
    g.add_argument("--sigma", type=float, help="noise standard deviation")
    g.add_argument("--theta", type=float, help="true threshold")
    if window:
        g.add_argument("--alpha", type=float, help="window lower end (default 0.5)")
        g.add_argument("--beta", type=float, help="window upper end (default 3.5)")
    g.add_argument("--one-sided", action="store_true", help="regime by X_j instead of |X_j|")


def _add_limit(p):
    p.add_argument("--lambda", dest="lam", type=float,
                   help="Poisson intensity; default solves the stationary density for 2 f(theta, theta)")
    p.add_argument("--guard", type=float, default=DEFAULT_GUARD,
                   help="stop each side when log Z falls this far below its maximum (default 40)")


def _add_run(p, reps):
    p.add_argument("--seed", type=int, help="master seed (mandatory)")
    p.add_argument("--reps", type=int, default=reps, help=f"replicates (default {reps})")
    p.add_argument("--workers", type=int, default=1, help="worker processes; results do not depend on it")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tarthresh", description="Threshold estimation for threshold autoregressive models.")
    parser.add_argument("--version", action="version", version=f"tarthresh {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help):
        p = sub.add_parser(name, help=help, description=help)
        p.add_argument("--config", help="JSON file of option values (keys are option names with _)")
        return p

    p = add("simulate", "simulate a TAR trajectory (CSV j,x)")
    _add_params(p)
    p.add_argument("--n", type=int, required=False, help="number of transitions")
    p.add_argument("--seed", type=int, help="RNG seed (mandatory)")
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--out", default="-")

    p = add("estimate", "MLE and Bayes threshold estimates from a trajectory file (JSON)")
    _add_params(p)
    p.add_argument("--input", help="trajectory CSV with header j,x")
    p.add_argument("--prior", default="uniform",
                   help="'uniform' or a CSV file with header theta,p")
    p.add_argument("--out", default="-")

    p = add("density", "solve the stationary density (CSV x,f) and report the intensity")
    _add_params(p)
    p.add_argument("--x-max", type=float)
    p.add_argument("--points", type=int, default=2001)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--out", default="-")
    p.add_argument("--meta", help="write lambda, residual, iterations and grid spec here (JSON)")
    p.add_argument("--kde-n", type=int, help="also write a Gaussian KDE of an n-step simulation")
    p.add_argument("--kde-out", help="CSV x,kde for --kde-n")
    p.add_argument("--seed", type=int, help="seed for the --kde-n simulation")

    p = add("limit-sim", "simulate limit-law replicates (CSV rep,u_hat,u_tilde)")
    _add_params(p, window=False)
    _add_limit(p)
    _add_run(p, 20_000)
    p.add_argument("--out", default="-")
    p.add_argument("--dump-path", help="write the path of --dump-rep as JSON")
    p.add_argument("--dump-rep", type=int, default=0)

    p = add("table", "critical values of the limit MLE and Bayes laws")
    _add_params(p, window=False)
    _add_limit(p)
    _add_run(p, 20_000)
    p.add_argument("--probs", type=_float_list, default=list(TABLE_PROBS))
    p.add_argument("--out", default="-", help="table CSV")
    p.add_argument("--report", help="report JSON")
    p.add_argument("--emit-samples", action="store_true")

    p = add("converge", "finite-sample estimators against the limit laws")
    _add_params(p)
    _add_run(p, 2000)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--guard", type=float, default=DEFAULT_GUARD)
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--limit-reps", type=int, default=20_000)
    p.add_argument("--probs", type=_float_list, default=list(TABLE_PROBS))
    p.add_argument("--out", default="-", help="table CSV")
    p.add_argument("--report", help="report JSON")
    p.add_argument("--emit-samples", action="store_true")

    p = add("sweep-gamma", "second moment of the weighted-midpoint limit MLE over weights")
    _add_params(p, window=False)
    _add_limit(p)
    _add_run(p, 20_000)
    p.add_argument("--weights", type=_float_list,
                   default=[round(0.1 * i, 10) for i in range(11)])
    p.add_argument("--out", default="-", help="CSV weight,second_moment,se")
    p.add_argument("--report", help="report JSON")
    return parser


def _apply_config(parser, argv, args):
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    valid = {a.dest for a in subparser._actions} - {"help", "config"}
    unknown = sorted(set(cfg) - valid)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    subparser.set_defaults(**cfg)
    return parser.parse_args(argv)


def _params(args, window=True) -> TarParams:
    base = dict(PRESETS[args.preset])
    for key in ("rho1", "rho2", "sigma", "theta", "alpha", "beta"):
        value = getattr(args, key, None)
        if value is not None:
            base[key] = value
    if args.one_sided:
        base["sidedness"] = "one-sided"
    if not window:
        # limit-law commands do not use the window; keep it valid around theta
        base["alpha"] = min(base["alpha"], base["theta"] / 2) if base["theta"] > 0 else base["theta"] - 1
        base["beta"] = max(base["beta"], base["theta"] + 1)
    return TarParams(**base)


def _echo(args, **resolved) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in _NOT_ECHOED}
    cfg.update(resolved)
    return cfg


def _lambda(args, params):
    if args.lam is not None:
        if not args.lam > 0:
            raise ConfigError(f"--lambda must be > 0, got {args.lam}")
        return args.lam, "given"
    return solve_density(params).lam, "density solver"


def cmd_simulate(args):
    if args.n is None:
        raise ConfigError("--n is required")
    params = _params(args)
    traj = simulate_tar(params, args.n, seed=args.seed, burn_in=args.burn_in)
    if args.out in (None, "-"):
        buf = io.StringIO()
        buf.write("j,x\n")
        for j, x in enumerate(traj.values.tolist()):
            buf.write(f"{j},{fmt(x)}\n")
        _emit(buf.getvalue(), "-")
    else:
        write_trajectory_csv(traj, args.out)


def _read_prior(spec):
    if spec == "uniform":
        return Prior.uniform()
    try:
        data = np.genfromtxt(spec, delimiter=",", names=True)
        return Prior.tabulated(data["theta"], data["p"])
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read prior {spec}: {exc}") from None


def estimate_report(traj, params, prior) -> dict:
    pl = build_piecewise(traj, params)
    theta_hat, info = mle_finite(pl, full_output=True)
    return {
        "theta_hat": theta_hat,
        "theta_tilde": bayes_finite(pl, prior),
        "n": traj.n,
        "breakpoint_count": int(pl.breakpoints.size),
        "tie_flag": info.tie,
        "window": list(pl.window),
        "params": params.to_dict(),
    }


def cmd_estimate(args):
    if not args.input:
        raise ConfigError("--input is required")
    params = _params(args)
    params.require_identifiable()
    traj = read_trajectory_csv(args.input)
    report = estimate_report(traj, params, _read_prior(args.prior))
    report["prior"] = args.prior if args.prior == "uniform" else "tabulated"
    _emit(dumps_json(report), args.out)


def cmd_density(args):
    params = _params(args)
    sol = solve_density(params, x_max=args.x_max, points=args.points, tol=args.tol, max_iter=args.max_iter)
    _emit(_csv_text(["x", "f"], zip(sol.grid.tolist(), sol.values.tolist())), args.out)
    meta = sol.metadata()
    meta["integral"] = sol.integral
    meta["reference_lambda"] = 0.5
    if args.kde_n:
        if args.seed is None:
            raise ConfigError("--seed is mandatory with --kde-n")
        traj = simulate_tar(params, args.kde_n, seed=args.seed)
        k = kde(traj, sol.grid)
        core = np.abs(sol.grid) <= 4.0
        meta["kde"] = {"n": args.kde_n, "seed": args.seed,
                       "sup_distance_core": float(np.max(np.abs(k - sol.values)[core]))}
        if args.kde_out:
            _emit(_csv_text(["x", "kde"], zip(sol.grid.tolist(), k.tolist())), args.kde_out)
    if args.meta:
        _emit(dumps_json(meta), args.meta)


def cmd_limit_sim(args):
    params = _params(args, window=False)
    params.require_identifiable()
    lam, source = _lambda(args, params)
    u_hat, u_tilde, *_ = limit_sample(lam, params.rho, params.theta, params.sigma, args.reps,
                                       args.seed, args.guard, workers=args.workers)
    _emit(_csv_text(["rep", "u_hat", "u_tilde"],
                    ((i, float(a), float(b)) for i, (a, b) in enumerate(zip(u_hat, u_tilde)))), args.out)
    if args.dump_path:
        path = sample_limit_path(lam, params.rho, params.theta, params.sigma, guard=args.guard,
                                 seed=replicate_seed(args.seed, args.dump_rep))
        dump = path.to_dict()
        dump["rep"] = args.dump_rep
        dump["config"] = _echo(args, lam=lam, lambda_source=source)
        _emit(dumps_json(dump), args.dump_path)


def _table_csv(probs, rows) -> str:
    return _csv_text(["estimator"] + [repr(float(p)) for p in probs],
                     ([label] + [float(q) for q in qs] for label, qs in rows))


def cmd_table(args):
    params = _params(args, window=False)
    params.require_identifiable()
    lam, source = _lambda(args, params)
    rep = run_limit_table(lam, params.rho, params.theta, params.sigma, reps=args.reps,
                          probs=args.probs, seed=args.seed, guard=args.guard, workers=args.workers)
    rep.config.update(_echo(args, lam=lam, lambda_source=source))
    _emit(_table_csv(rep.probs, rep.table_rows(["MLE", "BE"])), args.out)
    if args.report:
        _emit(dumps_json(rep.to_dict(args.emit_samples)), args.report)


def cmd_converge(args):
    params = _params(args)
    params.require_identifiable()
    rep = run_finite_convergence(params, n=args.n, reps=args.reps, seed=args.seed, probs=args.probs,
                                 limit_reps=args.limit_reps, lam=args.lam, burn_in=args.burn_in,
                                 guard=args.guard, workers=args.workers)
    rep.config.update(_echo(args))
    _emit(_table_csv(rep.probs, rep.table_rows(["MLE", "BE", "Simulated", "SimulatedBE"])), args.out)
    if args.report:
        _emit(dumps_json(rep.to_dict(args.emit_samples)), args.report)


def cmd_sweep(args):
    params = _params(args, window=False)
    params.require_identifiable()
    lam, source = _lambda(args, params)
    res = gamma_weight_sweep(lam, params.rho, params.theta, params.sigma, weights=args.weights,
                             reps=args.reps, seed=args.seed, guard=args.guard, workers=args.workers)
    res["config"].update(_echo(args, lam=lam, lambda_source=source))
    _emit(_csv_text(["weight", "second_moment", "se"],
                    zip(res["weights"], res["second_moment"], res["se"])), args.out)
    if args.report:
        _emit(dumps_json(res), args.report)


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "density": cmd_density,
    "limit-sim": cmd_limit_sim,
    "table": cmd_table,
    "converge": cmd_converge,
    "sweep-gamma": cmd_sweep,
}


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            args = _apply_config(parser, argv, args)
        if args.command in STOCHASTIC and args.seed is None:
            raise ConfigError(f"--seed is mandatory for '{args.command}'")
        COMMANDS[args.command](args)
    except TarError as exc:
        sys.stderr.write(json.dumps({"error": exc.kind, "exit_code": exc.exit_code,
                                     "message": str(exc)}) + "\n")
        return exc.exit_code
    return 0


def main():
    sys.exit(run())
