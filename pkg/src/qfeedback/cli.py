"""Command-line interface.

Subcommands: evolve, steady, qfi-curve, sweep, optimize, trajectories,
reproduce, selftest.  All numeric output is CSV (to --out or stdout) with a
header that echoes the producing command; exit codes are 0 (success),
2 (usage), 3 (parameter domain), 4 (numerical accuracy / failed self test).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .dynamics import General, IdentityScaled, ModelParams, XYPlane, ZAxis, evolve, steady_state
from .errors import AccuracyError, ParameterDomainError, QFeedbackError
from .oracles import qfi_steady
from .qubit import HermitianOp, make_state
from .reproduce import FIGURE_IDS, build_figure
from .selftest import run_selftest
from .sweep import SweepSpec, optimize_feedback, qfi_curve, sweep_grid
from .tables import format_table, write_table
from .trajectories import TrajectoryConfig, homodyne_ensemble, homodyne_trajectory, jump_trajectory

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_ACCURACY = 4


def _add_common(p):
    p.add_argument("--feedback", choices=["identity", "xy", "z", "general"], default="xy")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0,
                   help="feedback strength")
    p.add_argument("--beta", type=float, default=np.pi,
                   help="XY feedback angle, radians")
    p.add_argument("--alpha", type=float, default=np.pi / 2,
                   help="initial-state angle, radians")
    p.add_argument("--eta", type=float, default=0.5, help="detection efficiency in (0, 1]")
    p.add_argument("--omega", type=float, default=0.0, help="Rabi frequency")
    p.add_argument("--eps1", type=float, default=0.0, help="general feedback: identity part")
    p.add_argument("--eps2", type=float, default=0.0, help="general feedback: Pauli part")
    p.add_argument("--axis", type=str, default="0,0,1",
                   help="general feedback axis ax,ay,az")
    p.add_argument("--t-max", dest="t_max", type=float, default=10.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--grid-n", dest="grid_n", type=int, default=81)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--ntraj", type=int, default=1)
    p.add_argument("--out", type=str, default=None, help="output CSV path (default stdout)")


def build_parser():
    ap = argparse.ArgumentParser(prog="qfb", description=__doc__)
    ap.add_argument("--version", action="version", version=f"qfb {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("evolve", "steady", "qfi-curve", "sweep", "optimize",
                 "trajectories", "reproduce", "selftest"):
        p = sub.add_parser(name)
        _add_common(p)
        if name == "sweep":
            p.add_argument("--sweep-axis", action="append", default=[],
                           metavar="NAME=START:STOP:N",
                           help="sweep axis, repeatable; NAME in eta|lambda|beta|alpha|t")
            p.add_argument("--quantity", choices=["qfi_t", "qfi_steady", "max_qfi"],
                           default="qfi_steady")
        if name == "optimize":
            p.add_argument("--quantity", choices=["qfi_steady", "max_qfi"],
                           default="qfi_steady")
        if name == "trajectories":
            p.add_argument("--unraveling", choices=["homodyne", "jump"], default="homodyne")
            p.add_argument("--local-osc", dest="local_osc", type=float, default=0.0)
        if name == "reproduce":
            p.add_argument("--fig", choices=list(FIGURE_IDS) + ["all"], default="all")
            p.add_argument("--outdir", type=str, default=".")
            p.add_argument("--no-plot", dest="plot", action="store_false",
                           help="skip the PNG rendering")
    return ap


def _check_domains(args):
    if not (np.isfinite(args.eta) and 0.0 < args.eta <= 1.0):
        raise ParameterDomainError(f"--eta must be in (0, 1], got {args.eta!r}")
    if not (np.isfinite(args.dt) and args.dt > 0.0):
        raise ParameterDomainError(f"--dt must be positive, got {args.dt!r}")
    if not (np.isfinite(args.t_max) and args.t_max > 0.0):
        raise ParameterDomainError(f"--t-max must be positive, got {args.t_max!r}")
    if args.grid_n < 2:
        raise ParameterDomainError(f"--grid-n must be >= 2, got {args.grid_n!r}")
    if args.ntraj < 1:
        raise ParameterDomainError(f"--ntraj must be >= 1, got {args.ntraj!r}")


def _feedback(args):
    if args.feedback == "identity":
        return IdentityScaled(args.lam)
    if args.feedback == "xy":
        return XYPlane(lam=args.lam, beta=args.beta)
    if args.feedback == "z":
        return ZAxis(lam=args.lam)
    try:
        axis = tuple(float(tok) for tok in args.axis.split(","))
    except ValueError:
        raise ParameterDomainError(f"--axis must be ax,ay,az, got {args.axis!r}")
    return General(HermitianOp(eps1=args.eps1, eps2=args.eps2, axis=axis))


def _params(args):
    return ModelParams(eta=args.eta, feedback=_feedback(args), omega=args.omega)


def _emit(args, command, columns, rows, seed=None, meta=()):
    text = format_table(columns, rows, command=command, seed=seed, meta=meta)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_evolve(args, command):
    p = _params(args)
    t = np.linspace(0.0, args.t_max, args.grid_n)
    res = evolve(make_state(args.alpha), p, t, dt=args.dt)
    rows = []
    for tv, s in zip(res.times, res.states):
        m = s.matrix
        rows.append([tv, m[0, 0].real, m[0, 1].real, m[0, 1].imag, *_bloch_row(m)])
    _emit(args, command, ["t", "rho11", "re_rho12", "im_rho12", "rx", "ry", "rz"], rows)


def _bloch_row(m):
    return [2.0 * m[0, 1].real, -2.0 * m[0, 1].imag, (m[0, 0] - m[1, 1]).real]


def _cmd_steady(args, command):
    p = _params(args)
    rho = steady_state(p)
    m = rho.matrix
    row = [args.eta, args.lam, args.beta, m[0, 0].real, m[0, 1].real, m[0, 1].imag]
    cols = ["eta", "lambda", "beta", "rho11", "re_rho12", "im_rho12"]
    if args.feedback == "xy":
        cols.append("qfi_steady")
        row.append(qfi_steady(args.eta, args.lam, args.beta))
    _emit(args, command, cols, [row])


def _cmd_qfi_curve(args, command):
    p = _params(args)
    t = np.linspace(0.0, args.t_max, args.grid_n)
    series = qfi_curve(make_state(args.alpha), p, t, dt=args.dt, alpha=args.alpha)
    rows = [[tv, fv] for tv, fv in zip(series.times, series.values)]
    _emit(args, command, ["t", "qfi"], rows)


def _parse_axis(spec_str):
    name, _, rng = spec_str.partition("=")
    try:
        start, stop, n = rng.split(":")
        grid = np.linspace(float(start), float(stop), int(n))
    except ValueError:
        raise ParameterDomainError(
            f"--sweep-axis must be NAME=START:STOP:N, got {spec_str!r}")
    return name.strip(), grid


def _cmd_sweep(args, command):
    if not args.sweep_axis:
        raise ParameterDomainError("sweep needs at least one --sweep-axis")
    axes = tuple(_parse_axis(s) for s in args.sweep_axis)
    fixed = {"feedback": args.feedback, "eta": args.eta, "lambda": args.lam,
             "beta": args.beta, "alpha": args.alpha,
             "t_max": args.t_max, "grid_n": args.grid_n}
    spec = SweepSpec(axes=axes, quantity=args.quantity, fixed=fixed)
    table = sweep_grid(spec, dt=args.dt)
    names = [n for n, _ in axes]
    rows = [[*(c[n] for n in names), v] for c, v in table.rows()]
    meta = [("missing", len(table.missing))]
    _emit(args, command, names + [args.quantity], rows, meta=meta)


def _cmd_optimize(args, command):
    objective = "steady_qfi" if args.quantity == "qfi_steady" else "max_t_qfi"
    result = optimize_feedback(args.eta, args.feedback, objective=objective,
                               grid_n=args.grid_n, alpha=args.alpha,
                               t_max=args.t_max, dt=args.dt)
    names = [n for n, _ in result.table.spec.axes]
    rows = [[*(c[n] for n in names), v] for c, v in result.table.rows()]
    meta = [(f"best_{k}", f"{v:.9g}") for k, v in result.best.items()]
    meta.append(("best_value", f"{result.value:.9g}"))
    _emit(args, command, names + [args.quantity], rows, meta=meta)


def _cmd_trajectories(args, command):
    p = _params(args)
    steps = max(1, int(round(args.t_max / args.dt)))
    cfg = TrajectoryConfig(dt=args.dt, steps=steps, seed=args.seed,
                           local_osc=args.local_osc, ntraj=args.ntraj)
    if args.ntraj == 1:
        run = homodyne_trajectory if args.unraveling == "homodyne" else jump_trajectory
        rec = run(make_state(args.alpha), p, cfg)
        rows = []
        for k, tv in enumerate(rec.times):
            b = _bloch_row(rec.states[k])
            cur = rec.photocurrent[k] if k < steps else float("nan")
            rows.append([tv, *b, cur])
        _emit(args, command, ["t", "rx", "ry", "rz", "photocurrent"], rows, seed=args.seed)
    else:
        if args.unraveling == "jump":
            raise ParameterDomainError(
                "--ntraj > 1 is supported for the homodyne unraveling only")
        ens = homodyne_ensemble(make_state(args.alpha), p, cfg)
        rows = [[tv, *ens.mean_bloch[k], *ens.stderr_bloch[k]]
                for k, tv in enumerate(ens.times)]
        _emit(args, command, ["t", "rx", "ry", "rz", "se_rx", "se_ry", "se_rz"],
              rows, seed=args.seed, meta=[("ntraj", args.ntraj)])


def _cmd_reproduce(args, command):
    os.makedirs(args.outdir, exist_ok=True)
    fig_ids = list(FIGURE_IDS) if args.fig == "all" else [args.fig]
    manifest = []
    for fig_id in fig_ids:
        tables = build_figure(fig_id, grid_n=args.grid_n, t_max=args.t_max, dt=args.dt)
        for table in tables:
            path = os.path.join(args.outdir, table.filename)
            meta = [(k, v) for k, v in sorted(table.params.items(), key=lambda kv: kv[0])]
            write_table(path, table.columns, table.rows, command=command, meta=meta)
            manifest.append((fig_id, table.filename, table.params))
        if args.plot:
            from .figures import render_figure
            render_figure(fig_id, tables, args.outdir)
    lines = [f"# tool: qfb {__version__}", f"# command: {command}",
             "figure,filename,parameters"]
    for fig_id, filename, params in manifest:
        blob = ";".join(f"{k}={v}" for k, v in sorted(params.items(), key=lambda kv: kv[0]))
        lines.append(f"{fig_id},{filename},{blob}")
    with open(os.path.join(args.outdir, "manifest.csv"), "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _cmd_selftest(args, command):
    ok = run_selftest(dt=args.dt)
    if not ok:
        raise AccuracyError("self test failed")


_COMMANDS = {
    "evolve": _cmd_evolve,
    "steady": _cmd_steady,
    "qfi-curve": _cmd_qfi_curve,
    "sweep": _cmd_sweep,
    "optimize": _cmd_optimize,
    "trajectories": _cmd_trajectories,
    "reproduce": _cmd_reproduce,
    "selftest": _cmd_selftest,
}


def run_command(argv) -> int:
    """Parse and run; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    command = "qfb " + " ".join(str(a) for a in argv)
    try:
        _check_domains(args)
        _COMMANDS[args.command](args, command)
    except AccuracyError as exc:
        print(f"qfb: accuracy error: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except QFeedbackError as exc:
        print(f"qfb: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
