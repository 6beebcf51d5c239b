"""Command-line front end.

Subcommands: weights, solve, reproduce, region, resolvent.  Every command
honors --out DIR and writes only inside it; outputs are deterministic
(identical config gives byte-identical files).  Exit codes: 0 success,
2 usage error, 3 solver failure, 4 tolerance failure in reproduce.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, problems, tables
from . import resolvent as rsv
from . import solver as slv
from . import weights as wt

_EXIT_USAGE = 2
_EXIT_SOLVER = 3
_EXIT_TOLERANCE = 4


def _meta_line(**kv) -> str:
    parts = [f"mlstab v{__version__}"]
    parts += [f"{k}={v}" for k, v in kv.items() if v is not None]
    return "# " + " ".join(parts) + "\n"


def _write(out_dir: str, name: str, text: str) -> Path:
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    path = root / name
    path.write_text(text)
    return path


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _alpha_in_open_interval(value: str) -> float:
    alpha = float(value)
    if not (0.0 < alpha < 1.0):
        raise argparse.ArgumentTypeError(f"alpha must be in (0,1), got {value}")
    return alpha


def _add_common(p: argparse.ArgumentParser, schemes=wt.SCHEMES) -> None:
    p.add_argument("--scheme", required=True,
                   type=lambda s: s.replace("-", "_").lower(), choices=list(schemes))
    p.add_argument("--alpha", required=True, type=_alpha_in_open_interval)
    p.add_argument("--out", default=".", help="output directory (default: cwd)")


def _add_problem_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", default="scalar", choices=["scalar", "advection", "lorenz"])
    p.add_argument("--b", type=float, default=10.0, help="scalar-test parameter")
    p.add_argument("--y0", type=float, default=5.0, help="scalar-test initial value")
    p.add_argument("--a", type=float, default=0.1, help="advection speed")
    p.add_argument("--D", type=float, default=5.0, help="diffusion coefficient")
    p.add_argument("--nx", type=int, default=64, help="advection grid size")
    p.add_argument("--control", action=argparse.BooleanOptionalAction, default=True,
                   help="apply the Lorenz feedback")


def _problem_from_args(args) -> slv.FOdeProblem:
    return problems.by_name(args.problem, args.alpha, b=args.b, y0=args.y0,
                            a=args.a, D=args.D, nx=args.nx, control=args.control)


def cmd_weights(args) -> int:
    w = wt.scheme_weights(args.scheme, args.alpha, args.n)
    rows = ["n,mu,omega,sigma"]
    for n in range(args.n):
        mu = _fmt(w.mu[n]) if w.mu is not None else ""
        om = _fmt(w.omega[n]) if w.omega is not None else ""
        sg = _fmt(w.sigma[n]) if w.sigma is not None else ""
        rows.append(f"{n},{mu},{om},{sg}")
    text = _meta_line(cmd="weights", scheme=args.scheme, alpha=args.alpha, n=args.n) \
        + "\n".join(rows) + "\n"
    path = _write(args.out, f"weights_{args.scheme}_a{args.alpha:g}.csv", text)
    print(path)
    return 0


def _trajectory_csv(traj: slv.Trajectory, meta: str) -> str:
    d = traj.states.shape[1]
    header = "t," + ",".join(f"y{i}_re,y{i}_im" for i in range(d)) + ",norm"
    lines = [header]
    norms = traj.norms()
    for n, t in enumerate(traj.times):
        comps = ",".join(f"{_fmt(traj.states[n, i].real)},{_fmt(traj.states[n, i].imag)}"
                         for i in range(d))
        lines.append(f"{_fmt(t)},{comps},{_fmt(norms[n])}")
    return meta + "\n".join(lines) + "\n"


def cmd_solve(args) -> int:
    prob = _problem_from_args(args)
    if args.t_end is not None:
        N = int(round(args.t_end / args.h)) + args.m
    elif args.n_steps is not None:
        N = args.n_steps
    else:
        print("one of --t-end/--n-steps is required", file=sys.stderr)
        return _EXIT_USAGE
    if N < 1:
        print("empty run: increase --t-end or --n-steps", file=sys.stderr)
        return _EXIT_USAGE
    try:
        traj = slv.solve(prob, args.scheme, args.h, N)
    except slv.SolverError as exc:
        print(f"solver failure: {exc} (step {exc.step})", file=sys.stderr)
        return _EXIT_SOLVER
    meta = _meta_line(cmd="solve", scheme=args.scheme, alpha=args.alpha, h=args.h,
                      problem=args.problem)
    stem = f"solve_{args.problem}_{args.scheme}_a{args.alpha:g}"
    path = _write(args.out, stem + ".csv", _trajectory_csv(traj, meta))

    report = analysis.p_index(traj, m=args.m)
    p_rows = ["t,p_alpha"] + [f"{_fmt(t)},{_fmt(p)}"
                              for t, p in zip(report.times, report.p)]
    _write(args.out, stem + "_pindex.csv", meta + "\n".join(p_rows) + "\n")
    summary = {
        "scheme": args.scheme,
        "alpha": args.alpha,
        "h": args.h,
        "steps": traj.n_steps,
        "truncated_at": traj.truncated_at,
        "fitted_slope": report.fitted_slope,
        "fitted_constant": report.fitted_constant,
        "verdict": report.verdict,
    }
    if args.checkpoints:
        ts = [float(s) for s in args.checkpoints.split(",")]
        summary["p_at"] = {f"{t:g}": round(p, 4)
                           for t, p in analysis.p_at_checkpoints(traj, ts, m=args.m)}
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    _write(args.out, stem + "_summary.json", text)
    print(text, end="")
    return 0


def cmd_reproduce(args) -> int:
    cells = tables.reproduce(args.table, m=args.m, tolerance=args.tolerance)
    meta = _meta_line(cmd="reproduce", table=args.table.upper(), m=args.m)
    path = _write(args.out, f"reproduce_{args.table.upper()}.csv",
                  meta + tables.results_to_csv(cells))
    n_fail = sum(1 for c in cells if not c.passed)
    asserted = [c for c in cells if c.asserted]
    worst = max((c.deviation for c in asserted), default=0.0)
    print(f"{path}: {len(cells)} cells, {len(asserted)} asserted, "
          f"worst asserted deviation {worst:.2e}, {n_fail} failing")
    return _EXIT_TOLERANCE if n_fail else 0


def _sector_svg(sample: analysis.RegionSample) -> str:
    pts = sample.boundary
    xs, ys = pts.real, pts.imag
    span = max(np.max(np.abs(xs)), np.max(np.abs(ys)), 1e-9) * 1.1
    scale = 240.0 / span

    def sx(x):
        return 250.0 + scale * x

    def sy(y):
        return 250.0 - scale * y

    poly = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    ang = sample.alpha * math.pi / 2.0
    rays = []
    for s in (1, -1):
        rays.append(f'<line x1="{sx(0):.2f}" y1="{sy(0):.2f}" '
                    f'x2="{sx(span * math.cos(s * ang)):.2f}" '
                    f'y2="{sy(span * math.sin(s * ang)):.2f}" '
                    'stroke="red" stroke-dasharray="4 3"/>')
    return (
        '<svg xmlns="http://www.w3.org/2000/svg" width="500" height="500" '
        'viewBox="0 0 500 500">\n'
        f'<polyline points="{poly}" fill="none" stroke="black"/>\n'
        + "\n".join(rays) + "\n</svg>\n"
    )


def cmd_region(args) -> int:
    sample = analysis.region_boundary(args.scheme, args.alpha, args.h,
                                      n_theta=args.n_theta)
    rows = ["theta,re,im"]
    for th, z in zip(sample.theta, sample.boundary):
        rows.append(f"{_fmt(th)},{_fmt(z.real)},{_fmt(z.imag)}")
    meta = _meta_line(cmd="region", scheme=args.scheme, alpha=args.alpha, h=args.h)
    stem = f"region_{args.scheme}_a{args.alpha:g}"
    path = _write(args.out, stem + ".csv", meta + "\n".join(rows) + "\n")
    if args.svg:
        _write(args.out, stem + ".svg", _sector_svg(sample))
    print(path)
    return 0


def cmd_resolvent(args) -> int:
    prob = _problem_from_args(args)
    summary: dict = {"scheme": args.scheme, "alpha": args.alpha, "h": args.h,
                     "n_max": args.n_max}
    if args.scheme == wt.ALPHA_DIFF:
        # the quadrature identity concerns the linear part: run homogeneously
        hom = slv.FOdeProblem(prob.alpha, prob.A, prob.y0, label=prob.label)
        traj = slv.solve_alpha_diff(hom, args.h, args.n_max, variant="poisson")
        devs = []
        for n in range(0, min(args.n_max, args.q_check) + 1, max(1, args.q_stride)):
            q1 = rsv.poisson_resolvent(prob.A, args.alpha, args.h, n, 1.0)
            devs.append(float(np.max(np.abs(q1 @ prob.y0 - traj.states[n]))) if n
                        else 0.0)
        summary["poisson_vs_impulse_max_dev"] = max(devs)
        text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
        _write(args.out, f"resolvent_{args.scheme}_a{args.alpha:g}_summary.json", text)
        print(text, end="")
        return 0

    r = rsv.impulse_resolvent(args.scheme, prob.A, args.alpha, args.h, args.n_max)
    nd = rsv.operator_norms(r.d)
    nD = rsv.operator_norms(r.D)
    rows = ["n,t,norm_d,norm_D"]
    for n, t in enumerate(r.times):
        rows.append(f"{n},{_fmt(t)},{_fmt(nd[n])},{_fmt(nD[n])}")
    meta = _meta_line(cmd="resolvent", scheme=args.scheme, alpha=args.alpha, h=args.h)
    stem = f"resolvent_{args.scheme}_a{args.alpha:g}"
    path = _write(args.out, stem + ".csv", meta + "\n".join(rows) + "\n")

    d0_dev = float(np.max(np.abs(r.D[0] - rsv.d0_closed_form(args.scheme, prob.A,
                                                             args.alpha, args.h))))
    summary["D0_closed_form_dev"] = d0_dev
    try:
        rep = rsv.verify_resolvent_decay(r)
        summary.update(slope_d=rep.slope_d, slope_D=rep.slope_D,
                       sup_t_alpha_d=rep.sup_t_alpha_d,
                       sup_t_alpha1_D=rep.sup_t_alpha1_D,
                       applicable=rep.applicable)
    except rsv.InsufficientRangeError as exc:
        summary["decay_fit"] = f"not available: {exc}"
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    _write(args.out, stem + "_summary.json", text)
    print(text, end="")
    return 0


def _load_config(path: str) -> dict:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"bad config line: {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlstab",
        description="Caputo fractional-ODE schemes and their long-time decay diagnostics",
    )
    parser.add_argument("--version", action="version", version=f"mlstab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weights", help="dump a scheme's weight table as CSV")
    _add_common(p)
    p.add_argument("--n", type=int, default=32, help="number of weights")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("solve", help="run a scheme on a named problem")
    _add_common(p)
    _add_problem_flags(p)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--n-steps", type=int, default=None)
    p.add_argument("--m", type=int, default=5, help="index offset of p")
    p.add_argument("--checkpoints", default="", help="comma-separated t values")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("reproduce", help="recompute a reference grid")
    p.add_argument("table", choices=[t.lower() for t in tables.TABLE_IDS] + list(tables.TABLE_IDS))
    p.add_argument("--m", type=int, default=5)
    p.add_argument("--tolerance", type=float, default=None,
                   help="override the grid's per-cell tolerance")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("region", help="sample a stability-region boundary")
    _add_common(p, schemes=(wt.FBDF1, wt.FBDF2, wt.FADAMS2, wt.L1))
    p.add_argument("--h", type=float, default=0.1)
    p.add_argument("--n-theta", type=int, default=2048)
    p.add_argument("--svg", action="store_true", help="also write an SVG sketch")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("resolvent", help="extract discrete resolvents and their decay")
    _add_common(p)
    _add_problem_flags(p)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--n-max", type=int, default=2000)
    p.add_argument("--q-check", type=int, default=50,
                   help="alpha-diff only: compare Q1^n up to this n")
    p.add_argument("--q-stride", type=int, default=10)
    p.set_defaults(func=cmd_resolvent)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if "--config" in argv:
        i = argv.index("--config")
        try:
            cfg_path = argv[i + 1]
        except IndexError:
            print("--config requires a path", file=sys.stderr)
            return _EXIT_USAGE
        defaults = _load_config(cfg_path)
        del argv[i:i + 2]
    else:
        defaults = {}
    parser = build_parser()
    if defaults:
        for action in parser._subparsers._group_actions[0].choices.values():  # noqa: SLF001
            typed = {}
            for sub_action in action._actions:  # noqa: SLF001
                if sub_action.dest in defaults:
                    raw = defaults[sub_action.dest]
                    typed[sub_action.dest] = sub_action.type(raw) if sub_action.type else raw
                    sub_action.required = False  # the config supplies it
            if typed:
                action.set_defaults(**typed)
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (ValueError, slv.SolverError) as exc:
        if isinstance(exc, slv.SolverError):
            print(f"solver failure: {exc}", file=sys.stderr)
            return _EXIT_SOLVER
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
