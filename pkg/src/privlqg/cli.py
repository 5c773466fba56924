"""Command-line front end.

    privlqg validate  --config CFG
    privlqg sweep     --config CFG [--t-min A --t-max B] [--out DIR]
    privlqg optimize  --config CFG [--alpha SPEC] [--scan] [--out DIR]
    privlqg simulate  --config CFG [--period T --seed S --trials M --horizon N] [--out DIR]
    privlqg reproduce-example [--out DIR] [--seed S]
"""

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, example_config, load_config, parse_alpha
from .errors import DetectabilityViolation, MonotonicityViolation, NonConvergence
from .intermittent import analyze_period
from .model import validate_model
from .optimize import dichotomy_search, linear_scan, sweep, verify_monotone
from .riccati import solve_steady_state
from .sim import default_burn_in, monte_carlo, simulate

log = logging.getLogger("privlqg")

MIN_SAMPLES = 10_000


class CliError(Exception):
    pass


def fmt(x):
    """Shortest round-trip decimal for floats."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _comment(cfg, seed=None):
    seed = cfg.sim.seed if seed is None else seed
    return f"privlqg {__version__} config_sha256={cfg.config_hash()} seed={seed}"


def _out_dir(cfg):
    path = Path(cfg.output_dir)
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".privlqg-write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise CliError(f"output directory {path} is not writable: {exc.strerror or exc}") from None
    return path


def _write_csv(path, header, rows, comment):
    with open(path, "w", newline="") as fh:
        fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    log.info("wrote %s", path)
    return path


def run_validate(cfg, stream=None):
    report = validate_model(cfg.model, rank_tol=cfg.rank_tol)
    print(report.render(), file=stream or sys.stdout)
    return 0 if report.overall else 1


def run_sweep(cfg):
    out = _out_dir(cfg)
    T_l, T_r = cfg.T_range
    steady = solve_steady_state(cfg.model, tol=cfg.fixed_point_tol)
    sweep(cfg.model, T_l, T_r, steady=steady, tol=cfg.fixed_point_tol)  # detectability guard
    rows = []
    for T in range(T_l, T_r + 1):
        a = analyze_period(cfg.model, T, steady=steady, tol=cfg.fixed_point_tol)
        rows.append((T, a.tr_Q_privacy, a.Q_lqg, a.O_star, steady.J_star))
    return _write_csv(out / "sweep.csv", ["T", "tr_Q_privacy", "Q_lqg", "O_star", "J_star"], rows, _comment(cfg))


def run_optimize(cfg):
    out = _out_dir(cfg)
    if not cfg.alpha:
        raise CliError("no alpha values given")
    T_l, T_r = cfg.T_range
    rows = sweep(cfg.model, T_l, T_r, tol=cfg.fixed_point_tol)
    if not cfg.scan and not verify_monotone(rows):
        raise MonotonicityViolation(
            f"Q_lqg is not non-decreasing on [{T_l}, {T_r}]; rerun with --scan for the exhaustive search"
        )
    search = linear_scan if cfg.scan else dichotomy_search
    table = []
    for alpha in cfg.alpha:
        res = search(cfg.model, T_l, T_r, alpha, rows=rows)
        table.append((alpha, res.T_star if res.feasible else "infeasible", res.Q_lqg_at_T_star, res.method))
    return _write_csv(out / "optimal_T.csv", ["alpha", "T_star", "Q_lqg_at_T_star", "method"], table, _comment(cfg))


def _rel_fro(emp, ref):
    return float(np.linalg.norm(emp - ref) / np.linalg.norm(ref))


def run_simulate(cfg):
    out = _out_dir(cfg)
    s = cfg.sim
    model = cfg.model
    steady = solve_steady_state(model, tol=cfg.fixed_point_tol)
    analysis = analyze_period(model, s.T, steady=steady, tol=cfg.fixed_point_tol)
    comment = _comment(cfg)

    trace = simulate(model, s.T, s.N, s.seed, steady=steady)
    trace_path = out / "trace.csv"
    trace.write_csv(trace_path, comment)
    log.info("wrote %s", trace_path)

    warnings = []
    burn_in = default_burn_in(s.T) if s.burn_in is None else s.burn_in
    if s.N <= burn_in:
        burn_in = s.N // 2
        warnings.append(f"horizon {s.N} too short for the default burn-in; using burn_in={burn_in}")
    if s.N - burn_in < 1:
        raise CliError(f"horizon {s.N} leaves no samples after burn-in")
    mc = monte_carlo(model, s.T, s.N, s.trials, s.seed, burn_in=burn_in, steady=steady)
    if s.trials < 2:
        warnings.append(f"trials={s.trials}: standard error unavailable, results are indicative only")
    if mc.samples < MIN_SAMPLES:
        warnings.append(f"only {mc.samples} post-burn-in samples (< {MIN_SAMPLES}); tolerances will not hold")

    rows = []
    for w in warnings:
        log.warning(w)
        rows.append(("warning", "", "", "", "", "", w))
    n = model.n
    for i, (emp, ref) in enumerate(zip(mc.offset_cov, analysis.cycle)):
        for r in range(n):
            for c in range(n):
                rows.append(("error_cov", i, r, c, emp[r, c], ref[r, c], ""))
        rows.append(("error_cov_rel_frobenius", i, "", "", _rel_fro(emp, ref), 0.0, f"samples={mc.offset_counts[i]}"))
    q_emp = mc.time_avg_cov - steady.P_bar
    for r in range(n):
        for c in range(n):
            rows.append(("Q_privacy", "", r, c, q_emp[r, c], analysis.Q_privacy[r, c], ""))
    rows.append(("average_cost", "", "", "", mc.cost.mean, analysis.O_star, "analytic column is O*"))
    rows.append(("average_cost_se", "", "", "", mc.cost.se, "", f"trials={mc.cost.n_trials}"))
    z = (mc.cost.mean - analysis.O_star) / mc.cost.se if mc.cost.se > 0 else float("nan")
    rows.append(("average_cost_z", "", "", "", z, "", ""))
    rows.append(("J_star", "", "", "", "", steady.J_star, ""))
    rows.append(("samples", "", "", "", mc.samples, "", f"burn_in={mc.burn_in}"))
    emp_path = _write_csv(
        out / "empirical.csv",
        ["quantity", "offset", "row", "col", "empirical", "analytic", "note"],
        rows,
        comment,
    )
    return trace_path, emp_path


def run_reproduce_example(cfg):
    run_sweep(cfg)
    run_optimize(cfg)
    run_simulate(cfg)


def build_parser():
    p = argparse.ArgumentParser(prog="privlqg", description=__doc__.splitlines()[0] if __doc__ else None)
    p.add_argument("--version", action="version", version=f"privlqg {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_config=True):
        if needs_config:
            sp.add_argument("--config", required=True, metavar="PATH")
        sp.add_argument("--out", metavar="DIR")

    sp = sub.add_parser("validate", help="check model assumptions")
    sp.add_argument("--config", required=True, metavar="PATH")

    sp = sub.add_parser("sweep", help="privacy metric and LQG loss over a range of T")
    common(sp)
    sp.add_argument("--t-min", type=int)
    sp.add_argument("--t-max", type=int)

    sp = sub.add_parser("optimize", help="optimal period for one or more loss thresholds")
    common(sp)
    sp.add_argument("--t-min", type=int)
    sp.add_argument("--t-max", type=int)
    sp.add_argument("--alpha", help="number, comma list, or start:stop:step")
    sp.add_argument("--scan", action="store_true", help="exhaustive scan instead of bisection")

    sp = sub.add_parser("simulate", help="Monte-Carlo closed loop under the privacy scheme")
    common(sp)
    sp.add_argument("--period", type=int, help="transmission period T")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--horizon", type=int)

    sp = sub.add_parser("reproduce-example", help="all four CSVs for the built-in example")
    common(sp, needs_config=False)
    sp.add_argument("--seed", type=int)
    return p


def _resolve(args):
    if args.command == "reproduce-example":
        cfg = example_config(args.out or "out")
    else:
        cfg = load_config(args.config)
        if getattr(args, "out", None):
            cfg = cfg.with_overrides(output_dir=Path(args.out))
    kw = {}
    t_min, t_max = getattr(args, "t_min", None), getattr(args, "t_max", None)
    if t_min is not None or t_max is not None:
        kw["T_range"] = (t_min or cfg.T_range[0], t_max or cfg.T_range[1])
    if getattr(args, "alpha", None):
        kw["alpha"] = parse_alpha(args.alpha)
    if getattr(args, "scan", False):
        kw["scan"] = True
    kw.update(
        T=getattr(args, "period", None),
        seed=getattr(args, "seed", None),
        trials=getattr(args, "trials", None),
        N=getattr(args, "horizon", None),
    )
    return cfg.with_overrides(**kw)


COMMANDS = {
    "validate": run_validate,
    "sweep": run_sweep,
    "optimize": run_optimize,
    "simulate": run_simulate,
    "reproduce-example": run_reproduce_example,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = _resolve(args)
        status = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (CliError, DetectabilityViolation, MonotonicityViolation, NonConvergence, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return status if isinstance(status, int) else 0


if __name__ == "__main__":
    sys.exit(main())
