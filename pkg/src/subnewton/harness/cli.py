"""Command-line entry point: ``subnewton {solve,experiment,ms-study,gen-data,fit-rates}``.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

import numpy as np

from ..errors import ConfigError
from ..problem import QuadraticSpec, make_logistic, make_quadratic
from ..solver import reference_minimizer, solve, write_trace_csv
from .config import DatasetSpec, load_config, method_config
from .data import LibsvmFormatError, synth_classification, write_libsvm
from .experiment import build_dataset, run_experiment
from .msstudy import ms_study
from .rates import fit_rates

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("subnewton")


def _add_common(p):
    p.add_argument("--config", help="experiment config file (INI)")
    p.add_argument("--seed", type=int, help="base seed (overrides the config)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int, default=None, help="parallel runs")


def _load(args):
    cfg = load_config(args.config) if args.config else None
    if cfg is not None and args.seed is not None:
        cfg.seed = args.seed
    return cfg


def cmd_solve(args):
    cfg = _load(args)
    if args.dataset:
        spec = DatasetSpec(source=args.dataset)
    elif cfg is not None:
        spec = cfg.dataset
    else:
        spec = DatasetSpec()
    train, test = build_dataset(spec)
    problem = make_logistic(train, spec.lam)
    if cfg is not None and args.method in cfg.methods:
        solver_cfg = cfg.methods[args.method]
    else:
        solver_cfg = method_config(args.method)
    if args.seed is not None:
        solver_cfg = solver_cfg.replace(seed=args.seed)
    x_star = reference_minimizer(problem)
    rep = solve(problem, np.zeros(problem.n), solver_cfg,
                reference=(x_star, problem.value(x_star)))
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, f"{args.method}_trace.csv")
    write_trace_csv(rep.trace, path)
    last = rep.trace[-1]
    print(f"{args.method}: {rep.reason} after {rep.iterations} iterations, "
          f"FEV {last.fev:.4g}, ||g|| {last.gnorm:.3e}, f-f* {last.err_f:.3e}")
    print(f"trace written to {path}")
    return EXIT_OK if rep.reason in ("gradient-tolerance", "max-iterations") else EXIT_RUNTIME


def cmd_experiment(args):
    if not args.config:
        raise ConfigError("experiment requires --config")
    cfg = _load(args)
    results = run_experiment(cfg, output=args.out, workers=args.workers)
    out = args.out or cfg.output
    for r in results:
        s = r.summary
        print(f"{s['method']:>12} r{s['replication']}: {s['reason']}, "
              f"iterations {s.get('iterations')}, FEV {s.get('fev')}")
    print(f"reports written to {out}")
    failed = [r for r in results if r.reason.startswith("error")]
    return EXIT_RUNTIME if failed else EXIT_OK


def cmd_ms_study(args):
    cfg = _load(args)
    solver_cfg = method_config("custom", method="GIN-R", forcing="fixed", eta=args.eta,
                               C=args.C, alpha=args.alpha, nu="zero", tol=1e-12,
                               max_iters=args.iters)
    if cfg is not None and "custom" in cfg.methods:
        solver_cfg = cfg.methods["custom"]
    problem = make_quadratic(QuadraticSpec(n=args.dim, N=args.size, lambda_1=args.lambda_1,
                                           lambda_n=args.lambda_n,
                                           perturbation=args.perturbation,
                                           seed=args.problem_seed))
    seed = args.seed if args.seed is not None else 0
    table = ms_study(problem, solver_cfg, args.replications, seed=seed)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "ms_study.csv")
    table.to_csv(path)
    for k, cnt, m, lo, hi, c in table.rows():
        print(f"k={k:3d} n={cnt:4d} E|x-x*|^2={m:.3e} [{lo:.3e}, {hi:.3e}] ratio={c:.3f}")
    print(f"table written to {path}")
    return EXIT_OK


def cmd_gen_data(args):
    train, test = synth_classification(args.size, args.dim, args.separability,
                                       args.seed if args.seed is not None else 0,
                                       anisotropy=args.anisotropy,
                                       feature_scale=args.feature_scale)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    write_libsvm(train, os.path.join(out, "train.libsvm"))
    write_libsvm(test, os.path.join(out, "test.libsvm"))
    print(f"wrote {train.N} training and {test.N} test rows (n={train.n}) to {out}")
    return EXIT_OK


def cmd_fit_rates(args):
    with open(args.trace, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    col = args.column
    if not rows or col not in rows[0]:
        raise ConfigError(f"trace has no column {col!r}")
    err = np.array([float(r[col]) if r[col] else np.nan for r in rows])
    gn = np.array([float(r["gnorm"]) for r in rows]) if "gnorm" in rows[0] else None
    fits = fit_rates(err, gn)
    if not fits:
        print("insufficient data")
    for f in fits:
        rho = "-" if f.rho is None else f"{f.rho:.4f}"
        print(f"[{f.start:3d},{f.stop:3d}) {f.classification:22s} rho={rho} R2={f.r2:.4f}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="subnewton", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run one method on one problem")
    _add_common(s)
    s.add_argument("--dataset", help="LIBSVM training file (default: synthetic)")
    s.add_argument("--method", default="FIN", help="registered method name")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("experiment", help="run a full method comparison")
    _add_common(s)
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("ms-study", help="Monte Carlo mean-square study on a quadratic")
    _add_common(s)
    s.add_argument("--replications", "-M", type=int, default=100)
    s.add_argument("--dim", type=int, default=20)
    s.add_argument("--size", type=int, default=500)
    s.add_argument("--lambda-1", type=float, default=0.5)
    s.add_argument("--lambda-n", type=float, default=1.0)
    s.add_argument("--eta", type=float, default=0.05)
    s.add_argument("--C", type=float, default=4.0)
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--perturbation", type=float, default=0.3)
    s.add_argument("--iters", type=int, default=12)
    s.add_argument("--problem-seed", type=int, default=0)
    s.set_defaults(func=cmd_ms_study)

    s = sub.add_parser("gen-data", help="write a synthetic train/test pair in LIBSVM format")
    _add_common(s)
    s.add_argument("--size", type=int, default=2000)
    s.add_argument("--dim", type=int, default=100)
    s.add_argument("--separability", type=float, default=0.9)
    s.add_argument("--anisotropy", type=float, default=1.0)
    s.add_argument("--feature-scale", type=float, default=None)
    s.set_defaults(func=cmd_gen_data)

    s = sub.add_parser("fit-rates", help="classify convergence rates in a trace CSV")
    s.add_argument("trace")
    s.add_argument("--column", default="err_f")
    s.set_defaults(func=cmd_fit_rates)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, LibsvmFormatError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        log.debug("failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
