"""Method comparisons on a classification dataset, with CSV outputs."""

from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..problem import make_logistic, testing_error
from ..solver import reference_minimizer, solve, trace_csv_text
from .config import DatasetSpec, ExperimentConfig
from .data import load_libsvm, synth_classification

logger = logging.getLogger(__name__)

__all__ = ["RunResult", "build_dataset", "run_experiment", "run_one", "SUMMARY_COLUMNS"]

SUMMARY_COLUMNS = ("method", "replication", "reason", "iterations", "fev", "fev_to_tol",
                   "final_gnorm", "final_train_err", "final_test_err")
CURVE_COLUMNS = ("method", "replication", "k", "fev", "value")
CURVES = {
    "training_error": "err_f",
    "testing_error": "test_err",
    "eta": "eta",
    "dk": "Dk",
    "cg_iters": "cg_iters",
}


def build_dataset(spec: DatasetSpec):
    """Return (train, test); ``test`` may be None for a file source without test_path."""
    if spec.source == "synthetic":
        return synth_classification(spec.train_size, spec.dim, spec.separability, spec.seed,
                                    spec.test_size, spec.cluster_shift, spec.feature_scale,
                                    spec.anisotropy)
    train = load_libsvm(spec.source)
    test = load_libsvm(spec.test_path, n_features=train.n) if spec.test_path else None
    if test is not None and test.n > train.n:
        raise ValueError("test set has more features than the training set")
    return train, test


@dataclass
class RunResult:
    method: str
    replication: int
    reason: str
    trace_csv: str
    summary: dict
    curves: dict  # curve name -> list of (k, fev, value)


def _run_seed(base_seed, method_index, replication):
    # independent of execution order, so parallel runs reproduce serial ones
    return int(np.random.SeedSequence([base_seed, method_index, replication]).generate_state(1)[0])


def run_one(problem, test, method, config, replication, seed, reference):
    """Solve once; never raises, failures are reported in the result."""
    xs = []
    try:
        rep = solve(problem, np.zeros(problem.n), config.replace(seed=seed),
                    reference=reference, on_step=lambda info: xs.append(info.x))
    except Exception as exc:  # one failed run must not abort the experiment
        logger.exception("run %s/%d failed", method, replication)
        return RunResult(method, replication, f"error: {exc}", "", {
            "method": method, "replication": replication, "reason": f"error: {exc}"}, {})
    while len(xs) < len(rep.trace):
        xs.append(rep.x)
    test_err = [testing_error(x, test) for x in xs] if test is not None else None

    curves = {name: [] for name in CURVES}
    for i, rec in enumerate(rep.trace):
        for name, attr in CURVES.items():
            if attr == "test_err":
                val = None if test_err is None else test_err[i]
            else:
                val = getattr(rec, attr)
            if val is not None:
                curves[name].append((rec.k, rec.fev, val))
    last = rep.trace[-1]
    summary = {
        "method": method,
        "replication": replication,
        "reason": rep.reason,
        "iterations": rep.iterations,
        "fev": last.fev,
        "fev_to_tol": last.fev if rep.reason == "gradient-tolerance" else math.inf,
        "final_gnorm": last.gnorm,
        "final_train_err": last.err_f,
        "final_test_err": None if test_err is None else test_err[-1],
    }
    return RunResult(method, replication, rep.reason, trace_csv_text(rep.trace), summary, curves)


def _task(args):
    return run_one(*args)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def run_experiment(config: ExperimentConfig, output=None, workers=None):
    """Run every method for every replication and write the report files.

    Files written under the output directory:

    ``traces/<method>_r<rep>.csv``
        Per-iteration trace.
    ``summary.csv``
        One row per run.
    ``training_error.csv``, ``testing_error.csv``, ``eta.csv``, ``dk.csv``, ``cg_iters.csv``
        Long-format curves ``(method, replication, k, fev, value)``.

    Returns
    -------
    list of RunResult
    """
    out = output or config.output
    workers = workers or config.workers
    os.makedirs(os.path.join(out, "traces"), exist_ok=True)

    train, test = build_dataset(config.dataset)
    problem = make_logistic(train, config.dataset.lam)
    x_star = reference_minimizer(problem)
    reference = (x_star, problem.value(x_star))

    tasks = []
    for mi, (name, cfg) in enumerate(config.methods.items()):
        for r in range(config.replications):
            tasks.append((problem, test, name, cfg, r, _run_seed(config.seed, mi, r), reference))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_task, tasks))
    else:
        results = [_task(t) for t in tasks]

    for res in results:
        if res.trace_csv:
            path = os.path.join(out, "traces", f"{res.method}_r{res.replication}.csv")
            with open(path, "w", newline="", encoding="utf-8") as fh:
                fh.write(res.trace_csv)
    _write_csv(os.path.join(out, "summary.csv"), SUMMARY_COLUMNS,
               [[res.summary.get(c) for c in SUMMARY_COLUMNS] for res in results])
    for name in CURVES:
        rows = [[res.method, res.replication, k, fev, v]
                for res in results for (k, fev, v) in res.curves.get(name, [])]
        _write_csv(os.path.join(out, f"{name}.csv"), CURVE_COLUMNS, rows)
    return results
