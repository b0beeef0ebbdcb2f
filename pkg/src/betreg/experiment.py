"""Replication sweeps comparing squared, log and betting estimators against their bounds."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .bounds import BoundInputs, first_order_bound, linear_bound, second_order_bound
from .hypotheses import predict_support
from .solver import GridError, GridSpec, fit_betting, fit_log, fit_squared, worker_count
from .synthetic import (
    ConfigError,
    SynthConfig,
    SyntheticInstance,
    make_instance,
    make_linear_instance,
    replication_seed,
    sample_dataset,
)

ESTIMATORS = ("squared", "log", "betting")
CSV_HEADER = (
    "replication",
    "estimator",
    "n",
    "sigma2",
    "first_order_q",
    "mae",
    "bound_rhs",
    "objective",
    "grid_slack",
    "seed",
    "wall_ms",
)


@dataclass(frozen=True)
class ExperimentRecord:
    replication: int
    estimator: str
    n: int
    sigma2: float
    first_order_q: float
    mae: float
    bound_rhs: float
    objective: float
    grid_slack: float
    seed: int
    wall_ms: int

    def to_row(self) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            out.append(repr(float(v)) if isinstance(v, float) else str(v))
        return out


@dataclass(frozen=True)
class LinearSettings:
    dimension: int = 2
    support_size: int = 20
    cover_cap: int = 10**6
    eps: float | None = None  # None -> 1/n^2, raised as needed to respect cover_cap


@dataclass(frozen=True)
class ExperimentConfig:
    instance: SynthConfig = field(default_factory=SynthConfig)
    estimators: tuple = ESTIMATORS
    replications: int = 20
    delta: float = 0.1
    n_values: tuple = (400,)
    variance_scales: tuple | None = None
    grid: GridSpec = field(default_factory=GridSpec)
    seed: int = 0
    record_wall_time: bool = False
    linear: LinearSettings | None = None

    def __post_init__(self):
        bad = [e for e in self.estimators if e not in ESTIMATORS]
        if bad or not self.estimators:
            raise ConfigError(f"unknown estimators {bad}")
        if self.replications < 0:
            raise ConfigError("replications must be >= 0")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError("delta must lie in (0, 1)")
        if not self.n_values or any(int(n) < 1 for n in self.n_values):
            raise ConfigError("n_values must be positive integers")
        object.__setattr__(self, "estimators", tuple(self.estimators))
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        scales = self.variance_scales
        scales = (self.instance.variance_scale,) if scales is None else tuple(float(s) for s in scales)
        object.__setattr__(self, "variance_scales", scales)

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        obj = dict(obj)
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown experiment keys {sorted(unknown)}")
        try:
            if "instance" in obj:
                obj["instance"] = SynthConfig.from_json(obj["instance"])
            if "grid" in obj:
                obj["grid"] = GridSpec(**obj["grid"])
            if obj.get("linear") is not None:
                obj["linear"] = LinearSettings(**obj["linear"])
            for k in ("estimators", "n_values", "variance_scales"):
                if isinstance(obj.get(k), list):
                    obj[k] = tuple(obj[k])
            return cls(**obj)
        except (TypeError, GridError) as exc:
            raise ConfigError(str(exc)) from exc

    def to_json(self) -> dict:
        out = asdict(self)
        out["instance"] = self.instance.to_json()
        for k in ("estimators", "n_values", "variance_scales"):
            out[k] = list(out[k])
        return out


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            return ExperimentConfig.from_json(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc


# ---------------------------------------------------------------------------


def build_cell_instance(config: ExperimentConfig, n: int, variance_scale: float) -> SyntheticInstance:
    inst = replace(config.instance, variance_scale=variance_scale)
    if config.linear is None:
        return make_instance(inst)
    lin = config.linear
    eps = lin.eps if lin.eps is not None else 1.0 / (n * n)
    return make_linear_instance(
        lin.dimension, lin.support_size, inst.label_family, variance_scale, inst.seed, eps, lin.cover_cap
    )


def _fit(estimator: str, inst: SyntheticInstance, data, grid: GridSpec):
    if estimator == "squared":
        return fit_squared(inst.hclass, data)
    if estimator == "log":
        return fit_log(inst.hclass, data)
    return fit_betting(inst.hclass, data, grid, workers=1)


def _bound(estimator: str, config: ExperimentConfig, inst: SyntheticInstance, n: int, q: float, s2: float) -> float:
    inputs = BoundInputs(n, len(inst.hclass), config.delta)
    if estimator == "log":
        return first_order_bound(q, inputs)
    if estimator == "squared":
        # worst-case proxy: the classical rate is the first-order form at q = 1/4
        return first_order_bound(0.25, inputs)
    if config.linear is not None:
        return linear_bound(s2, n, config.linear.dimension, config.delta)
    return second_order_bound(s2, inputs, 0.0)


def _replication(config: ExperimentConfig, inst: SyntheticInstance, n: int, r: int, q: float, s2: float):
    seed = replication_seed(config.seed, r)
    data = sample_dataset(inst, n, seed)
    fstar = inst.fstar_values
    wts = inst.space.weights
    rows, failures = [], []
    for est in config.estimators:
        t0 = time.perf_counter()
        try:
            rep = _fit(est, inst, data, config.grid)
            fhat = predict_support(inst.hclass[rep.chosen_index], inst.space)
            mae = float(np.dot(wts, np.abs(fhat - fstar)))
            slack = float(rep.grid_slack or 0.0)
            bound = _bound(est, config, inst, n, q, s2) + slack
            objective = float(rep.objective_value)
        except (ValueError, ArithmeticError, RuntimeError) as exc:
            failures.append({"replication": r, "estimator": est, "n": n, "error": str(exc)})
            mae = bound = objective = slack = math.nan
        wall = int(round(1000 * (time.perf_counter() - t0))) if config.record_wall_time else 0
        rows.append(ExperimentRecord(r, est, n, s2, q, mae, bound, objective, slack, seed, wall))
    return rows, failures


def run_experiment(config: ExperimentConfig, workers: int | None = None):
    """All sweep cells; returns (records, summary).  Output order is fixed by the config."""
    workers = worker_count() if workers is None else workers
    records, cells, failures = [], [], []
    for n in config.n_values:
        for vs in config.variance_scales:
            inst = build_cell_instance(config, n, vs)
            wts = inst.space.weights
            fstar = inst.fstar_values
            q = float(np.dot(wts, fstar * (1.0 - fstar)))
            s2 = float(np.dot(wts, inst.variances))

            def job(r, inst=inst, n=n, q=q, s2=s2):
                return _replication(config, inst, n, r, q, s2)

            reps = range(config.replications)
            if workers > 1 and config.replications > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    results = list(pool.map(job, reps))
            else:
                results = [job(r) for r in reps]
            cell_rows = [row for rows, _ in results for row in rows]
            for _, fl in results:
                failures.extend(fl)
            records.extend(cell_rows)
            cells.append(_summarize_cell(config, n, vs, s2, q, len(inst.hclass), cell_rows))
    summary = {
        "cells": cells,
        "monotonicity": _monotonicity(config, cells),
        "failures": failures,
    }
    return records, summary


def _summarize_cell(config, n, vs, s2, q, class_size, rows) -> dict:
    per = {}
    for est in config.estimators:
        sub = [r for r in rows if r.estimator == est]
        maes = np.array([r.mae for r in sub], dtype=float)
        ok = ~np.isnan(maes)
        covered = sum(1 for r in sub if not math.isnan(r.mae) and r.mae <= r.bound_rhs)
        per[est] = {
            "replications": len(sub),
            "failures": int((~ok).sum()),
            "coverage": covered / len(sub) if sub else None,
            "median_mae": float(np.median(maes[ok])) if ok.any() else None,
            "mean_mae": float(np.mean(maes[ok])) if ok.any() else None,
        }
    return {
        "n": n,
        "variance_scale": vs,
        "sigma2": s2,
        "first_order_q": q,
        "class_size": class_size,
        "estimators": per,
    }


def _monotonicity(config, cells) -> dict:
    out = {}
    for est in config.estimators:
        by_n = {}
        for n in config.n_values:
            row = sorted((c for c in cells if c["n"] == n), key=lambda c: -c["sigma2"])
            med = [c["estimators"][est]["median_mae"] for c in row]
            by_n[str(n)] = {
                "sigma2": [c["sigma2"] for c in row],
                "median_mae": med,
                "strictly_decreasing_with_variance": len(med) > 1
                and None not in med
                and all(a > b for a, b in zip(med, med[1:])),
            }
        by_vs = {}
        for vs in config.variance_scales:
            row = sorted((c for c in cells if c["variance_scale"] == vs), key=lambda c: c["n"])
            med = [c["estimators"][est]["median_mae"] for c in row]
            by_vs[repr(vs)] = {
                "n": [c["n"] for c in row],
                "median_mae": med,
                "nonincreasing_in_n": None not in med and all(a >= b for a, b in zip(med, med[1:])),
            }
        out[est] = {"across_variance": by_n, "across_n": by_vs}
    return out


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow(r.to_row())
    return buf.getvalue()


def plot_data(summary: dict) -> str:
    """Whitespace table (gnuplot-readable) of per-cell median MAE."""
    lines = ["# n variance_scale sigma2 estimator median_mae coverage"]
    for c in summary["cells"]:
        for est, s in c["estimators"].items():
            med = "nan" if s["median_mae"] is None else repr(s["median_mae"])
            cov = "nan" if s["coverage"] is None else repr(s["coverage"])
            lines.append(f"{c['n']} {c['variance_scale']!r} {c['sigma2']!r} {est} {med} {cov}")
    return "\n".join(lines) + "\n"
