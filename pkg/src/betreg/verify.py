"""Property suites bundled for the ``verify`` subcommand.

Every suite returns a JSON-ready dict with ``passed`` and a measured margin.
"""
from __future__ import annotations

import math

import numpy as np

from .bounds import gap_example
from .hypotheses import Dataset, HypothesisClass, Tabulated
from .losses import betting_H
from .solver import (
    LIPSCHITZ,
    GridSpec,
    betting_objectives,
    build_grid,
    inner_max,
    oracle_inner_max,
)
from .synthetic import (
    Bernoulli,
    Deterministic,
    SynthConfig,
    ThreePoint,
    enumerated_moments,
    is_bernoulli_distributed,
    make_instance,
    make_rng,
    sample_dataset,
)

SUITES = ("structural", "domain", "oracle", "variance_proxy", "lipschitz", "gap")


def random_tabulated_problem(rng: np.random.Generator, support: int, size: int, n: int):
    """Class of uniformly random tabulated members plus Bernoulli labels from member 0."""
    tables = rng.random((size, support))
    F = HypothesisClass(tuple(Tabulated(t) for t in tables), 0)
    idx = rng.integers(support, size=n)
    y = (rng.random(n) < tables[0][idx]).astype(float)
    return F, Dataset(idx.astype(float), y, idx)


def structural(trials: int = 20, seed: int = 0) -> dict:
    rng = make_rng(seed, 100)
    worst_zero, min_L = 0.0, math.inf
    for _ in range(trials):
        F, data = random_tabulated_problem(rng, 5, 5, int(rng.integers(5, 60)))
        phi = float(rng.uniform(0, data.n / 4))
        c = float(rng.uniform(0, 0.25))
        f, h = F[0], F[1]
        worst_zero = max(
            worst_zero,
            abs(betting_H(f, f, data, phi, c)),
            abs(betting_H(h, f, data, 0.0, c)),
            abs(betting_H(h, f, data, phi, 0.0)),
        )
        grid = build_grid(GridSpec(), data.n)
        min_L = min(min_L, min(v for v, _, _ in betting_objectives(F, data, grid, workers=1)))
    return {"suite": "structural", "passed": worst_zero == 0.0 and min_L >= 0.0,
            "max_abs_structural_zero": worst_zero, "min_L": min_L}


def domain_arguments(samples: int, seed: int) -> np.ndarray:
    """1 + (y - f)clip(phi(h - f), [-c, c]) over random tuples, boundary-heavy."""
    rng = make_rng(seed, 101)
    y, f, h = (rng.random(samples) for _ in range(3))
    # push a fifth of each coordinate onto the boundary of [0, 1]
    for arr in (y, f, h):
        sel = rng.random(samples) < 0.2
        arr[sel] = np.round(arr[sel])
    phi = rng.random(samples) * rng.choice([0.25, 25.0, 2500.0], samples)
    c = rng.random(samples) * 0.25
    c[rng.random(samples) < 0.2] = 0.25
    bet = np.minimum(np.maximum(phi * (h - f), -c), c)
    return 1.0 + (y - f) * bet


def domain(samples: int = 10**6, seed: int = 0) -> dict:
    m = float(domain_arguments(samples, seed).min())
    return {"suite": "domain", "passed": m >= 0.75, "min_log_argument": m, "margin": m - 0.75}


def oracle(instances: int = 50, support: int = 5, size: int = 5, n: int = 50, seed: int = 0) -> dict:
    """Geometric vs exact (eps = 1/(4n)) vs a 4x finer brute-force oracle."""
    rng = make_rng(seed, 102)
    eps = 1.0 / (4 * n)
    tol_geo = LIPSCHITZ * (eps + eps)
    tol_orc = LIPSCHITZ * (eps / 4 * 2)
    worst_geo = worst_orc = 0.0
    min_gap = math.inf
    g_geo = build_grid(GridSpec(mode="geometric"), n)
    g_exa = build_grid(GridSpec(mode="exact"), n)
    for i in range(instances):
        fam = ("bernoulli", "threepoint")[i % 2]
        inst = make_instance(
            SynthConfig(support_size=support, class_size=size, label_family=fam, variance_scale=0.3,
                        perturbation_magnitudes=(0.02, 0.05, 0.1, 0.2), fstar_range=(0.25, 0.75)),
            seed=int(rng.integers(2**31)),
        )
        data = sample_dataset(inst, n, int(rng.integers(2**31)))
        f = inst.hclass[int(rng.integers(size))]
        v_geo, _ = inner_max(f, inst.hclass, data, g_geo)
        v_exa, _ = inner_max(f, inst.hclass, data, g_exa)
        v_orc = oracle_inner_max(f, inst.hclass, data, eps / 4)
        worst_geo = max(worst_geo, abs(v_geo - v_exa))
        worst_orc = max(worst_orc, v_orc - v_exa)
        min_gap = min(min_gap, v_orc - v_exa)
    passed = worst_geo <= tol_geo and worst_orc <= tol_orc and min_gap >= -1e-12
    return {"suite": "oracle", "passed": passed, "max_geometric_vs_exact": worst_geo,
            "tolerance_geometric": tol_geo, "max_oracle_minus_exact": worst_orc,
            "min_oracle_minus_exact": min_gap, "tolerance_oracle": tol_orc}


def random_label_model(rng: np.random.Generator):
    kind = int(rng.integers(3))
    m = float(rng.random())
    if kind == 0:
        return Bernoulli(m)
    if kind == 1:
        a = float(rng.random()) * min(m, 1 - m)
        return ThreePoint(m, a, float(rng.random()) * 0.5)
    return Deterministic(m)


def variance_proxy(models: int = 1000, seed: int = 0) -> dict:
    """Var(Y) <= E[Y](1 - E[Y]), tight exactly for {0,1}-valued labels."""
    rng = make_rng(seed, 103)
    worst = -math.inf
    mismatches = 0
    for _ in range(models):
        model = random_label_model(rng)
        mom = enumerated_moments(model)
        excess = mom["variance"] - mom["mean_one_minus_mean"]
        worst = max(worst, excess)
        mismatches += (abs(excess) <= 1e-12) != is_bernoulli_distributed(model)
    return {"suite": "variance_proxy", "passed": worst <= 1e-12 and mismatches == 0,
            "max_variance_minus_proxy": worst, "equality_mismatches": mismatches}


def lipschitz(pairs: int = 200, n: int = 100, seed: int = 0) -> dict:
    """|L(f) - L(f')| <= (4/3) n ||f - f'||_inf on exact grids."""
    rng = make_rng(seed, 104)
    grid = build_grid(GridSpec(mode="exact"), n)
    worst_ratio, violations = 0.0, 0
    for _ in range(pairs):
        F, data = random_tabulated_problem(rng, 5, 5, n)
        i, j = rng.choice(len(F), size=2, replace=False)
        Li, _ = inner_max(F[int(i)], F, data, grid)
        Lj, _ = inner_max(F[int(j)], F, data, grid)
        dist = float(np.max(np.abs(F[int(i)].values - F[int(j)].values)))
        bound = LIPSCHITZ * n * dist
        violations += abs(Li - Lj) > bound
        if dist > 0:
            worst_ratio = max(worst_ratio, abs(Li - Lj) / (n * dist))
    return {"suite": "lipschitz", "passed": violations == 0, "violations": violations,
            "max_ratio_over_n": worst_ratio, "limit": LIPSCHITZ}


def gap(eps: float = 0.01) -> dict:
    lhs, rhs = gap_example(eps)
    return {"suite": "gap", "passed": abs(lhs - eps) <= 1e-12 and abs(rhs - 0.5) <= 1e-12 and lhs <= rhs,
            "eps": eps, "lhs": lhs, "rhs": rhs}


def run_suites(names, seed: int = 0, quick: bool = False) -> dict:
    sizes = {
        "structural": dict(trials=5 if quick else 20),
        "domain": dict(samples=10**5 if quick else 10**6),
        "oracle": dict(instances=5 if quick else 50),
        "variance_proxy": dict(models=100 if quick else 1000),
        "lipschitz": dict(pairs=20 if quick else 200),
    }
    fns = {"structural": structural, "domain": domain, "oracle": oracle,
           "variance_proxy": variance_proxy, "lipschitz": lipschitz}
    results = []
    for name in names:
        if name == "gap":
            results.append(gap())
        else:
            results.append(fns[name](seed=seed, **sizes[name]))
    return {"passed": all(r["passed"] for r in results), "suites": results}
