"""Explicit-constant generalization bounds and the population quantities they use."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hypotheses import (
    FiniteSupport,
    Hypothesis,
    HypothesisClass,
    HypothesisError,
    predict_support,
)


@dataclass(frozen=True)
class BoundInputs:
    n: int
    class_size: int
    delta: float
    dimension: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.class_size < 1:
            raise ValueError("class_size must be >= 1")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.dimension is not None and self.dimension < 1:
            raise ValueError("dimension must be >= 1")

    @property
    def phi_bar(self) -> float:
        return self.n / 4.0


def _check_quarter(name: str, v: float) -> None:
    if not 0.0 <= v <= 0.25 + 1e-12:
        raise ValueError(f"{name}={v} outside [0, 1/4]")


def first_order_bound(q: float, inputs: BoundInputs) -> float:
    """8 sqrt(q ln(|F|/delta) / n) + 4 ln(|F|/delta) / n, for log-loss ERM."""
    _check_quarter("q", q)
    log_term = math.log(inputs.class_size / inputs.delta)
    return 8.0 * math.sqrt(q * log_term / inputs.n) + 4.0 * log_term / inputs.n


def second_order_log_term(inputs: BoundInputs) -> float:
    n = inputs.n
    return math.log(48.0 * inputs.class_size * inputs.phi_bar * n * n / inputs.delta)


def second_order_bound(sigma2: float, inputs: BoundInputs, delta_L: float = 0.0) -> float:
    """Variance-adaptive bound for the betting estimator.

    ``delta_L`` is L(f) - L(f*); it enters the root clipped at zero and the
    linear term raw.  Pass 0 for the minimizer.
    """
    _check_quarter("sigma2", sigma2)
    if not math.isfinite(delta_L):
        raise ValueError("delta_L must be finite")
    lg = second_order_log_term(inputs)
    n = inputs.n
    root = math.sqrt(25.0 / 12.0 * sigma2 * (2.0 / n * lg + max(delta_L, 0.0)))
    return root + 6.0 / n * lg + 2.5 * delta_L


def linear_bound(sigma2: float, n: int, d: int, delta: float) -> float:
    """sqrt(25/3 sigma2 (d/n) ln(48 n^5/delta)) + 12 (d/n) ln(48 n^5/delta)."""
    _check_quarter("sigma2", sigma2)
    if n < 1 or d < 1 or not 0.0 < delta < 1.0:
        raise ValueError("need n >= 1, d >= 1 and delta in (0, 1)")
    lg = math.log(48.0 * float(n) ** 5 / delta)
    return math.sqrt(25.0 / 3.0 * sigma2 * d / n * lg) + 12.0 * d / n * lg


@dataclass(frozen=True)
class PopulationQuantities:
    first_order_q: float
    second_order_q: float
    mae: float


def population_quantities(
    f: Hypothesis, hclass: HypothesisClass, space: FiniteSupport, variance_map
) -> PopulationQuantities:
    """Exact expectations over a finite support: E[f*(1-f*)], E[sigma^2], E|f - f*|."""
    if not isinstance(space, FiniteSupport):
        raise HypothesisError("exact population quantities need a finite support")
    var = np.asarray(
        [variance_map[k] for k in range(space.size)] if isinstance(variance_map, dict) else variance_map,
        dtype=float,
    )
    if var.shape != (space.size,):
        raise HypothesisError("variance map must cover every support point")
    wts = space.weights
    fstar = predict_support(hclass.star, space)
    fx = predict_support(f, space)
    return PopulationQuantities(
        first_order_q=float(np.dot(wts, fstar * (1.0 - fstar))),
        second_order_q=float(np.dot(wts, var)),
        mae=float(np.dot(wts, np.abs(fx - fstar))),
    )


def gap_example(eps: float) -> tuple[float, float]:
    """(E[Y ^ (1-Y)], E[Y] ^ E[1-Y]) for P(Y=eps) = P(Y=1-eps) = 1/2."""
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    atoms = np.array([eps, 1.0 - eps])
    probs = np.array([0.5, 0.5])
    lhs = float(np.dot(probs, np.minimum(atoms, 1.0 - atoms)))
    rhs = float(min(np.dot(probs, atoms), np.dot(probs, 1.0 - atoms)))
    return lhs, rhs
