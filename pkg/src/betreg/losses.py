"""Pointwise and aggregate losses: squared, log (extended-real) and clipped betting.

Aggregates are summed left-to-right in dataset order (a sequential cumulative
sum) so that argmin tie-breaking is bit-reproducible.
"""
from __future__ import annotations

import math

import numpy as np

from .hypotheses import Dataset, Hypothesis, HypothesisError, predict

C_MAX = 0.25


def _seq_sum(terms: np.ndarray) -> float:
    # np.sum is pairwise; cumsum accumulates strictly in order
    return float(np.cumsum(terms)[-1])


def squared_loss(f: Hypothesis, data: Dataset) -> float:
    """Mean of 1/2 (f(x) - y)^2 over the sample."""
    r = predict(f, data) - data.y
    return _seq_sum(0.5 * r * r) / data.n


def log_loss_terms(fx: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-point y ln(1/f) + (1-y) ln(1/(1-f)), with 0 ln(1/0) = 0 and y ln(1/0) = +inf for y > 0."""
    fx = np.asarray(fx, dtype=float)
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(y > 0, -y * np.log(fx), 0.0)
        b = np.where(y < 1, -(1.0 - y) * np.log1p(-fx), 0.0)
    return a + b


def log_loss(f: Hypothesis, data: Dataset) -> float:
    """Mean log loss; ``math.inf`` when some labelled mass sits on a zero-probability side."""
    terms = log_loss_terms(predict(f, data), data.y)
    if np.any(np.isinf(terms)):
        return math.inf
    return _seq_sum(terms) / data.n


def _check_unit(name: str, v: float) -> None:
    if not 0.0 <= v <= 1.0:
        raise HypothesisError(f"{name}={v} outside [0, 1]")


def betting_term(y: float, f_x: float, h_x: float, phi: float, c: float) -> float:
    """ln(1 + (y - f_x) * clip(phi (h_x - f_x), [-c, c])).

    The log argument is at least 3/4 since |y - f_x| <= 1 and c <= 1/4.
    """
    _check_unit("y", y)
    _check_unit("f_x", f_x)
    _check_unit("h_x", h_x)
    if not phi >= 0.0 or math.isinf(phi):
        raise HypothesisError(f"phi={phi} must be a finite nonnegative number")
    if not 0.0 <= c <= C_MAX:
        raise HypothesisError(f"c={c} outside [0, 1/4]")
    bet = max(min(phi * (h_x - f_x), c), -c)
    return math.log1p((y - f_x) * bet)


def betting_terms(y, f_x, h_x, phi: float, c: float) -> np.ndarray:
    """Vectorized :func:`betting_term` over aligned arrays (no range checks)."""
    bet = np.minimum(np.maximum(phi * (np.asarray(h_x) - f_x), -c), c)
    return np.log1p((np.asarray(y) - f_x) * bet)


def betting_H(h: Hypothesis, f: Hypothesis, data: Dataset, phi: float, c: float) -> float:
    """Raw (undivided) clipped betting sum H_{phi,c}(h, f) over the dataset."""
    if not phi >= 0.0 or math.isinf(phi):
        raise HypothesisError(f"phi={phi} must be a finite nonnegative number")
    if not 0.0 <= c <= C_MAX:
        raise HypothesisError(f"c={c} outside [0, 1/4]")
    fx = predict(f, data)
    hx = predict(h, data)
    return _seq_sum(betting_terms(data.y, fx, hx, phi, c))
