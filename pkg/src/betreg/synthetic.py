"""Realizable synthetic instances with closed-form conditional means and variances.

All randomness goes through numpy's PCG64 bit generator.  Streams are keyed
by ``SeedSequence([seed, tag])`` so that instance construction and sampling
never share a stream; replication ``r`` of a sweep samples with seed
``base ^ r``.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .hypotheses import (
    Ball,
    Dataset,
    FiniteSupport,
    HypothesisClass,
    Linear,
    Tabulated,
    class_from_json,
    class_to_json,
    predict_support,
)
from .solver import cover_eps_for_cap, linear_cover

_INSTANCE_STREAM = 0
_SAMPLE_STREAM = 1
_SUPPORT_STREAM = 2


class ConfigError(ValueError):
    """Infeasible or malformed generator configuration."""


def make_rng(seed: int, stream: int = _SAMPLE_STREAM) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), stream])))


def replication_seed(base: int, r: int) -> int:
    return int(base) ^ int(r)


# ---------------------------------------------------------------------------
# label models


@dataclass(frozen=True)
class Bernoulli:
    mean: float

    def __post_init__(self):
        if not 0.0 <= self.mean <= 1.0:
            raise ConfigError(f"Bernoulli mean {self.mean} outside [0, 1]")


@dataclass(frozen=True)
class ThreePoint:
    """Mass p at mean - offset and mean + offset, 1 - 2p at the mean."""

    mean: float
    offset: float
    tail_prob: float

    def __post_init__(self):
        m, a, p = self.mean, self.offset, self.tail_prob
        if not 0.0 <= p <= 0.5:
            raise ConfigError(f"tail_prob {p} outside [0, 1/2]")
        if a < 0 or m - a < 0 or m + a > 1:
            raise ConfigError(f"support {{{m - a}, {m}, {m + a}}} leaves [0, 1]")


@dataclass(frozen=True)
class Deterministic:
    mean: float

    def __post_init__(self):
        if not 0.0 <= self.mean <= 1.0:
            raise ConfigError(f"mean {self.mean} outside [0, 1]")


LabelModel = Union[Bernoulli, ThreePoint, Deterministic]


def label_support(model: LabelModel) -> tuple[np.ndarray, np.ndarray]:
    """Atoms and probabilities of the label distribution."""
    if isinstance(model, Bernoulli):
        return np.array([0.0, 1.0]), np.array([1.0 - model.mean, model.mean])
    if isinstance(model, ThreePoint):
        m, a, p = model.mean, model.offset, model.tail_prob
        return np.array([m - a, m, m + a]), np.array([p, 1.0 - 2 * p, p])
    if isinstance(model, Deterministic):
        return np.array([model.mean]), np.array([1.0])
    raise TypeError(f"unknown label model {model!r}")


def conditional_variance(model: LabelModel) -> float:
    if isinstance(model, Bernoulli):
        return model.mean * (1.0 - model.mean)
    if isinstance(model, ThreePoint):
        return 2.0 * model.tail_prob * model.offset**2
    if isinstance(model, Deterministic):
        return 0.0
    raise TypeError(f"unknown label model {model!r}")


def enumerated_moments(model: LabelModel) -> dict:
    """Mean, variance, E[Y(1-Y)] and E[Y](1-E[Y]) by summing over the atoms."""
    v, p = label_support(model)
    mean = float(np.dot(p, v))
    return {
        "mean": mean,
        "variance": float(np.dot(p, (v - mean) ** 2)),
        "e_y_one_minus_y": float(np.dot(p, v * (1.0 - v))),
        "mean_one_minus_mean": mean * (1.0 - mean),
    }


def is_bernoulli_distributed(model: LabelModel) -> bool:
    """True when every atom of positive mass is 0 or 1."""
    v, p = label_support(model)
    return bool(np.all((p == 0) | (v == 0.0) | (v == 1.0)))


def label_model_to_json(model: LabelModel) -> dict:
    family = {Bernoulli: "bernoulli", ThreePoint: "threepoint", Deterministic: "deterministic"}[type(model)]
    return {"family": family, **asdict(model)}


def label_model_from_json(obj: dict) -> LabelModel:
    kind = obj.get("family")
    args = {k: v for k, v in obj.items() if k != "family"}
    try:
        return {"bernoulli": Bernoulli, "threepoint": ThreePoint, "deterministic": Deterministic}[kind](**args)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad label model {obj}: {exc}") from exc


def label_model_for(mean: float, family: str, variance_scale: float) -> LabelModel:
    """Label model with the given mean; ThreePoint targets variance_scale * m(1-m).

    The ThreePoint offset is the widest one that keeps the support in [0, 1],
    and the tail mass is solved from 2 p a^2 = sigma^2.
    """
    if family == "bernoulli":
        return Bernoulli(mean)
    if family == "deterministic":
        return Deterministic(mean)
    if family != "threepoint":
        raise ConfigError(f"unknown label family {family!r}")
    if variance_scale < 0:
        raise ConfigError("variance_scale must be nonnegative")
    target = variance_scale * mean * (1.0 - mean)
    a = min(mean, 1.0 - mean)
    if target == 0.0 or a == 0.0:
        return ThreePoint(mean, 0.0, 0.0)
    p = target / (2.0 * a * a)
    if p > 0.5 + 1e-12:
        raise ConfigError(
            f"variance {target:.4g} infeasible at mean {mean:.4g}: needs offset beyond min(m, 1-m)"
        )
    return ThreePoint(mean, a, min(p, 0.5))


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class SynthConfig:
    support_size: int = 10
    class_size: int = 20
    weights: str | tuple = "uniform"
    label_family: str = "bernoulli"
    variance_scale: float = 1.0
    perturbation_magnitudes: tuple = (0.01, 0.02, 0.04, 0.08, 0.16)
    fstar_range: tuple = (0.2, 0.8)
    seed: int = 0

    def __post_init__(self):
        if self.support_size < 1 or self.class_size < 1:
            raise ConfigError("support_size and class_size must be >= 1")
        if self.label_family not in ("bernoulli", "threepoint", "deterministic"):
            raise ConfigError(f"unknown label family {self.label_family!r}")
        lo, hi = self.fstar_range
        if not 0.0 <= lo <= hi <= 1.0:
            raise ConfigError("fstar_range must satisfy 0 <= lo <= hi <= 1")
        if not self.perturbation_magnitudes or any(m < 0 for m in self.perturbation_magnitudes):
            raise ConfigError("perturbation_magnitudes must be nonempty and nonnegative")
        if self.weights != "uniform":
            w = tuple(float(v) for v in self.weights)
            if len(w) != self.support_size:
                raise ConfigError("explicit weights must match support_size")
            object.__setattr__(self, "weights", w)
        object.__setattr__(self, "perturbation_magnitudes", tuple(self.perturbation_magnitudes))
        object.__setattr__(self, "fstar_range", tuple(self.fstar_range))

    @classmethod
    def from_json(cls, obj: dict) -> "SynthConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown generator keys {sorted(unknown)}")
        args = dict(obj)
        for k in ("weights", "perturbation_magnitudes", "fstar_range"):
            if k in args and isinstance(args[k], list):
                args[k] = tuple(args[k])
        try:
            return cls(**args)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_json(self) -> dict:
        out = asdict(self)
        for k in ("weights", "perturbation_magnitudes", "fstar_range"):
            if isinstance(out[k], tuple):
                out[k] = list(out[k])
        return out


@dataclass(frozen=True, eq=False)
class SyntheticInstance:
    hclass: HypothesisClass
    space: FiniteSupport
    labels: tuple
    seed: int
    config: SynthConfig | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.hclass.star_index is None:
            raise ConfigError("synthetic instances must designate f*")
        if len(self.labels) != self.space.size:
            raise ConfigError("one label model per support point is required")
        fstar = predict_support(self.hclass.star, self.space)
        for k, model in enumerate(self.labels):
            if label_support(model)[1].size and model.mean != fstar[k]:
                raise ConfigError(f"label mean at support point {k} differs from f*")

    @property
    def fstar_values(self) -> np.ndarray:
        return predict_support(self.hclass.star, self.space)

    @property
    def variances(self) -> np.ndarray:
        return np.array([conditional_variance(m) for m in self.labels])

    def to_json(self) -> dict:
        if all(isinstance(h, Tabulated) for h in self.hclass):
            obj = class_to_json(self.hclass)
        else:
            obj = {
                "support": self.space.points.tolist(),
                "weights": self.space.weights.tolist(),
                "thetas": [h.theta.tolist() for h in self.hclass],
                "star_index": self.hclass.star_index,
            }
        obj["labels"] = [label_model_to_json(m) for m in self.labels]
        obj["seed"] = int(self.seed)
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "SyntheticInstance":
        if "thetas" in obj:
            space = FiniteSupport(np.asarray(obj["support"], dtype=float), obj["weights"])
            F = HypothesisClass(tuple(Linear(t) for t in obj["thetas"]), obj.get("star_index"))
        else:
            F = class_from_json(obj)
            space = F.support
        labels = tuple(label_model_from_json(m) for m in obj.get("labels", []))
        return cls(F, space, labels, int(obj.get("seed", 0)))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n", encoding="utf-8")


def _support_points(k: int) -> np.ndarray:
    # one-dimensional integer features; tabulated hypotheses only use the index
    return np.arange(k, dtype=float)[:, None]


def _weights(config: SynthConfig) -> np.ndarray:
    if config.weights == "uniform":
        return np.full(config.support_size, 1.0 / config.support_size)
    w = np.asarray(config.weights, dtype=float)
    if np.any(w < 0) or w.sum() <= 0:
        raise ConfigError("weights must be nonnegative with positive total")
    return w / w.sum()


def make_instance(config: SynthConfig, seed: int | None = None) -> SyntheticInstance:
    """Tabulated realizable instance; deterministic in (config, seed).

    f* values and the alternatives are drawn before anything that depends on
    the label family, so instances that differ only in their noise share F.
    """
    seed = config.seed if seed is None else seed
    rng = make_rng(seed, _INSTANCE_STREAM)
    k, size = config.support_size, config.class_size
    lo, hi = config.fstar_range
    fstar = lo + (hi - lo) * rng.random(k)
    mags = config.perturbation_magnitudes
    alts = []
    for j in range(size - 1):
        signs = np.where(rng.random(k) < 0.5, -1.0, 1.0)
        alts.append(np.clip(fstar + mags[j % len(mags)] * signs, 0.0, 1.0))
    star = int(rng.integers(size))
    tables = alts[:star] + [fstar] + alts[star:]
    space = FiniteSupport(_support_points(k), _weights(config))
    F = HypothesisClass(tuple(Tabulated(v) for v in tables), star, space)
    labels = tuple(label_model_for(float(m), config.label_family, config.variance_scale) for m in F.star.values)
    return SyntheticInstance(F, space, labels, seed, config)


def make_linear_instance(
    dimension: int,
    support_size: int,
    label_family: str,
    variance_scale: float,
    seed: int,
    eps: float,
    cover_cap: int = 10**6,
    fstar_radius: float = 0.3,
) -> SyntheticInstance:
    """Linear-class instance: cover members as F, f* one of them, support in the unit ball.

    ``eps`` is raised to the smallest value whose cover respects ``cover_cap``.
    f* is drawn among members with ||theta|| <= fstar_radius, which keeps its
    predictions in [1/2 - r, 1/2 + r] so that ThreePoint noise stays feasible.
    """
    eps = cover_eps_for_cap(dimension, cover_cap, eps_min=eps)
    cover = linear_cover(dimension, eps, cover_cap)
    rng = make_rng(seed, _SUPPORT_STREAM)
    pts = Ball(dimension).sample(rng, support_size)
    norms = np.array([np.linalg.norm(h.theta) for h in cover])
    eligible = np.flatnonzero(norms <= fstar_radius + 1e-12)
    if eligible.size == 0:
        raise ConfigError(f"no cover member with ||theta|| <= {fstar_radius}")
    star = int(eligible[rng.integers(eligible.size)])
    F = HypothesisClass(cover.members, star)
    space = FiniteSupport(pts, np.full(support_size, 1.0 / support_size))
    fstar = predict_support(F.star, space)
    labels = tuple(label_model_for(float(m), label_family, variance_scale) for m in fstar)
    return SyntheticInstance(F, space, labels, seed)


def sample_dataset(inst: SyntheticInstance, n: int, seed: int) -> Dataset:
    """n i.i.d. draws: support point by weight, then a label from its model."""
    if n < 1:
        raise ConfigError("n must be >= 1")
    rng = make_rng(seed, _SAMPLE_STREAM)
    cw = np.cumsum(inst.space.weights)
    u = rng.random(n)
    idx = np.minimum(np.searchsorted(cw, u * cw[-1], side="right"), inst.space.size - 1)
    v = rng.random(n)
    y = np.empty(n)
    for k, model in enumerate(inst.labels):
        sel = idx == k
        if not sel.any():
            continue
        atoms, probs = label_support(model)
        cp = np.cumsum(probs)
        j = np.minimum(np.searchsorted(cp, v[sel] * cp[-1], side="right"), atoms.size - 1)
        y[sel] = atoms[j]
    return Dataset(inst.space.points[idx], y, idx)


def empirical_label_means(data: Dataset, k: int) -> tuple[np.ndarray, np.ndarray]:
    counts = np.bincount(data.index, minlength=k)
    sums = np.bincount(data.index, weights=data.y, minlength=k)
    with np.errstate(invalid="ignore"):
        return sums / counts, counts


__all__ = [
    "Bernoulli",
    "ConfigError",
    "Deterministic",
    "LabelModel",
    "SynthConfig",
    "SyntheticInstance",
    "ThreePoint",
    "conditional_variance",
    "empirical_label_means",
    "enumerated_moments",
    "is_bernoulli_distributed",
    "label_model_for",
    "label_support",
    "make_instance",
    "make_linear_instance",
    "make_rng",
    "replication_seed",
    "sample_dataset",
]
