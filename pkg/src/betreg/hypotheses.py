"""Datasets, instance spaces, hypotheses and hypothesis classes.

Tabulated hypotheses are keyed by finite-support index rather than by raw
feature vector, so a dataset carries an optional ``index`` column that maps
each row to its support point.  Linear hypotheses act on raw features.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

ROUND_TOL = 1e-12


class HypothesisError(ValueError):
    """Invalid hypothesis, dataset or evaluation request."""


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def clip(v: float, lo: float, hi: float) -> float:
    if lo > hi:
        raise HypothesisError(f"clip interval is empty: lo={lo} > hi={hi}")
    return max(min(v, hi), lo)


@dataclass(frozen=True, eq=False)
class Dataset:
    """An ordered sample of (feature vector, label) pairs with labels in [0, 1]."""

    x: np.ndarray
    y: np.ndarray
    index: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise HypothesisError("features and labels disagree in length")
        if y.size < 1:
            raise HypothesisError("dataset must contain at least one point")
        if not np.all(np.isfinite(x)):
            raise HypothesisError("features must be finite")
        if np.any(~np.isfinite(y)) or np.any(y < 0.0) or np.any(y > 1.0):
            raise HypothesisError("labels must lie in [0, 1]")
        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "y", _frozen(y))
        if self.index is not None:
            idx = np.asarray(self.index)
            if idx.shape != (y.size,) or not np.issubdtype(idx.dtype, np.integer):
                raise HypothesisError("support index must be one integer per row")
            if np.any(idx < 0):
                raise HypothesisError("support index must be nonnegative")
            object.__setattr__(self, "index", _frozen(idx, dtype=np.int64))

    @property
    def n(self) -> int:
        return int(self.y.size)

    @property
    def dim(self) -> int:
        return int(self.x.shape[1])

    def points(self) -> list[tuple[tuple[float, ...], float]]:
        return [(tuple(row), float(label)) for row, label in zip(self.x.tolist(), self.y.tolist())]

    @classmethod
    def from_points(cls, points, index=None) -> "Dataset":
        points = list(points)
        if not points:
            raise HypothesisError("dataset must contain at least one point")
        dims = {len(np.atleast_1d(p[0])) for p in points}
        if len(dims) != 1:
            raise HypothesisError("all feature vectors must share one dimension")
        x = np.array([np.atleast_1d(np.asarray(p[0], dtype=float)) for p in points])
        y = np.array([p[1] for p in points], dtype=float)
        return cls(x, y, None if index is None else np.asarray(index, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class FiniteSupport:
    """A discrete marginal over feature vectors."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if pts.shape[0] != w.size or w.size == 0:
            raise HypothesisError("support points and weights disagree in length")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise HypothesisError("support weights must be nonnegative and sum to 1")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def size(self) -> int:
        return int(self.weights.size)

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    def index_of(self, x) -> int:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.size != self.dim:
            raise HypothesisError(f"feature dimension {x.size} != support dimension {self.dim}")
        hits = np.flatnonzero(np.all(self.points == x, axis=1))
        if hits.size == 0:
            raise HypothesisError(f"unknown support point {x.tolist()}")
        return int(hits[0])

    def resolve(self, data: Dataset) -> Dataset:
        """Attach support indices to a dataset by exact feature match."""
        idx = np.array([self.index_of(row) for row in data.x], dtype=np.int64)
        return Dataset(data.x, data.y, idx)


@dataclass(frozen=True)
class Ball:
    dimension: int
    radius: float = 1.0

    def __post_init__(self):
        if self.dimension < 1:
            raise HypothesisError("ball dimension must be >= 1")
        if self.radius != 1.0:
            raise HypothesisError("only the unit ball is supported")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        g = rng.standard_normal((size, self.dimension))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = rng.random(size) ** (1.0 / self.dimension)
        return g * r[:, None]


InstanceSpace = Union[FiniteSupport, Ball]


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Predictions listed per finite-support index."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if v.size == 0 or np.any(~np.isfinite(v)) or np.any(v < 0) or np.any(v > 1):
            raise HypothesisError("tabulated values must lie in [0, 1]")
        object.__setattr__(self, "values", _frozen(v))


@dataclass(frozen=True, eq=False)
class Linear:
    """x -> x . theta + 1/2 with ||theta||_2 <= 1/2."""

    theta: np.ndarray

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.theta, dtype=float)).reshape(-1)
        if np.linalg.norm(t) > 0.5 + ROUND_TOL:
            raise HypothesisError(f"||theta||_2 = {np.linalg.norm(t)} exceeds 1/2")
        object.__setattr__(self, "theta", _frozen(t))

    @property
    def dim(self) -> int:
        return int(self.theta.size)


Hypothesis = Union[Tabulated, Linear]


@dataclass(frozen=True)
class HypothesisClass:
    """Finite ordered class.  ``star_index`` marks f* for evaluators only."""

    members: tuple
    star_index: int | None = None
    support: FiniteSupport | None = field(default=None, compare=False)

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise HypothesisError("hypothesis class must be nonempty")
        object.__setattr__(self, "members", members)
        if self.star_index is not None and not 0 <= self.star_index < len(members):
            raise HypothesisError(f"star_index {self.star_index} out of range")

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, i: int) -> Hypothesis:
        return self.members[i]

    def __iter__(self):
        return iter(self.members)

    @property
    def star(self) -> Hypothesis:
        if self.star_index is None:
            raise HypothesisError("class has no designated f*")
        return self.members[self.star_index]


def _guard(v: float) -> float:
    if v < 0.0:
        if v < -ROUND_TOL:
            raise HypothesisError(f"prediction {v} outside [0, 1]")
        return 0.0
    if v > 1.0:
        if v > 1.0 + ROUND_TOL:
            raise HypothesisError(f"prediction {v} outside [0, 1]")
        return 1.0
    return v


def evaluate(h: Hypothesis, x) -> float:
    """Prediction of ``h`` at ``x``.

    For a tabulated hypothesis ``x`` is a support index; for a linear one it
    is a feature vector of matching dimension.
    """
    if isinstance(h, Tabulated):
        if isinstance(x, (bool, np.bool_)) or not isinstance(x, (int, np.integer)):
            raise HypothesisError("tabulated hypotheses are evaluated at support indices")
        if not 0 <= x < h.values.size:
            raise HypothesisError(f"unknown support point {x}")
        return float(h.values[x])
    if isinstance(h, Linear):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (h.dim,):
            raise HypothesisError(f"feature dimension {x.size} != theta dimension {h.dim}")
        return _guard(float(x @ h.theta) + 0.5)
    raise HypothesisError(f"unsupported hypothesis type {type(h).__name__}")


def _guard_array(v: np.ndarray) -> np.ndarray:
    if np.any(v < -ROUND_TOL) or np.any(v > 1.0 + ROUND_TOL):
        raise HypothesisError("prediction outside [0, 1]")
    return np.clip(v, 0.0, 1.0)


def predict(h: Hypothesis, data: Dataset) -> np.ndarray:
    """Vector of predictions of ``h`` on every row of ``data``."""
    if isinstance(h, Tabulated):
        if data.index is None:
            raise HypothesisError("dataset has no support index; resolve it against the support first")
        if data.index.max() >= h.values.size:
            raise HypothesisError(f"unknown support point {int(data.index.max())}")
        return h.values[data.index]
    if isinstance(h, Linear):
        if data.dim != h.dim:
            raise HypothesisError(f"feature dimension {data.dim} != theta dimension {h.dim}")
        return _guard_array(data.x @ h.theta + 0.5)
    raise HypothesisError(f"unsupported hypothesis type {type(h).__name__}")


def predict_support(h: Hypothesis, space: FiniteSupport) -> np.ndarray:
    if isinstance(h, Tabulated):
        if h.values.size != space.size:
            raise HypothesisError("tabulated hypothesis does not match the support size")
        return np.asarray(h.values)
    if space.dim != h.dim:
        raise HypothesisError(f"support dimension {space.dim} != theta dimension {h.dim}")
    return _guard_array(space.points @ h.theta + 0.5)


def prediction_matrix(F: HypothesisClass, data: Dataset) -> np.ndarray:
    return np.stack([predict(h, data) for h in F])


# ---------------------------------------------------------------------------
# file formats


def class_to_json(F: HypothesisClass) -> dict:
    if F.support is None or not all(isinstance(h, Tabulated) for h in F):
        raise HypothesisError("only tabulated classes with a support serialize to the class format")
    return {
        "support": F.support.points.tolist(),
        "weights": F.support.weights.tolist(),
        "hypotheses": [h.values.tolist() for h in F],
        "star_index": F.star_index,
    }


def class_from_json(obj: dict) -> HypothesisClass:
    try:
        support = FiniteSupport(np.asarray(obj["support"], dtype=float), obj["weights"])
        hyps = [Tabulated(v) for v in obj["hypotheses"]]
        star = obj.get("star_index")
    except (KeyError, TypeError) as exc:
        raise HypothesisError(f"malformed class file: {exc}") from exc
    for h in hyps:
        if h.values.size != support.size:
            raise HypothesisError("hypothesis length does not match support size")
    if star is not None and not isinstance(star, int):
        raise HypothesisError("star_index must be an integer or null")
    return HypothesisClass(tuple(hyps), star, support)


def load_class(path: str | Path) -> HypothesisClass:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise HypothesisError(f"class file is not valid JSON: {exc}") from exc
    return class_from_json(obj)


def save_class(F: HypothesisClass, path: str | Path) -> None:
    Path(path).write_text(json.dumps(class_to_json(F), indent=2) + "\n", encoding="utf-8")


def write_dataset(data: Dataset, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(data.dim)] + ["y"])
    for row, label in zip(data.x.tolist(), data.y.tolist()):
        w.writerow([repr(v) for v in row] + [repr(label)])


def save_dataset(data: Dataset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_dataset(data, fh)


def load_dataset(path: str | Path, support: FiniteSupport | None = None) -> Dataset:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise HypothesisError("dataset file is empty")
    header = [h.strip() for h in rows[0]]
    d = len(header) - 1
    if d < 1 or header != [f"x{i + 1}" for i in range(d)] + ["y"]:
        raise HypothesisError(f"bad dataset header {header}")
    body = [r for r in rows[1:] if r]
    try:
        table = np.array([[float(v) for v in r] for r in body], dtype=float)
    except ValueError as exc:
        raise HypothesisError(f"non-numeric dataset entry: {exc}") from exc
    if table.ndim != 2 or table.shape[0] == 0 or table.shape[1] != d + 1:
        raise HypothesisError("dataset rows do not match the header")
    data = Dataset(table[:, :d], table[:, d])
    return support.resolve(data) if support is not None else data


__all__ = [
    "ROUND_TOL",
    "Ball",
    "Dataset",
    "FiniteSupport",
    "Hypothesis",
    "HypothesisClass",
    "HypothesisError",
    "InstanceSpace",
    "Linear",
    "Tabulated",
    "class_from_json",
    "class_to_json",
    "clip",
    "evaluate",
    "load_class",
    "load_dataset",
    "predict",
    "predict_support",
    "prediction_matrix",
    "save_class",
    "save_dataset",
    "write_dataset",
]
