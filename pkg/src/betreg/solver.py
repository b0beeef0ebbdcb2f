"""Min-max betting estimator, squared/log ERM, linear covers and a fine-grid oracle.

For a candidate ``f`` the inner objective is

    L(f) = max_{h in F} max_{phi, c} (1/n) sum_t ln(1 + w_t clip(phi d_t, [-c, c]))

with ``w_t = y_t - f(x_t)`` and ``d_t = h(x_t) - f(x_t)``.  Rows that agree on
the label and on every member's prediction produce identical terms, so the
sample is collapsed once into weighted groups before any grid sweep.

Three sweep strategies share one objective evaluator:

* dense: every grid point, used for geometric grids and for the oracle;
* local refinement: arithmetic subdivision around each incumbent (geometric);
* piecewise: exact grid maximum for large arithmetic grids.  For fixed ``c``
  the objective in ``phi`` is concave between consecutive saturation points
  ``c / |d_k|``, so the grid maximum on each piece sits next to the piece's
  continuous maximizer.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .hypotheses import (
    Dataset,
    Hypothesis,
    HypothesisClass,
    HypothesisError,
    Linear,
    predict,
    prediction_matrix,
)
from .losses import C_MAX, log_loss, squared_loss

LIPSCHITZ = 4.0 / 3.0
DEFAULT_COVER_CAP = 10**6
_CHUNK = 1 << 22  # elements per dense evaluation block


class GridError(ValueError):
    """Invalid grid specification or grid/dataset mismatch."""


class ResourceCapError(RuntimeError):
    """A requested enumeration exceeds its configured size cap."""


def worker_count() -> int:
    """Worker cap from ``BETTING_THREADS`` (0 or unset = one per CPU)."""
    raw = os.environ.get("BETTING_THREADS", "0").strip() or "0"
    try:
        k = int(raw)
    except ValueError:
        k = 0
    return k if k > 0 else (os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class GridSpec:
    mode: str = "geometric"
    exact_eps: float | None = None  # None -> 1/(4n)
    geometric_base: float = 2.0
    refine_rounds: int = 2
    refine_points: int = 8  # local subdivisions per side of the incumbent

    def __post_init__(self):
        if self.mode not in ("exact", "geometric"):
            raise GridError(f"unknown grid mode {self.mode!r}")
        if self.exact_eps is not None and not (self.exact_eps > 0 and math.isfinite(self.exact_eps)):
            raise GridError("exact_eps must be positive")
        if not self.geometric_base > 1:
            raise GridError("geometric_base must exceed 1")
        if self.refine_rounds < 0 or self.refine_points < 1:
            raise GridError("refinement settings must be nonnegative")


@dataclass(frozen=True, eq=False)
class BettingGrid:
    """Search lattice over (phi, c), with phi_bar = n/4 and c in [0, 1/4]."""

    phi_values: np.ndarray
    c_values: np.ndarray
    phi_bar: float
    exact: bool = False
    refine_rounds: int = 0
    refine_points: int = 8

    def __post_init__(self):
        phis = np.asarray(self.phi_values, dtype=float)
        cs = np.asarray(self.c_values, dtype=float)
        for name, v, top in (("phi", phis, self.phi_bar), ("c", cs, C_MAX)):
            if v.ndim != 1 or v.size == 0 or v[0] != 0.0:
                raise GridError(f"{name} grid must start at 0")
            if np.any(np.diff(v) <= 0):
                raise GridError(f"{name} grid must be strictly increasing")
            if v[-1] > top:
                raise GridError(f"{name} grid exceeds its upper endpoint {top}")
        phis.setflags(write=False)
        cs.setflags(write=False)
        object.__setattr__(self, "phi_values", phis)
        object.__setattr__(self, "c_values", cs)

    @property
    def n(self) -> int:
        return int(round(4 * self.phi_bar))

    @property
    def eps_phi(self) -> float:
        return float(np.max(np.diff(self.phi_values))) if self.phi_values.size > 1 else 0.0

    @property
    def eps_c(self) -> float:
        return float(np.max(np.diff(self.c_values))) if self.c_values.size > 1 else 0.0

    @property
    def slack(self) -> float:
        """(4/3)(eps_phi + eps_c) using the widest gap in each axis."""
        return LIPSCHITZ * (self.eps_phi + self.eps_c)


def _arithmetic(top: float, eps: float) -> np.ndarray:
    k = int(math.floor(top / eps + 1e-9))
    pts = eps * np.arange(k + 1, dtype=float)
    if top - pts[-1] > 1e-12 * max(top, 1.0):
        pts = np.append(pts, top)
    else:
        pts[-1] = top
    return pts


def _geometric(top: float, floor: float, base: float) -> np.ndarray:
    pts = [top]
    while pts[-1] / base >= floor * (1 - 1e-12):
        pts.append(pts[-1] / base)
    return np.array([0.0] + pts[::-1])


def build_grid(spec: GridSpec, n: int, max_points: int = 10**7) -> BettingGrid:
    if n < 1:
        raise GridError("n must be >= 1")
    phi_bar = n / 4.0
    if spec.mode == "exact":
        eps = spec.exact_eps if spec.exact_eps is not None else 1.0 / (4 * n)
        if phi_bar / eps > max_points:
            raise GridError(f"exact phi grid would have more than {max_points} points")
        return BettingGrid(_arithmetic(phi_bar, eps), _arithmetic(C_MAX, eps), phi_bar, exact=True)
    floor = 1.0 / (4 * n)
    return BettingGrid(
        _geometric(phi_bar, floor, spec.geometric_base),
        _geometric(C_MAX, floor, spec.geometric_base),
        phi_bar,
        exact=False,
        refine_rounds=spec.refine_rounds,
        refine_points=spec.refine_points,
    )


# ---------------------------------------------------------------------------
# grouped sample


@dataclass(frozen=True, eq=False)
class _Groups:
    y: np.ndarray  # (K,)
    preds: np.ndarray  # (rows, K) predictions of the stacked hypotheses
    counts: np.ndarray  # (K,)
    n: int


def _group(y: np.ndarray, preds: np.ndarray) -> _Groups:
    table = np.vstack([y[None, :], preds])
    uniq, counts = np.unique(table, axis=1, return_counts=True)
    return _Groups(uniq[0], uniq[1:], counts.astype(float), int(y.size))


def _objective(w, dmat, counts, n, phis, cs) -> np.ndarray:
    """(H, A, B) values of (1/n) sum_k counts_k ln(1 + w_k clip(phi d_hk, [-c, c])).

    ``phis`` is (A,) or (H, A); ``cs`` is (B,) or (H, B).
    """
    H, K = dmat.shape
    phis = np.broadcast_to(np.asarray(phis, dtype=float), (H,) + np.shape(phis)[-1:])
    cs = np.broadcast_to(np.asarray(cs, dtype=float), (H,) + np.shape(cs)[-1:])
    A, B = phis.shape[1], cs.shape[1]
    out = np.empty((H, A, B))
    step = max(1, _CHUNK // max(1, A * B * K))
    for s in range(0, H, step):
        e = min(H, s + step)
        c = cs[s:e, None, :, None]
        t = np.broadcast_to(phis[s:e, :, None, None] * dmat[s:e, None, None, :], (e - s, A, B, K)).copy()
        np.maximum(t, -c, out=t)
        np.minimum(t, c, out=t)
        t *= w
        np.log1p(t, out=t)
        t *= counts
        out[s:e] = t.sum(axis=-1) / n
    return out


def _first_max(vals: np.ndarray) -> tuple[float, int, int]:
    """Max of an (A, B) block and its first position in phi-major order."""
    i = int(np.argmax(vals))
    a, b = divmod(i, vals.shape[1])
    return float(vals[a, b]), a, b


def _dense_single(w, d, counts, n, phis, cs, block: int = 16) -> tuple[float, int, int]:
    """Brute-force grid maximum for one (h, f) pair, blocked over c.

    Past phi = c / min|d| every active term is saturated and the objective is
    constant in phi, so each block is truncated at the first saturated point.
    """
    active = (w != 0) & (d != 0)
    if not active.any():
        return 0.0, 0, 0
    dmin = float(np.min(np.abs(d[active])))
    best = (0.0, 0, 0)
    dm = d[None, :]
    for s in range(0, cs.size, block):
        cb = cs[s : s + block]
        stop = int(np.searchsorted(phis, cb[-1] / dmin, side="left"))
        sub = phis[: min(phis.size, stop + 1)]
        rows = max(1, _CHUNK // max(1, cb.size * d.size))
        for r in range(0, sub.size, rows):
            vals = _objective(w, dm, counts, n, sub[r : r + rows], cb)[0]
            v, a, b = _first_max(vals)
            cand = (v, r + a, s + b)
            if v > best[0] or (v == best[0] and (cand[1], cand[2]) < (best[1], best[2])):
                best = cand
    return best


def _piecewise_single(w, d, counts, n, phis, cs) -> tuple[float, int, int]:
    """Exact grid maximum for one (h, f) pair via concave pieces in phi."""
    active = (w != 0) & (d != 0)
    if not active.any():
        return 0.0, 0, 0
    wa, da, ma = w[active], d[active], counts[active]
    order = np.argsort(-np.abs(da), kind="stable")
    a = (wa * da)[order]
    coef = (ma * wa * da)[order]
    absd = np.abs(da)[order]
    K, B, A = a.size, cs.size, phis.size
    phimax = phis[-1]

    brk = cs[:, None] / absd[None, :]
    lo = np.minimum(np.hstack([np.zeros((B, 1)), brk]), phimax)
    hi = np.minimum(np.hstack([brk, np.full((B, 1), phimax)]), phimax)
    # on piece j the groups j.. (sorted by |d| descending) are unsaturated
    live = np.arange(K)[None, :] >= np.arange(K + 1)[:, None]

    def slope(phi):
        with np.errstate(divide="ignore", invalid="ignore"):
            q = coef / (1.0 + a * phi[..., None])
        return np.where(live, q, 0.0).sum(axis=-1)

    g_lo, g_hi = slope(lo), slope(hi)
    left, right = lo.copy(), hi.copy()
    gaps = np.diff(phis)
    tol = float(gaps.min()) / 8 if gaps.size else 0.0
    for _ in range(200):
        if not np.any(right - left > tol):
            break
        mid = 0.5 * (left + right)
        up = slope(mid) > 0
        left = np.where(up, mid, left)
        right = np.where(up, right, mid)
    root = np.where(g_lo <= 0, lo, np.where(g_hi >= 0, hi, 0.5 * (left + right)))

    idx = np.searchsorted(phis, root, side="left")
    cand = np.clip(idx[..., None] + np.arange(-2, 2), 0, A - 1).reshape(B, -1)
    t = phis[cand][..., None] * d
    c = cs[:, None, None]
    z = np.minimum(np.maximum(t, -c), c)
    vals = (np.log1p(w * z) * counts).sum(axis=-1) / n

    vmax = float(vals.max())
    if vmax <= 0.0:
        return 0.0, 0, 0
    rows, cols = np.nonzero(vals == vmax)
    pi = cand[rows, cols]
    k = np.lexsort((rows, pi))[0]
    return vmax, int(pi[k]), int(rows[k])


def _refine(w, dmat, counts, n, grid: BettingGrid, coarse: np.ndarray):
    """Local arithmetic refinement around each h's coarse incumbent.

    Returns per-h best values, phi, c and the final local step sizes.
    """
    H = dmat.shape[0]
    phis, cs = grid.phi_values, grid.c_values
    A, B = phis.size, cs.size
    flat = coarse.reshape(H, -1)
    pos = flat.argmax(axis=1)
    best = flat[np.arange(H), pos]
    ia, ib = np.divmod(pos, B)
    bphi, bc = phis[ia], cs[ib]
    plo, phi_hi = phis[np.maximum(ia - 1, 0)], phis[np.minimum(ia + 1, A - 1)]
    clo, chi = cs[np.maximum(ib - 1, 0)], cs[np.minimum(ib + 1, B - 1)]
    S = grid.refine_points
    u = np.linspace(0.0, 1.0, 2 * S + 1)
    step_phi, step_c = np.full(H, grid.eps_phi), np.full(H, grid.eps_c)
    for _ in range(grid.refine_rounds):
        P = plo[:, None] + (phi_hi - plo)[:, None] * u
        C = clo[:, None] + (chi - clo)[:, None] * u
        vals = _objective(w, dmat, counts, n, P, C).reshape(H, -1)
        loc = vals.argmax(axis=1)
        v = vals[np.arange(H), loc]
        la, lb = np.divmod(loc, 2 * S + 1)
        better = v > best
        best = np.where(better, v, best)
        bphi = np.where(better, P[np.arange(H), la], bphi)
        bc = np.where(better, C[np.arange(H), lb], bc)
        step_phi = (phi_hi - plo) / (2 * S)
        step_c = (chi - clo) / (2 * S)
        plo, phi_hi = np.maximum(bphi - step_phi, 0.0), np.minimum(bphi + step_phi, grid.phi_bar)
        clo, chi = np.maximum(bc - step_c, 0.0), np.minimum(bc + step_c, C_MAX)
    return best, bphi, bc, step_phi, step_c


def _inner_max_arrays(w, dmat, counts, n, grid: BettingGrid):
    """Inner maximum for one f.  Returns (value, (h, phi, c), slack)."""
    H = dmat.shape[0]
    phis, cs = grid.phi_values, grid.c_values
    if grid.exact:
        best, wit = 0.0, (0, 0.0, 0.0)
        for h in range(H):
            v, a, b = _piecewise_single(w, dmat[h], counts, n, phis, cs)
            if v > best:
                best, wit = v, (h, float(phis[a]), float(cs[b]))
        return best, wit, grid.slack
    coarse = _objective(w, dmat, counts, n, phis, cs)
    if grid.refine_rounds == 0:
        flat = coarse.reshape(-1)
        i = int(np.argmax(flat))
        h, rest = divmod(i, phis.size * cs.size)
        a, b = divmod(rest, cs.size)
        return float(flat[i]), (h, float(phis[a]), float(cs[b])), grid.slack
    best, bphi, bc, sp, sc = _refine(w, dmat, counts, n, grid, coarse)
    h = int(np.argmax(best))
    slack = LIPSCHITZ * (float(sp[h]) + float(sc[h]))
    return float(best[h]), (h, float(bphi[h]), float(bc[h])), slack


def _check_grid(grid: BettingGrid, data: Dataset) -> None:
    if grid.phi_bar != data.n / 4.0:
        raise GridError(f"grid built for phi_bar={grid.phi_bar}, dataset has n={data.n}")


def inner_max(f: Hypothesis, F: HypothesisClass, data: Dataset, grid: BettingGrid):
    """L(f) on the grid and its witness ``(h_index, phi, c)``."""
    if len(F) == 0:
        raise HypothesisError("empty hypothesis class")
    _check_grid(grid, data)
    pf = predict(f, data)
    g = _group(data.y, np.vstack([pf[None, :], prediction_matrix(F, data)]))
    w = g.y - g.preds[0]
    v, wit, _ = _inner_max_arrays(w, g.preds[1:] - g.preds[0], g.counts, g.n, grid)
    return v, wit


def oracle_inner_max(
    f: Hypothesis, F: HypothesisClass, data: Dataset, fine_eps: float, cap: float = 2e10
) -> float:
    """Brute-force inner maximum on the arithmetic grid of step ``fine_eps``.

    Shares no sweep code with the piecewise path; meant for verification.
    """
    if not fine_eps > 0:
        raise GridError("fine_eps must be positive")
    grid = build_grid(GridSpec(mode="exact", exact_eps=fine_eps), data.n)
    pf = predict(f, data)
    g = _group(data.y, np.vstack([pf[None, :], prediction_matrix(F, data)]))
    K = g.y.size
    work = float(grid.phi_values.size) * grid.c_values.size * K * len(F)
    if work > cap:
        raise ResourceCapError(f"oracle sweep of {work:.3g} terms exceeds cap {cap:.3g}")
    w = g.y - g.preds[0]
    best = 0.0
    for h in range(len(F)):
        d = g.preds[1 + h] - g.preds[0]
        best = max(best, _dense_single(w, d, g.counts, g.n, grid.phi_values, grid.c_values)[0])
    return best


# ---------------------------------------------------------------------------
# estimators


@dataclass(frozen=True)
class FitReport:
    estimator: str
    chosen_index: int
    objective_value: float
    per_candidate_objectives: tuple
    inner_witness: tuple | None = None
    grid_slack: float | None = None
    degenerate: bool = False
    witnesses: tuple = field(default=(), repr=False, compare=False)

    def to_json(self) -> dict:
        def num(v):
            return None if v is None or math.isinf(v) else float(v)

        wit = None
        if self.inner_witness is not None:
            h, phi, c = self.inner_witness
            wit = {"h_index": int(h), "phi": float(phi), "c": float(c)}
        return {
            "estimator": self.estimator,
            "chosen_index": int(self.chosen_index),
            "objective_value": num(self.objective_value),
            "inner_witness": wit,
            "per_candidate_objectives": [num(v) for v in self.per_candidate_objectives],
            "grid_slack": num(self.grid_slack),
            "degenerate": bool(self.degenerate),
        }


def _argmin_first(values) -> int:
    best = 0
    for i, v in enumerate(values):
        if v < values[best]:
            best = i
    return best


def betting_objectives(F: HypothesisClass, data: Dataset, grid: BettingGrid, workers: int | None = None):
    """L(f) for every member, with witnesses and slacks, in class order."""
    _check_grid(grid, data)
    g = _group(data.y, prediction_matrix(F, data))

    def one(i):
        return _inner_max_arrays(g.y - g.preds[i], g.preds - g.preds[i], g.counts, g.n, grid)

    workers = worker_count() if workers is None else workers
    if workers > 1 and len(F) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, range(len(F))))
    return [one(i) for i in range(len(F))]


def fit_betting(
    F: HypothesisClass, data: Dataset, spec: GridSpec | None = None, workers: int | None = None
) -> FitReport:
    """argmin_f max_{h, phi, c} (1/n) H_{phi,c}(h, f) over the grid; ties to lowest index."""
    grid = build_grid(spec or GridSpec(), data.n)
    results = betting_objectives(F, data, grid, workers)
    objs = tuple(r[0] for r in results)
    k = _argmin_first(objs)
    return FitReport(
        estimator="betting",
        chosen_index=k,
        objective_value=objs[k],
        per_candidate_objectives=objs,
        inner_witness=results[k][1],
        grid_slack=results[k][2],
        witnesses=tuple(r[1] for r in results),
    )


def fit_squared(F: HypothesisClass, data: Dataset) -> FitReport:
    objs = tuple(squared_loss(f, data) for f in F)
    k = _argmin_first(objs)
    return FitReport("squared", k, objs[k], objs)


def fit_log(F: HypothesisClass, data: Dataset) -> FitReport:
    """Log-loss ERM; infinite losses rank above every finite one."""
    objs = tuple(log_loss(f, data) for f in F)
    k = _argmin_first(objs)
    return FitReport("log", k, objs[k], objs, degenerate=all(math.isinf(v) for v in objs))


# ---------------------------------------------------------------------------
# linear class cover


def _cover_thetas(d: int, eps: float, cap: int) -> np.ndarray:
    s = eps / math.sqrt(d)
    reach = 0.5 + eps / 2  # a rounded lattice point lies within eps/2 of its target
    m = int(math.floor(reach / s + 1e-9))
    if (2 * m + 1) ** d > 64 * cap:
        raise ResourceCapError(f"cover lattice for eps={eps} exceeds cap {cap}")
    axis = np.arange(-m, m + 1, dtype=float) * s
    pts = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    norms = np.linalg.norm(pts, axis=1)
    pts = pts[norms <= reach + 1e-12]
    norms = np.linalg.norm(pts, axis=1)
    out = norms > 0.5
    pts[out] *= (0.5 / norms[out])[:, None]
    pts = np.unique(pts, axis=0)
    if pts.shape[0] > cap:
        raise ResourceCapError(f"cover of size {pts.shape[0]} exceeds cap {cap}")
    return pts


def linear_cover(d: int, eps: float, cap: int = DEFAULT_COVER_CAP) -> HypothesisClass:
    """Sup-norm eps-cover of {x -> x.theta + 1/2 : ||theta|| <= 1/2} over the unit ball.

    Lattice of spacing eps/sqrt(d); points within half a cell outside the
    ball are projected onto it.  Constructive, not minimum-cardinality.
    """
    if d not in (1, 2, 3):
        raise HypothesisError(f"linear covers support d in {{1, 2, 3}}, got {d}")
    if not eps > 0:
        raise HypothesisError("eps must be positive")
    thetas = _cover_thetas(d, eps, cap)
    return HypothesisClass(tuple(Linear(t) for t in thetas))


def cover_eps_for_cap(d: int, cap: int, eps_min: float = 0.0) -> float:
    """Smallest eps (>= eps_min, to ~1e-6 relative) whose cover fits within ``cap``."""

    def fits(e):
        try:
            _cover_thetas(d, e, cap)
            return True
        except ResourceCapError:
            return False

    if eps_min > 0 and fits(eps_min):
        return eps_min
    lo, hi = max(eps_min, 1e-12), 1.0
    while not fits(hi):
        hi *= 2
    for _ in range(60):
        mid = math.sqrt(lo * hi)
        if fits(mid):
            hi = mid
        else:
            lo = mid
        if hi / lo < 1 + 1e-6:
            break
    return hi


def cover_radius(F: HypothesisClass, thetas: np.ndarray) -> float:
    """Max over ``thetas`` of the sup-norm distance to the nearest cover member.

    Over the unit ball the sup-norm distance between linear predictors is the
    Euclidean distance between their parameters.
    """
    members = np.stack([h.theta for h in F])
    dist = np.linalg.norm(np.asarray(thetas)[:, None, :] - members[None, :, :], axis=-1)
    return float(dist.min(axis=1).max())
