"""Property-based checks of the core invariants."""
import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from betreg.hypotheses import Dataset, HypothesisClass, Linear, Tabulated, clip, evaluate
from betreg.losses import betting_H, betting_term
from betreg.solver import GridSpec, build_grid, fit_betting, inner_max

unit = st.floats(0.0, 1.0)
quarter = st.floats(0.0, 0.25)
phis = st.floats(0.0, 1e4)
finite = st.floats(-1e6, 1e6)


@given(finite, finite, finite)
def test_clip_idempotent_and_bounded(v, a, b):
    lo, hi = min(a, b), max(a, b)
    once = clip(v, lo, hi)
    assert lo <= once <= hi
    assert clip(once, lo, hi) == once


@given(st.lists(st.floats(-1, 1), min_size=2, max_size=2), st.lists(st.floats(-1, 1), min_size=2, max_size=2))
def test_linear_range(theta, x):
    theta = np.array(theta)
    nt = np.linalg.norm(theta)
    if nt > 0.5:
        theta = theta * (0.5 / nt)
    x = np.array(x)
    nx = np.linalg.norm(x)
    if nx > 1:
        x = x / nx
    assert 0.0 <= evaluate(Linear(theta), x) <= 1.0


@given(unit, unit, unit, phis, quarter)
def test_term_bounded(y, f, h, phi, c):
    v = betting_term(y, f, h, phi, c)
    assert math.log(0.75) - 1e-15 <= v <= math.log(1.25) + 1e-15


@given(unit, unit, unit, phis, phis, quarter)
def test_term_lipschitz_in_phi(y, f, h, p1, p2, c):
    diff = abs(betting_term(y, f, h, p1, c) - betting_term(y, f, h, p2, c))
    assert diff <= 4 / 3 * abs(p1 - p2) * abs(h - f) + 1e-12


@given(unit, unit, unit, phis, quarter, quarter)
def test_term_lipschitz_in_c(y, f, h, phi, c1, c2):
    diff = abs(betting_term(y, f, h, phi, c1) - betting_term(y, f, h, phi, c2))
    assert diff <= 4 / 3 * abs(c1 - c2) + 1e-12


problems = st.integers(0, 2**31 - 1)


def _problem(seed, support=3, size=3, n=12):
    rng = np.random.default_rng(seed)
    tables = rng.random((size, support))
    idx = rng.integers(support, size=n)
    y = rng.random(n)
    return HypothesisClass(tuple(Tabulated(t) for t in tables)), Dataset(idx[:, None].astype(float), y, idx)


@settings(max_examples=40, deadline=None)
@given(problems)
def test_L_nonnegative_and_self_zero(seed):
    F, data = _problem(seed)
    grid = build_grid(GridSpec(), data.n)
    for f in F:
        assert inner_max(f, F, data, grid)[0] >= 0.0
        assert betting_H(f, f, data, 3.0, 0.25) == 0.0


@settings(max_examples=25, deadline=None)
@given(problems)
def test_refining_exact_grid_never_decreases(seed):
    # a grid of step eps/2 contains the grid of step eps
    F, data = _problem(seed)
    eps = 1 / (4 * data.n)
    coarse = inner_max(F[0], F, data, build_grid(GridSpec(mode="exact", exact_eps=eps), data.n))[0]
    fine = inner_max(F[0], F, data, build_grid(GridSpec(mode="exact", exact_eps=eps / 2), data.n))[0]
    assert fine >= coarse


@settings(max_examples=25, deadline=None)
@given(problems)
def test_refinement_rounds_never_decrease(seed):
    F, data = _problem(seed)
    vals = [inner_max(F[1], F, data, build_grid(GridSpec(refine_rounds=r), data.n))[0] for r in range(4)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


@settings(max_examples=25, deadline=None)
@given(problems)
def test_fit_deterministic(seed):
    F, data = _problem(seed)
    assert fit_betting(F, data, workers=1).to_json() == fit_betting(F, data, workers=2).to_json()
