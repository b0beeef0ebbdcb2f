import math

import numpy as np
import pytest

from betreg.hypotheses import Dataset, HypothesisError, Tabulated
from betreg.losses import betting_H, betting_term, betting_terms, log_loss, squared_loss

LN_1125 = 0.117783035656383  # mpmath, 15 digits
LN_2 = 0.693147180559945


def single(fval, yval, n=1):
    return Tabulated([fval]), Dataset(np.zeros((n, 1)), np.full(n, yval), np.zeros(n, dtype=int))


def test_squared_perfect_fit():
    f = Tabulated([0.2, 0.9])
    data = Dataset(np.array([[0.0], [1.0]]), np.array([0.2, 0.9]), np.array([0, 1]))
    assert squared_loss(f, data) == 0.0


def test_squared_single_point():
    f, data = single(0.0, 1.0)
    assert squared_loss(f, data) == 0.5


def test_squared_two_points():
    f = Tabulated([0.5])
    data = Dataset(np.zeros((2, 1)), np.array([0.0, 1.0]), np.array([0, 0]))
    assert squared_loss(f, data) == 0.125


def test_log_loss_conventions():
    assert log_loss(*single(1.0, 1.0)) == 0.0
    assert log_loss(*single(0.0, 1.0)) == math.inf
    assert log_loss(*single(0.5, 0.0)) == pytest.approx(LN_2, abs=1e-12)


def test_log_loss_zero_label_mass_on_zero():
    # 0 * ln(1/0) counts as 0 in both directions
    assert log_loss(*single(0.0, 0.0)) == 0.0
    assert log_loss(*single(1.0, 0.0)) == math.inf


def test_betting_term_zeros():
    assert betting_term(0.3, 0.4, 0.4, 7.0, 0.2) == 0.0
    assert betting_term(0.3, 0.4, 0.9, 0.0, 0.2) == 0.0
    assert betting_term(0.3, 0.4, 0.9, 3.0, 0.0) == 0.0


def test_betting_term_example():
    assert betting_term(1.0, 0.5, 1.0, 1.0, 0.25) == pytest.approx(LN_1125, abs=1e-12)


def test_betting_term_domain_errors():
    with pytest.raises(HypothesisError):
        betting_term(1.0, 0.5, 1.0, -1.0, 0.25)
    with pytest.raises(HypothesisError):
        betting_term(1.0, 0.5, 1.0, 1.0, 0.3)
    with pytest.raises(HypothesisError):
        betting_term(1.1, 0.5, 1.0, 1.0, 0.25)
    with pytest.raises(HypothesisError):
        betting_term(1.0, 0.5, 1.0, math.inf, 0.25)


def test_betting_terms_matches_scalar():
    rng = np.random.default_rng(3)
    y, f, h = rng.random(50), rng.random(50), rng.random(50)
    vec = betting_terms(y, f, h, 3.0, 0.2)
    ref = [betting_term(*t, 3.0, 0.2) for t in zip(y, f, h)]
    np.testing.assert_allclose(vec, ref, rtol=0, atol=1e-15)


def test_betting_H_examples():
    f, data = single(0.5, 1.0)
    h = Tabulated([1.0])
    assert betting_H(h, f, data, 1.0, 0.25) == pytest.approx(LN_1125, abs=1e-12)
    assert betting_H(f, f, data, 1.0, 0.25) == 0.0
    assert betting_H(h, f, data, 1.0, 0.0) == 0.0


def test_betting_H_labels_equal_predictions():
    f = Tabulated([0.3, 0.6])
    h = Tabulated([0.9, 0.1])
    data = Dataset(np.array([[0.0], [1.0]]), np.array([0.3, 0.6]), np.array([0, 1]))
    assert betting_H(h, f, data, 5.0, 0.25) == 0.0
