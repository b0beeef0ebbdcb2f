"""Regression with [0, 1] labels: squared/log ERM and the betting-loss min-max estimator."""
from .bounds import (
    BoundInputs,
    PopulationQuantities,
    first_order_bound,
    gap_example,
    linear_bound,
    population_quantities,
    second_order_bound,
)
from .hypotheses import (
    Ball,
    Dataset,
    FiniteSupport,
    HypothesisClass,
    HypothesisError,
    Linear,
    Tabulated,
    clip,
    evaluate,
)
from .losses import betting_H, betting_term, log_loss, squared_loss
from .solver import (
    BettingGrid,
    FitReport,
    GridSpec,
    build_grid,
    fit_betting,
    fit_log,
    fit_squared,
    inner_max,
    linear_cover,
    oracle_inner_max,
)

__version__ = "0.1.0"
