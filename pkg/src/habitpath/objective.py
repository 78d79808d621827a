"""Lifetime discounted objective J = sum_t e^(-rho t) u_t and its exact gradient.

The gradient is assembled analytically: the direct term e^(-rho s) du/dc plus
the habit chain rule through dh_t/dc_s for every later period.  Finite
differences live here too, but only as the testing oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import ScenarioConfig, ensure_validated, percapita_path
from .utility import felicity_series, habit_jacobian, habit_series


@dataclass
class ObjectiveEval:
    """value: total discounted utility; gradient: dJ/dc_t; per_period: felicity
    values per year; value_endogenous: value minus consumption-independent
    additive terms (what the solver's line search compares)."""

    value: float
    gradient: np.ndarray
    per_period: np.ndarray
    value_endogenous: float


def discount_weights(rho: float, N: int) -> np.ndarray:
    """e^(-rho t) at integer years t = 1..N."""
    return np.exp(-rho * np.arange(1, N + 1, dtype=float))


@lru_cache(maxsize=128)
def _habit_jacobian_cached(scenario: ScenarioConfig, N: int):
    return habit_jacobian(scenario, N)


def lifetime_objective(path, scenario: ScenarioConfig) -> ObjectiveEval:
    """Evaluate J and dJ/dc at a full consumption path (budget not required)."""
    scenario = ensure_validated(scenario)
    N = scenario.horizon_N
    c = np.asarray(path, dtype=float)
    if c.shape != (N,):
        raise ValueError(f"path must have {N} entries, got shape {c.shape}")
    C = percapita_path(scenario.percapita, N)
    h = habit_series(scenario, c)
    endo, d_dc, d_dh, _d_dC, exog = felicity_series(scenario, c, h, C)
    w = discount_weights(scenario.rho, N)
    per_period = endo + exog
    # fsum keeps the value exactly rounded, which the solver's noise-floor
    # bookkeeping relies on
    value = math.fsum(w * per_period)
    value_endo = math.fsum(w * endo)
    gradient = w * d_dc
    jac = _habit_jacobian_cached(scenario, N)
    if jac is not None:
        gradient = gradient + jac.T @ (w * d_dh)
    return ObjectiveEval(value=value, gradient=gradient, per_period=per_period,
                         value_endogenous=value_endo)


def finite_diff_gradient(path, scenario: ScenarioConfig, step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient oracle; step is relative to each coordinate."""
    scenario = ensure_validated(scenario)
    c = np.asarray(path, dtype=float)
    grad = np.empty_like(c)
    for t in range(len(c)):
        dx = step * abs(c[t])
        hi = c.copy()
        lo = c.copy()
        hi[t] += dx
        lo[t] -= dx
        f_hi = lifetime_objective(hi, scenario).value
        f_lo = lifetime_objective(lo, scenario).value
        grad[t] = (f_hi - f_lo) / (2 * dx)
    return grad
