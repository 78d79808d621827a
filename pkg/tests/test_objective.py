"""Lifetime objective assembly: values, discounting, analytic gradients."""

import math

import numpy as np
import pytest

from habitpath.objective import (discount_weights, finite_diff_gradient,
                                 lifetime_objective)
from habitpath.selftest import GRADIENT_CASES, random_interior_path


def test_discount_weights():
    w = discount_weights(0.03, 4)
    np.testing.assert_allclose(w, np.exp(-0.03 * np.arange(1, 5)))
    np.testing.assert_array_equal(discount_weights(0.0, 3), np.ones(3))


def test_value_is_discounted_felicity_sum():
    name, cfg = GRADIENT_CASES[4]  # running-mean habit case
    rng = np.random.RandomState(3)
    c = random_interior_path(cfg, rng)
    ev = lifetime_objective(c, cfg)
    w = discount_weights(cfg.rho, cfg.horizon_N)
    assert ev.value == pytest.approx(math.fsum(w * ev.per_period), abs=0.0)


def test_endogenous_value_drops_only_additive_peer_terms():
    for name, cfg in GRADIENT_CASES:
        rng = np.random.RandomState(11)
        c = random_interior_path(cfg, rng)
        ev = lifetime_objective(c, cfg)
        if cfg.utility.family == "SEPARABLE_SUM_CUJ":
            assert ev.value != ev.value_endogenous
        else:
            assert ev.value == ev.value_endogenous


@pytest.mark.parametrize("name,cfg", GRADIENT_CASES, ids=[n for n, _ in GRADIENT_CASES])
def test_gradient_matches_finite_differences(name, cfg):
    rng = np.random.RandomState(17)
    worst = 0.0
    for _ in range(3):
        c = random_interior_path(cfg, rng)
        g = lifetime_objective(c, cfg).gradient
        fd = finite_diff_gradient(c, cfg)
        worst = max(worst, float(np.max(np.abs(g - fd)) / np.max(np.abs(fd))))
    assert worst < 1e-5


def test_gradient_uses_habit_feedback():
    # zeroing the habit channel must change the gradient for habit families
    name, cfg = GRADIENT_CASES[4]
    rng = np.random.RandomState(5)
    c = random_interior_path(cfg, rng)
    g = lifetime_objective(c, cfg).gradient
    w = discount_weights(cfg.rho, cfg.horizon_N)
    from habitpath.utility import felicity_series, habit_series
    h = habit_series(cfg, c)
    _v, d_dc, _dh, _dC, _x = felicity_series(cfg, c, h, np.full(cfg.horizon_N, cfg.c0))
    assert not np.allclose(g, w * d_dc)


def test_single_period_objective():
    name, cfg = GRADIENT_CASES[0]
    from habitpath.core import validate_config
    from dataclasses import replace
    one = validate_config(replace(cfg, horizon_N=1, resolved=False))
    ev = lifetime_objective(np.array([one.W0]), one)
    assert ev.per_period.shape == (1,)
    assert np.isfinite(ev.value)
