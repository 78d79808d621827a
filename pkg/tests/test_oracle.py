"""Closed forms, the exhaustive grid oracle, and path-shape metrics."""

import numpy as np
import pytest

from habitpath.core import (PerCapitaSpec, ScenarioConfig, UtilitySpec,
                            validate_config)
from habitpath.objective import lifetime_objective
from habitpath.oracle import (brute_force_small, cuj_cara_closed_form,
                              separable_cara_closed_form,
                              separable_crra_closed_form, shape_metrics)
from habitpath.solver import solve

LIN = PerCapitaSpec(kind="LINEAR", C0=1e5, doubling_years=30.0)


def scn(family, N=20, rho=0.03, W0=1e6, c0=1e5, percapita=None, **params):
    return validate_config(ScenarioConfig(
        horizon_N=N, rho=rho, W0=W0, c0=c0,
        utility=UtilitySpec(family=family, **params), percapita=percapita))


def test_crra_closed_form_satisfies_foc():
    cfg = scn("SEPARABLE_CRRA", gamma=0.5)
    c = separable_crra_closed_form(cfg)
    assert c.sum() == pytest.approx(cfg.W0, rel=1e-14)
    g = lifetime_objective(c, cfg).gradient
    # equal discounted marginal utility across years
    assert float(np.max(np.abs(g - g.mean()))) < 1e-14 * abs(float(g.mean())) * 1e3


def test_crra_closed_form_geometric_ratio():
    cfg = scn("SEPARABLE_CRRA", gamma=0.5, rho=0.06)
    c = separable_crra_closed_form(cfg)
    ratios = c[1:] / c[:-1]
    np.testing.assert_allclose(ratios, np.exp(-0.06 / 0.5), rtol=1e-12)


def test_cara_closed_form_arithmetic():
    cfg = scn("SEPARABLE_CARA", eta=1e-5)
    c = separable_cara_closed_form(cfg)
    diffs = np.diff(c)
    np.testing.assert_allclose(diffs, -cfg.rho / 1e-5, rtol=1e-12)
    assert c.sum() == pytest.approx(cfg.W0, rel=1e-12)


def test_cara_closed_form_none_when_boundary():
    # a steep discount pushes late years negative; no interior optimum exists
    cfg = scn("SEPARABLE_CARA", eta=1e-5, rho=0.8)
    assert separable_cara_closed_form(cfg) is None


def test_peer_cara_closed_form_linear():
    cfg = scn("CUJ_ADD_CARA", eta=1e-5, alpha=1.0, percapita=LIN)
    c = cuj_cara_closed_form(cfg)
    t = np.arange(1, 21, dtype=float)
    slope, _ = np.polyfit(t, c, 1)
    expected = 1.0 * 1e5 / 30.0 - 0.03 / 1e-5
    assert slope == pytest.approx(expected, rel=1e-12)
    assert c.sum() == pytest.approx(cfg.W0, rel=1e-12)


def test_brute_force_guards():
    cfg5 = scn("SEPARABLE_CRRA", gamma=0.5, N=5)
    with pytest.raises(ValueError):
        brute_force_small(cfg5, 100)
    cfg3 = scn("SEPARABLE_CRRA", gamma=0.5, N=3)
    with pytest.raises(ValueError):
        brute_force_small(cfg3, 10)


def test_brute_force_tracks_closed_form():
    cfg = scn("SEPARABLE_CRRA", gamma=0.5, N=3)
    grid = 200
    bf = brute_force_small(cfg, grid)
    ref = separable_crra_closed_form(cfg)
    assert float(np.max(np.abs(bf - ref))) <= cfg.W0 / grid


def test_brute_force_beats_uniform():
    cfg = scn("MULT_HABIT", gamma=0.5, beta=1.0, N=3)
    bf = brute_force_small(cfg, 150)
    j_bf = lifetime_objective(bf, cfg).value
    j_uniform = lifetime_objective(np.full(3, cfg.W0 / 3), cfg).value
    assert j_bf >= j_uniform


def test_shape_metrics_line():
    c = 1000.0 + 50.0 * np.arange(1, 21, dtype=float)
    m = shape_metrics(c, 1e6)
    assert m.slope == pytest.approx(50.0, rel=1e-12)
    assert m.slope_residual == pytest.approx(0.0, abs=1e-9)
    assert m.argmax_t == 20 and m.trough_t == 1
    assert m.unimodal
    assert m.end_mass == pytest.approx(c[-1] / 1e6, rel=1e-15)
    assert m.first_jump == pytest.approx(50.0 / c[1], rel=1e-12)
    assert m.last_jump == pytest.approx(50.0 / c[-2], rel=1e-12)


def test_shape_metrics_hump_and_valley():
    hump = np.concatenate([np.arange(1, 11, dtype=float),
                           np.arange(10, 0, -1, dtype=float)]) * 1e4
    m = shape_metrics(hump, 1e6)
    assert m.unimodal and m.argmax_t in (10, 11)

    valley = np.concatenate([np.arange(10, 0, -1, dtype=float),
                             np.arange(1, 11, dtype=float)]) * 1e4
    m2 = shape_metrics(valley, 1e6)
    assert not m2.unimodal
    assert m2.trough_t == 10  # minimum over the first half of the horizon


def test_shape_metrics_single_year():
    m = shape_metrics(np.array([1e6]), 1e6)
    assert m.first_jump == 0.0 and m.last_jump == 0.0 and m.unimodal
    assert m.end_mass == 1.0


def test_shape_metrics_noise_floor():
    # wiggles far below 1e-6 of wealth do not break unimodality
    c = np.full(20, 5e4)
    c[7] += 1e-3
    m = shape_metrics(c, 1e6)
    assert m.unimodal
