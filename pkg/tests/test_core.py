"""Scenario validation, serialization, and per-capita path construction."""

import json

import numpy as np
import pytest

from habitpath.core import (ConfigError, PerCapitaSpec, ScenarioConfig,
                            SolverOptions, UtilitySpec, load_scenario,
                            percapita_path, scenario_from_dict,
                            scenario_to_dict, validate_config, with_param)


def scn(family="SEPARABLE_CRRA", N=20, rho=0.03, W0=1e6, c0=1e5,
        percapita=None, **params):
    return ScenarioConfig(horizon_N=N, rho=rho, W0=W0, c0=c0,
                          utility=UtilitySpec(family=family, **params),
                          percapita=percapita)


def test_baseline_validates_and_is_idempotent():
    cfg = validate_config(scn(gamma=0.5))
    assert cfg.resolved
    again = validate_config(cfg)
    assert again.horizon_N == 20 and again.W0 == 1e6
    # cbar0 defaults to c0
    assert cfg.cbar0 == cfg.c0


@pytest.mark.parametrize("bad,code,field", [
    (dict(N=0), "BAD_HORIZON", "horizon_N"),
    (dict(N=2.5), "BAD_HORIZON", "horizon_N"),
    (dict(W0=0.0), "NON_POSITIVE_WEALTH", "W0"),
    (dict(W0=-5.0), "NON_POSITIVE_WEALTH", "W0"),
    (dict(rho=-0.01), "PARAM_OUT_OF_RANGE", "rho"),
    (dict(c0=0.0), "PARAM_OUT_OF_RANGE", "c0"),
])
def test_scalar_field_validation(bad, code, field):
    with pytest.raises(ConfigError) as err:
        validate_config(scn(gamma=0.5, **bad))
    assert err.value.code == code
    assert err.value.field == field


@pytest.mark.parametrize("family,params,code,field", [
    ("SEPARABLE_CRRA", dict(gamma=1.0), "PARAM_OUT_OF_RANGE", "utility.gamma"),
    ("SEPARABLE_CARA", dict(eta=0.0), "PARAM_OUT_OF_RANGE", "utility.eta"),
    ("SEPARABLE_CRRA", dict(), "PARAM_OUT_OF_RANGE", "utility.gamma"),
    ("SEPARABLE_CRRA", dict(gamma=0.5, beta=1.0), "IRRELEVANT_PARAM", "utility.beta"),
    ("M_PERIOD", dict(gamma=0.5, M=2.5), "PARAM_OUT_OF_RANGE", "utility.M"),
    ("M_PERIOD", dict(gamma=0.5, M=0), "PARAM_OUT_OF_RANGE", "utility.M"),
    ("SHORT_MEMORY", dict(gamma=0.5, d=-0.1), "PARAM_OUT_OF_RANGE", "utility.d"),
    ("COMBINED", dict(gamma=0.5, eta=1e-5, beta=1.0, alpha=1.0, A=1.5),
     "PARAM_OUT_OF_RANGE", "utility.A"),
    ("NO_SUCH_FAMILY", dict(gamma=0.5), "PARAM_OUT_OF_RANGE", "utility.family"),
])
def test_utility_param_validation(family, params, code, field):
    with pytest.raises(ConfigError) as err:
        validate_config(scn(family=family, **params))
    assert err.value.code == code
    assert err.value.field == field


def test_percapita_required_and_validated():
    # peer-referenced families need a per-capita block with the right fields
    lin = PerCapitaSpec(kind="LINEAR", C0=1e5, doubling_years=30.0)
    cfg = validate_config(scn("CUJ_MULT", gamma=0.5, D=1.0, percapita=lin))
    C = percapita_path(cfg.percapita, 3)
    np.testing.assert_allclose(C, 1e5 * (1.0 + np.array([1, 2, 3]) / 30.0))

    exp = PerCapitaSpec(kind="EXPONENTIAL", C0=2.0, lam=0.1)
    C = percapita_path(exp, 4)
    np.testing.assert_allclose(C, 2.0 * np.exp(0.1 * np.arange(1, 5)))

    const = PerCapitaSpec(kind="CONSTANT", C0=7.0)
    np.testing.assert_array_equal(percapita_path(const, 3), [7.0, 7.0, 7.0])


def test_dict_round_trip():
    lin = PerCapitaSpec(kind="LINEAR", C0=1e5, doubling_years=30.0)
    for cfg in (scn(gamma=0.5),
                scn("MULT_HABIT", gamma=0.5, beta=2.0),
                scn("CUJ_ADD_CARA", eta=1e-5, alpha=0.5, percapita=lin)):
        cfg = validate_config(cfg)
        back = validate_config(scenario_from_dict(scenario_to_dict(cfg)))
        assert scenario_to_dict(back) == scenario_to_dict(cfg)


def test_from_dict_rejects_unknown_keys():
    raw = {"horizon_N": 20, "rho": 0.03, "W0": 1e6, "c0": 1e5,
           "utility": {"family": "SEPARABLE_CRRA", "gamma": 0.5},
           "bogus": 1}
    with pytest.raises(ConfigError) as err:
        scenario_from_dict(raw)
    assert err.value.code == "UNKNOWN_KEY"
    assert "bogus" in err.value.field


def test_lambda_json_key_maps_to_exponential_rate():
    raw = {"horizon_N": 5, "rho": 0.0, "W0": 1e6, "c0": 1e5,
           "utility": {"family": "CUJ_MULT", "gamma": 0.5, "D": 1.0},
           "percapita": {"kind": "EXPONENTIAL", "C0": 1e5, "lambda": 0.02}}
    cfg = validate_config(scenario_from_dict(raw))
    assert cfg.percapita.lam == 0.02
    assert scenario_to_dict(cfg)["percapita"]["lambda"] == 0.02


def test_load_scenario_bad_json(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError) as err:
        load_scenario(str(p))
    assert err.value.field == "scenario"


def test_with_param_dotted_paths():
    cfg = validate_config(scn("MULT_HABIT", gamma=0.5, beta=1.0))
    assert validate_config(with_param(cfg, "rho", 0.05)).rho == 0.05
    assert validate_config(with_param(cfg, "utility.beta", 2.0)).utility.beta == 2.0
    tweaked = validate_config(with_param(cfg, "solver.tol_grad", 1e-6))
    assert tweaked.solver.tol_grad == 1e-6

    lin = PerCapitaSpec(kind="EXPONENTIAL", C0=1e5, lam=0.01)
    cu = validate_config(scn("CUJ_MULT", gamma=0.5, D=1.0, percapita=lin))
    assert validate_config(with_param(cu, "percapita.lambda", 0.04)).percapita.lam == 0.04

    with pytest.raises(ConfigError) as err:
        with_param(cfg, "utility.nope", 1.0)
    assert err.value.code == "UNKNOWN_KEY"


def test_solver_options_survive_round_trip():
    cfg = validate_config(ScenarioConfig(
        horizon_N=20, rho=0.03, W0=1e6, c0=1e5,
        utility=UtilitySpec(family="SEPARABLE_CRRA", gamma=0.5),
        solver=SolverOptions(tol_grad=1e-7, max_iter=500)))
    d = scenario_to_dict(cfg)
    assert d["solver"]["tol_grad"] == 1e-7
    back = validate_config(scenario_from_dict(json.loads(json.dumps(d))))
    assert back.solver.tol_grad == 1e-7 and back.solver.max_iter == 500
