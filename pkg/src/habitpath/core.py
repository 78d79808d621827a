"""Scenario configuration, validation, and the per-capita benchmark path.

A scenario bundles everything one optimization run needs: the horizon, the
discount rate, initial wealth, the inherited consumption level that seeds
habit states, an (optional) economy-wide per-capita consumption path, the
utility family with its parameters, and solver options.  Validation resolves
defaults (cbar0 -> c0, per-capita C0 -> c0) and rejects anything outside the
admissible ranges with a structured error naming the offending field.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

FAMILIES = (
    "SEPARABLE_CRRA",
    "SEPARABLE_CARA",
    "SHORT_MEMORY",
    "M_PERIOD",
    "MULT_HABIT",
    "RATIO_HABIT",
    "ADD_HABIT_CRRA",
    "ADD_HABIT_CARA",
    "SEPARABLE_SUM_HABIT",
    "CUJ_MULT",
    "CUJ_ADD_CARA",
    "CUJ_RATIO",
    "SEPARABLE_SUM_CUJ",
    "COMBINED",
)

PERCAPITA_KINDS = ("LINEAR", "EXPONENTIAL", "CONSTANT")

# required / optional parameter names per family; anything else supplied is rejected
FAMILY_PARAMS = {
    "SEPARABLE_CRRA": (("gamma",), ()),
    "SEPARABLE_CARA": (("eta",), ()),
    "SHORT_MEMORY": (("gamma", "d"), ()),
    "M_PERIOD": (("gamma", "M"), ()),
    "MULT_HABIT": (("gamma", "beta"), ()),
    "RATIO_HABIT": (("gamma", "d"), ()),
    "ADD_HABIT_CRRA": (("gamma", "b"), ("a",)),
    "ADD_HABIT_CARA": (("eta", "b"), ()),
    "SEPARABLE_SUM_HABIT": (("gamma", "beta"), ()),
    "CUJ_MULT": (("gamma", "D"), ()),
    "CUJ_ADD_CARA": (("eta", "alpha"), ()),
    "CUJ_RATIO": (("gamma", "alpha"), ()),
    "SEPARABLE_SUM_CUJ": (("gamma", "alpha"), ()),
    "COMBINED": (("gamma", "eta", "beta", "alpha", "A"), ()),
}

PARAM_NAMES = ("gamma", "eta", "d", "M", "beta", "b", "a", "D", "alpha", "A")


class ConfigError(ValueError):
    """Scenario rejected by validation.

    code is machine readable (NON_POSITIVE_WEALTH, BAD_HORIZON,
    PARAM_OUT_OF_RANGE, IRRELEVANT_PARAM, UNKNOWN_KEY); field names the
    offending entry using dotted config paths, e.g. "utility.gamma".
    """

    def __init__(self, code: str, field_name: str, message: str):
        super().__init__(f"{code}: {field_name}: {message}")
        self.code = code
        self.field = field_name


class DomainError(ValueError):
    """A utility argument left its admissible domain.

    period is the earliest offending year (1-based), or None when raised by
    a bare math primitive with no period attached.
    """

    def __init__(self, message: str, period: int | None = None):
        if period is not None:
            message = f"period {period}: {message}"
        super().__init__(message)
        self.period = period


class InfeasibleStartError(RuntimeError):
    """The starting path already violates the utility domain."""

    def __init__(self, period: int | None, message: str):
        if period is not None:
            message = f"period {period}: {message}"
        super().__init__(message)
        self.period = period


@dataclass(frozen=True)
class UtilitySpec:
    """Utility family tag plus its parameters; irrelevant parameters must stay None."""

    family: str
    gamma: float | None = None  # CRRA exponent, < 1; 0 selects the log branch
    eta: float | None = None    # CARA absolute risk aversion, > 0
    d: float | None = None      # memory exponent, >= 0
    M: int | None = None        # memory window length, integer >= 1
    beta: float | None = None   # habit strength (multiplicative / separable-sum), >= 0
    b: float | None = None      # habit strength (additive forms), >= 0
    a: float | None = None      # aggregation decay rate for the weighted-aggregate habit, > 0
    D: float | None = None      # per-capita exponent (multiplicative CuJ), any real
    alpha: float | None = None  # per-capita strength (additive/ratio/sum CuJ), >= 0
    A: float | None = None      # mixture weight habit vs CuJ, in [0, 1]


@dataclass(frozen=True)
class PerCapitaSpec:
    """Exogenous per-capita consumption path C_t."""

    kind: str = "CONSTANT"
    C0: float | None = None
    doubling_years: float | None = None  # LINEAR only
    lam: float | None = None             # EXPONENTIAL only; JSON key "lambda"


@dataclass(frozen=True)
class SolverOptions:
    tol_grad: float = 1e-9
    max_iter: int = 10000
    fd_step: float = 1e-6
    init: str = "UNIFORM"  # UNIFORM | GIVEN
    init_path: tuple[float, ...] | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    """One optimization scenario; validate_config resolves defaults."""

    horizon_N: int
    rho: float
    W0: float
    c0: float
    utility: UtilitySpec
    cbar0: float | None = None
    percapita: PerCapitaSpec | None = None
    solver: SolverOptions | None = None
    resolved: bool = field(default=False, compare=False, repr=False)


def _num(value, field_name: str, *, integer: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("PARAM_OUT_OF_RANGE", field_name, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError("PARAM_OUT_OF_RANGE", field_name, f"must be finite, got {value!r}")
    if integer and value != int(value):
        raise ConfigError("PARAM_OUT_OF_RANGE", field_name, f"expected an integer, got {value!r}")
    return float(value)


def _check_range(value: float, field_name: str, *, gt=None, ge=None, lt=None, le=None) -> float:
    if gt is not None and not value > gt:
        raise ConfigError("PARAM_OUT_OF_RANGE", field_name, f"must be > {gt}, got {value}")
    if ge is not None and not value >= ge:
        raise ConfigError("PARAM_OUT_OF_RANGE", field_name, f"must be >= {ge}, got {value}")
    if lt is not None and not value < lt:
        raise ConfigError("PARAM_OUT_OF_RANGE", field_name, f"must be < {lt}, got {value}")
    if le is not None and not value <= le:
        raise ConfigError("PARAM_OUT_OF_RANGE", field_name, f"must be <= {le}, got {value}")
    return value


# admissible range per utility parameter, applied only when the family uses it
_PARAM_RANGE = {
    "gamma": dict(lt=1.0),
    "eta": dict(gt=0.0),
    "d": dict(ge=0.0),
    "M": dict(ge=1.0),
    "beta": dict(ge=0.0),
    "b": dict(ge=0.0),
    "a": dict(gt=0.0),
    "D": dict(),
    "alpha": dict(ge=0.0),
    "A": dict(ge=0.0, le=1.0),
}


def _validate_utility(u: UtilitySpec) -> UtilitySpec:
    if not isinstance(u, UtilitySpec):
        raise ConfigError("PARAM_OUT_OF_RANGE", "utility", "expected a UtilitySpec")
    if u.family not in FAMILY_PARAMS:
        raise ConfigError("PARAM_OUT_OF_RANGE", "utility.family",
                          f"unknown family {u.family!r}; expected one of {', '.join(FAMILIES)}")
    required, optional = FAMILY_PARAMS[u.family]
    allowed = set(required) | set(optional)
    values = {}
    for name in PARAM_NAMES:
        value = getattr(u, name)
        if value is None:
            if name in required:
                raise ConfigError("PARAM_OUT_OF_RANGE", f"utility.{name}",
                                  f"required by family {u.family} but missing")
            continue
        if name not in allowed:
            raise ConfigError("IRRELEVANT_PARAM", f"utility.{name}",
                              f"not a parameter of family {u.family}")
        value = _num(value, f"utility.{name}", integer=(name == "M"))
        _check_range(value, f"utility.{name}", **_PARAM_RANGE[name])
        values[name] = int(value) if name == "M" else value
    return UtilitySpec(family=u.family, **values)


def _validate_percapita(pc: PerCapitaSpec, c0: float) -> PerCapitaSpec:
    if not isinstance(pc, PerCapitaSpec):
        raise ConfigError("PARAM_OUT_OF_RANGE", "percapita", "expected a PerCapitaSpec")
    if pc.kind not in PERCAPITA_KINDS:
        raise ConfigError("PARAM_OUT_OF_RANGE", "percapita.kind",
                          f"unknown kind {pc.kind!r}; expected one of {', '.join(PERCAPITA_KINDS)}")
    C0 = c0 if pc.C0 is None else _check_range(_num(pc.C0, "percapita.C0"), "percapita.C0", gt=0.0)
    doubling = None
    lam = None
    if pc.kind == "LINEAR":
        if pc.lam is not None:
            raise ConfigError("IRRELEVANT_PARAM", "percapita.lambda", "only EXPONENTIAL paths take lambda")
        if pc.doubling_years is None:
            raise ConfigError("PARAM_OUT_OF_RANGE", "percapita.doubling_years", "required for LINEAR")
        doubling = _check_range(_num(pc.doubling_years, "percapita.doubling_years"),
                                "percapita.doubling_years", gt=0.0)
    elif pc.kind == "EXPONENTIAL":
        if pc.doubling_years is not None:
            raise ConfigError("IRRELEVANT_PARAM", "percapita.doubling_years", "only LINEAR paths take doubling_years")
        if pc.lam is None:
            raise ConfigError("PARAM_OUT_OF_RANGE", "percapita.lambda", "required for EXPONENTIAL")
        lam = _check_range(_num(pc.lam, "percapita.lambda"), "percapita.lambda", ge=0.0)
    else:  # CONSTANT
        if pc.doubling_years is not None:
            raise ConfigError("IRRELEVANT_PARAM", "percapita.doubling_years", "CONSTANT paths take no doubling_years")
        if pc.lam is not None:
            raise ConfigError("IRRELEVANT_PARAM", "percapita.lambda", "CONSTANT paths take no lambda")
    return PerCapitaSpec(kind=pc.kind, C0=C0, doubling_years=doubling, lam=lam)


def _validate_solver(s: SolverOptions, N: int) -> SolverOptions:
    if not isinstance(s, SolverOptions):
        raise ConfigError("PARAM_OUT_OF_RANGE", "solver", "expected a SolverOptions")
    tol = _check_range(_num(s.tol_grad, "solver.tol_grad"), "solver.tol_grad", gt=0.0)
    max_iter = int(_check_range(_num(s.max_iter, "solver.max_iter", integer=True), "solver.max_iter", ge=1.0))
    fd = _check_range(_num(s.fd_step, "solver.fd_step"), "solver.fd_step", gt=0.0)
    if s.init not in ("UNIFORM", "GIVEN"):
        raise ConfigError("PARAM_OUT_OF_RANGE", "solver.init", f"expected UNIFORM or GIVEN, got {s.init!r}")
    init_path = None
    if s.init == "GIVEN":
        if s.init_path is None:
            raise ConfigError("PARAM_OUT_OF_RANGE", "solver.init_path", "required when init is GIVEN")
        path = tuple(_check_range(_num(v, "solver.init_path"), "solver.init_path", gt=0.0)
                     for v in s.init_path)
        if len(path) != N:
            raise ConfigError("PARAM_OUT_OF_RANGE", "solver.init_path",
                              f"expected {N} entries, got {len(path)}")
        init_path = path
    elif s.init_path is not None:
        raise ConfigError("IRRELEVANT_PARAM", "solver.init_path", "only init=GIVEN takes init_path")
    return SolverOptions(tol_grad=tol, max_iter=max_iter, fd_step=fd, init=s.init, init_path=init_path)


def validate_config(cfg: ScenarioConfig) -> ScenarioConfig:
    """Validate a scenario and resolve defaults; idempotent on already-valid input."""
    if not isinstance(cfg, ScenarioConfig):
        raise ConfigError("PARAM_OUT_OF_RANGE", "scenario", "expected a ScenarioConfig")
    n_raw = cfg.horizon_N
    if isinstance(n_raw, bool) or not isinstance(n_raw, (int, float)) or n_raw != int(n_raw) or int(n_raw) < 1:
        raise ConfigError("BAD_HORIZON", "horizon_N", f"must be an integer >= 1, got {n_raw!r}")
    N = int(n_raw)
    W0 = _num(cfg.W0, "W0")
    if W0 <= 0:
        raise ConfigError("NON_POSITIVE_WEALTH", "W0", f"must be > 0, got {W0}")
    rho = _check_range(_num(cfg.rho, "rho"), "rho", ge=0.0)
    c0 = _check_range(_num(cfg.c0, "c0"), "c0", gt=0.0)
    cbar0 = c0 if cfg.cbar0 is None else _check_range(_num(cfg.cbar0, "cbar0"), "cbar0", ge=0.0)
    utility = _validate_utility(cfg.utility)
    percapita = _validate_percapita(cfg.percapita or PerCapitaSpec(), c0)
    solver = _validate_solver(cfg.solver or SolverOptions(), N)
    return ScenarioConfig(horizon_N=N, rho=rho, W0=W0, c0=c0, utility=utility,
                          cbar0=cbar0, percapita=percapita, solver=solver, resolved=True)


def ensure_validated(cfg: ScenarioConfig) -> ScenarioConfig:
    """Cheap pass-through for already-resolved scenarios (hot paths revalidate otherwise)."""
    return cfg if (isinstance(cfg, ScenarioConfig) and cfg.resolved) else validate_config(cfg)


def percapita_path(pc: PerCapitaSpec, N: int) -> np.ndarray:
    """C_t for t = 1..N: linear doubling ramp, exponential growth, or constant."""
    t = np.arange(1, N + 1, dtype=float)
    if pc.kind == "LINEAR":
        return pc.C0 * (1.0 + t / pc.doubling_years)
    if pc.kind == "EXPONENTIAL":
        return pc.C0 * np.exp(pc.lam * t)
    if pc.kind == "CONSTANT":
        return np.full(N, float(pc.C0))
    raise ConfigError("PARAM_OUT_OF_RANGE", "percapita.kind", f"unknown kind {pc.kind!r}")


# ---------------------------------------------------------------------------
# JSON scenario files.  One document mirroring ScenarioConfig field-for-field;
# unknown keys are an error.  "lambda" maps to PerCapitaSpec.lam.

_TOP_KEYS = ("horizon_N", "rho", "W0", "c0", "cbar0", "percapita", "utility", "solver")
_UTILITY_KEYS = ("family",) + PARAM_NAMES
_PERCAPITA_KEYS = ("kind", "C0", "doubling_years", "lambda")
_SOLVER_KEYS = ("tol_grad", "max_iter", "fd_step", "init")


def _reject_unknown(d: dict, allowed, where: str) -> None:
    for key in d:
        if key not in allowed:
            raise ConfigError("UNKNOWN_KEY", f"{where}{key}", "unrecognized config key")


def scenario_from_dict(raw: dict) -> ScenarioConfig:
    """Build an unvalidated ScenarioConfig from a parsed JSON document."""
    if not isinstance(raw, dict):
        raise ConfigError("PARAM_OUT_OF_RANGE", "scenario", "top level must be a JSON object")
    _reject_unknown(raw, _TOP_KEYS, "")
    for key in ("horizon_N", "rho", "W0", "c0", "utility"):
        if key not in raw:
            raise ConfigError("PARAM_OUT_OF_RANGE", key, "missing required key")

    u_raw = raw["utility"]
    if not isinstance(u_raw, dict) or "family" not in u_raw:
        raise ConfigError("PARAM_OUT_OF_RANGE", "utility.family", "utility must be an object with a family")
    _reject_unknown(u_raw, _UTILITY_KEYS, "utility.")
    utility = UtilitySpec(**{("family" if k == "family" else k): v for k, v in u_raw.items()})

    percapita = None
    if raw.get("percapita") is not None:
        p_raw = raw["percapita"]
        if not isinstance(p_raw, dict) or "kind" not in p_raw:
            raise ConfigError("PARAM_OUT_OF_RANGE", "percapita.kind", "percapita must be an object with a kind")
        _reject_unknown(p_raw, _PERCAPITA_KEYS, "percapita.")
        percapita = PerCapitaSpec(kind=p_raw["kind"], C0=p_raw.get("C0"),
                                  doubling_years=p_raw.get("doubling_years"), lam=p_raw.get("lambda"))

    solver = None
    if raw.get("solver") is not None:
        s_raw = raw["solver"]
        if not isinstance(s_raw, dict):
            raise ConfigError("PARAM_OUT_OF_RANGE", "solver", "solver must be an object")
        _reject_unknown(s_raw, _SOLVER_KEYS, "solver.")
        init = s_raw.get("init", "UNIFORM")
        init_path = None
        if isinstance(init, dict):
            _reject_unknown(init, ("given",), "solver.init.")
            if "given" not in init or not isinstance(init["given"], list):
                raise ConfigError("PARAM_OUT_OF_RANGE", "solver.init", 'expected "UNIFORM" or {"given": [...]}')
            init_path = tuple(init["given"])
            init = "GIVEN"
        solver = SolverOptions(tol_grad=s_raw.get("tol_grad", 1e-9),
                               max_iter=s_raw.get("max_iter", 10000),
                               fd_step=s_raw.get("fd_step", 1e-6),
                               init=init, init_path=init_path)

    return ScenarioConfig(horizon_N=raw["horizon_N"], rho=raw["rho"], W0=raw["W0"], c0=raw["c0"],
                          utility=utility, cbar0=raw.get("cbar0"), percapita=percapita, solver=solver)


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    """Inverse of scenario_from_dict on validated scenarios (None fields omitted)."""
    u = {"family": cfg.utility.family}
    for name in PARAM_NAMES:
        value = getattr(cfg.utility, name)
        if value is not None:
            u[name] = value
    out = {"horizon_N": cfg.horizon_N, "rho": cfg.rho, "W0": cfg.W0, "c0": cfg.c0, "utility": u}
    if cfg.cbar0 is not None:
        out["cbar0"] = cfg.cbar0
    if cfg.percapita is not None:
        p = {"kind": cfg.percapita.kind}
        if cfg.percapita.C0 is not None:
            p["C0"] = cfg.percapita.C0
        if cfg.percapita.doubling_years is not None:
            p["doubling_years"] = cfg.percapita.doubling_years
        if cfg.percapita.lam is not None:
            p["lambda"] = cfg.percapita.lam
        out["percapita"] = p
    if cfg.solver is not None:
        s = cfg.solver
        init = {"given": list(s.init_path)} if s.init == "GIVEN" else s.init
        out["solver"] = {"tol_grad": s.tol_grad, "max_iter": s.max_iter, "fd_step": s.fd_step, "init": init}
    return out


def load_scenario(path: str) -> ScenarioConfig:
    """Read and validate a scenario JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("PARAM_OUT_OF_RANGE", "scenario", f"invalid JSON: {exc}") from exc
    return validate_config(scenario_from_dict(raw))


def with_param(cfg: ScenarioConfig, dotted: str, value) -> ScenarioConfig:
    """Return a copy of cfg with one numeric field replaced, addressed by config path.

    Accepts the same dotted names the JSON uses, e.g. "rho", "utility.beta",
    "percapita.lambda", "solver.tol_grad".
    """
    parts = dotted.split(".")
    try:
        if len(parts) == 1:
            name = parts[0]
            if name not in ("horizon_N", "rho", "W0", "c0", "cbar0"):
                raise AttributeError(name)
            if name == "horizon_N":
                value = int(value)
            return replace(cfg, **{name: value}, resolved=False)
        section, name = parts
        if section == "utility":
            if name not in PARAM_NAMES:
                raise AttributeError(dotted)
            if name == "M":
                value = int(value)
            return replace(cfg, utility=replace(cfg.utility, **{name: value}), resolved=False)
        if section == "percapita":
            attr = {"C0": "C0", "doubling_years": "doubling_years", "lambda": "lam"}[name]
            pc = cfg.percapita or PerCapitaSpec()
            return replace(cfg, percapita=replace(pc, **{attr: value}), resolved=False)
        if section == "solver":
            if name not in ("tol_grad", "max_iter", "fd_step"):
                raise AttributeError(dotted)
            if name == "max_iter":
                value = int(value)
            s = cfg.solver or SolverOptions()
            return replace(cfg, solver=replace(s, **{name: value}), resolved=False)
        raise AttributeError(dotted)
    except (AttributeError, KeyError) as exc:
        raise ConfigError("UNKNOWN_KEY", dotted, "not a sweepable numeric config field") from exc
