"""Per-period utility (felicity) for every family, habit states, and analytic partials.

Families fall into three groups: internal-benchmark (habit) forms that compare
consumption against the consumer's own past, external-benchmark (peer) forms
that compare against the economy-wide per-capita path C_t, and the plain
separable forms.  Every felicity evaluation returns the value together with
the partial derivatives the objective's chain rule needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError, ScenarioConfig, UtilitySpec, ensure_validated

# families whose felicity reads the habit state / the per-capita benchmark
USES_HABIT = frozenset({"SHORT_MEMORY", "M_PERIOD", "MULT_HABIT", "RATIO_HABIT",
                        "ADD_HABIT_CRRA", "ADD_HABIT_CARA", "SEPARABLE_SUM_HABIT", "COMBINED"})
USES_PERCAPITA = frozenset({"CUJ_MULT", "CUJ_ADD_CARA", "CUJ_RATIO", "SEPARABLE_SUM_CUJ", "COMBINED"})


@dataclass(frozen=True)
class FelicityValue:
    """Felicity and its partials: d_dc w.r.t. current consumption, d_dh w.r.t.
    the habit state, d_dC w.r.t. the per-capita benchmark."""

    value: float
    d_dc: float
    d_dh: float
    d_dC: float


@dataclass(frozen=True)
class HabitTrace:
    """Habit state per period, t = 1..N; kind names the recursion that built it."""

    values: np.ndarray
    kind: str | None


def crra(x: float, gamma: float) -> float:
    """Isoelastic utility x^gamma/gamma; the log branch at gamma = 0 by definition."""
    if not x > 0:
        raise DomainError(f"crra argument must be positive, got {x}")
    if gamma == 0.0:
        return math.log(x)
    return x ** gamma / gamma


def cara(x: float, eta: float) -> float:
    """Exponential utility -e^(-eta*x)/eta; defined for all real x."""
    return -math.exp(-eta * x) / eta


def habit_kind(u: UtilitySpec) -> str | None:
    """Which habit recursion the family uses, or None for habit-free families."""
    if u.family == "SHORT_MEMORY":
        return "lagged"
    if u.family == "M_PERIOD":
        return "window"
    if u.family == "ADD_HABIT_CRRA":
        return "aggregate" if u.a is not None else "running_mean"
    if u.family in USES_HABIT:
        return "running_mean"
    return None


def habit_series(scenario: ScenarioConfig, c: np.ndarray) -> np.ndarray:
    """h_t for t = 1..N given the full path; zeros for habit-free families."""
    scenario = ensure_validated(scenario)
    c = np.asarray(c, dtype=float)
    N = scenario.horizon_N
    c0 = scenario.c0
    kind = habit_kind(scenario.utility)
    if kind is None:
        return np.zeros(N)
    if kind == "lagged":
        return np.concatenate(([c0], c[:-1]))
    if kind == "running_mean":
        # cbar_1 seeds from inherited consumption
        prefix = np.concatenate(([0.0], np.cumsum(c)[:-1]))
        counts = np.arange(N, dtype=float)
        return np.where(counts == 0, c0, prefix / np.maximum(counts, 1.0))
    if kind == "window":
        # mean of the last min(M, t-1) actual years, so a window spanning the
        # whole history reproduces the running-mean habit exactly; the year-1
        # window sees only the inherited level c0
        M = scenario.utility.M
        cs = np.concatenate(([0.0], np.cumsum(c)))
        t = np.arange(1, N + 1)
        n = np.minimum(M, t - 1)
        window_sum = cs[t - 1] - cs[t - 1 - n]
        return c0 + np.where(n == 0, c0, window_sum / np.maximum(n, 1))
    if kind == "aggregate":
        a = scenario.utility.a
        decay = math.exp(-a)
        z = np.empty(N)
        z[0] = c0 / (math.exp(a) - 1.0)  # fixed point of the recursion on a constant path
        for i in range(1, N):
            z[i] = decay * (z[i - 1] + c[i - 1])
        return z
    raise AssertionError(kind)


def habit_state(scenario: ScenarioConfig, prefix, t: int) -> float:
    """Reference scalar habit state for period t from the consumption prefix c_1..c_(t-1)."""
    scenario = ensure_validated(scenario)
    prefix = np.asarray(prefix, dtype=float)
    if len(prefix) != t - 1:
        raise ValueError(f"prefix for period {t} must have {t - 1} entries, got {len(prefix)}")
    bad = ~(prefix > 0)
    if bad.any():
        raise DomainError("habit prefix entries must be positive", period=int(np.argmax(bad)) + 1)
    kind = habit_kind(scenario.utility)
    c0 = scenario.c0
    if kind is None:
        return 0.0
    if kind == "lagged":
        return float(prefix[-1]) if t > 1 else c0
    if kind == "running_mean":
        return float(np.mean(prefix)) if t > 1 else c0
    if kind == "window":
        M = scenario.utility.M
        if t == 1:
            return 2.0 * c0
        lo = max(1, t - M)
        return c0 + float(np.mean(prefix[lo - 1:t - 1]))
    if kind == "aggregate":
        a = scenario.utility.a
        z = c0 / (math.exp(a) - 1.0)
        for i in range(1, t):
            z = math.exp(-a) * (z + prefix[i - 1])
        return z
    raise AssertionError(kind)


def habit_trace(scenario: ScenarioConfig, c: np.ndarray) -> HabitTrace:
    return HabitTrace(values=habit_series(scenario, c), kind=habit_kind(ensure_validated(scenario).utility))


def habit_jacobian(scenario: ScenarioConfig, N: int) -> np.ndarray | None:
    """dh_t/dc_s as a strictly lower-triangular (N, N) matrix, or None if habit-free."""
    u = ensure_validated(scenario).utility
    kind = habit_kind(u)
    if kind is None:
        return None
    rows = np.arange(N)[:, None]
    cols = np.arange(N)[None, :]
    past = cols < rows
    if kind == "lagged":
        return np.eye(N, k=-1)
    if kind == "running_mean":
        return np.where(past, 1.0 / np.maximum(rows, 1), 0.0)
    if kind == "window":
        width = np.minimum(u.M, np.maximum(rows, 1))
        return np.where(past & (cols >= rows - u.M), 1.0 / width, 0.0)
    if kind == "aggregate":
        with np.errstate(over="ignore"):
            w = np.exp(-u.a * (rows - cols))
        return np.where(past, w, 0.0)
    raise AssertionError(kind)


def _crra_val(x: np.ndarray, gamma: float) -> np.ndarray:
    return np.log(x) if gamma == 0.0 else x ** gamma / gamma


def _crra_prime(x: np.ndarray, gamma: float) -> np.ndarray:
    return x ** (gamma - 1.0)  # also d/dx log x at gamma = 0


def _raise_domain(bad: np.ndarray, message: str) -> None:
    if bad.any():
        raise DomainError(message, period=int(np.argmax(bad)) + 1)


def felicity_series(scenario: ScenarioConfig, c: np.ndarray, h: np.ndarray,
                    C: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized felicity over all periods.

    Returns (value_endo, d_dc, d_dh, d_dC, value_exog) where value_exog is the
    consumption-independent additive component (nonzero only for the
    separable-sum peer form) and the reportable felicity is endo + exog.
    Raises DomainError naming the earliest offending period.
    """
    scenario = ensure_validated(scenario)
    u = scenario.utility
    fam = u.family
    c = np.asarray(c, dtype=float)
    h = np.asarray(h, dtype=float)
    C = np.asarray(C, dtype=float)
    _raise_domain(~(c > 0) | ~np.isfinite(c), "consumption must be positive and finite")
    zero = np.zeros_like(c)
    g = u.gamma

    if fam == "SEPARABLE_CRRA":
        return _crra_val(c, g), _crra_prime(c, g), zero, zero, zero

    if fam == "SEPARABLE_CARA":
        with np.errstate(over="ignore"):
            e = np.exp(-u.eta * c)
        return -e / u.eta, e, zero, zero, zero

    if fam in ("SHORT_MEMORY", "RATIO_HABIT"):
        _raise_domain(~(h > 0), "habit state must be positive")
        hp = h ** u.d
        arg = c / hp
        cp = _crra_prime(arg, g)
        return _crra_val(arg, g), cp / hp, -u.d * cp * arg / h, zero, zero

    if fam == "M_PERIOD":
        _raise_domain(~(h > 0), "habit state must be positive")
        arg = c / h
        cp = _crra_prime(arg, g)
        return _crra_val(arg, g), cp / h, -cp * arg / h, zero, zero

    if fam == "MULT_HABIT":
        denom = scenario.cbar0 + u.beta * h
        _raise_domain(~(denom > 0), "habit benchmark cbar0 + beta*h must be positive")
        arg = c / denom
        cp = _crra_prime(arg, g)
        return _crra_val(arg, g), cp / denom, -u.beta * cp * arg / denom, zero, zero

    if fam == "ADD_HABIT_CRRA":
        arg = c - u.b * h
        _raise_domain(~(arg > 0), "consumption fell to the habit floor (c - b*h <= 0)")
        cp = _crra_prime(arg, g)
        return _crra_val(arg, g), cp, -u.b * cp, zero, zero

    if fam == "ADD_HABIT_CARA":
        arg = c - u.b * h
        with np.errstate(over="ignore"):
            e = np.exp(-u.eta * arg)
        return -e / u.eta, e, -u.b * e, zero, zero

    if fam == "SEPARABLE_SUM_HABIT":
        _raise_domain(~(h > 0), "habit state must be positive")
        return (_crra_val(c, g) + u.beta * _crra_val(h, g),
                _crra_prime(c, g), u.beta * _crra_prime(h, g), zero, zero)

    if fam == "CUJ_MULT":
        Cp = C ** u.D
        arg = c / Cp
        cp = _crra_prime(arg, g)
        return _crra_val(arg, g), cp / Cp, zero, -u.D * cp * arg / C, zero

    if fam == "CUJ_ADD_CARA":
        arg = c - u.alpha * C
        with np.errstate(over="ignore"):
            e = np.exp(-u.eta * arg)
        return -e / u.eta, e, zero, -u.alpha * e, zero

    if fam == "CUJ_RATIO":
        denom = scenario.percapita.C0 + u.alpha * C
        arg = c / denom
        cp = _crra_prime(arg, g)
        return _crra_val(arg, g), cp / denom, zero, -u.alpha * cp * arg / denom, zero

    if fam == "SEPARABLE_SUM_CUJ":
        # the C-term is an additive constant in c; kept separate so the solver
        # can optimize the consumption-dependent part alone
        return (_crra_val(c, g), _crra_prime(c, g), zero,
                u.alpha * _crra_prime(C, g), u.alpha * _crra_val(C, g))

    if fam == "COMBINED":
        A = u.A
        if A == 1.0:  # degenerates exactly to the multiplicative habit form
            denom = scenario.cbar0 + u.beta * h
            _raise_domain(~(denom > 0), "habit benchmark cbar0 + beta*h must be positive")
            arg = c / denom
            cp = _crra_prime(arg, g)
            return _crra_val(arg, g), cp / denom, -u.beta * cp * arg / denom, zero, zero
        if A == 0.0:  # degenerates exactly to the additive peer-CARA form
            arg = c - u.alpha * C
            with np.errstate(over="ignore"):
                e = np.exp(-u.eta * arg)
            return -e / u.eta, e, zero, -u.alpha * e, zero
        denom = scenario.cbar0 + u.beta * h
        _raise_domain(~(denom > 0), "habit benchmark cbar0 + beta*h must be positive")
        arg1 = c / denom
        cp1 = _crra_prime(arg1, g)
        arg2 = c - u.alpha * C
        with np.errstate(over="ignore"):
            e2 = np.exp(-u.eta * arg2)
        value = A * _crra_val(arg1, g) + (1.0 - A) * (-e2 / u.eta)
        d_dc = A * (cp1 / denom) + (1.0 - A) * e2
        d_dh = A * (-u.beta * cp1 * arg1 / denom)
        d_dC = (1.0 - A) * (-u.alpha * e2)
        return value, d_dc, d_dh, d_dC, zero

    raise AssertionError(fam)


def felicity(scenario: ScenarioConfig, c_t: float, h_t: float, C_t: float) -> FelicityValue:
    """Felicity of one period at consumption c_t, habit h_t, per-capita C_t."""
    endo, d_dc, d_dh, d_dC, exog = felicity_series(
        scenario, np.array([c_t], float), np.array([h_t], float), np.array([C_t], float))
    return FelicityValue(value=float(endo[0] + exog[0]), d_dc=float(d_dc[0]),
                         d_dh=float(d_dh[0]), d_dC=float(d_dC[0]))


def felicity_partials_check(scenario: ScenarioConfig, c_t: float, h_t: float, C_t: float,
                            step: float = 1e-6) -> float:
    """Max relative error of the analytic partials vs central finite differences.

    Only the partials the family actually uses are checked; step is relative
    to each coordinate's scale.
    """
    scenario = ensure_validated(scenario)
    fam = scenario.utility.family
    base = felicity(scenario, c_t, h_t, C_t)
    analytic = {"c": base.d_dc}
    if fam in USES_HABIT:
        analytic["h"] = base.d_dh
    if fam in USES_PERCAPITA:
        analytic["C"] = base.d_dC

    def value_at(c, h, C):
        return felicity(scenario, c, h, C).value

    worst = 0.0
    for name, exact in analytic.items():
        x = {"c": c_t, "h": h_t, "C": C_t}[name]
        dx = step * max(abs(x), 1.0)
        args_hi = {"c": c_t, "h": h_t, "C": C_t}
        args_lo = dict(args_hi)
        args_hi[name] = x + dx
        args_lo[name] = x - dx
        fd = (value_at(args_hi["c"], args_hi["h"], args_hi["C"])
              - value_at(args_lo["c"], args_lo["h"], args_lo["C"])) / (2 * dx)
        denom = max(abs(exact), abs(fd), 1e-12)
        worst = max(worst, abs(exact - fd) / denom)
    return worst
