"""Named runtime health checks behind the `check` subcommand.

Every check is small, deterministic (fixed RNG seed), and returns a
CheckResult rather than raising, so the battery always produces a full table.
The checks mirror the package's contract: analytic gradients against finite
differences, solver output against closed forms and exhaustive grids, and the
structural identities the utility families satisfy by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (InfeasibleStartError, PerCapitaSpec, ScenarioConfig,
                   UtilitySpec, percapita_path, validate_config)
from .objective import finite_diff_gradient, lifetime_objective
from .oracle import (brute_force_small, cuj_cara_closed_form,
                     separable_cara_closed_form, separable_crra_closed_form)
from .solver import solve
from .utility import felicity_series, habit_series

SEED = 20260819


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _scn(family: str, *, N: int = 20, rho: float = 0.03, W0: float = 1.0e6,
         c0: float = 1.0e5, percapita: PerCapitaSpec | None = None, **params) -> ScenarioConfig:
    return validate_config(ScenarioConfig(
        horizon_N=N, rho=rho, W0=W0, c0=c0,
        utility=UtilitySpec(family=family, **params), percapita=percapita))


_LIN = PerCapitaSpec(kind="LINEAR", C0=1.0e5, doubling_years=30.0)

# one representative parameterization per family (plus the decayed-aggregate
# habit variant); c0 kept low for the additive-habit families so random
# interior points stay inside c - b*h > 0
GRADIENT_CASES: tuple[tuple[str, ScenarioConfig], ...] = (
    ("SEPARABLE_CRRA", _scn("SEPARABLE_CRRA", gamma=0.5)),
    ("SEPARABLE_CARA", _scn("SEPARABLE_CARA", eta=1e-5)),
    ("SHORT_MEMORY", _scn("SHORT_MEMORY", gamma=0.5, d=0.5)),
    ("M_PERIOD", _scn("M_PERIOD", gamma=0.5, M=3)),
    ("MULT_HABIT", _scn("MULT_HABIT", gamma=0.5, beta=1.0)),
    ("RATIO_HABIT", _scn("RATIO_HABIT", gamma=0.5, d=0.5)),
    ("ADD_HABIT_CRRA", _scn("ADD_HABIT_CRRA", c0=2e4, gamma=0.5, b=0.25)),
    ("ADD_HABIT_CRRA/a", _scn("ADD_HABIT_CRRA", c0=2e4, gamma=0.5, b=0.25, a=0.5)),
    ("ADD_HABIT_CARA", _scn("ADD_HABIT_CARA", c0=2e4, eta=1e-5, b=0.25)),
    ("SEPARABLE_SUM_HABIT", _scn("SEPARABLE_SUM_HABIT", gamma=0.5, beta=1.0)),
    ("CUJ_MULT", _scn("CUJ_MULT", gamma=0.5, D=0.5, percapita=_LIN)),
    ("CUJ_ADD_CARA", _scn("CUJ_ADD_CARA", eta=1e-5, alpha=0.5, percapita=_LIN)),
    ("CUJ_RATIO", _scn("CUJ_RATIO", gamma=0.5, alpha=0.5, percapita=_LIN)),
    ("SEPARABLE_SUM_CUJ", _scn("SEPARABLE_SUM_CUJ", gamma=0.5, alpha=1.0, percapita=_LIN)),
    ("COMBINED", _scn("COMBINED", gamma=0.5, eta=1e-5, beta=1.0, alpha=1.0, A=0.5,
                      percapita=_LIN)),
)

# N=3 instances for the exhaustive-grid cross-check; the boolean marks the
# families whose objective is strictly concave on the simplex, where the grid
# argmax must also pin the solver path to within one cell
BRUTE_CASES: tuple[tuple[str, ScenarioConfig, bool], ...] = (
    ("SEPARABLE_CRRA", _scn("SEPARABLE_CRRA", N=3, gamma=0.5), True),
    ("SEPARABLE_CARA", _scn("SEPARABLE_CARA", N=3, eta=1e-5), True),
    ("SHORT_MEMORY", _scn("SHORT_MEMORY", N=3, gamma=0.5, d=0.5), False),
    ("M_PERIOD", _scn("M_PERIOD", N=3, gamma=0.5, M=2), False),
    ("MULT_HABIT", _scn("MULT_HABIT", N=3, gamma=0.5, beta=1.0), False),
    ("RATIO_HABIT", _scn("RATIO_HABIT", N=3, gamma=0.5, d=0.5), False),
    ("ADD_HABIT_CRRA", _scn("ADD_HABIT_CRRA", N=3, c0=2e4, gamma=0.5, b=0.25), True),
    ("ADD_HABIT_CRRA/a", _scn("ADD_HABIT_CRRA", N=3, c0=2e4, gamma=0.5, b=0.25, a=0.5), True),
    ("ADD_HABIT_CARA", _scn("ADD_HABIT_CARA", N=3, c0=2e4, eta=1e-5, b=0.25), True),
    ("SEPARABLE_SUM_HABIT", _scn("SEPARABLE_SUM_HABIT", N=3, gamma=0.5, beta=1.0), True),
    ("CUJ_MULT", _scn("CUJ_MULT", N=3, gamma=0.5, D=0.5, percapita=_LIN), True),
    ("CUJ_ADD_CARA", _scn("CUJ_ADD_CARA", N=3, eta=1e-5, alpha=0.5, percapita=_LIN), True),
    ("CUJ_RATIO", _scn("CUJ_RATIO", N=3, gamma=0.5, alpha=0.5, percapita=_LIN), True),
    ("SEPARABLE_SUM_CUJ", _scn("SEPARABLE_SUM_CUJ", N=3, gamma=0.5, alpha=1.0,
                               percapita=_LIN), True),
    ("COMBINED", _scn("COMBINED", N=3, gamma=0.5, eta=1e-5, beta=1.0, alpha=1.0, A=0.5,
                      percapita=_LIN), True),
)


def random_interior_path(scenario: ScenarioConfig, rng: np.random.RandomState,
                         spread: float = 0.1) -> np.ndarray:
    """A feasible random path near uniform: positive, sums to W0, in-domain."""
    N = scenario.horizon_N
    for _ in range(50):
        c = (scenario.W0 / N) * (1.0 + spread * rng.uniform(-1.0, 1.0, size=N))
        c *= scenario.W0 / c.sum()
        try:
            lifetime_objective(c, scenario)
        except Exception:
            continue
        return c
    raise RuntimeError("could not sample a feasible interior path")


def _grad_rel_err(scenario: ScenarioConfig, c: np.ndarray) -> float:
    g = lifetime_objective(c, scenario).gradient
    fd = finite_diff_gradient(c, scenario)
    return float(np.max(np.abs(g - fd)) / np.max(np.abs(fd)))


def check_gradients(points: int = 3) -> CheckResult:
    rng = np.random.RandomState(SEED)
    worst = 0.0
    where = ""
    for name, scn in GRADIENT_CASES:
        for k in range(points):
            err = _grad_rel_err(scn, random_interior_path(scn, rng))
            if err > worst:
                worst, where = err, f"{name}, point {k + 1}"
    return CheckResult("gradient_vs_finite_difference", worst < 1e-5,
                       f"max rel err {worst:.2e} ({where})")


def check_oracle_crra() -> CheckResult:
    scn = _scn("SEPARABLE_CRRA", gamma=0.5)
    got = solve(scn).path
    ref = separable_crra_closed_form(scn)
    dev = float(np.max(np.abs(got - ref) / ref))
    return CheckResult("oracle_crra_geometric", dev < 1e-6,
                       f"max entrywise dev {dev:.2e}")


def check_oracle_cara() -> CheckResult:
    scn = _scn("SEPARABLE_CARA", eta=1e-5)
    ref = separable_cara_closed_form(scn)
    if ref is None:
        return CheckResult("oracle_cara_arithmetic", False, "closed form not interior")
    got = solve(scn).path
    dev = float(np.max(np.abs(got - ref) / ref))
    return CheckResult("oracle_cara_arithmetic", dev < 1e-6,
                       f"max entrywise dev {dev:.2e}")


def check_oracle_peer_cara() -> CheckResult:
    scn = _scn("CUJ_ADD_CARA", eta=1e-5, alpha=1.0, percapita=_LIN)
    ref = cuj_cara_closed_form(scn)
    if ref is None:
        return CheckResult("oracle_peer_cara_linear", False, "closed form not interior")
    res = solve(scn)
    dev = float(np.max(np.abs(res.path - ref) / ref))
    t = np.arange(1, scn.horizon_N + 1, dtype=float)
    slope = float(np.polyfit(t, res.path, 1)[0])
    expected = (scn.utility.alpha * scn.percapita.C0 / scn.percapita.doubling_years
                - scn.rho / scn.utility.eta)
    srel = abs(slope - expected) / abs(expected)
    ok = dev < 1e-6 and srel < 1e-5
    return CheckResult("oracle_peer_cara_linear", ok,
                       f"max entrywise dev {dev:.2e}, slope rel err {srel:.2e}")


def check_brute_force(grid_points: int = 150) -> CheckResult:
    worst_gap = -math.inf
    worst_cell = 0.0
    where_gap = where_cell = ""
    for name, scn, concave in BRUTE_CASES:
        bf_path = brute_force_small(scn, grid_points)
        bf_ev = lifetime_objective(bf_path, scn)
        cell = scn.W0 / grid_points
        allowance = cell * float(np.sum(np.abs(bf_ev.gradient)))
        res = solve(scn)
        gap = bf_ev.value - res.objective  # must stay below the allowance
        if gap - allowance > worst_gap:
            worst_gap, where_gap = gap - allowance, name
        if concave:
            off = float(np.max(np.abs(res.path - bf_path))) / cell
            if off > worst_cell:
                worst_cell, where_cell = off, name
    ok = worst_gap <= 0.0 and worst_cell <= 1.0
    return CheckResult("grid_search_agreement", ok,
                       f"worst objective slack {-worst_gap:.3g} ({where_gap}); "
                       f"worst argmax offset {worst_cell:.2f} cells ({where_cell})")


def check_budget() -> CheckResult:
    scn = _scn("MULT_HABIT", gamma=0.5, beta=1.0)
    res = solve(scn)
    rel = abs(float(res.path.sum()) - scn.W0) / scn.W0
    ok = rel < 1e-12 and bool(np.all(res.path > 0.0))
    return CheckResult("budget_and_positivity", ok,
                       f"sum rel err {rel:.2e}, min c {float(res.path.min()):.3g}")


def check_determinism() -> CheckResult:
    scn = _scn("MULT_HABIT", gamma=0.5, beta=1.0)
    a, b = solve(scn), solve(scn)
    same = bool(np.array_equal(a.path, b.path)) and a.objective == b.objective
    return CheckResult("repeat_solve_identical", same,
                       "two solves bitwise equal" if same else "solves differ")


def check_ascent() -> CheckResult:
    worst = -math.inf
    where = ""
    for name, scn in (("MULT_HABIT", _scn("MULT_HABIT", gamma=0.5, beta=1.0)),
                      ("ADD_HABIT_CARA", _scn("ADD_HABIT_CARA", W0=5e6, eta=1e-5, b=1.0))):
        tr = solve(scn).objective_trace
        noise = 64.0 * np.finfo(float).eps * (1.0 + np.abs(tr[:-1]))
        drop = float(np.max(np.diff(tr) * -1.0 - noise)) if len(tr) > 1 else -1.0
        if drop > worst:
            worst, where = drop, name
    return CheckResult("monotone_ascent", worst <= 0.0,
                       f"worst drop beyond noise floor {worst:.3g} ({where})")


def check_scale_equivariance() -> CheckResult:
    k = 7.0
    base = _scn("MULT_HABIT", gamma=0.5, beta=1.0)
    scaled = _scn("MULT_HABIT", W0=k * base.W0, c0=k * base.c0, gamma=0.5, beta=1.0)
    a, b = solve(base).path, solve(scaled).path
    rel = float(np.max(np.abs(b - k * a) / (k * a)))
    return CheckResult("currency_scale_equivariance", rel < 1e-8,
                       f"k=7 path rel dev {rel:.2e}")


def check_telescoping() -> CheckResult:
    # log utility with one-year full-strength memory: interior reshuffles
    # cancel, only the endpoint matters
    scn = _scn("SHORT_MEMORY", rho=0.0, gamma=0.0, d=1.0)
    rng = np.random.RandomState(SEED)
    c = random_interior_path(scn, rng)
    j0 = lifetime_objective(c, scn).value
    c2 = c.copy()
    c2[4] += 1000.0
    c2[11] -= 1000.0
    j1 = lifetime_objective(c2, scn).value
    rel = abs(j1 - j0) / (1.0 + abs(j0))
    return CheckResult("telescoping_invariance", rel < 1e-10,
                       f"objective shift {rel:.2e} under interior transfer")


def check_peer_discount_equivalence() -> CheckResult:
    lam, D, gamma = 0.02, 1.0, 0.5
    pc = PerCapitaSpec(kind="EXPONENTIAL", C0=1.0e5, lam=lam)
    cuj = _scn("CUJ_MULT", gamma=gamma, D=D, percapita=pc)
    plain = _scn("SEPARABLE_CRRA", rho=cuj.rho + gamma * lam * D, gamma=gamma)
    a, b = solve(cuj).path, solve(plain).path
    rel = float(np.max(np.abs(a - b) / b))
    return CheckResult("peer_growth_discount_shift", rel < 1e-6,
                       f"path rel dev {rel:.2e} vs shifted-discount solve")


def check_sum_cuj_independence() -> CheckResult:
    base = solve(_scn("SEPARABLE_SUM_CUJ", gamma=0.5, alpha=0.0, percapita=_LIN)).path
    worst = 0.0
    for alpha in (0.5, 1.0, 2.0):
        got = solve(_scn("SEPARABLE_SUM_CUJ", gamma=0.5, alpha=alpha, percapita=_LIN)).path
        worst = max(worst, float(np.max(np.abs(got - base) / base)))
    return CheckResult("additive_peer_term_inert", worst < 1e-10,
                       f"max path shift over alpha {worst:.2e}")


def check_peer_partial_identity(points: int = 100) -> CheckResult:
    scn = _scn("CUJ_ADD_CARA", eta=1e-5, alpha=0.7, percapita=_LIN)
    rng = np.random.RandomState(SEED)
    N = scn.horizon_N
    worst = 0.0
    for _ in range(points):
        c = rng.uniform(1e4, 2e5, size=N)
        h = habit_series(scn, c)
        C = percapita_path(scn.percapita, N)
        _v, d_dc, _d_dh, d_dC, _x = felicity_series(scn, c, h, C)
        resid = scn.utility.alpha * d_dc + d_dC
        worst = max(worst, float(np.max(np.abs(resid) / np.abs(d_dC).max())))
    return CheckResult("peer_partial_identity", worst < 1e-12,
                       f"max |alpha*du_dc + du_dC| rel {worst:.2e} over {points} points")


def check_infeasible_start() -> CheckResult:
    scn = _scn("ADD_HABIT_CRRA", gamma=0.5, b=5.0)
    try:
        solve(scn)
    except InfeasibleStartError as exc:
        return CheckResult("infeasible_start_report", True,
                           f"reported at period {exc.period}")
    return CheckResult("infeasible_start_report", False,
                       "expected an infeasible-start report, solve returned")


def check_horizon_one() -> CheckResult:
    res = solve(_scn("SEPARABLE_CRRA", N=1, gamma=0.5))
    ok = res.converged and res.path.shape == (1,) and res.path[0] == 1.0e6
    return CheckResult("single_year_degenerate", ok,
                       f"path {res.path.tolist()}, converged={res.converged}")


def check_float_round_trip(n: int = 1000) -> CheckResult:
    rng = np.random.RandomState(SEED)
    vals = np.concatenate([
        rng.uniform(1e-8, 1e8, size=n // 2),
        np.exp(rng.uniform(-200, 200, size=n // 2)),
        solve(_scn("MULT_HABIT", gamma=0.5, beta=1.0)).path,
    ])
    bad = sum(1 for v in vals if float(format(float(v), ".17g")) != float(v))
    return CheckResult("decimal17_round_trip", bad == 0,
                       f"{bad} of {len(vals)} values failed to round-trip")


ALL_CHECKS = (
    check_gradients,
    check_oracle_crra,
    check_oracle_cara,
    check_oracle_peer_cara,
    check_brute_force,
    check_budget,
    check_determinism,
    check_ascent,
    check_scale_equivariance,
    check_telescoping,
    check_peer_discount_equivalence,
    check_sum_cuj_independence,
    check_peer_partial_identity,
    check_infeasible_start,
    check_horizon_one,
    check_float_round_trip,
)


def run_selftests() -> list[CheckResult]:
    """Run the whole battery; a crash inside a check becomes a failed row."""
    out = []
    for fn in ALL_CHECKS:
        try:
            out.append(fn())
        except Exception as exc:
            out.append(CheckResult(fn.__name__.removeprefix("check_"), False,
                                   f"{type(exc).__name__}: {exc}"))
    return out
