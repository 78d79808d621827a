"""Independent ground truth for the solver.

Three closed-form optimal paths (plain CRRA, plain CARA, peer-additive CARA),
an exhaustive simplex-grid search for tiny horizons, and shape metrics that
turn qualitative path descriptions (jumps, troughs, humps, linearity) into
numbers.  The grid search deliberately evaluates utility through its own
straightforward formulas rather than through the production objective, so the
two routes only agree if both are right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ScenarioConfig, ensure_validated, percapita_path


class NoFeasibleGridPointError(RuntimeError):
    """Every grid path violated the utility domain (code NO_FEASIBLE_GRID_POINT)."""

    code = "NO_FEASIBLE_GRID_POINT"


@dataclass(frozen=True)
class ShapeMetrics:
    """Path-shape summary.

    first_jump = |c_1 - c_2|/c_2 and last_jump = |c_N - c_(N-1)|/c_(N-1)
    capture boundary spikes; argmax_t / trough_t are 1-based locations of the
    peak and of the minimum over the first half; unimodal means nondecreasing
    then nonincreasing within a noise floor of 1e-6 * W0; end_mass = c_N/W_0;
    slope and slope_residual are the least-squares line fit of c_t on t and
    the RMS of its residuals."""

    first_jump: float
    last_jump: float
    argmax_t: int
    unimodal: bool
    trough_t: int
    end_mass: float
    slope: float
    slope_residual: float


def shape_metrics(path, W0: float) -> ShapeMetrics:
    c = np.asarray(path, dtype=float)
    N = len(c)
    if N == 1:
        return ShapeMetrics(0.0, 0.0, 1, True, 1, float(c[0] / W0), 0.0, 0.0)
    first_jump = abs(c[0] - c[1]) / c[1]
    last_jump = abs(c[-1] - c[-2]) / c[-2]
    peak = int(np.argmax(c))
    tol = 1e-6 * W0
    diffs = np.diff(c)
    unimodal = bool(np.all(diffs[:peak] >= -tol) and np.all(diffs[peak:] <= tol))
    half = c[: math.ceil(N / 2)]
    trough = int(np.argmin(half))
    t = np.arange(1, N + 1, dtype=float)
    slope, intercept = np.polyfit(t, c, 1)
    residual = float(np.sqrt(np.mean((c - (intercept + slope * t)) ** 2)))
    return ShapeMetrics(first_jump=float(first_jump), last_jump=float(last_jump),
                        argmax_t=peak + 1, unimodal=unimodal, trough_t=trough + 1,
                        end_mass=float(c[-1] / W0), slope=float(slope),
                        slope_residual=residual)


def separable_crra_closed_form(scenario: ScenarioConfig) -> np.ndarray:
    """c_t proportional to r^t with r = e^(-rho/(1-gamma)); exact interior optimum."""
    scenario = ensure_validated(scenario)
    if scenario.utility.family != "SEPARABLE_CRRA":
        raise ValueError("closed form applies to SEPARABLE_CRRA only")
    N = scenario.horizon_N
    r = math.exp(-scenario.rho / (1.0 - scenario.utility.gamma))
    weights = r ** np.arange(1, N + 1, dtype=float)
    return scenario.W0 * weights / weights.sum()


def separable_cara_closed_form(scenario: ScenarioConfig) -> np.ndarray | None:
    """Arithmetic path c_t = W0/N + (rho/eta)((N+1)/2 - t); None when it leaves
    the positive orthant (boundary case, not a valid interior oracle)."""
    scenario = ensure_validated(scenario)
    if scenario.utility.family != "SEPARABLE_CARA":
        raise ValueError("closed form applies to SEPARABLE_CARA only")
    N = scenario.horizon_N
    t = np.arange(1, N + 1, dtype=float)
    c = scenario.W0 / N + (scenario.rho / scenario.utility.eta) * ((N + 1) / 2.0 - t)
    return c if bool(np.all(c > 0)) else None


def cuj_cara_closed_form(scenario: ScenarioConfig) -> np.ndarray | None:
    """c_t = alpha*C_t - (rho/eta)*t + K with K fixing the budget; None off the
    positive orthant.  Linear C_t gives an exactly linear optimal path."""
    scenario = ensure_validated(scenario)
    if scenario.utility.family != "CUJ_ADD_CARA":
        raise ValueError("closed form applies to CUJ_ADD_CARA only")
    N = scenario.horizon_N
    alpha = scenario.utility.alpha
    eta = scenario.utility.eta
    C = percapita_path(scenario.percapita, N)
    t = np.arange(1, N + 1, dtype=float)
    K = scenario.W0 / N - alpha * C.sum() / N + (scenario.rho / eta) * (N + 1) / 2.0
    c = alpha * C - (scenario.rho / eta) * t + K
    return c if bool(np.all(c > 0)) else None


# --- exhaustive grid search -------------------------------------------------

def _compositions(total: int, parts: int):
    """All tuples of positive integers of the given length summing to total,
    in lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for head in range(1, total - parts + 2):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def _crra_batch(x: np.ndarray, gamma: float) -> np.ndarray:
    # domain violations become -inf instead of raising; the caller masks them
    out = np.full(x.shape, -np.inf)
    ok = x > 0
    if gamma == 0.0:
        out[ok] = np.log(x[ok])
    else:
        out[ok] = x[ok] ** gamma / gamma
    return out


def _cara_batch(x: np.ndarray, eta: float) -> np.ndarray:
    with np.errstate(over="ignore"):
        return -np.exp(-eta * x) / eta


def _batch_objective(scenario: ScenarioConfig, paths: np.ndarray) -> np.ndarray:
    """Lifetime objective for a (B, N) batch of paths, written directly from
    the felicity formulas; infeasible paths evaluate to -inf."""
    u = scenario.utility
    fam = u.family
    N = scenario.horizon_N
    c0 = scenario.c0
    cbar0 = scenario.cbar0
    C = percapita_path(scenario.percapita, N)
    C0 = scenario.percapita.C0
    B = paths.shape[0]
    total = np.zeros(B)
    z = None
    if fam == "ADD_HABIT_CRRA" and u.a is not None:
        z = np.full(B, c0 / (math.exp(u.a) - 1.0))
    for t in range(1, N + 1):
        c = paths[:, t - 1]
        # habit state at t from the prefix
        if fam == "SHORT_MEMORY":
            h = np.full(B, c0) if t == 1 else paths[:, t - 2]
        elif fam == "M_PERIOD":
            lo = max(1, t - u.M)
            if t == 1:
                h = np.full(B, 2.0 * float(c0))
            else:
                h = c0 + paths[:, lo - 1:t - 1].mean(axis=1)
        elif fam == "ADD_HABIT_CRRA" and u.a is not None:
            if t > 1:
                z = math.exp(-u.a) * (z + paths[:, t - 2])
            h = z
        elif fam in ("MULT_HABIT", "RATIO_HABIT", "ADD_HABIT_CRRA", "ADD_HABIT_CARA",
                     "SEPARABLE_SUM_HABIT", "COMBINED"):
            h = np.full(B, c0) if t == 1 else paths[:, : t - 1].mean(axis=1)
        else:
            h = None

        if fam == "SEPARABLE_CRRA":
            val = _crra_batch(c, u.gamma)
        elif fam == "SEPARABLE_CARA":
            val = _cara_batch(c, u.eta)
        elif fam in ("SHORT_MEMORY", "RATIO_HABIT"):
            val = _crra_batch(c / h ** u.d, u.gamma)
        elif fam == "M_PERIOD":
            val = _crra_batch(c / h, u.gamma)
        elif fam == "MULT_HABIT":
            val = _crra_batch(c / (cbar0 + u.beta * h), u.gamma)
        elif fam == "ADD_HABIT_CRRA":
            val = _crra_batch(c - u.b * h, u.gamma)
        elif fam == "ADD_HABIT_CARA":
            val = _cara_batch(c - u.b * h, u.eta)
        elif fam == "SEPARABLE_SUM_HABIT":
            val = _crra_batch(c, u.gamma) + u.beta * _crra_batch(h, u.gamma)
        elif fam == "CUJ_MULT":
            val = _crra_batch(c / C[t - 1] ** u.D, u.gamma)
        elif fam == "CUJ_ADD_CARA":
            val = _cara_batch(c - u.alpha * C[t - 1], u.eta)
        elif fam == "CUJ_RATIO":
            val = _crra_batch(c / (C0 + u.alpha * C[t - 1]), u.gamma)
        elif fam == "SEPARABLE_SUM_CUJ":
            val = _crra_batch(c, u.gamma) + u.alpha * _crra_batch(np.full(B, C[t - 1]), u.gamma)
        elif fam == "COMBINED":
            if u.A == 1.0:
                val = _crra_batch(c / (cbar0 + u.beta * h), u.gamma)
            elif u.A == 0.0:
                val = _cara_batch(c - u.alpha * C[t - 1], u.eta)
            else:
                val = (u.A * _crra_batch(c / (cbar0 + u.beta * h), u.gamma)
                       + (1.0 - u.A) * _cara_batch(c - u.alpha * C[t - 1], u.eta))
        else:
            raise AssertionError(fam)
        total = total + math.exp(-scenario.rho * t) * val
    total[~np.isfinite(total)] = -np.inf
    return total


def brute_force_small(scenario: ScenarioConfig, grid_points: int) -> np.ndarray:
    """Exhaustive search over W0 * k/G for all positive integer compositions k
    of G into N parts; ties go to the lexicographically smallest path."""
    scenario = ensure_validated(scenario)
    N = scenario.horizon_N
    if N > 4:
        raise ValueError(f"brute force is limited to N <= 4, got N={N}")
    if grid_points < 50:
        raise ValueError(f"grid_points must be >= 50, got {grid_points}")
    G = int(grid_points)
    step = scenario.W0 / G

    best_value = -np.inf
    best_path = None
    chunk = []
    # evaluate in partitions and merge by max reduction; strict > keeps the
    # first (lexicographically smallest) argmax on ties
    def flush():
        nonlocal best_value, best_path, chunk
        if not chunk:
            return
        paths = np.asarray(chunk, dtype=float) * step
        chunk = []
        values = _batch_objective(scenario, paths)
        i = int(np.argmax(values))
        if values[i] > best_value:
            best_value = float(values[i])
            best_path = paths[i]

    for comp in _compositions(G, N):
        chunk.append(comp)
        if len(chunk) >= 16384:
            flush()
    flush()
    if best_path is None or best_value == -np.inf:
        raise NoFeasibleGridPointError(
            f"NO_FEASIBLE_GRID_POINT: no grid path at resolution {G} stays inside "
            f"the {scenario.utility.family} utility domain")
    return best_path
