"""Budget-constrained maximizer for the lifetime objective.

The equality constraint sum(c) = W0 and positivity c_t > 0 are absorbed by a
softmax reparameterization c = W0 * softmax(x) with the gauge x_1 = 0, leaving
an unconstrained concave-ish problem in y = x[2:].  That is solved by BFGS
ascent with a backtracking line search.  Near the optimum the objective is
flat to machine precision, so backtracking switches to accepting steps that
shrink the gradient norm without losing more than the rounding noise of f;
after the stopping rule fires, a short polish phase pushes the gradient a few
orders below tolerance so that independent solves of the same scenario land
on numerically identical paths.

Some habit families are not concave and have no attained maximum: utility can
grow without bound along rays where some years' consumption collapses toward
zero.  Three safeguards keep such runs finite, deterministic, and honest
(converged stays False): each direction is clipped componentwise in log space
so a single exploding coordinate cannot freeze the rest of the path, years
pinned at the floating-point floor are dropped from the direction so ascent
continues among the live years, and the run stops once the objective has
grown by 30 orders of magnitude over its starting value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DomainError, InfeasibleStartError, ScenarioConfig, SolverOptions, validate_config
from .objective import lifetime_objective

_ARMIJO = 1e-4
_EPS = np.finfo(float).eps


@dataclass
class SolveResult:
    """path: optimal consumption c_1..c_N summing to W0.
    objective: discounted lifetime utility at path.
    kkt_residual: max_t |g_t - gbar| / |gbar| where g = dJ/dc, gbar = mean(g);
    zero at an exact interior optimum (all marginal utilities equal).
    kkt_tol: residual bound implied by the gradient stopping rule; converged
    requires kkt_residual <= kkt_tol.
    multiplier: gbar, the shadow price of wealth.
    iterations: accepted ascent steps.
    domain_hits: line-search trials rejected for leaving the utility domain.
    grad_norm: final reduced-gradient infinity norm.
    objective_trace: endogenous objective value after each accepted step."""

    path: np.ndarray
    objective: float
    kkt_residual: float
    kkt_tol: float
    multiplier: float
    iterations: int
    converged: bool
    domain_hits: int
    grad_norm: float
    objective_trace: np.ndarray


def kkt_residual(path, scenario: ScenarioConfig) -> float:
    """Relative spread of marginal lifetime utilities along the path."""
    g = lifetime_objective(path, scenario).gradient
    gbar = float(np.mean(g))
    return float(np.max(np.abs(g - gbar)) / abs(gbar))


def _softmax(x: np.ndarray) -> np.ndarray:
    e = np.exp(x - np.max(x))
    return e / e.sum()


def _path_of(y: np.ndarray, W0: float) -> np.ndarray:
    x = np.concatenate(([0.0], y))
    return W0 * _softmax(x)


class _Rejected(Exception):
    pass


def solve(scenario: ScenarioConfig) -> SolveResult:
    """Maximize lifetime utility over positive paths summing to W0."""
    scenario = validate_config(scenario)
    N = scenario.horizon_N
    W0 = scenario.W0
    opts = scenario.solver if scenario.solver is not None else SolverOptions()

    if N == 1:
        c = np.array([W0])
        ev = lifetime_objective(c, scenario)
        g1 = float(ev.gradient[0])
        return SolveResult(path=c, objective=ev.value, kkt_residual=0.0,
                           kkt_tol=1.0, multiplier=g1, iterations=0,
                           converged=True, domain_hits=0, grad_norm=0.0,
                           objective_trace=np.array([ev.value_endogenous]))

    def evaluate(y: np.ndarray):
        # returns (endogenous f, reduced ascent gradient, path); raises
        # DomainError/_Rejected when the trial point is unusable
        c = _path_of(y, W0)
        ev = lifetime_objective(c, scenario)
        f = ev.value_endogenous
        g_c = ev.gradient
        if not np.isfinite(f) or not np.all(np.isfinite(g_c)):
            raise _Rejected
        gp = float(g_c @ (c / W0))
        r = (c * (g_c - gp))[1:]
        return f, r, c

    if opts.init == "GIVEN":
        p0 = np.asarray(opts.init_path, dtype=float)
        p0 = p0 / p0.sum()
        y = np.log(p0[1:] / p0[0])
    else:
        y = np.zeros(N - 1)

    domain_hits = 0
    try:
        f, g, c = evaluate(y)
    except DomainError as exc:
        raise InfeasibleStartError(exc.period, "objective undefined at the starting path") from exc
    except _Rejected:
        raise InfeasibleStartError(None, "objective not finite at the starting path") from None

    n = N - 1
    H = np.eye(n)
    first_scale = True
    iterations = 0
    trace = [f]
    converged = False
    consecutive_fails = 0
    f_bound = 1e30 * (1.0 + abs(f))  # unbounded-objective cutoff

    def bfgs_update(s: np.ndarray, q: np.ndarray) -> None:
        # q = -(g_new - g_old) is the descent-form gradient change; s@q > 0
        # preserves positive definiteness
        nonlocal H, first_scale
        sq = float(s @ q)
        if sq <= 1e-12 * (np.linalg.norm(s) * np.linalg.norm(q) + 1e-300):
            return
        if first_scale:
            H = np.eye(n) * (sq / float(q @ q))
            first_scale = False
        rho_ = 1.0 / sq
        Hq = H @ q
        H -= rho_ * (np.outer(s, Hq) + np.outer(Hq, s))
        H += rho_ * (1.0 + rho_ * float(q @ Hq)) * np.outer(s, s)

    while iterations < opts.max_iter:
        gnorm = float(np.max(np.abs(g)))
        tau = opts.tol_grad * (1.0 + abs(f))
        if gnorm <= tau:
            converged = True
            break
        # years crushed to the float floor with the gradient still pushing
        # down are frozen so the remaining years can keep ascending
        frozen = (c[1:] < 1e-250 * W0)
        # cap the move per coordinate in log-consumption space; inactive near
        # the optimum where ||d|| is small, so superlinear steps survive
        cap = 0.25 if iterations == 0 else 1.0
        d = H @ g
        d[frozen & (d < 0.0)] = 0.0
        d = np.clip(d, -cap, cap)
        slope = float(d @ g)
        if not np.isfinite(slope) or slope <= 0.0:
            H = np.eye(n)
            first_scale = True
            d = g.copy()
            d[frozen & (d < 0.0)] = 0.0
            d = np.clip(d, -cap, cap)
            slope = float(d @ g)
            if slope <= 0.0:
                break
        alpha = 1.0
        noise = 64.0 * _EPS * (1.0 + abs(f))
        accepted = False
        for _ in range(60):
            try:
                f1, g1, c1 = evaluate(y + alpha * d)
            except (DomainError, _Rejected):
                domain_hits += 1
                alpha *= 0.5
                continue
            if f1 >= f + _ARMIJO * alpha * slope:
                accepted = True
                break
            # expected gain below rounding noise: trust the gradient instead
            if alpha * slope <= noise and float(np.max(np.abs(g1))) <= 0.9 * gnorm and f1 >= f - noise:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            consecutive_fails += 1
            if consecutive_fails >= 2:
                break
            H = np.eye(n)
            first_scale = True
            continue
        consecutive_fails = 0
        s = alpha * d
        bfgs_update(s, -(g1 - g))
        y = y + s
        f, g, c = f1, g1, c1
        iterations += 1
        trace.append(f)
        if f >= f_bound:
            break  # objective has no maximum; stop the runaway

    if converged:
        # polish: independent solves should agree far inside client tolerances
        target = 1e-3 * opts.tol_grad * (1.0 + abs(f))
        for _ in range(40):
            gnorm = float(np.max(np.abs(g)))
            if gnorm <= target:
                break
            d = H @ g
            if not np.isfinite(float(d @ g)) or float(d @ g) <= 0.0:
                break
            alpha = 1.0
            stepped = False
            for _ in range(4):
                try:
                    f1, g1, c1 = evaluate(y + alpha * d)
                except (DomainError, _Rejected):
                    domain_hits += 1
                    alpha *= 0.25
                    continue
                noise = 64.0 * _EPS * (1.0 + abs(f))
                if float(np.max(np.abs(g1))) < gnorm and f1 >= f - noise:
                    s = alpha * d
                    bfgs_update(s, -(g1 - g))
                    y = y + s
                    f, g, c = f1, g1, c1
                    iterations += 1
                    trace.append(f)
                    stepped = True
                    break
                alpha *= 0.25
            if not stepped:
                break

    ev = lifetime_objective(c, scenario)
    g_c = ev.gradient
    gbar = float(np.mean(g_c))
    kkt = float(np.max(np.abs(g_c - gbar)) / abs(gbar))
    tau = opts.tol_grad * (1.0 + abs(f))
    # reduced-gradient flatness only certifies equal marginals when no year is
    # pinned near zero (the softmax Jacobian vanishes there), so the implied
    # bound is capped: a >1% marginal-utility spread is never "converged"
    kkt_tol = min(4.0 * N * tau / (float(np.min(c)) * abs(gbar)), 1e-2)
    return SolveResult(path=c, objective=ev.value, kkt_residual=kkt,
                       kkt_tol=kkt_tol, multiplier=gbar,
                       iterations=iterations,
                       converged=bool(converged and kkt <= kkt_tol),
                       domain_hits=domain_hits,
                       grad_norm=float(np.max(np.abs(g))),
                       objective_trace=np.asarray(trace))
