"""Command-line entry point.

Subcommands:
  solve   one scenario JSON -> path.csv, result.json, optional plot.svg
  figure  preset 1..7      -> per-curve CSVs, combined SVG, summary.json
  sweep   one parameter    -> sweep.csv summary plus lossless records.json
  check   self-test battery -> pass/fail table

Exit codes: 0 success/converged, 1 configuration error (message names the
offending field), 2 honest runtime failure (non-convergence, infeasible
start, a failed figure expectation, or a failed self-test).

All CSV output uses a header row, LF line endings, and 17-significant-digit
decimals so files reload bit-exactly.  Multi-scenario commands solve in
parallel (capped by the HABITPATH_THREADS environment variable) and write
all files from the main thread afterwards, in scenario order.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .core import (ConfigError, InfeasibleStartError, ScenarioConfig,
                   load_scenario, percapita_path, scenario_from_dict,
                   scenario_to_dict, validate_config, with_param)
from .objective import discount_weights, lifetime_objective
from .oracle import ShapeMetrics, shape_metrics
from .presets import FigurePreset, check_figure, figure_preset
from .selftest import run_selftests
from .solver import SolveResult, solve
from .svg import render_chart

THREADS_VAR = "HABITPATH_THREADS"


# ---------------------------------------------------------------------------
# records and writers


@dataclass
class RunRecord:
    """Everything one solve produced; round-trips losslessly through JSON."""

    scenario: ScenarioConfig
    result: SolveResult | None
    metrics: ShapeMetrics | None
    duration_s: float
    error: str | None = None    # INFEASIBLE_START when no feasible start exists
    period: int | None = None   # first offending year for infeasible starts

    def to_dict(self) -> dict:
        if self.result is not None:
            res = {"path": self.result.path.tolist(),
                   "objective": self.result.objective,
                   "kkt_residual": self.result.kkt_residual,
                   "kkt_tol": self.result.kkt_tol,
                   "multiplier": self.result.multiplier,
                   "iterations": self.result.iterations,
                   "converged": self.result.converged,
                   "domain_hits": self.result.domain_hits,
                   "grad_norm": self.result.grad_norm,
                   "objective_trace": self.result.objective_trace.tolist()}
        else:
            # no path exists; report the failure in the same slot
            res = {"converged": False, "domain_hits": 1,
                   "error": self.error or "INFEASIBLE_START"}
            if self.period is not None:
                res["period"] = self.period
        return {"scenario": scenario_to_dict(self.scenario),
                "result": res,
                "metrics": None if self.metrics is None else asdict(self.metrics),
                "duration_s": self.duration_s}

    @staticmethod
    def from_dict(raw: dict) -> "RunRecord":
        scenario = validate_config(scenario_from_dict(raw["scenario"]))
        r = raw["result"]
        if "error" in r:
            return RunRecord(scenario=scenario, result=None, metrics=None,
                             duration_s=raw["duration_s"], error=r["error"],
                             period=r.get("period"))
        result = SolveResult(path=np.array(r["path"], dtype=float),
                             objective=r["objective"],
                             kkt_residual=r["kkt_residual"],
                             kkt_tol=r["kkt_tol"],
                             multiplier=r["multiplier"],
                             iterations=r["iterations"],
                             converged=r["converged"],
                             domain_hits=r["domain_hits"],
                             grad_norm=r["grad_norm"],
                             objective_trace=np.array(r["objective_trace"], dtype=float))
        metrics = None if raw["metrics"] is None else ShapeMetrics(**raw["metrics"])
        return RunRecord(scenario=scenario, result=result, metrics=metrics,
                         duration_s=raw["duration_s"])


def _f17(x: float) -> str:
    return format(float(x), ".17g")


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def path_csv_text(scenario: ScenarioConfig, path: np.ndarray) -> str:
    """CSV body for one solved path: year, consumption, habit benchmark,
    per-capita benchmark, felicity, and the discount factor applied to it."""
    from .utility import habit_series
    N = scenario.horizon_N
    c = np.asarray(path, dtype=float)
    h = habit_series(scenario, c)
    C = (percapita_path(scenario.percapita, N) if scenario.percapita is not None
         else np.zeros(N))
    with np.errstate(over="ignore", invalid="ignore"):
        per = lifetime_objective(c, scenario).per_period
    w = discount_weights(scenario.rho, N)
    lines = ["t,c_t,habit_t,C_t,felicity_t,discount_t"]
    for i in range(N):
        lines.append(",".join((str(i + 1), _f17(c[i]), _f17(h[i]), _f17(C[i]),
                               _f17(per[i]), _f17(w[i]))))
    return "\n".join(lines) + "\n"


def read_path_csv(path: str) -> np.ndarray:
    """Reload the consumption column written by path_csv_text, bit-exactly."""
    rows = np.genfromtxt(path, delimiter=",", names=True)
    col = np.atleast_1d(rows["c_t"])
    return col.astype(float)


def _dump_json(path: str, payload: dict | list) -> None:
    _write_text(path, json.dumps(payload, indent=2) + "\n")


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9.-]+", "_", label).strip("_")


def _max_workers(n_jobs: int) -> int:
    raw = os.environ.get(THREADS_VAR)
    if raw is None:
        return max(1, min(n_jobs, os.cpu_count() or 1))
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap < 1:
        raise ConfigError("PARAM_OUT_OF_RANGE", THREADS_VAR,
                          f"must be a positive integer, got {raw!r}")
    return max(1, min(n_jobs, cap))


def _run_one(scenario: ScenarioConfig) -> RunRecord:
    t0 = time.perf_counter()
    try:
        res = solve(scenario)
    except InfeasibleStartError as exc:
        return RunRecord(scenario=scenario, result=None, metrics=None,
                         duration_s=time.perf_counter() - t0,
                         error="INFEASIBLE_START", period=exc.period)
    met = shape_metrics(res.path, scenario.W0)
    return RunRecord(scenario=scenario, result=res, metrics=met,
                     duration_s=time.perf_counter() - t0)


def _run_many(scenarios: list[ScenarioConfig]) -> list[RunRecord]:
    workers = _max_workers(len(scenarios))
    if workers == 1 or len(scenarios) == 1:
        return [_run_one(s) for s in scenarios]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, scenarios))


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.config)
    out = args.out
    os.makedirs(out, exist_ok=True)
    record = _run_one(scenario)
    _dump_json(os.path.join(out, "result.json"), record.to_dict())

    if record.result is None:
        print(f"error: no feasible start: consumption cannot cover the habit "
              f"benchmark at period {record.period}", file=sys.stderr)
        return 2

    _write_text(os.path.join(out, "path.csv"),
                path_csv_text(scenario, record.result.path))
    if args.svg:
        t = np.arange(1, scenario.horizon_N + 1, dtype=float)
        chart = render_chart("Optimal consumption path", "year t", "c_t",
                             [("c_t", t, record.result.path)])
        _write_text(os.path.join(out, "plot.svg"), chart)

    res = record.result
    print(f"converged={res.converged} objective={res.objective:.10g} "
          f"kkt_residual={res.kkt_residual:.3g} iterations={res.iterations} "
          f"-> {out}")
    if not res.converged:
        print("error: NOT_CONVERGED: gradient stopping rule not met", file=sys.stderr)
        return 2
    return 0


def cmd_figure(args: argparse.Namespace) -> int:
    try:
        preset: FigurePreset = figure_preset(args.id)
    except ValueError as exc:
        print(f"error: figure id: {exc}", file=sys.stderr)
        return 1
    out = args.out
    os.makedirs(out, exist_ok=True)

    records = _run_many([c.scenario for c in preset.curves])
    outcomes = [(r.result, r.metrics) for r in records]
    checks = check_figure(preset, outcomes)

    curves_payload = []
    chart_curves = []
    for i, (curve, rec, chk) in enumerate(zip(preset.curves, records, checks)):
        entry = {"label": curve.label, "pathological": curve.pathological,
                 "passed": chk.passed, "detail": chk.detail,
                 "duration_s": rec.duration_s}
        if rec.result is None:
            entry.update(converged=False, error=rec.error, period=rec.period)
        else:
            entry.update(converged=rec.result.converged,
                         iterations=rec.result.iterations,
                         kkt_residual=rec.result.kkt_residual)
            name = f"curve{i + 1}_{_slug(curve.label)}.csv"
            _write_text(os.path.join(out, name),
                        path_csv_text(curve.scenario, rec.result.path))
            entry["csv"] = name
            t = np.arange(1, curve.scenario.horizon_N + 1, dtype=float)
            chart_curves.append((curve.label, t, rec.result.path))
        curves_payload.append(entry)

    if chart_curves:
        _write_text(os.path.join(out, f"figure{preset.id}.svg"),
                    render_chart(preset.description, "year t", "c_t", chart_curves))

    all_passed = all(c.passed for c in checks)
    _dump_json(os.path.join(out, "summary.json"),
               {"figure": preset.id, "description": preset.description,
                "curves": curves_payload, "all_passed": all_passed})

    for chk in checks:
        print(f"[{'PASS' if chk.passed else 'FAIL'}] {chk.label}: {chk.detail}")
    print(f"figure {preset.id}: {'all expectations met' if all_passed else 'FAILED'} "
          f"-> {out}")
    if not all_passed:
        first = next(c for c in checks if not c.passed)
        print(f"error: figure check failed: {first.label}: {first.detail}",
              file=sys.stderr)
        return 2
    return 0


_SWEEP_METRIC_COLS = ("first_jump", "last_jump", "argmax_t", "unimodal", "trough_t",
                      "end_mass", "slope", "slope_residual")


def cmd_sweep(args: argparse.Namespace) -> int:
    base = load_scenario(args.config)
    raw_values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not raw_values:
        raise ConfigError("PARAM_OUT_OF_RANGE", "values",
                          "at least one sweep value is required")
    values = [int(v) if re.fullmatch(r"[+-]?\d+", v) else float(v) for v in raw_values]

    # validate every scenario before any solve starts
    scenarios = [validate_config(with_param(base, args.param, v)) for v in values]

    out = args.out
    os.makedirs(out, exist_ok=True)
    records = _run_many(scenarios)

    header = (["index", args.param, "converged", "iterations", "objective",
               "kkt_residual", "kkt_tol", "multiplier", "grad_norm",
               "domain_hits", "duration_s"] + list(_SWEEP_METRIC_COLS))
    lines = [",".join(header)]
    for i, (v, rec) in enumerate(zip(values, records)):
        if rec.result is None:
            row = [str(i), _f17(v), "false", "", "", "", "", "", "", "1",
                   _f17(rec.duration_s)] + [""] * len(_SWEEP_METRIC_COLS)
        else:
            r, m = rec.result, rec.metrics
            row = [str(i), _f17(v), "true" if r.converged else "false",
                   str(r.iterations), _f17(r.objective), _f17(r.kkt_residual),
                   _f17(r.kkt_tol), _f17(r.multiplier), _f17(r.grad_norm),
                   str(r.domain_hits), _f17(rec.duration_s),
                   _f17(m.first_jump), _f17(m.last_jump), str(m.argmax_t),
                   "true" if m.unimodal else "false", str(m.trough_t),
                   _f17(m.end_mass), _f17(m.slope), _f17(m.slope_residual)]
        lines.append(",".join(row))
    _write_text(os.path.join(out, "sweep.csv"), "\n".join(lines) + "\n")
    _dump_json(os.path.join(out, "records.json"), [r.to_dict() for r in records])

    ok = all(r.result is not None and r.result.converged for r in records)
    for v, rec in zip(values, records):
        status = ("INFEASIBLE_START" if rec.result is None
                  else ("converged" if rec.result.converged else "NOT_CONVERGED"))
        print(f"{args.param}={v!r}: {status}")
    print(f"sweep over {args.param}: {len(records)} runs -> {out}")
    if not ok:
        first = next((v, r) for v, r in zip(values, records)
                     if r.result is None or not r.result.converged)
        print(f"error: sweep member {args.param}={first[0]!r} did not converge",
              file=sys.stderr)
        return 2
    return 0


def cmd_check(_args: argparse.Namespace) -> int:
    results = run_selftests()
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name:<{width}}  {r.detail}")
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if failed:
        print(f"error: self-test failed: {failed[0].name}: {failed[0].detail}",
              file=sys.stderr)
        return 2
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="habitpath",
        description="Optimal lifetime consumption paths under habit-forming "
                    "and peer-referenced utilities")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve one scenario JSON")
    ps.add_argument("config", help="scenario JSON file")
    ps.add_argument("-o", "--out", default=".", help="output directory (default: .)")
    ps.add_argument("--svg", action="store_true", help="also write plot.svg")
    ps.set_defaults(func=cmd_solve)

    pf = sub.add_parser("figure", help="solve and check a figure preset")
    pf.add_argument("id", type=int, help="figure id, 1..7")
    pf.add_argument("-o", "--out", default=".", help="output directory (default: .)")
    pf.set_defaults(func=cmd_figure)

    pw = sub.add_parser("sweep", help="solve one scenario across parameter values")
    pw.add_argument("config", help="scenario JSON file")
    pw.add_argument("--param", required=True,
                    help='dotted config path, e.g. "utility.beta" or "rho"')
    pw.add_argument("--values", required=True, help="comma-separated numbers")
    pw.add_argument("-o", "--out", default=".", help="output directory (default: .)")
    pw.set_defaults(func=cmd_sweep)

    pc = sub.add_parser("check", help="run the self-test battery")
    pc.set_defaults(func=cmd_check)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc.filename or exc}: file not found", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
