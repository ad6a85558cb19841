"""Command-line entry point: strict JSON config, seeded runs, CSV/JSON output.

Determinism contract: identical (config, seed) produce byte-identical data
files.  Every data file embeds the tool version, config hash, and seed; the
wall clock lives in a run_meta.json sidecar that is excluded from the
contract.  Exit codes: 0 success, 2 assertion/runtime failure, 3 config
error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, experiments, oracle
from .errors import ConfigError, PrewetError
from .model import (
    BridgeSpec,
    Potential,
    StepDistribution,
    gaussian_step,
    lazy_srw,
    geometric_step,
    linear_potential,
    power_potential,
    solve_H,
    table_potential,
)
from .sampler import sample_batch
from .transfer import area_statistics, build_tables_auto, covariance, marginal

CSV_FLOAT = repr


# ---------------------------------------------------------------------------
# config parsing


def _require_keys(section: str, obj: dict, allowed: set[str], required: set[str]):
    if not isinstance(obj, dict):
        raise ConfigError(f"section '{section}' must be an object", field=section)
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown key '{section}.{key}'",
                              field=f"{section}.{key}")
    for key in required:
        if key not in obj:
            raise ConfigError(f"missing key '{section}.{key}'",
                              field=f"{section}.{key}")


def _number(section: str, obj: dict, key: str, default=None, minimum=None,
            integer=False):
    if key not in obj:
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"'{section}.{key}' must be a number",
                          field=f"{section}.{key}")
    if integer and int(val) != val:
        raise ConfigError(f"'{section}.{key}' must be an integer",
                          field=f"{section}.{key}")
    if minimum is not None and val < minimum:
        raise ConfigError(f"'{section}.{key}' must be >= {minimum}",
                          field=f"{section}.{key}")
    return int(val) if integer else float(val)


def _build_step(cfg: dict) -> StepDistribution:
    section = cfg.get("step", {"name": "lazy_srw"})
    _require_keys("step", section, {"name", "q", "s", "x_max"}, {"name"})
    name = section["name"]
    if name == "lazy_srw":
        return lazy_srw()
    if name == "geometric":
        q = _number("step", section, "q", 0.5)
        if not (0.0 < q < 1.0):
            raise ConfigError("'step.q' must lie in (0, 1)", field="step.q")
        return geometric_step(q, _number("step", section, "x_max", 30, 1, True))
    if name == "gaussian":
        s = _number("step", section, "s", 2.0)
        if s <= 0:
            raise ConfigError("'step.s' must be positive", field="step.s")
        return gaussian_step(s, _number("step", section, "x_max", 20, 1, True))
    raise ConfigError(f"unknown step '{name}'", field="step.name")


def _build_potential(section: dict, where: str = "potential") -> Potential:
    _require_keys(where, section, {"kind", "beta", "values"}, {"kind"})
    kind = section["kind"]
    if kind == "linear":
        return linear_potential()
    if kind == "power":
        beta = _number(where, section, "beta", 2.0)
        if beta < 1:
            raise ConfigError(f"'{where}.beta' must be >= 1", field=f"{where}.beta")
        return power_potential(beta)
    if kind == "table":
        values = section.get("values")
        if not isinstance(values, list) or len(values) < 2:
            raise ConfigError(f"'{where}.values' must list >= 2 knots",
                              field=f"{where}.values")
        return table_potential(values)
    raise ConfigError(f"unknown potential '{kind}'", field=f"{where}.kind")


def _build_bridge(cfg: dict, step, potential) -> tuple[BridgeSpec, dict]:
    section = cfg.get("bridge")
    if section is None:
        raise ConfigError("missing section 'bridge'", field="bridge")
    _require_keys("bridge", section,
                  {"lambda", "N", "a", "b", "K", "tail_tolerance", "delta",
                   "covariance_pairs"},
                  {"lambda", "N"})
    lam = _number("bridge", section, "lambda")
    if lam < 0:
        raise ConfigError("'bridge.lambda' must be >= 0", field="bridge.lambda")
    n = _number("bridge", section, "N", minimum=1, integer=True)
    a = _number("bridge", section, "a", 0, 0, True)
    b = _number("bridge", section, "b", 0, 0, True)
    k = _number("bridge", section, "K", None, 1, True)
    tol = _number("bridge", section, "tail_tolerance", 1e-8)
    from .model import make_spec

    try:
        spec = make_spec(step, potential, lam, n, a, b, k, tol)
    except PrewetError as exc:
        raise ConfigError(f"bridge section invalid: {exc}", field="bridge")
    return spec, section


def _build_sweep(cfg: dict, step, potential, seed: int) -> experiments.SweepConfig:
    section = cfg.get("sweep")
    if section is None:
        raise ConfigError("missing section 'sweep'", field="sweep")
    _require_keys("sweep", section,
                  {"lambdas", "n_multiplier", "t_grid", "replicas"}, {"lambdas"})
    lambdas = section["lambdas"]
    if not isinstance(lambdas, list) or not lambdas:
        raise ConfigError("'sweep.lambdas' must be a non-empty list",
                          field="sweep.lambdas")
    kwargs = dict(lambdas=tuple(float(l) for l in lambdas), potential=potential,
                  step=step, seed=seed)
    if "n_multiplier" in section:
        kwargs["n_multiplier"] = _number("sweep", section, "n_multiplier", minimum=1)
    if "t_grid" in section:
        kwargs["t_grid"] = tuple(float(t) for t in section["t_grid"])
    if "replicas" in section:
        kwargs["replicas"] = _number("sweep", section, "replicas", minimum=1,
                                     integer=True)
    try:
        return experiments.SweepConfig(**kwargs)
    except PrewetError as exc:
        raise ConfigError(f"sweep section invalid: {exc}", field="sweep")


# ---------------------------------------------------------------------------
# output helpers


class RunContext:
    def __init__(self, command: str, cfg: dict, out: Path, seed: int,
                 jobs: int, quiet: bool):
        self.command = command
        self.cfg = cfg
        self.out = out
        self.seed = seed
        self.jobs = max(1, jobs)
        self.quiet = quiet
        canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
        self.config_sha = hashlib.sha256(canonical.encode()).hexdigest()
        self.t0 = time.time()

    def say(self, msg: str) -> None:
        if not self.quiet:
            print(msg)

    def meta_lines(self) -> list[str]:
        return [
            f"# prewet {__version__}",
            f"# command={self.command}",
            f"# config_sha256={self.config_sha}",
            f"# seed={self.seed}",
        ]

    def write_csv(self, name: str, header: str, rows) -> Path:
        path = self.out / name
        with open(path, "w", newline="\n") as fh:
            for line in self.meta_lines():
                fh.write(line + "\n")
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(_cell(v) for v in row) + "\n")
        self.say(f"wrote {path}")
        return path

    def write_summary(self, results: dict, name: str = "summary.json") -> Path:
        payload = {
            "tool": "prewet",
            "version": __version__,
            "command": self.command,
            "config_sha256": self.config_sha,
            "seed": self.seed,
            "results": results,
        }
        path = self.out / name
        with open(path, "w") as fh:
            json.dump(_jsonable(payload), fh, indent=2, sort_keys=True,
                      allow_nan=False)
            fh.write("\n")
        self.say(f"wrote {path}")
        return path

    def write_run_meta(self) -> None:
        # Wall clock lives here, outside the byte-for-byte contract.
        path = self.out / "run_meta.json"
        with open(path, "w") as fh:
            json.dump({"command": self.command, "wall_clock_s":
                       round(time.time() - self.t0, 3),
                       "unix_time": time.time()}, fh, indent=2)
            fh.write("\n")

    def pool_map(self, fn, items):
        items = list(items)
        if self.jobs == 1 or len(items) <= 1:
            return [fn(it) for it in items]
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            return list(pool.map(fn, items))


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return CSV_FLOAT(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _fit_dict(fit: experiments.FitResult) -> dict:
    return {
        "exponent": fit.exponent,
        "stderr": fit.stderr,
        "r_squared": fit.r_squared,
        "points": [list(p) for p in fit.points],
        "provenance": fit.provenance,
        "applicable": fit.applicable,
        "note": fit.note,
    }


# ---------------------------------------------------------------------------
# subcommands


def _run_exact(ctx: RunContext) -> dict:
    step = _build_step(ctx.cfg)
    potential = _build_potential(ctx.cfg.get("potential", {"kind": "linear"}))
    spec, section = _build_bridge(ctx.cfg, step, potential)
    tables = build_tables_auto(spec)
    rows = []
    for k in range(spec.N + 1):
        pmf = marginal(tables, k).pmf
        rows.extend((k, x, float(pmf[x])) for x in range(spec.K + 1))
    ctx.write_csv("marginals.csv", "k,x,p", rows)

    pairs = section.get("covariance_pairs") or [[spec.N // 3, 2 * spec.N // 3]]
    cov_rows = []
    for pair in pairs:
        i, j = int(pair[0]), int(pair[1])
        cov_rows.append((i, j, covariance(tables, i, j)))
    ctx.write_csv("covariance.csv", "i,j,cov", cov_rows)

    results = {
        "log_Z": tables.log_Z,
        "Z": tables.Z,
        "consistency_error": tables.consistency_error(),
        "spec": _spec_dict(spec),
        "covariances": {f"{i},{j}": c for i, j, c in cov_rows},
    }
    delta = section.get("delta")
    if delta is not None:
        stats = area_statistics(tables, float(delta),
                                H=None if spec.lam > 0 else 1.0)
        results["area"] = {
            "delta": float(delta),
            "mean_area": stats.mean_area,
            "p_upper": stats.p_upper,
            "p_lower": stats.p_lower,
            "upper_threshold": stats.upper_threshold,
            "lower_threshold": stats.lower_threshold,
            "bucket_size": stats.bucket_size,
        }
    return results


def _run_sample(ctx: RunContext) -> dict:
    step = _build_step(ctx.cfg)
    potential = _build_potential(ctx.cfg.get("potential", {"kind": "linear"}))
    spec, _ = _build_bridge(ctx.cfg, step, potential)
    section = ctx.cfg.get("sample", {})
    _require_keys("sample", section, {"count"}, set())
    count = _number("sample", section, "count", 100, 1, True)
    from .rng import stream

    tables = build_tables_auto(spec)
    paths = sample_batch(tables, stream(ctx.seed, 0), count)
    rows = []
    for s in range(count):
        rows.extend((s, k, int(paths[s, k])) for k in range(spec.N + 1))
    ctx.write_csv("paths.csv", "sample,k,x", rows)
    mid = spec.N // 2
    return {
        "count": count,
        "stream": 0,
        "mean_mid_sampled": float(paths[:, mid].mean()),
        "mean_mid_exact": marginal(tables, mid).mean,
        "spec": _spec_dict(spec),
    }


def _run_couple(ctx: RunContext) -> dict:
    step = _build_step(ctx.cfg)
    potential = _build_potential(ctx.cfg.get("potential", {"kind": "linear"}))
    sweep = _build_sweep(ctx.cfg, step, potential, ctx.seed)
    section = ctx.cfg.get("couple", {})
    _require_keys("couple", section, {"horizon_multipliers"}, set())
    mults = tuple(section.get("horizon_multipliers", (1, 2, 3, 4, 5, 6)))

    def point(args):
        idx, lam = args
        return experiments.coupling_point(sweep, lam, 17 + idx, mults)

    curves = ctx.pool_map(point, enumerate(sweep.lambdas))
    rows = []
    for c in curves:
        rows.extend((c.lam, n, p, e)
                    for n, p, e in zip(c.horizons, c.p_no_meet, c.stderr))
    ctx.write_csv("coupling.csv", "lambda,N,p_no_meet,stderr", rows)
    return {"curves": {repr(c.lam): {"H": c.H, "fit": _fit_dict(c.fit)}
                       for c in curves}}


def _run_scaling(ctx: RunContext) -> dict:
    step = _build_step(ctx.cfg)
    potential = _build_potential(ctx.cfg.get("potential", {"kind": "linear"}))
    sweep = _build_sweep(ctx.cfg, step, potential, ctx.seed)
    control_cfg = ctx.cfg.get("control_sweep")
    rows = []

    def point(args):
        sw, lam, label = args
        h, n, mean = experiments.mean_height_point(sw, lam)
        return (lam, h, label, mean, 0.0)

    tasks = [(sweep, lam, "mean_height_mid") for lam in sweep.lambdas]
    control = None
    if control_cfg is not None:
        _require_keys("control_sweep", control_cfg, {"lambdas", "potential"},
                      {"lambdas", "potential"})
        cpot = _build_potential(control_cfg["potential"], "control_sweep.potential")
        control = experiments.SweepConfig(
            lambdas=tuple(float(l) for l in control_cfg["lambdas"]),
            potential=cpot, step=step, n_multiplier=sweep.n_multiplier,
            seed=ctx.seed)
        tasks += [(control, lam, f"mean_height_mid[V={cpot.kind}]")
                  for lam in control.lambdas]
    results_rows = ctx.pool_map(point, tasks)
    rows.extend(results_rows)
    ctx.write_csv("scaling.csv", "lambda,H,quantity,value,stderr", rows)

    def fit_from(rows_subset):
        pts = [(math.log(r[0]), math.log(r[3])) for r in rows_subset]
        slope, _, stderr, r2 = experiments.ols(*zip(*pts))
        return experiments.FitResult(slope, stderr, r2, pts,
                                     provenance={"seed": ctx.seed})

    main_fit = fit_from(results_rows[:len(sweep.lambdas)])
    results = {"fits": {"linear": _fit_dict(main_fit)},
               "guide_exponent": _scaling_guide(potential)}
    if control is not None:
        results["fits"]["control"] = _fit_dict(
            fit_from(results_rows[len(sweep.lambdas):]))
        results["control_guide_exponent"] = _scaling_guide(control.potential)
    return results


def _scaling_guide(potential: Potential) -> float:
    """Height-scaling guide exponent from the closed form of solve_H.

    lam H^2 V(2H) = 1 with V(x) = x^beta gives H ~ lam^{-1/(2+beta)}; the
    guide follows the potential instead of being baked into rendering.
    """
    beta = math.log(potential(20.0) / potential(10.0)) / math.log(2.0)
    return -1.0 / (2.0 + beta)


def _run_tails(ctx: RunContext) -> dict:
    step = _build_step(ctx.cfg)
    potential = _build_potential(ctx.cfg.get("potential", {"kind": "linear"}))
    sweep = _build_sweep(ctx.cfg, step, potential, ctx.seed)
    section = ctx.cfg.get("tails", {})
    _require_keys("tails", section, {"lambdas", "k_headroom"}, set())
    lams = tuple(float(l) for l in section.get("lambdas", [sweep.lambdas[-1]]))
    headroom = _number("tails", section, "k_headroom", 6.0)

    def point(lam):
        h, n, curve = experiments.tail_curve(sweep, lam, headroom)
        return lam, h, n, curve

    points = ctx.pool_map(point, lams)
    rows = []
    fits = {}
    for lam, h, n, curve in points:
        for t, p in curve:
            rows.append((lam, h, f"tail_prob[T={t!r}]", p, 0.0))
        pts = [(math.log(t), math.log(-math.log(p))) for t, p in curve]
        slope, _, stderr, r2 = experiments.ols(*zip(*pts))
        fits[repr(lam)] = _fit_dict(experiments.FitResult(
            slope, stderr, r2, pts,
            provenance={"lam": lam, "N": n, "seed": ctx.seed}))
    ctx.write_csv("tails.csv", "lambda,H,quantity,value,stderr", rows)
    return {"fits": fits, "fit": fits[repr(lams[0])], "guide_exponent": 1.5}


def _run_area(ctx: RunContext) -> dict:
    step = _build_step(ctx.cfg)
    potential = _build_potential(ctx.cfg.get("potential", {"kind": "linear"}))
    sweep = _build_sweep(ctx.cfg, step, potential, ctx.seed)
    section = ctx.cfg.get("area", {})
    _require_keys("area", section, {"delta", "multipliers"}, {"delta"})
    delta = _number("area", section, "delta")
    if not (0.0 < delta <= 1.0):
        raise ConfigError("'area.delta' must lie in (0, 1]", field="area.delta")
    mults = tuple(section.get("multipliers", (10.0, 20.0, 30.0)))

    pts_per_lam = ctx.pool_map(
        lambda lam: experiments.area_points(sweep, lam, delta, mults),
        sweep.lambdas)
    rows = []
    summary = {}
    for lam, pts in zip(sweep.lambdas, pts_per_lam):
        for p in pts:
            rows.append((lam, p.H, f"mean_area[N={p.N}]", p.mean_area, 0.0))
            rows.append((lam, p.H, f"p_area_upper[N={p.N}]", p.p_upper, 0.0))
            rows.append((lam, p.H, f"p_area_lower[N={p.N}]", p.p_lower, 0.0))
        xs = [p.N / (p.H * p.H) for p in pts]
        up = experiments.ols(xs, [-experiments._safe_log(p.p_upper) for p in pts])[0]
        lo = experiments.ols(xs, [-experiments._safe_log(p.p_lower) for p in pts])[0]
        summary[repr(lam)] = {
            "upper_slope": up, "lower_slope": lo,
            "mean_area_over_HN": pts[-1].mean_area / (pts[-1].H * pts[-1].N),
        }
    ctx.write_csv("area.csv", "lambda,H,quantity,value,stderr", rows)
    return {"delta": delta, "per_lambda": summary}


def _run_correlations(ctx: RunContext) -> dict:
    step = _build_step(ctx.cfg)
    potential = _build_potential(ctx.cfg.get("potential", {"kind": "linear"}))
    sweep = _build_sweep(ctx.cfg, step, potential, ctx.seed)
    section = ctx.cfg.get("correlations", {})
    _require_keys("correlations", section, {"r_grid_h2"}, set())
    r_grid = tuple(section.get("r_grid_h2", (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)))

    records = ctx.pool_map(
        lambda lam: experiments.correlation_point(sweep, lam, r_grid),
        sweep.lambdas)
    rows = []
    summary = {}
    for rec in records:
        for r, cov in rec.covariances:
            rows.append((rec.lam, rec.H, f"cov[r={r}]", cov, 0.0))
        summary[repr(rec.lam)] = {
            "H": rec.H,
            "xi": rec.xi,
            "xi_gap": rec.xi_gap,
            "xi_over_h2": rec.xi / (rec.H * rec.H),
            "rate_h2": rec.fit.exponent * rec.H * rec.H,
            "fit": _fit_dict(rec.fit),
        }
    ctx.write_csv("correlations.csv", "lambda,H,quantity,value,stderr", rows)
    return {"per_lambda": summary}


def _run_relaxation(ctx: RunContext) -> dict:
    step = _build_step(ctx.cfg)
    potential = _build_potential(ctx.cfg.get("potential", {"kind": "linear"}))
    sweep = _build_sweep(ctx.cfg, step, potential, ctx.seed)
    section = ctx.cfg.get("relaxation", {})
    _require_keys("relaxation", section, {"n_multiplier", "tv_floor"}, set())
    mult = _number("relaxation", section, "n_multiplier", 8.0, 1)
    floor = _number("relaxation", section, "tv_floor", 1e-12)

    records = ctx.pool_map(
        lambda lam: experiments.relaxation_point(sweep, lam, mult, floor),
        sweep.lambdas)
    rows = []
    summary = {}
    for rec in records:
        rows.extend((rec.lam, int(n), tv) for n, tv in rec.rows)
        summary[repr(rec.lam)] = {
            "H": rec.H,
            "slope": rec.slope,
            "rate_h2": rec.slope * rec.H * rec.H,
            "fit": _fit_dict(rec.fit),
        }
    ctx.write_csv("tv.csv", "lambda,N,tv", rows)
    return {"per_lambda": summary}


def _run_moments(ctx: RunContext) -> dict:
    step = _build_step(ctx.cfg)
    potential = _build_potential(ctx.cfg.get("potential", {"kind": "linear"}))
    sweep = _build_sweep(ctx.cfg, step, potential, ctx.seed)
    section = ctx.cfg.get("moments", {})
    _require_keys("moments", section, {"p_values"}, set())
    p_values = tuple(float(p) for p in section.get("p_values", (1.25, 2.0, 2.5)))

    tasks = [(lam, p) for p in p_values for lam in sweep.lambdas]
    out = ctx.pool_map(lambda t: experiments.moment_point(sweep, t[0], t[1]),
                       tasks)
    rows = []
    bands = {}
    for (lam, p), (h, raw, ratio) in zip(tasks, out):
        rows.append((lam, h, f"moment[p={p!r}]", raw, 0.0))
        bands.setdefault(p, {})[lam] = ratio
    ctx.write_csv("moments.csv", "lambda,H,quantity,value,stderr", rows)
    summary = {}
    for p, ratios in bands.items():
        vals = list(ratios.values())
        summary[repr(p)] = {
            "ratios": {repr(l): v for l, v in ratios.items()},
            "band": max(vals) / min(vals),
        }
    return {"per_p": summary}


def _run_oracle_check(ctx: RunContext) -> dict:
    step = lazy_srw()
    checks: dict[str, dict] = {}
    rows = []

    fixture = json.loads(resources.files("prewet.data")
                         .joinpath("canonical_n6_oracle.json").read_text())
    from .model import make_spec

    spec = make_spec(step, linear_potential(), fixture["spec"]["lambda"],
                     fixture["spec"]["N"], fixture["spec"]["a"],
                     fixture["spec"]["b"], fixture["spec"]["K"],
                     fixture["spec"]["tail_tolerance"])
    law = oracle.enumerate_paths(spec)
    z_err = abs(law.Z / fixture["Z"] - 1.0)
    marg_err = 0.0
    for k_str, pmf in fixture["marginals"].items():
        m = law.marginal(int(k_str))
        for x_str, p in pmf.items():
            marg_err = max(marg_err, abs(m.get(int(x_str), 0.0) - p))
    cov_err = abs(law.covariance(2, 4) - fixture["cov_2_4"])
    fix_ok = z_err < 1e-12 and marg_err < 1e-12 and cov_err < 1e-12
    checks["canonical_fixture"] = {"passed": bool(fix_ok), "z_err": z_err,
                                   "marginal_err": marg_err, "cov_err": cov_err}

    worst = Fraction(0)
    cells = 0
    sigma2 = Fraction(1, 2)
    for m in range(2, 13):
        for d in range(-3, 4):
            try:
                bm = oracle.bridge_conditional_moments(step, m, d)
            except PrewetError:
                continue
            worst = max(worst, bm.mean_identity_error, bm.variance_identity_error)
            cells += 1
    checks["exchangeability"] = {"passed": worst == 0, "cells": cells,
                                 "max_residual": float(worst)}

    ok = True
    grid = 0
    try:
        for m in range(2, 15):
            for M in range(1, 7):
                oracle.etemadi_check(step, m, M)
                for k in range(1, m):
                    for d in range(-2, 3):
                        try:
                            oracle.one_point_chebyshev_check(step, m, d, k, M, 2)
                            grid += 1
                        except PrewetError as exc:
                            if "P(S" in str(exc) or "= 0" in str(exc):
                                continue
                            raise
    except PrewetError:
        ok = False
    checks["chebyshev_etemadi"] = {"passed": ok, "grid_points": grid}

    m0 = {d: oracle.llt_floor_m0(step, d) for d in range(-2, 3)}
    checks["llt_floor"] = {"passed": all(v <= 200 for v in m0.values()),
                           "m0": {str(k): v for k, v in m0.items()}}
    rows.extend((f"llt_m0[d={d}]", float(v)) for d, v in m0.items())

    zeta = oracle.small_droplet_zeta(step, range(2, 15), range(2, 7), range(-2, 3))
    checks["small_droplet"] = {"passed": zeta > 0, "zeta_emp": zeta}
    rows.append(("small_droplet_zeta", zeta))

    c_fit = oracle.max_tail_constant(step, range(4, 15), range(1, 6), range(-2, 3))
    rows.append(("max_tail_constant", c_fit))
    checks["max_tail_constant"] = {"passed": c_fit > 0, "c_fit": c_fit}

    var_ok = True
    for m in range(4, 15):
        for d in range(-2, 3):
            try:
                bm = oracle.bridge_conditional_moments(step, m, d)
            except PrewetError:
                continue
            if bm.xi1_second_moment > 4 * sigma2:
                var_ok = False
    checks["conditional_variance_4sigma2"] = {"passed": var_ok}

    rows.append(("checks_passed", float(sum(c["passed"] for c in checks.values()))))
    rows.append(("checks_total", float(len(checks))))
    ctx.write_csv("oracle.csv", "quantity,value", rows)
    all_ok = all(c["passed"] for c in checks.values())
    if not all_ok:
        raise PrewetError("oracle-check failed: "
                          + ", ".join(k for k, c in checks.items()
                                      if not c["passed"]))
    return {"checks": checks}


def _spec_dict(spec: BridgeSpec) -> dict:
    d = {
        "step": spec.step.name,
        "potential": spec.potential.kind,
        "lambda": spec.lam,
        "N": spec.N,
        "a": spec.a,
        "b": spec.b,
        "K": spec.K,
        "tail_tolerance": spec.tail_tolerance,
    }
    if spec.lam > 0:
        d["H1"] = solve_H(spec.potential, 1.0, spec.lam)
    return d


_COMMANDS = {
    "exact": _run_exact,
    "sample": _run_sample,
    "couple": _run_couple,
    "scaling": _run_scaling,
    "tails": _run_tails,
    "area": _run_area,
    "correlations": _run_correlations,
    "relaxation": _run_relaxation,
    "moments": _run_moments,
    "oracle-check": _run_oracle_check,
}

_KNOWN_TOP_KEYS = {"seed", "step", "potential", "bridge", "sweep", "sample",
                   "couple", "control_sweep", "tails", "area", "correlations",
                   "relaxation", "moments"}


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: line {exc.lineno}: {exc.msg}")
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    for key in cfg:
        if key not in _KNOWN_TOP_KEYS:
            raise ConfigError(f"unknown key '{key}'", field=key)
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="prewet",
        description="Exact computations and seeded simulation for area-tilted "
                    "walks pinned to a hard wall.")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", default=None, help="JSON config path")
    parser.add_argument("--out", default=None,
                        help="output directory (default $PREWET_OUT or ./prewet_out)")
    parser.add_argument("--seed", type=int, default=None,
                        help="64-bit master seed (overrides config)")
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="work-pool width for sweep points")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    try:
        cfg = _load_config(args.config)
        seed = args.seed
        if seed is None:
            seed = int(cfg.get("seed", 0))
        out = Path(args.out or os.environ.get("PREWET_OUT", "prewet_out"))
        out.mkdir(parents=True, exist_ok=True)
        ctx = RunContext(args.command, cfg, out, seed, args.jobs, args.quiet)
        results = _COMMANDS[args.command](ctx)
        ctx.write_summary(results)
        ctx.write_run_meta()
        return 0
    except ConfigError as exc:
        field = f" (field: {exc.field})" if exc.field else ""
        print(f"config error: {exc}{field}", file=sys.stderr)
        return 3
    except PrewetError as exc:
        sha = ""
        try:
            sha = f" config={ctx.config_sha[:12]}"
        except UnboundLocalError:
            pass
        print(f"error[{type(exc).__name__}]{sha}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
