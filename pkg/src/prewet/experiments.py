"""Parameter sweeps and exponent fits at desk scale.

Exact-transfer quantities carry no Monte Carlo error; sampled quantities
report standard errors.  Fits are ordinary least squares on log-transformed
data with the R^2 reported; universal constants are never asserted, only
functional forms and exponents.

Each sweep is exposed both as a whole-grid function and as per-lambda point
functions; the CLI work pool maps the point functions over the grid and
merges results in grid order, so parallel runs stay deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import rng as rng_mod
from .errors import InsufficientGrid, InvalidParameter
from .model import (
    StepDistribution,
    Potential,
    lazy_srw,
    linear_potential,
    make_spec,
    solve_H,
)
from .sampler import couple_batch, sample_batch
from .spectral import build_operator, spectral_gap, tv_relaxation
from .transfer import (
    TransferTables,
    _second_moment_profile,
    area_statistics,
    build_tables_auto,
    marginal,
    tail_probability,
)


@dataclass(frozen=True)
class SweepConfig:
    """One experiment grid: tilt values, model ingredients, sizes, seeds."""

    lambdas: tuple[float, ...]
    potential: Potential = field(default_factory=linear_potential)
    step: StepDistribution = field(default_factory=lazy_srw)
    n_multiplier: float = 20.0      # N = round(n_multiplier * H^2)
    t_grid: tuple[float, ...] = tuple(float(t) for t in np.geomspace(2.0, 8.0, 7))
    replicas: int = 10 ** 5
    seed: int = 0

    def __post_init__(self):
        if any(l2 >= l1 for l1, l2 in zip(self.lambdas, self.lambdas[1:])):
            raise InvalidParameter("lambda grid must be strictly decreasing")
        if any(l < 0 for l in self.lambdas):
            raise InvalidParameter("lambda values must be non-negative")
        if self.n_multiplier < 1:
            raise InvalidParameter("n_multiplier must be >= 1")
        if self.replicas < 1:
            raise InvalidParameter("replicas must be >= 1")


def default_sweep(**overrides) -> SweepConfig:
    kwargs = dict(lambdas=tuple(np.geomspace(1e-2, 1e-4, 5)))
    kwargs.update(overrides)
    return SweepConfig(**kwargs)


def quadratic_control_sweep(**overrides) -> SweepConfig:
    """Control grid for V = x^2, chosen so H spans the same window (~4..22)
    as the default linear sweep."""
    from .model import power_potential

    kwargs = dict(lambdas=tuple(np.geomspace(1e-3, 1e-6, 5)),
                  potential=power_potential(2.0))
    kwargs.update(overrides)
    return SweepConfig(**kwargs)


@dataclass
class FitResult:
    """A fitted exponent with its OLS diagnostics and provenance."""

    exponent: float
    stderr: float
    r_squared: float
    points: list[tuple[float, float]]
    provenance: dict
    applicable: bool = True
    note: str = ""


def ols(xs: Sequence[float], ys: Sequence[float]):
    """(slope, intercept, slope stderr, R^2) of a plain least-squares line."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    n = len(x)
    if n < 2:
        raise InsufficientGrid("need at least two points to fit a line")
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    if sxx == 0.0:
        raise InsufficientGrid("degenerate x grid")
    slope = float(((x - xm) * (y - ym)).sum()) / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    ss_res = float((resid ** 2).sum())
    ss_tot = float(((y - ym) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    stderr = math.sqrt(ss_res / (n - 2) / sxx) if n > 2 else float("nan")
    return slope, intercept, stderr, r2


def _h1(sweep: SweepConfig, lam: float) -> float:
    return solve_H(sweep.potential, 1.0, lam)


def _bridge_size(sweep: SweepConfig, lam: float, multiplier: float | None = None):
    h = _h1(sweep, lam)
    mult = sweep.n_multiplier if multiplier is None else multiplier
    n = max(int(round(mult * h * h)), 4)
    return h, n


def _mid_tables(sweep: SweepConfig, lam: float,
                k_headroom: float = 0.0) -> tuple[float, TransferTables]:
    h, n = _bridge_size(sweep, lam)
    spec = make_spec(sweep.step, sweep.potential, lam, n)
    if k_headroom:
        spec = spec.with_(K=spec.K + int(math.ceil(k_headroom * h)))
    return h, build_tables_auto(spec)


# ---------------------------------------------------------------------------
# per-lambda point computations


def mean_height_point(sweep: SweepConfig, lam: float):
    """(H, N, E[X_{N/2}]) for one grid point."""
    h, tables = _mid_tables(sweep, lam)
    return h, tables.spec.N, marginal(tables, tables.spec.N // 2).mean


def tail_curve(sweep: SweepConfig, lam: float, k_headroom: float = 6.0):
    """(H, N, [(T, P(X_{N/2} > T H))]) for one grid point.

    The lattice is extended k_headroom * H above the largest threshold so
    truncation cannot distort the smallest tail probabilities.
    """
    h, n = _bridge_size(sweep, lam)
    spec = make_spec(sweep.step, sweep.potential, lam, n)
    need = int(math.ceil((max(sweep.t_grid) + k_headroom) * h)) \
        + sweep.step.max_step
    if need > spec.K:
        spec = spec.with_(K=need)
    tables = build_tables_auto(spec)
    mid = n // 2
    curve = [(t, tail_probability(tables, mid, t * h)) for t in sweep.t_grid]
    return h, n, curve


@dataclass
class AreaLawPoint:
    lam: float
    H: float
    N: int
    mean_area: float
    p_upper: float
    p_lower: float


def area_points(sweep: SweepConfig, lam: float, delta: float,
                multipliers: Sequence[float]) -> list[AreaLawPoint]:
    pts = []
    for mult in multipliers:
        h, n = _bridge_size(sweep, lam, mult)
        spec = make_spec(sweep.step, sweep.potential, lam, n)
        tables = build_tables_auto(spec)
        stats = area_statistics(tables, delta, H=h)
        pts.append(AreaLawPoint(lam, h, n, stats.mean_area,
                                stats.p_upper, stats.p_lower))
    return pts


@dataclass
class CorrelationRecord:
    lam: float
    H: float
    xi: float                 # fitted correlation length, lattice steps
    xi_gap: float             # spectral prediction 1 / (-log(1 - gap))
    fit: FitResult
    covariances: list[tuple[int, float]]   # (r, Cov(X_i, X_{i+r}))


def correlation_point(sweep: SweepConfig, lam: float,
                      r_grid_h2: Sequence[float] = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0),
                      ) -> CorrelationRecord:
    """Mid-bulk covariance decay at one lambda, cross-checked against the gap."""
    h, tables = _mid_tables(sweep, lam)
    n = tables.spec.N
    h2 = h * h
    rs = sorted({max(1, int(round(f * h2))) for f in r_grid_h2})
    i = n // 2 - int(round(max(rs) / 2))
    moments = _second_moment_profile(tables, i, [i + r for r in rs])
    mi = marginal(tables, i).mean
    covs, points = [], []
    for r in rs:
        cov = moments[i + r] - mi * marginal(tables, i + r).mean
        covs.append((r, cov))
        if cov > 0.0:
            points.append((float(r), math.log(cov)))
    slope, _, stderr, r2 = ols(*zip(*points))
    fit = FitResult(slope, stderr, r2, points,
                    provenance=_prov(sweep, quantity="cov_decay", lam=lam, N=n))
    op = build_operator(tables.spec)
    gap = spectral_gap(op)
    xi_gap = 1.0 / (-math.log1p(-gap))
    return CorrelationRecord(lam, h, -1.0 / slope, xi_gap, fit, covs)


@dataclass
class RelaxationRecord:
    lam: float
    H: float
    slope: float              # d log TV / dN on the tail half
    fit: FitResult
    rows: np.ndarray          # (N, tv) pairs


def relaxation_point(sweep: SweepConfig, lam: float, n_multiplier: float = 8.0,
                     tv_floor: float = 1e-12) -> RelaxationRecord:
    """TV decay of the kernel iterates from height 0, fitted on the tail half."""
    h, _ = _bridge_size(sweep, lam)
    spec = make_spec(sweep.step, sweep.potential, lam, N=4)
    op = build_operator(spec)
    n_max = max(int(round(n_multiplier * h * h)), 8)
    rows = tv_relaxation(op, 0, n_max)
    usable = rows[rows[:, 1] > tv_floor]
    tail = usable[len(usable) // 2:]
    points = [(float(n), math.log(tv)) for n, tv in tail]
    slope, _, stderr, r2 = ols(*zip(*points))
    fit = FitResult(slope, stderr, r2, points,
                    provenance=_prov(sweep, quantity="tv_decay", lam=lam, N=n_max))
    return RelaxationRecord(lam, h, slope, fit, rows)


def moment_point(sweep: SweepConfig, lam: float, p: float):
    """(H, E[X_{N/2}^{2p}], E / H^{2p+1}) at one lambda."""
    h, tables = _mid_tables(sweep, lam)
    m = marginal(tables, tables.spec.N // 2).moment(2.0 * p)
    return h, m, m / h ** (2.0 * p + 1.0)


@dataclass
class CouplingCurve:
    lam: float
    H: float
    horizons: list[int]
    p_no_meet: list[float]
    stderr: list[float]
    fit: FitResult            # log p_no_meet vs N / H^2


def coupling_point(sweep: SweepConfig, lam: float, stream_id: int,
                   horizon_multipliers: Sequence[float] = (1, 2, 3, 4, 5, 6),
                   ) -> CouplingCurve:
    """No-meet decay of two independent chains started at heights 0 and floor(H)."""
    h, _ = _bridge_size(sweep, lam)
    h2 = h * h
    horizons = sorted({max(1, int(round(f * h2))) for f in horizon_multipliers})
    spec = make_spec(sweep.step, sweep.potential, lam, N=4)
    gen = rng_mod.stream(sweep.seed, stream_id)
    times = couple_batch(spec, gen, horizons[-1], sweep.replicas,
                         a_x=0, a_y=int(h))
    ps, errs, points = [], [], []
    for n in horizons:
        no_meet = float(np.mean((times < 0) | (times > n)))
        ps.append(no_meet)
        errs.append(math.sqrt(max(no_meet * (1 - no_meet), 1e-12) / sweep.replicas))
        if no_meet > 0.0:
            points.append((n / h2, math.log(no_meet)))
    slope, _, stderr, r2 = ols(*zip(*points))
    fit = FitResult(slope, stderr, r2, points,
                    provenance=_prov(sweep, quantity="coupling", lam=lam,
                                     stream=stream_id))
    return CouplingCurve(lam, h, horizons, ps, errs, fit)


@dataclass
class MaxFloorCurve:
    lam: float
    H: float
    sizes: list[int]
    p_below: list[float]
    stderr: list[float]
    fit: FitResult            # log P(max <= delta H) vs N


def max_floor_point(sweep: SweepConfig, lam: float, delta: float,
                    stream_id: int,
                    multipliers: Sequence[float] = (1.0, 2.0, 3.0, 4.0),
                    ) -> MaxFloorCurve:
    """Sampled decay of P(max_k X_k <= delta H1) in N at one lambda."""
    h, _ = _bridge_size(sweep, lam)
    cap = math.floor(delta * h)
    sizes, ps, errs, points = [], [], [], []
    gen = rng_mod.stream(sweep.seed, stream_id)
    for mult in multipliers:
        _, n = _bridge_size(sweep, lam, mult)
        spec = make_spec(sweep.step, sweep.potential, lam, n)
        tables = build_tables_auto(spec)
        paths = sample_batch(tables, gen, sweep.replicas)
        hits = float(np.mean(paths.max(axis=1) <= cap))
        sizes.append(n)
        ps.append(hits)
        errs.append(math.sqrt(max(hits * (1 - hits), 1e-12) / sweep.replicas))
        if hits > 0.0:
            points.append((float(n), math.log(hits)))
    slope, _, stderr, r2 = ols(*zip(*points))
    fit = FitResult(slope, stderr, r2, points,
                    provenance=_prov(sweep, quantity="max_floor", lam=lam,
                                     delta=delta, stream=stream_id))
    return MaxFloorCurve(lam, h, sizes, ps, errs, fit)


# ---------------------------------------------------------------------------
# whole-grid sweeps


def height_scaling(sweep: SweepConfig) -> FitResult:
    """Slope of log E[X_{N/2}] against log lambda; -1/3 for the linear potential."""
    if len(sweep.lambdas) < 4:
        raise InsufficientGrid("height scaling needs at least 4 lambda points")
    points = []
    for lam in sweep.lambdas:
        _, _, mean_mid = mean_height_point(sweep, lam)
        points.append((math.log(lam), math.log(mean_mid)))
    slope, _, stderr, r2 = ols(*zip(*points))
    return FitResult(slope, stderr, r2, points,
                     provenance=_prov(sweep, quantity="mean_height_mid"))


def tail_exponent(sweep: SweepConfig, lam: Optional[float] = None,
                  k_headroom: float = 6.0) -> FitResult:
    """Slope of log(-log P(X_{N/2} > T H1)) vs log T; the 3/2 law."""
    if lam is None:
        lam = sweep.lambdas[-1]
    if lam == 0.0:
        return FitResult(float("nan"), float("nan"), float("nan"), [],
                         provenance=_prov(sweep, quantity="tail_exponent", lam=0.0),
                         applicable=False,
                         note="delocalized control: no stretched-exponential regime")
    h, n, curve = tail_curve(sweep, lam, k_headroom)
    points = [(math.log(t), math.log(-math.log(p))) for t, p in curve]
    slope, _, stderr, r2 = ols(*zip(*points))
    return FitResult(slope, stderr, r2, points,
                     provenance=_prov(sweep, quantity="tail_exponent", lam=lam,
                                      N=n))


@dataclass
class AreaLawReport:
    delta: float
    points: list[AreaLawPoint]
    upper_slopes: dict[float, float]   # per-lambda slope of -log p_upper vs N/H^2
    lower_slopes: dict[float, float]
    mean_area_ratio: dict[float, float]  # E[area] / (H N)


def area_law(sweep: SweepConfig, delta: float,
             multipliers: Sequence[float] = (10.0, 20.0, 30.0)) -> AreaLawReport:
    """Area-event decay in N/H^2 at fixed delta, per lambda."""
    points: list[AreaLawPoint] = []
    upper_slopes, lower_slopes, ratios = {}, {}, {}
    for lam in sweep.lambdas:
        pts = area_points(sweep, lam, delta, multipliers)
        points.extend(pts)
        xs = [p.N / (p.H * p.H) for p in pts]
        upper_slopes[lam] = ols(xs, [-_safe_log(p.p_upper) for p in pts])[0]
        lower_slopes[lam] = ols(xs, [-_safe_log(p.p_lower) for p in pts])[0]
        last = pts[-1]
        ratios[lam] = last.mean_area / (last.H * last.N)
    return AreaLawReport(delta, points, upper_slopes, lower_slopes, ratios)


def _safe_log(p: float) -> float:
    return math.log(p) if p > 0.0 else math.log(5e-324)


@dataclass
class CorrelationReport:
    records: list[CorrelationRecord]

    def xi_over_h2(self) -> dict[float, float]:
        return {r.lam: r.xi / (r.H * r.H) for r in self.records}


def correlation_length(sweep: SweepConfig,
                       r_grid_h2: Sequence[float] = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0),
                       ) -> CorrelationReport:
    """Fit xi from mid-bulk covariance decay and cross-check the spectral gap."""
    return CorrelationReport(
        [correlation_point(sweep, lam, r_grid_h2) for lam in sweep.lambdas])


@dataclass
class RelaxationReport:
    records: list[RelaxationRecord]

    def slope_h2(self) -> dict[float, float]:
        return {r.lam: r.slope * r.H * r.H for r in self.records}


def relaxation(sweep: SweepConfig, n_multiplier: float = 8.0,
               tv_floor: float = 1e-12) -> RelaxationReport:
    return RelaxationReport(
        [relaxation_point(sweep, lam, n_multiplier, tv_floor)
         for lam in sweep.lambdas])


@dataclass
class MomentReport:
    p: float
    ratios: dict[float, float]   # lambda -> E[X^{2p}] / H^{2p+1}
    raw: dict[float, float]      # lambda -> E[X^{2p}]

    @property
    def band(self) -> float:
        vals = list(self.ratios.values())
        return max(vals) / min(vals)


def moment_scaling(sweep: SweepConfig, p: float) -> MomentReport:
    """E[X_{N/2}^{2p}] / H^{2p+1} across the grid; bounded iff the moment law holds."""
    if not (1.0 < p < 21.0 / 8.0):
        raise InvalidParameter("moment order must satisfy 1 < p < 21/8")
    ratios, raw = {}, {}
    for lam in sweep.lambdas:
        _, m, ratio = moment_point(sweep, lam, p)
        ratios[lam] = ratio
        raw[lam] = m
    return MomentReport(p, ratios, raw)


def moments_default_sweep(**overrides) -> SweepConfig:
    """Three-point small-lambda grid used for the moment-bound checks."""
    kwargs = dict(lambdas=tuple(np.geomspace(1e-3, 1e-4, 3)))
    kwargs.update(overrides)
    return SweepConfig(**kwargs)


def coupling_decay(sweep: SweepConfig,
                   horizon_multipliers: Sequence[float] = (1, 2, 3, 4, 5, 6),
                   stream: int = 17) -> list[CouplingCurve]:
    return [coupling_point(sweep, lam, stream + i, horizon_multipliers)
            for i, lam in enumerate(sweep.lambdas)]


def max_height_floor(sweep: SweepConfig, delta: float,
                     multipliers: Sequence[float] = (1.0, 2.0, 3.0, 4.0),
                     stream: int = 29) -> list[MaxFloorCurve]:
    return [max_floor_point(sweep, lam, delta, stream + i, multipliers)
            for i, lam in enumerate(sweep.lambdas)]


def _prov(sweep: SweepConfig, **extra) -> dict:
    out = {
        "lambdas": list(sweep.lambdas),
        "potential": sweep.potential.kind,
        "step": sweep.step.name,
        "n_multiplier": sweep.n_multiplier,
        "seed": sweep.seed,
    }
    out.update(extra)
    return out
