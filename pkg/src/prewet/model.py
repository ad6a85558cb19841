"""Step distributions, self-potentials, and the characteristic height scale.

The model is a zero-mean integer random walk on the non-negative half-line
whose paths are reweighted by exp(-lambda * sum V(X_i)) over interior sites.
This module owns the primitive ingredients: validated step laws, convex
potentials with a growth certificate, the finite-volume problem description,
and the scale H solving lambda * H^2 * V(2*gamma*H) = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .errors import (
    BracketFailure,
    EmptySupport,
    InvalidParameter,
    NonFiniteObjective,
)

_MEAN_TOL = 1e-12
_PROB_TOL = 1e-12


def _convolve_pmf(sup_a, pr_a, sup_b, pr_b):
    """Convolution of two integer-support pmfs given as (support, probs) lists."""
    lo = sup_a[0] + sup_b[0]
    hi = sup_a[-1] + sup_b[-1]
    out = [0.0] * (hi - lo + 1)
    for sa, pa in zip(sup_a, pr_a):
        if pa == 0.0:
            continue
        for sb, pb in zip(sup_b, pr_b):
            out[sa + sb - lo] += pa * pb
    return list(range(lo, hi + 1)), out


@dataclass(frozen=True)
class StepDistribution:
    """Integer jump law with zero mean, finite variance, strict aperiodicity.

    `aperiodicity_constant` is the smallest verified A such that the n-step
    law puts positive mass on {-1, 0, 1} for every n >= A (checked by
    explicit convolution on a window of exponents).
    """

    support: tuple[int, ...]
    probs: tuple[float, ...]
    mean: float
    variance: float
    aperiodicity_constant: int
    name: str = "custom"
    # Exact rational probabilities, populated for catalog entries that have
    # them; the oracle module switches to Fraction arithmetic when present.
    exact_probs: Optional[tuple[Fraction, ...]] = None

    @classmethod
    def from_weights(cls, support: Sequence[int], weights: Sequence[float],
                     name: str = "custom",
                     exact: Optional[Sequence[Fraction]] = None) -> "StepDistribution":
        if len(support) != len(weights) or not support:
            raise InvalidParameter("support and weights must be non-empty and aligned")
        if any(w < 0 for w in weights):
            raise InvalidParameter("negative weight in step distribution")
        order = sorted(range(len(support)), key=lambda i: support[i])
        sup = tuple(int(support[i]) for i in order)
        if len(set(sup)) != len(sup):
            raise InvalidParameter("duplicate entries in step support")
        total = math.fsum(weights)
        if total <= 0:
            raise InvalidParameter("zero total weight")
        pr = tuple(weights[i] / total for i in order)
        mean = math.fsum(s * p for s, p in zip(sup, pr))
        if abs(mean) > _MEAN_TOL:
            raise InvalidParameter(f"step law must have zero mean, got {mean:.3e}")
        var = math.fsum(s * s * p for s, p in zip(sup, pr)) - mean * mean
        if not math.isfinite(var) or var <= 0:
            raise InvalidParameter("step variance must be finite and positive")
        a_const = _verify_aperiodicity(sup, pr)
        ex = None
        if exact is not None:
            ex = tuple(exact[i] for i in order)
            ex_total = sum(ex)
            ex = tuple(e / ex_total for e in ex)
        return cls(sup, pr, mean, var, a_const, name=name, exact_probs=ex)

    def prob(self, k: int) -> float:
        try:
            return self.probs[self.support.index(k)]
        except ValueError:
            return 0.0

    @property
    def min_step(self) -> int:
        return self.support[0]

    @property
    def max_step(self) -> int:
        return self.support[-1]

    def n_step_law(self, n: int):
        """(support, probs) of the n-fold convolution; n >= 1."""
        sup, pr = list(self.support), list(self.probs)
        acc_s, acc_p = [0], [1.0]
        for _ in range(n):
            acc_s, acc_p = _convolve_pmf(acc_s, acc_p, sup, pr)
        return acc_s, acc_p


def _verify_aperiodicity(sup, pr, max_a: int = 32, window: int = 6) -> int:
    """Smallest A with min{p^n(-1), p^n(0), p^n(1)} > 0 on n in [A, A+window]."""
    acc_s, acc_p = [0], [1.0]
    hits = []  # hits[i] == True iff the (i+1)-step law charges all of {-1,0,1}
    for _ in range(max_a + window):
        acc_s, acc_p = _convolve_pmf(acc_s, acc_p, list(sup), list(pr))
        lo = acc_s[0]
        ok = all(
            lo <= k <= acc_s[-1] and acc_p[k - lo] > 0.0 for k in (-1, 0, 1)
        )
        hits.append(ok)
    for a in range(1, max_a + 1):
        if all(hits[n - 1] for n in range(a, a + window + 1)):
            return a
    raise InvalidParameter("step law is not strictly aperiodic (no valid A <= 32)")


@dataclass(frozen=True)
class Potential:
    """Convex increasing self-potential with V(0) = 0.

    `growth` certifies bounded growth at infinity: growth(alpha) is an upper
    bound for limsup_x V(alpha*x)/V(x).  Built-ins carry the analytic
    certificate; table potentials get a sampled-ratio bound.
    """

    kind: str
    evaluate: Callable[[float], float]
    growth: Callable[[float], float]

    def __call__(self, x: float) -> float:
        return self.evaluate(x)

    def check_shape(self, grid: Optional[Sequence[float]] = None) -> None:
        """Validate V(0)=0, monotonicity, and midpoint convexity on a grid."""
        if grid is None:
            grid = [0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0, 34.0]
        if abs(self.evaluate(0.0)) > 1e-12:
            raise InvalidParameter("potential must vanish at 0")
        vals = [self.evaluate(x) for x in grid]
        for v in vals:
            if not math.isfinite(v) or v < 0:
                raise InvalidParameter("potential must be finite and non-negative")
        for (x0, v0), (x1, v1) in zip(zip(grid, vals), zip(grid[1:], vals[1:])):
            if v1 < v0 - 1e-12:
                raise InvalidParameter("potential must be non-decreasing")
        for i in range(len(grid) - 2):
            x, z = grid[i], grid[i + 2]
            mid = self.evaluate((x + z) / 2.0)
            if mid > (vals[i] + vals[i + 2]) / 2.0 + 1e-9:
                raise InvalidParameter("potential fails midpoint convexity")


def linear_potential() -> Potential:
    return Potential("linear", lambda x: float(x), lambda a: float(a))


def power_potential(beta: float) -> Potential:
    if beta < 1:
        raise InvalidParameter("power potential needs beta >= 1 for convexity")
    return Potential(f"power[{beta:g}]", lambda x, b=beta: float(x) ** b,
                     lambda a, b=beta: float(a) ** b)


def table_potential(values: Sequence[float]) -> Potential:
    """Convex potential from tabulated values at x = 0, 1, 2, ...

    Piecewise-linear between knots, extended with the last slope beyond the
    table (keeps convexity).  The growth certificate is a sampled ratio
    maximum, which is exact for piecewise-linear V.
    """
    vals = [float(v) for v in values]
    if len(vals) < 2:
        raise InvalidParameter("table potential needs at least two knots")

    def ev(x: float) -> float:
        if x <= 0:
            return vals[0]
        i = int(x)
        if i + 1 < len(vals):
            return vals[i] + (x - i) * (vals[i + 1] - vals[i])
        slope = vals[-1] - vals[-2]
        return vals[-1] + (x - (len(vals) - 1)) * slope

    def growth(alpha: float) -> float:
        xs = [0.25 * i for i in range(1, 8 * len(vals))]
        ratios = [ev(alpha * x) / ev(x) for x in xs if ev(x) > 0]
        if not ratios:
            raise InvalidParameter("table potential is identically zero")
        return max(ratios)

    pot = Potential("table", ev, growth)
    pot.check_shape(grid=[float(i) for i in range(len(vals))])
    return pot


@dataclass(frozen=True)
class BridgeSpec:
    """One finite-volume problem: step law, potential, tilt, box, truncation."""

    step: StepDistribution
    potential: Potential
    lam: float
    N: int
    a: int
    b: int
    K: int
    tail_tolerance: float = 1e-8

    def __post_init__(self):
        if self.lam < 0:
            raise InvalidParameter("lambda must be >= 0")
        if self.N < 1:
            raise InvalidParameter("N must be >= 1")
        if self.a < 0 or self.b < 0:
            raise InvalidParameter("boundary heights must be non-negative")
        if self.a > self.K or self.b > self.K:
            raise InvalidParameter("boundary heights must not exceed K")
        if not (0.0 < self.tail_tolerance <= 1e-6):
            raise InvalidParameter("tail_tolerance must lie in (0, 1e-6]")

    def with_(self, **changes) -> "BridgeSpec":
        return replace(self, **changes)


def default_truncation(step: StepDistribution, potential: Potential,
                       lam: float, a: int, b: int) -> int:
    """K = ceil(8 * H1) + max(a, b) + max positive jump.

    Point-height tails decay like exp(-c T^{3/2}) in units of H1, so mass
    above 8*H1 is negligible at any usable tail tolerance; build_tables
    doubles K automatically if the check disagrees.
    """
    if lam <= 0:
        raise InvalidParameter("default truncation needs lambda > 0; pass K explicitly")
    h1 = solve_H(potential, 1.0, lam)
    return int(math.ceil(8.0 * h1)) + max(a, b) + max(step.max_step, 1)


def make_spec(step: StepDistribution, potential: Potential, lam: float,
              N: int, a: int = 0, b: int = 0, K: Optional[int] = None,
              tail_tolerance: float = 1e-8) -> BridgeSpec:
    if K is None:
        K = default_truncation(step, potential, lam, a, b)
    return BridgeSpec(step, potential, lam, N, a, b, K, tail_tolerance)


def solve_H(potential: Potential, gamma: float, lam: float,
            rel_tol: float = 1e-10) -> float:
    """Unique H > 0 with lam * H^2 * V(2*gamma*H) = 1.

    The map H -> lam*H^2*V(2*gamma*H) is strictly increasing and unbounded
    for strictly increasing unbounded V, so bisection on a doubling bracket
    is exact and robust.
    """
    if lam <= 0 or gamma <= 0:
        raise InvalidParameter("solve_H needs lambda > 0 and gamma > 0")

    def objective(h: float) -> float:
        v = potential(2.0 * gamma * h)
        if not math.isfinite(v):
            raise NonFiniteObjective(f"potential not finite at {2.0 * gamma * h:g}")
        return lam * h * h * v - 1.0

    lo, hi = 1e-9, 1.0
    while objective(hi) < 0.0:
        hi *= 2.0
        if hi > 1e18:
            raise BracketFailure("no sign change below 1e18; potential is degenerate")
    if objective(lo) > 0.0:
        # Root below the default bracket: shrink toward zero.
        while objective(lo) > 0.0:
            lo /= 2.0
            if lo < 1e-300:
                raise BracketFailure("objective positive arbitrarily close to 0")
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if objective(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ConditionalStep:
    """Jump law of the wall-constrained walk from height x."""

    support: tuple[int, ...]
    probs: tuple[float, ...]
    mean: float
    variance: float


def conditional_step(step: StepDistribution, x: int) -> ConditionalStep:
    """p_x(k) = p(k) 1{k >= -x} / P(xi >= -x), with its first two moments."""
    if x < 0:
        raise InvalidParameter("height must be non-negative")
    pairs = [(k, p) for k, p in zip(step.support, step.probs) if k >= -x]
    mass = math.fsum(p for _, p in pairs)
    if mass <= 0.0:
        raise EmptySupport(f"no admissible jump from height {x}")
    sup = tuple(k for k, _ in pairs)
    pr = tuple(p / mass for _, p in pairs)
    mean = math.fsum(k * p for k, p in zip(sup, pr))
    var = math.fsum(k * k * p for k, p in zip(sup, pr)) - mean * mean
    return ConditionalStep(sup, pr, mean, var)


def lazy_srw() -> StepDistribution:
    """p(0) = 1/2, p(+-1) = 1/4; the canonical exactly-rational step law."""
    half, quarter = Fraction(1, 2), Fraction(1, 4)
    return StepDistribution.from_weights(
        [-1, 0, 1], [0.25, 0.5, 0.25], name="lazy_srw",
        exact=[quarter, half, quarter])


def geometric_step(q: float = 0.5, x_max: int = 30) -> StepDistribution:
    """Two-sided geometric p(x) proportional to q^|x|, truncated at |x| <= x_max.

    Symmetric truncation keeps the mean exactly zero, so no recentering shift
    is ever needed; if one were (|mean| > 1e-9) we widen the radius instead.
    """
    if not (0.0 < q < 1.0):
        raise InvalidParameter("geometric step needs q in (0, 1)")
    if x_max < 1:
        raise InvalidParameter("geometric step needs x_max >= 1")
    while True:
        sup = list(range(-x_max, x_max + 1))
        w = [q ** abs(k) for k in sup]
        mean = math.fsum(k * wi for k, wi in zip(sup, w)) / math.fsum(w)
        if abs(mean) <= 1e-9:
            return StepDistribution.from_weights(sup, w, name=f"geometric[q={q:g}]")
        x_max *= 2


def gaussian_step(s: float = 2.0, x_max: int = 20) -> StepDistribution:
    """Discretized centered Gaussian, p(x) proportional to exp(-x^2/2s^2)."""
    if s <= 0:
        raise InvalidParameter("gaussian step needs s > 0")
    if x_max < 1:
        raise InvalidParameter("gaussian step needs x_max >= 1")
    sup = list(range(-x_max, x_max + 1))
    w = [math.exp(-k * k / (2.0 * s * s)) for k in sup]
    return StepDistribution.from_weights(sup, w, name=f"gaussian[s={s:g}]")


def builtin_steps() -> dict[str, StepDistribution]:
    """Catalog of verified step laws keyed by name."""
    return {
        "lazy_srw": lazy_srw(),
        "geometric": geometric_step(),
        "gaussian": gaussian_step(),
    }


def builtin_potentials() -> dict[str, Callable[..., Potential]]:
    return {
        "linear": linear_potential,
        "power": power_potential,
        "table": table_potential,
    }
