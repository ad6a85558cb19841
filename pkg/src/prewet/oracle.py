"""Brute-force ground truth on small instances.

Everything here is computed by exhaustive enumeration or direct convolution,
deliberately sharing no code with the transfer/sampler engines it is used to
check.  Lazy-SRW computations run in exact rational arithmetic so the bridge
identity checks are equalities, not tolerance comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetExceeded, InvalidParameter, NullEvent, PrewetError
from .model import BridgeSpec, StepDistribution

PATH_BUDGET = 10 ** 8


# ---------------------------------------------------------------------------
# exact path law by enumeration


@dataclass
class ExactLaw:
    """Full path law of one small bridge problem."""

    spec: BridgeSpec
    paths: list[tuple[int, ...]]
    probs: list[float]
    Z: float

    def marginal(self, k: int) -> dict[int, float]:
        out: dict[int, float] = {}
        for path, p in zip(self.paths, self.probs):
            out[path[k]] = out.get(path[k], 0.0) + p
        return out

    def mean(self, k: int) -> float:
        return math.fsum(p * path[k] for path, p in zip(self.paths, self.probs))

    def covariance(self, i: int, j: int) -> float:
        eij = math.fsum(p * path[i] * path[j] for path, p in zip(self.paths, self.probs))
        return eij - self.mean(i) * self.mean(j)

    def area_probs(self, lo: float, hi: float):
        """(E[area], P(area >= hi), P(area <= lo)) with area = sum_{i=1..N} X_i."""
        areas = [sum(path[1:]) for path in self.paths]
        mean_area = math.fsum(p * s for p, s in zip(self.probs, areas))
        p_hi = math.fsum(p for p, s in zip(self.probs, areas) if s >= hi)
        p_lo = math.fsum(p for p, s in zip(self.probs, areas) if s <= lo)
        return mean_area, p_hi, p_lo

    def tail(self, k: int, threshold: float) -> float:
        return math.fsum(p for path, p in zip(self.paths, self.probs)
                         if path[k] > threshold)

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return dict(zip(self.paths, self.probs))


def enumerate_paths(spec: BridgeSpec) -> ExactLaw:
    """All non-negative paths of the bridge with their exact weights.

    Weight of a path is prod p(step) * exp(-lambda * sum_{i=1..N-1} V(X_i));
    interior sites only carry potential, matching the bridge measure.
    """
    if (spec.K + 1) ** max(spec.N - 1, 1) > PATH_BUDGET:
        raise BudgetExceeded("path space exceeds enumeration budget")
    step, pot, lam = spec.step, spec.potential, spec.lam
    max_up = step.max_step
    max_dn = -step.min_step
    vweight = [math.exp(-lam * pot(x)) for x in range(spec.K + 1)]

    paths: list[tuple[int, ...]] = []
    weights: list[float] = []

    def rec(prefix: list[int], weight: float) -> None:
        k = len(prefix) - 1
        x = prefix[-1]
        if k == spec.N:
            if x == spec.b:
                paths.append(tuple(prefix))
                weights.append(weight)
            return
        remaining = spec.N - k
        for s, ps in zip(step.support, step.probs):
            y = x + s
            if y < 0 or y > spec.K or ps == 0.0:
                continue
            if spec.b - y > (remaining - 1) * max_up or y - spec.b > (remaining - 1) * max_dn:
                continue
            w = weight * ps
            if k + 1 < spec.N:
                w *= vweight[y]
            prefix.append(y)
            rec(prefix, w)
            prefix.pop()

    rec([spec.a], 1.0)
    if not paths:
        raise NullEvent("no admissible path for this spec")
    z = math.fsum(weights)
    return ExactLaw(spec, paths, [w / z for w in weights], z)


# ---------------------------------------------------------------------------
# free-walk pmfs by direct convolution (rational or float)


def _rational_pmf(step: StepDistribution) -> dict[int, Fraction]:
    if step.exact_probs is None:
        raise InvalidParameter(f"step {step.name} carries no exact probabilities")
    return dict(zip(step.support, step.exact_probs))


@lru_cache(maxsize=None)
def _rational_walk_pmfs(step: StepDistribution, m: int) -> tuple[dict, ...]:
    """pmfs of S_0 .. S_m in exact rational arithmetic."""
    base = _rational_pmf(step)
    out = [{0: Fraction(1)}]
    for _ in range(m):
        prev = out[-1]
        nxt: dict[int, Fraction] = {}
        for s, ps in prev.items():
            for j, pj in base.items():
                nxt[s + j] = nxt.get(s + j, Fraction(0)) + ps * pj
        out.append(nxt)
    return tuple(out)


def _float_walk_pmf(step: StepDistribution, m: int):
    """(offset, probs array) of S_m in float arithmetic via numpy convolution."""
    kern = np.zeros(step.max_step - step.min_step + 1)
    for s, p in zip(step.support, step.probs):
        kern[s - step.min_step] = p
    acc = np.array([1.0])
    off = 0
    for _ in range(m):
        acc = np.convolve(acc, kern)
        off += step.min_step
    return off, acc


def point_pmf(step: StepDistribution, m: int, d: int,
              exact: bool = False):
    """P(S_m = d) for the unconstrained walk."""
    if exact:
        return _rational_walk_pmfs(step, m)[m].get(d, Fraction(0))
    off, acc = _float_walk_pmf(step, m)
    idx = d - off
    if idx < 0 or idx >= len(acc):
        return 0.0
    return float(acc[idx])


def _use_exact(step: StepDistribution) -> bool:
    return step.exact_probs is not None


# ---------------------------------------------------------------------------
# exchangeability identities for bridge increments


@dataclass
class BridgeMoments:
    """Exact conditional moments of S_k given S_m = d, for every k."""

    m: int
    d: int
    means: list
    variances: list
    xi1_mean: object
    xi1_variance: object
    xi1_second_moment: object
    mean_identity_error: object      # max_k |E(S_k|S_m=d) - k d / m|
    variance_identity_error: object  # max_k |Var(S_k|.) - k(m-k)/(m-1) Var(xi1|.)|


def bridge_conditional_moments(step: StepDistribution, m: int, d: int) -> BridgeMoments:
    """Conditional moments of the pinned free walk, with identity residuals.

    Uses Fraction arithmetic when the step law is rational, in which case the
    exchangeability identities hold with residual exactly zero.
    """
    if m < 1 or m > 14:
        raise InvalidParameter("bridge_conditional_moments supports 1 <= m <= 14")
    exact = _use_exact(step)
    if exact:
        pmfs = _rational_walk_pmfs(step, m)
        zero, one = Fraction(0), Fraction(1)
        base = _rational_pmf(step)
    else:
        pmfs = [dict(_iter_float_pmf(step, k)) for k in range(m + 1)]
        zero, one = 0.0, 1.0
        base = dict(zip(step.support, step.probs))
    pm_d = pmfs[m].get(d, zero)
    if pm_d == 0:
        raise NullEvent(f"P(S_{m} = {d}) = 0")

    means, variances = [], []
    for k in range(m + 1):
        e1 = zero
        e2 = zero
        for s, ps in pmfs[k].items():
            tailp = pmfs[m - k].get(d - s, zero)
            joint = ps * tailp
            e1 += s * joint
            e2 += s * s * joint
        e1 /= pm_d
        e2 /= pm_d
        means.append(e1)
        variances.append(e2 - e1 * e1)

    x1_e1 = zero
    x1_e2 = zero
    for j, pj in base.items():
        tailp = pmfs[m - 1].get(d - j, zero)
        joint = pj * tailp
        x1_e1 += j * joint
        x1_e2 += j * j * joint
    x1_e1 /= pm_d
    x1_e2 /= pm_d
    x1_var = x1_e2 - x1_e1 * x1_e1

    mean_err = max(abs(means[k] - _frac(k * d, m, exact)) for k in range(m + 1))
    if m > 1:
        var_err = max(
            abs(variances[k] - _frac(k * (m - k), m - 1, exact) * x1_var)
            for k in range(m + 1)
        )
    else:
        var_err = zero
    return BridgeMoments(m, d, means, variances, x1_e1, x1_var, x1_e2,
                         mean_err, var_err)


def _frac(num: int, den: int, exact: bool):
    return Fraction(num, den) if exact else num / den


def _iter_float_pmf(step: StepDistribution, m: int):
    off, acc = _float_walk_pmf(step, m)
    for i, p in enumerate(acc):
        if p > 0.0:
            yield off + i, float(p)


# ---------------------------------------------------------------------------
# maximum-restricted pmfs and the Appendix inequality suite


def _capped_pmf(step: StepDistribution, m: int, cap, exact: bool):
    """pmf of S_m over paths whose interior values S_1..S_{m-1} all stay <= cap.

    The final step is unrestricted: the events of interest only constrain the
    interior maximum.
    """
    if exact:
        base = _rational_pmf(step)
        cur: dict = {0: Fraction(1)}
    else:
        base = dict(zip(step.support, step.probs))
        cur = {0: 1.0}
    for k in range(1, m + 1):
        nxt: dict = {}
        for s, ps in cur.items():
            for j, pj in base.items():
                t = s + j
                if k < m and t > cap:
                    continue
                nxt[t] = nxt.get(t, type(ps)(0)) + ps * pj
        cur = nxt
    return cur


def conditional_max_tail(step: StepDistribution, m: int, d: int, M):
    """Exact P(max_{0<k<m} S_k > M | S_m = d)."""
    if m < 2:
        raise InvalidParameter("need m >= 2 for an interior maximum")
    exact = _use_exact(step)
    pm_d = point_pmf(step, m, d, exact=exact)
    if pm_d == 0:
        raise NullEvent(f"P(S_{m} = {d}) = 0")
    stay = _capped_pmf(step, m, M, exact).get(d, Fraction(0) if exact else 0.0)
    return 1 - stay / pm_d


def max_tail_constant(step: StepDistribution, ms: Sequence[int],
                      Ms: Sequence[int], ds: Sequence[int]):
    """Minimal c with exact tail <= c * m^{3/2} / M^2 across the whole grid."""
    best = 0.0
    for m in ms:
        for M in Ms:
            for d in ds:
                try:
                    p = conditional_max_tail(step, m, d, M)
                except NullEvent:
                    continue
                c = float(p) * M * M / m ** 1.5
                best = max(best, c)
    return best


@dataclass
class InequalityCheck:
    exact: object
    bound: object
    holds: bool


def one_point_chebyshev_check(step: StepDistribution, m: int, d: int, k: int,
                              M: int, D: int) -> InequalityCheck:
    """Exact joint P(S_k > M + D, S_m = d) against the m^2 sigma^4 / (4 M^4) bound.

    The full chain exact <= k(m-k) sigma^4 / M^4 <= m^2 sigma^4 / (4 M^4) is
    verified; a violation raises, since the bound is unconditional.
    """
    if abs(d) > D:
        raise InvalidParameter("need |d| <= D")
    if not (0 < k < m):
        raise InvalidParameter("need 0 < k < m")
    exact = _use_exact(step)
    if exact:
        pmfs = _rational_walk_pmfs(step, max(k, m - k))
        pk, ptail = pmfs[k], pmfs[m - k]
        joint = Fraction(0)
        sigma2 = _rational_variance(step)
    else:
        pk = dict(_iter_float_pmf(step, k))
        ptail = dict(_iter_float_pmf(step, m - k))
        joint = 0.0
        sigma2 = step.variance
    for s, ps in pk.items():
        if s > M + D:
            t = ptail.get(d - s)
            if t:
                joint += ps * t
    sharp = _frac(k * (m - k), 1, exact) * sigma2 * sigma2 / (M ** 4)
    loose = _frac(m * m, 4, exact) * sigma2 * sigma2 / (M ** 4)
    if not (joint <= sharp <= loose):
        raise PrewetError(
            f"one-point Chebyshev chain violated at m={m}, k={k}, d={d}, M={M}")
    return InequalityCheck(joint, loose, True)


def _rational_variance(step: StepDistribution) -> Fraction:
    pmf = _rational_pmf(step)
    mean = sum(k * p for k, p in pmf.items())
    return sum(k * k * p for k, p in pmf.items()) - mean * mean


def etemadi_check(step: StepDistribution, m: int, M: int) -> InequalityCheck:
    """Exact P(max_{0<k<m} S_k > M) against 3 max_k P(S_k > M/3)."""
    if m < 2:
        raise InvalidParameter("need m >= 2")
    exact = _use_exact(step)
    stay = _capped_pmf(step, m, M, exact)
    total = sum(stay.values())
    p_max = 1 - total
    third = Fraction(M, 3) if exact else M / 3.0
    worst = Fraction(0) if exact else 0.0
    if exact:
        pmfs = _rational_walk_pmfs(step, m)
        for k in range(1, m):
            tail = sum(p for s, p in pmfs[k].items() if s > third)
            worst = max(worst, tail)
    else:
        for k in range(1, m):
            tail = sum(p for s, p in _iter_float_pmf(step, k) if s > third)
            worst = max(worst, tail)
    bound = 3 * worst
    if p_max > bound:
        raise PrewetError(f"Etemadi bound violated at m={m}, M={M}")
    return InequalityCheck(p_max, bound, True)


# ---------------------------------------------------------------------------
# local-limit floor and the small droplet bound


def llt_floor(step: StepDistribution, m: int) -> float:
    """1 / (2 e sqrt(2 pi sigma^2 m)) — the local-limit floor used downstream."""
    return 1.0 / (2.0 * math.e * math.sqrt(2.0 * math.pi * step.variance * m))


def llt_floor_check(step: StepDistribution, m: int, d: int):
    """(exact P(S_m = d), floor) at a single m."""
    return point_pmf(step, m, d, exact=False), llt_floor(step, m)


def llt_floor_m0(step: StepDistribution, d: int, m_max: int = 200) -> int:
    """Smallest m0 with P(S_m = d) >= floor for all m in [m0, m_max].

    Only m with P(S_m = d) > 0 are considered; for the aperiodic catalog laws
    every m >= |d| is reachable so no parity adjustment is needed.
    """
    ok = []
    kern = np.zeros(step.max_step - step.min_step + 1)
    for s, p in zip(step.support, step.probs):
        kern[s - step.min_step] = p
    acc = np.array([1.0])
    off = 0
    for m in range(1, m_max + 1):
        acc = np.convolve(acc, kern)
        off += step.min_step
        idx = d - off
        p = float(acc[idx]) if 0 <= idx < len(acc) else 0.0
        ok.append(p > 0.0 and p >= llt_floor(step, m))
    for m0 in range(1, m_max + 1):
        if all(ok[m0 - 1:]):
            return m0
    raise PrewetError(f"no m0 <= {m_max} satisfies the local-limit floor")


def small_droplet_check(step: StepDistribution, m: int, M: int, d: int):
    """(exact conditional max tail, whether it is <= 1/3)."""
    p = conditional_max_tail(step, m, d, M)
    third = Fraction(1, 3) if isinstance(p, Fraction) else 1.0 / 3.0
    return p, p <= third


def small_droplet_zeta(step: StepDistribution, ms: Sequence[int],
                       Ms: Sequence[int], ds: Sequence[int]) -> float:
    """Largest zeta_emp such that m/M^2 <= zeta_emp implies tail <= 1/3 on the grid."""
    points = []
    for m in ms:
        for M in Ms:
            for d in ds:
                try:
                    p, ok = small_droplet_check(step, m, M, d)
                except NullEvent:
                    continue
                points.append((m / (M * M), ok))
    points.sort()
    zeta = 0.0
    for ratio, ok in points:
        if not ok:
            break
        zeta = ratio
    return zeta
