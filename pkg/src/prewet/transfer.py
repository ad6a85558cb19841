"""Exact finite-volume computations by dynamic programming.

Forward/backward partition vectors over the truncated height lattice
{0..K}, with per-step max-normalization and a log-scale side accumulator:
one multiply-add pass per lattice step, no per-cell transcendentals, and
underflow is impossible by construction.  Interior sites 1..N-1 carry the
potential weight exp(-lambda V(y)); the endpoints carry none.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AreaDPBudget,
    IndexOrder,
    InvalidParameter,
    NullEvent,
    SpecMismatch,
    ThresholdBeyondTruncation,
    TruncationOverflow,
)
from .model import BridgeSpec, solve_H


def _kernel(spec: BridgeSpec):
    """(kern, smin) with kern[i] = p(smin + i), plus the potential weights."""
    step = spec.step
    smin = step.min_step
    kern = np.zeros(step.max_step - smin + 1)
    for s, p in zip(step.support, step.probs):
        kern[s - smin] = p
    heights = np.arange(spec.K + 1, dtype=float)
    vweight = np.exp(-spec.lam * np.array([spec.potential(x) for x in heights]))
    return kern, smin, vweight


def _push_forward(vec, kern, smin, K):
    """raw[y] = sum_x vec[x] p(y - x) restricted to y in [0, K]."""
    conv = np.convolve(vec, kern)
    return conv[-smin:-smin + K + 1]


def _push_backward(vec, kern, smax, K):
    """raw[x] = sum_y p(y - x) vec[y] restricted to x in [0, K]."""
    conv = np.convolve(vec, kern[::-1])
    return conv[smax:smax + K + 1]


@dataclass
class TransferTables:
    """Forward/backward partition vectors with log-scale accounting."""

    spec: BridgeSpec
    forward: np.ndarray       # (N+1, K+1), each row max-normalized
    backward: np.ndarray      # (N+1, K+1)
    log_scale_f: np.ndarray   # (N+1,)
    log_scale_b: np.ndarray   # (N+1,)

    @property
    def log_Z(self) -> float:
        return self.log_Z_at(0)

    def log_Z_at(self, k: int) -> float:
        s = float(self.forward[k] @ self.backward[k])
        if s <= 0.0:
            raise NullEvent("no admissible path for this spec")
        return math.log(s) + float(self.log_scale_f[k] + self.log_scale_b[k])

    @property
    def Z(self) -> float:
        return math.exp(self.log_Z)

    def consistency_error(self) -> float:
        """Max over k of |Z_k / Z_0 - 1|, the fundamental DP check."""
        ref = self.log_Z_at(0)
        worst = 0.0
        for k in range(self.spec.N + 1):
            worst = max(worst, abs(math.expm1(self.log_Z_at(k) - ref)))
        return worst


def build_tables(spec: BridgeSpec, check_truncation: bool = True) -> TransferTables:
    """Run the forward and backward recursions and validate truncation.

    Raises TruncationOverflow when any normalized marginal puts more than
    spec.tail_tolerance of its mass above K - (max positive jump); the caller
    should retry with a larger K (see build_tables_auto).
    """
    K, N = spec.K, spec.N
    kern, smin, vweight = _kernel(spec)
    smax = spec.step.max_step

    fwd = np.zeros((N + 1, K + 1))
    ls_f = np.zeros(N + 1)
    fwd[0, spec.a] = 1.0
    for k in range(N):
        raw = _push_forward(fwd[k], kern, smin, K)
        if k + 1 <= N - 1:
            raw = raw * vweight
        top = raw.max()
        if top <= 0.0:
            raise NullEvent(f"forward recursion died at step {k + 1}")
        fwd[k + 1] = raw / top
        ls_f[k + 1] = ls_f[k] + math.log(top)

    bwd = np.zeros((N + 1, K + 1))
    ls_b = np.zeros(N + 1)
    bwd[N, spec.b] = 1.0
    for k in range(N - 1, -1, -1):
        g = bwd[k + 1] * vweight if k + 1 <= N - 1 else bwd[k + 1]
        raw = _push_backward(g, kern, smax, K)
        top = raw.max()
        if top <= 0.0:
            raise NullEvent(f"backward recursion died at step {k}")
        bwd[k] = raw / top
        ls_b[k] = ls_b[k + 1] + math.log(top)

    tables = TransferTables(spec, fwd, bwd, ls_f, ls_b)
    if check_truncation:
        buffer = max(smax, 1)
        joint = fwd * bwd
        totals = joint.sum(axis=1)
        if np.any(totals <= 0.0):
            raise NullEvent("no admissible path for this spec")
        leak = joint[:, K - buffer + 1:].sum(axis=1) / totals
        if float(leak.max()) >= spec.tail_tolerance:
            raise TruncationOverflow(
                f"marginal mass {leak.max():.3e} above K - buffer at K={K}")
    return tables


def build_tables_auto(spec: BridgeSpec, retries: int = 3) -> TransferTables:
    """build_tables with automatic K doubling on truncation overflow."""
    for attempt in range(retries + 1):
        try:
            return build_tables(spec)
        except TruncationOverflow:
            if attempt == retries:
                raise
            spec = spec.with_(K=2 * spec.K)
    raise AssertionError("unreachable")


@dataclass
class HeightMarginal:
    """Law of X_k under the bridge measure, as a pmf over heights 0..K."""

    index: int
    pmf: np.ndarray

    @property
    def mean(self) -> float:
        return float(self.pmf @ np.arange(len(self.pmf)))

    def moment(self, power: float) -> float:
        return float(self.pmf @ np.arange(len(self.pmf), dtype=float) ** power)


def marginal(tables: TransferTables, k: int) -> HeightMarginal:
    if not (0 <= k <= tables.spec.N):
        raise InvalidParameter(f"marginal index {k} outside [0, N]")
    joint = tables.forward[k] * tables.backward[k]
    total = joint.sum()
    if total <= 0.0:
        raise NullEvent("empty marginal")
    return HeightMarginal(k, joint / total)


def tail_probability(tables: TransferTables, k: int, threshold: float) -> float:
    """P(X_k > threshold), exact within the truncation tolerance."""
    if threshold < 0:
        raise InvalidParameter("threshold must be >= 0")
    buffer = max(tables.spec.step.max_step, 1)
    if threshold > tables.spec.K - buffer:
        raise ThresholdBeyondTruncation(
            f"threshold {threshold:g} exceeds K - buffer = {tables.spec.K - buffer}")
    pmf = marginal(tables, k).pmf
    lo = int(math.floor(threshold)) + 1
    return float(pmf[lo:].sum())


def partition_ratio(spec_tilted: BridgeSpec, spec_base: BridgeSpec) -> float:
    """Z^{lambda_a} / Z^{lambda_b} for two specs differing only in lambda.

    With spec_base at lambda = 0 this is E^0[exp(-lambda sum V(X_j))], always
    in (0, 1] for lambda >= 0.
    """
    if spec_tilted.with_(lam=0.0) != spec_base.with_(lam=0.0):
        raise SpecMismatch("specs must differ only in lambda")
    log_a = build_tables(spec_tilted, check_truncation=False).log_Z
    log_b = build_tables(spec_base, check_truncation=False).log_Z
    return math.exp(log_a - log_b)


def _second_moment_profile(tables: TransferTables, i: int, js):
    """E[X_i X_j] for each j in ascending js, via one vector propagation."""
    spec = tables.spec
    kern, smin, vweight = _kernel(spec)
    heights = np.arange(spec.K + 1, dtype=float)
    log_z = tables.log_Z

    u = tables.forward[i] * heights
    ls_u = float(tables.log_scale_f[i])
    out = {}
    pos = i
    for j in sorted(js):
        while pos < j:
            raw = _push_forward(u, kern, smin, spec.K)
            raw = raw * vweight  # sites i+1..j are interior since j < N
            top = raw.max()
            if top <= 0.0:
                u = raw
                break
            u = raw / top
            ls_u += math.log(top)
            pos += 1
        num = float((u * heights) @ tables.backward[j])
        if num <= 0.0:
            out[j] = 0.0
        else:
            out[j] = math.exp(math.log(num) + ls_u
                              + float(tables.log_scale_b[j]) - log_z)
    return out


def covariance(tables: TransferTables, i: int, j: int) -> float:
    """Cov(X_i, X_j) via the three-segment decomposition.

    The middle kernel power is never materialized: the height-weighted
    forward vector is pushed j - i steps and recombined with the backward
    table, costing O((j - i) K W) time and O(K) memory.
    """
    if i > j:
        raise IndexOrder(f"need i <= j, got {i} > {j}")
    if not (0 < i and j < tables.spec.N):
        raise InvalidParameter("covariance needs 0 < i <= j < N")
    e_ij = _second_moment_profile(tables, i, [j])[j]
    return e_ij - marginal(tables, i).mean * marginal(tables, j).mean


@dataclass
class AreaStatistics:
    mean_area: float
    p_upper: float          # P(sum X_i >= H N / delta)
    p_lower: float          # P(sum X_i <= delta H N)
    upper_threshold: float
    lower_threshold: float
    bucket_size: int
    upper_err: float        # mass within one bucket of the upper threshold
    lower_err: float
    H: float


def area_statistics(tables: TransferTables, delta: float,
                    H: float | None = None, n_buckets: int = 4096,
                    budget_cells: float = 4e9) -> AreaStatistics:
    """Mean path area and the two Theorem-style area-event probabilities.

    The event probabilities come from a DP augmented with the accumulated
    area sum_{i=1..N} X_i, bucketed at granularity g = max(1, round(HN /
    n_buckets)).  For g = 1 the DP is exact; for g > 1 mass crossing a
    bucket boundary is split linearly (total mass and mean area stay exact)
    and the reported one-bucket error bars absorb the smearing.
    """
    spec = tables.spec
    if not (0.0 < delta <= 1.0):
        raise InvalidParameter("delta must lie in (0, 1]")
    if H is None:
        if spec.lam <= 0.0:
            raise InvalidParameter("area events need H; pass it explicitly at lambda = 0")
        H = solve_H(spec.potential, 1.0, spec.lam)

    mean_area = math.fsum(marginal(tables, k).mean for k in range(1, spec.N + 1))

    thr_hi = H * spec.N / delta
    thr_lo = delta * H * spec.N
    g = max(1, round(H * spec.N / n_buckets))
    top = int(math.ceil(thr_hi / g)) + 1  # sticky bucket for area >= top*g
    K, N = spec.K, spec.N
    if (K + 1) * (top + 1) * N > budget_cells:
        raise AreaDPBudget(
            f"area DP needs {(K + 1) * (top + 1) * N:.2e} cells, over budget")

    kern, smin, vweight = _kernel(spec)
    state = np.zeros((K + 1, top + 1))
    state[spec.a, 0] = 1.0
    shifts = [(y // g, (y % g) / g) for y in range(K + 1)]
    for k in range(1, N + 1):
        nxt = np.zeros_like(state)
        for s, ps in zip(spec.step.support, spec.step.probs):
            if s >= 0:
                nxt[s:] += ps * state[:K + 1 - s]
            else:
                nxt[:K + 1 + s] += ps * state[-s:]
        if k <= N - 1:
            nxt *= vweight[:, None]
        for y in range(1, K + 1):
            row = nxt[y].copy()  # nxt[y] is overwritten below; avoid aliasing
            ti, frac = shifts[y]
            nxt[y] = (1.0 - frac) * _shift_sticky(row, ti, top)
            if frac:
                nxt[y] += frac * _shift_sticky(row, ti + 1, top)
        m = nxt.max()
        if m <= 0.0:
            raise NullEvent("area DP died; spec admits no path")
        state = nxt / m

    dist = state[spec.b]
    total = dist.sum()
    if total <= 0.0:
        raise NullEvent("area DP reached no path ending at b")
    dist = dist / total

    hi_idx = int(math.ceil(thr_hi / g))
    lo_idx = int(math.floor(thr_lo / g))
    p_upper = float(dist[hi_idx:].sum())
    p_lower = float(dist[:lo_idx + 1].sum())
    if g > 1:
        # splitting jitter is a sum of N independent one-bucket Bernoullis;
        # 3 sigma of that is the honest uncertainty window at the thresholds
        w = int(math.ceil(1.5 * math.sqrt(N)))
        upper_err = float(dist[max(hi_idx - w, 0):hi_idx + w + 1].sum())
        lower_err = float(dist[max(lo_idx - w, 0):lo_idx + w + 1].sum())
    else:
        upper_err = lower_err = 0.0
    return AreaStatistics(mean_area, p_upper, p_lower, thr_hi, thr_lo, g,
                          upper_err, lower_err, H)


def _shift_sticky(row: np.ndarray, t: int, top: int) -> np.ndarray:
    """Shift a bucket row up by t, pooling anything at or past `top` there."""
    if t == 0:
        return row
    out = np.zeros_like(row)
    out[t:top] = row[:top - t]
    out[top] = row[top - t:].sum()
    return out


def max_height_probability(spec: BridgeSpec, cap: int) -> float:
    """Exact P(max_{0<=k<=N} X_k <= cap) under the bridge measure.

    Conditioning on staying below cap is the same computation as truncating
    the lattice there, so this is a ratio of two partition functions.
    """
    if cap < max(spec.a, spec.b):
        return 0.0
    log_small = build_tables(spec.with_(K=cap), check_truncation=False).log_Z
    log_full = build_tables(spec, check_truncation=False).log_Z
    return math.exp(log_small - log_full)
