"""Exact path sampling, independent coupling, and heat-bath MCMC."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidParameter
from .model import BridgeSpec
from .spectral import TransferOperator, build_operator
from .transfer import TransferTables, _kernel


@dataclass
class PathSample:
    """One bridge trajectory with the RNG provenance used to draw it."""

    heights: tuple[int, ...]
    spec: BridgeSpec
    seed_info: Optional[tuple[int, int]] = None
    trace: Optional[np.ndarray] = None

    def validate(self) -> None:
        spec = self.spec
        if self.heights[0] != spec.a or self.heights[-1] != spec.b:
            raise InvalidParameter("sample violates boundary conditions")
        support = set(spec.step.support)
        for x, y in zip(self.heights, self.heights[1:]):
            if y - x not in support:
                raise InvalidParameter(f"increment {y - x} outside step support")
            if not (0 <= y <= spec.K):
                raise InvalidParameter("sample leaves the height lattice")


def _conditional_rows(tables: TransferTables, k: int) -> np.ndarray:
    """Row-stochastic matrix of P(X_{k+1} = y | X_k = x) from the tables."""
    spec = tables.spec
    kern, smin, vweight = _kernel(spec)
    K = spec.K
    w = tables.backward[k + 1] * (vweight if k + 1 <= spec.N - 1 else 1.0)
    rows = np.zeros((K + 1, K + 1))
    for s, ps in zip(spec.step.support, spec.step.probs):
        ys = np.arange(max(0, s), min(K, K + s) + 1)
        rows[ys - s, ys] = ps * w[ys]
    totals = rows.sum(axis=1, keepdims=True)
    reachable = totals[:, 0] > 0.0
    rows[reachable] /= totals[reachable]
    return rows


def exact_sample(tables: TransferTables, rng: np.random.Generator,
                 seed_info: Optional[tuple[int, int]] = None) -> PathSample:
    """One exact draw from the bridge measure by backward sampling.

    X_{k+1} is drawn with probability proportional to
    p(y - X_k) e^{-lam V(y)} backward[k+1][y]; the chain can never dead-end
    because the backward table is positive along every reachable state.
    """
    path = sample_batch(tables, rng, 1)[0]
    return PathSample(tuple(int(x) for x in path), tables.spec, seed_info)


def sample_batch(tables: TransferTables, rng: np.random.Generator,
                 n: int) -> np.ndarray:
    """(n, N+1) array of independent exact bridge samples."""
    spec = tables.spec
    paths = np.empty((n, spec.N + 1), dtype=np.int64)
    paths[:, 0] = spec.a
    for k in range(spec.N):
        rows = _conditional_rows(tables, k)
        cum = np.cumsum(rows, axis=1)
        u = rng.random(n)
        here = cum[paths[:, k]]
        paths[:, k + 1] = (here < u[:, None]).sum(axis=1)
    return paths


@dataclass
class CouplingOutcome:
    """First meeting index of two independent trajectories, or None."""

    meet_time: Optional[int]
    paths: Optional[tuple[tuple[int, ...], tuple[int, ...]]] = None


def chain_transition_cumulative(op: TransferOperator) -> np.ndarray:
    """Cumulative rows of the positive-recurrent free-endpoint chain.

    The chain is the Doob transform of the kernel by its right eigenvector:
    P(x -> y) = K(x, y) phi(y) / (Lambda phi(x)), stationary for phi . psi.
    """
    spec = op.spec
    K = spec.K
    _, _, vweight = _kernel(spec)
    rows = np.zeros((K + 1, K + 1))
    for s, ps in zip(spec.step.support, spec.step.probs):
        ys = np.arange(max(0, s), min(K, K + s) + 1)
        rows[ys - s, ys] = ps * vweight[ys] * op.phi[ys]
    rows /= rows.sum(axis=1, keepdims=True)
    return np.cumsum(rows, axis=1)


def couple(spec: BridgeSpec, rng: np.random.Generator, horizon: int,
           a_x: Optional[int] = None, a_y: Optional[int] = None,
           op: Optional[TransferOperator] = None,
           keep_paths: bool = False) -> CouplingOutcome:
    """Run two independent free-endpoint chains and report their first meeting."""
    times, paths = _couple_many(spec, rng, horizon, 1, a_x, a_y, op,
                                keep_paths=keep_paths)
    t = int(times[0])
    return CouplingOutcome(None if t < 0 else t, paths)


def couple_batch(spec: BridgeSpec, rng: np.random.Generator, horizon: int,
                 replicas: int, a_x: Optional[int] = None,
                 a_y: Optional[int] = None,
                 op: Optional[TransferOperator] = None) -> np.ndarray:
    """Meeting times of `replicas` independent chain pairs; -1 means no meet."""
    times, _ = _couple_many(spec, rng, horizon, replicas, a_x, a_y, op)
    return times


def _couple_many(spec, rng, horizon, replicas, a_x, a_y, op, keep_paths=False):
    if op is None:
        op = build_operator(spec)
    cum = chain_transition_cumulative(op)
    ax = spec.a if a_x is None else a_x
    ay = spec.b if a_y is None else a_y
    x = np.full(replicas, ax, dtype=np.int64)
    y = np.full(replicas, ay, dtype=np.int64)
    times = np.full(replicas, -1, dtype=np.int64)
    times[x == y] = 0
    track_x, track_y = ([x.copy()], [y.copy()]) if keep_paths else (None, None)
    alive = times < 0
    for t in range(1, horizon + 1):
        if not alive.any() and not keep_paths:
            break
        x = _advance(cum, x, rng)
        y = _advance(cum, y, rng)
        met = alive & (x == y)
        times[met] = t
        alive &= ~met
        if keep_paths:
            track_x.append(x.copy())
            track_y.append(y.copy())
    paths = None
    if keep_paths:
        px = tuple(int(v[0]) for v in track_x)
        py = tuple(int(v[0]) for v in track_y)
        paths = (px, py)
    return times, paths


def _advance(cum: np.ndarray, state: np.ndarray,
             rng: np.random.Generator) -> np.ndarray:
    u = rng.random(state.shape[0])
    return (cum[state] < u[:, None]).sum(axis=1)


def _heatbath_half_sweep(path, sites, plook, smin, smax, vweight, K, rng):
    """Exact single-site heat-bath update of one checkerboard colour.

    Sites of one parity are conditionally independent given the other
    parity, so the whole colour updates in one vectorized draw.
    """
    left = path[sites - 1]
    right = path[sites + 1]
    offs = np.arange(smin, smax + 1)
    cand = left[:, None] + offs[None, :]
    ok = (cand >= 0) & (cand <= K)
    back = right[:, None] - cand
    ok &= (back >= smin) & (back <= smax)
    cand_c = np.clip(cand, 0, K)
    back_c = np.clip(back - smin, 0, smax - smin)
    w = np.where(ok, plook[np.clip(cand - left[:, None] - smin, 0, smax - smin)]
                 * plook[back_c] * vweight[cand_c], 0.0)
    cum = np.cumsum(w, axis=1)
    tot = cum[:, -1]
    u = rng.random(len(sites)) * tot
    idx = (cum < u[:, None]).sum(axis=1)
    path[sites] = cand_c[np.arange(len(sites)), idx]


def initial_bridge_path(spec: BridgeSpec) -> np.ndarray:
    """Feasible starting path: ramp to max(a, b), flat, ramp down."""
    support = set(spec.step.support)
    if not {-1, 0, 1} <= support:
        raise InvalidParameter("heat-bath initial path needs steps -1, 0, 1")
    m = max(spec.a, spec.b)
    i = np.arange(spec.N + 1)
    return np.minimum(np.minimum(spec.a + i, spec.b + (spec.N - i)),
                      np.full(spec.N + 1, m)).astype(np.int64)


def mcmc_heatbath(spec: BridgeSpec, sweeps: int, rng: np.random.Generator,
                  trace_site: Optional[int] = None,
                  seed_info: Optional[tuple[int, int]] = None) -> PathSample:
    """Heat-bath MCMC for the bridge measure, checkerboard site schedule.

    Every update draws from the exact conditional law proportional to
    p(x - X_{i-1}) p(X_{i+1} - x) e^{-lam V(x)}, so each half-sweep is in
    detailed balance with the target and the composed chain is stationary
    for it.  Intended as the large-N fallback when DP tables do not fit.
    """
    if spec.N < 2:
        raise InvalidParameter("heat-bath needs at least one interior site")
    path = initial_bridge_path(spec)
    step = spec.step
    smin, smax = step.min_step, step.max_step
    plook = np.zeros(smax - smin + 1)
    for s, p in zip(step.support, step.probs):
        plook[s - smin] = p
    _, _, vweight = _kernel(spec)
    odd = np.arange(1, spec.N, 2)
    even = np.arange(2, spec.N, 2)
    trace = np.empty(sweeps) if trace_site is not None else None
    for t in range(sweeps):
        _heatbath_half_sweep(path, odd, plook, smin, smax, vweight, spec.K, rng)
        if len(even):
            _heatbath_half_sweep(path, even, plook, smin, smax, vweight,
                                 spec.K, rng)
        if trace is not None:
            trace[t] = path[trace_site]
    return PathSample(tuple(int(v) for v in path), spec, seed_info, trace)


def site_conditional(spec: BridgeSpec, left: int, right: int):
    """(support, probs) of the single-site heat-bath law between two neighbours."""
    step = spec.step
    _, _, vweight = _kernel(spec)
    ys, ws = [], []
    for s, ps in zip(step.support, step.probs):
        y = left + s
        if not (0 <= y <= spec.K):
            continue
        p_back = step.prob(right - y)
        if p_back == 0.0:
            continue
        ys.append(y)
        ws.append(ps * p_back * vweight[y])
    total = math.fsum(ws)
    if total <= 0.0:
        raise InvalidParameter("no admissible height between the given neighbours")
    return ys, [w / total for w in ws]


def integrated_autocorr_time(series: np.ndarray, window_factor: float = 6.0) -> float:
    """Sokal-windowed integrated autocorrelation time of a scalar series."""
    x = np.asarray(series, dtype=float)
    n = len(x)
    x = x - x.mean()
    var = float(x @ x) / n
    if var == 0.0 or n < 4:
        return 1.0
    # FFT autocovariance, normalized to rho(0) = 1
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, n=size)
    acov = np.fft.irfft(f * np.conj(f), n=size)[:n].real / np.arange(n, 0, -1)
    rho = acov / acov[0]
    tau = 1.0
    for w in range(1, n):
        tau = 1.0 + 2.0 * float(rho[1:w + 1].sum())
        if w >= window_factor * tau:
            break
    return max(tau, 1.0)
