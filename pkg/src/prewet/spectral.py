"""Stationary law, spectral gap, and total-variation relaxation.

The free-endpoint chain lives on {0..K} with positive kernel
K(x, y) = p(y - x) exp(-lambda V(y)).  Strict aperiodicity of the step law
makes the truncated kernel primitive, so Perron-Frobenius applies: the left
eigenvector (normalized) is the stationary law of X_N, and phi . psi is the
mid-bridge bulk law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence
from .model import BridgeSpec
from .transfer import _kernel, _push_backward, _push_forward

RESIDUAL_TOL = 1e-12
MAX_ITERS = 10 ** 5


@dataclass
class TransferOperator:
    """Perron data of the truncated transfer kernel.

    Normalization convention: sum(psi) = 1 and psi . phi = 1.  Residuals are
    measured on max-normalized vectors, relative to Lambda.
    """

    spec: BridgeSpec
    leading: float                # Perron eigenvalue Lambda
    phi: np.ndarray               # right eigenvector, K phi = Lambda phi
    psi: np.ndarray               # left eigenvector, psi K = Lambda psi
    residual_phi: float
    residual_psi: float
    substochastic: bool           # flagged when lambda = 0 (truncation leaks mass)

    def apply_right(self, vec: np.ndarray) -> np.ndarray:
        """(K vec)(x) = sum_y p(y - x) e^{-lam V(y)} vec(y)."""
        kern, _, vweight = _kernel(self.spec)
        return _push_backward(vec * vweight, kern, self.spec.step.max_step,
                              self.spec.K)

    def apply_left(self, vec: np.ndarray) -> np.ndarray:
        """(vec K)(y) = sum_x vec(x) p(y - x) e^{-lam V(y)}."""
        kern, smin, vweight = _kernel(self.spec)
        return _push_forward(vec, kern, smin, self.spec.K) * vweight


def _power_iterate(apply, n: int):
    """Leading eigenpair of a positive operator by accelerated power iteration."""
    vec = np.ones(n)
    lam = 1.0
    for it in range(MAX_ITERS):
        nxt = apply(vec)
        lam = float(vec @ nxt) / float(vec @ vec)  # Rayleigh estimate
        res = float(np.max(np.abs(nxt - lam * vec))) / abs(lam)
        top = nxt.max()
        vec = nxt / top
        if res < RESIDUAL_TOL:
            return lam, vec, res
    raise NoConvergence(f"power iteration did not converge in {MAX_ITERS} iterations",
                        estimate=(lam, vec))


def build_operator(spec: BridgeSpec) -> TransferOperator:
    """Perron eigendata of the kernel on {0..K}; N in the spec is ignored."""
    op = TransferOperator(spec, 0.0, np.empty(0), np.empty(0), 0.0, 0.0,
                          substochastic=(spec.lam == 0.0))
    if spec.K == 0:
        p0 = spec.step.prob(0)
        return TransferOperator(spec, p0, np.ones(1), np.ones(1), 0.0, 0.0,
                                op.substochastic)
    lam_r, phi, res_r = _power_iterate(op.apply_right, spec.K + 1)
    lam_l, psi, res_l = _power_iterate(op.apply_left, spec.K + 1)
    leading = 0.5 * (lam_r + lam_l)
    psi = psi / psi.sum()
    phi = phi / float(psi @ phi)
    return TransferOperator(spec, leading, phi, psi, res_r, res_l,
                            op.substochastic)


def stationary(op: TransferOperator) -> np.ndarray:
    """pi_lambda: the limit law of X_N under the free-right-endpoint measure."""
    return op.psi / op.psi.sum()


def bulk_stationary(op: TransferOperator) -> np.ndarray:
    """Mid-bridge marginal limit, proportional to phi . psi."""
    w = op.phi * op.psi
    return w / w.sum()


def tv_relaxation(op: TransferOperator, a: int, n_max: int) -> np.ndarray:
    """Rows (N, ||mu_N - pi||_TV) for N = 0..n_max.

    mu_N is the N-th kernel iterate of the point mass at `a`, re-normalized
    to a probability vector at each step: the conditional law of X_N given
    the walk stayed non-negative, under the free-endpoint tilted measure.
    """
    if not (0 <= a <= op.spec.K):
        raise ValueError("start height outside the lattice")
    pi = stationary(op)
    mu = np.zeros(op.spec.K + 1)
    mu[a] = 1.0
    rows = np.empty((n_max + 1, 2))
    for n in range(n_max + 1):
        rows[n] = (n, 0.5 * float(np.abs(mu - pi).sum()))
        if n < n_max:
            mu = op.apply_left(mu)
            mu = mu / mu.sum()
    return rows


def spectral_gap(op: TransferOperator) -> float:
    """1 - |lambda_2| / Lambda via power iteration on the deflated kernel."""
    n = op.spec.K + 1
    if n == 1:
        return 1.0  # no second eigenvalue; gap is 1 by convention
    phi, psi, lam = op.phi, op.psi, op.leading

    def deflated(vec: np.ndarray) -> np.ndarray:
        out = op.apply_right(vec) / lam
        return out - phi * float(psi @ out)

    vec = np.arange(n, dtype=float) - 0.5 * n
    vec -= phi * float(psi @ vec)
    vec /= np.max(np.abs(vec))
    nu = 0.0
    for _ in range(MAX_ITERS):
        nxt = deflated(vec)
        nu = float(vec @ nxt) / float(vec @ vec)
        res = float(np.max(np.abs(nxt - nu * vec)))
        top = np.max(np.abs(nxt))
        if top <= 0.0:
            return 1.0  # kernel is rank one at working precision
        vec = nxt / top
        if res < 1e-13 + 10 * RESIDUAL_TOL * abs(nu):
            return 1.0 - abs(nu)
    raise NoConvergence("second-eigenvalue iteration hit the cap "
                        "(near-degenerate gap)", estimate=1.0 - abs(nu))
