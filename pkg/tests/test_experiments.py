import math

import numpy as np
import pytest

from prewet import transfer
from prewet.errors import InsufficientGrid, InvalidParameter
from prewet.experiments import (
    SweepConfig,
    area_law,
    coupling_decay,
    default_sweep,
    height_scaling,
    max_height_floor,
    moment_scaling,
    ols,
    tail_exponent,
)
from prewet.model import make_spec, solve_H


class TestOls:
    def test_exact_line(self):
        xs = [1.0, 2.0, 3.0, 4.0]
        ys = [2.0 * x - 1.0 for x in xs]
        slope, intercept, stderr, r2 = ols(xs, ys)
        assert slope == pytest.approx(2.0)
        assert intercept == pytest.approx(-1.0)
        assert r2 == pytest.approx(1.0)
        assert stderr == pytest.approx(0.0, abs=1e-12)

    def test_degenerate_grid(self):
        with pytest.raises(InsufficientGrid):
            ols([1.0, 1.0], [0.0, 1.0])
        with pytest.raises(InsufficientGrid):
            ols([1.0], [0.0])


class TestSweepConfig:
    def test_grid_must_decrease(self):
        with pytest.raises(InvalidParameter):
            SweepConfig(lambdas=(1e-4, 1e-3))

    def test_defaults(self):
        sweep = default_sweep()
        assert len(sweep.lambdas) == 5
        assert sweep.lambdas[0] == pytest.approx(1e-2)
        assert sweep.lambdas[-1] == pytest.approx(1e-4)


class TestHeightScaling:
    def test_insufficient_grid(self):
        with pytest.raises(InsufficientGrid):
            height_scaling(default_sweep(lambdas=(1e-2, 1e-3, 1e-4)))

    def test_small_grid_slope_near_third(self):
        # coarse three-decade grid at reduced multiplier: still close to -1/3
        sweep = default_sweep(lambdas=(1e-2, 1e-3, 3.16e-4, 1e-4),
                              n_multiplier=12)
        fit = height_scaling(sweep)
        assert -0.45 < fit.exponent < -0.25
        assert fit.r_squared > 0.97


class TestTailExponent:
    def test_lambda_zero_flagged(self):
        sweep = default_sweep(lambdas=(1e-3, 0.0))
        fit = tail_exponent(sweep, lam=0.0)
        assert not fit.applicable
        assert fit.points == []

    def test_slopes_agree_across_lambdas(self):
        sweep = default_sweep(lambdas=(1e-3, 3.16e-4))
        fits = [tail_exponent(sweep, lam=l) for l in sweep.lambdas]
        joint = math.hypot(fits[0].stderr, fits[1].stderr)
        assert abs(fits[0].exponent - fits[1].exponent) < max(4 * joint, 0.1)


class TestAreaLaw:
    def test_signs_and_stability(self):
        sweep = default_sweep(lambdas=(1e-2, 3.16e-3))
        rep = area_law(sweep, delta=0.4, multipliers=(10, 20, 30))
        for lam in sweep.lambdas:
            assert rep.upper_slopes[lam] > 0
            assert rep.lower_slopes[lam] > 0
        ratios = list(rep.mean_area_ratio.values())
        assert max(ratios) / min(ratios) < 2.0


class TestMoments:
    def test_precondition(self):
        with pytest.raises(InvalidParameter):
            moment_scaling(default_sweep(lambdas=(1e-3, 1e-4)), 3.0)
        with pytest.raises(InvalidParameter):
            moment_scaling(default_sweep(lambdas=(1e-3, 1e-4)), 1.0)

    def test_band_two_lambdas(self):
        rep = moment_scaling(default_sweep(lambdas=(1e-3, 1e-4)), 2.0)
        assert rep.band < 4.0


class TestCoupling:
    def test_decay_negative_and_stable(self):
        sweep = default_sweep(lambdas=(1e-2, 3.16e-3), replicas=10 ** 4)
        curves = coupling_decay(sweep)
        for c in curves:
            assert c.fit.exponent < 0
            assert abs(c.fit.exponent) > 4 * c.fit.stderr
        # slope is already per N/H^2, so the two should agree within factor 2
        s0, s1 = curves[0].fit.exponent, curves[1].fit.exponent
        assert 0.5 < s0 / s1 < 2.0

    def test_bitwise_reproducible(self):
        sweep = default_sweep(lambdas=(1e-2,), replicas=2000)
        a = coupling_decay(sweep)[0]
        b = coupling_decay(sweep)[0]
        assert a.p_no_meet == b.p_no_meet
        assert a.fit.exponent == b.fit.exponent


class TestMaxHeightFloor:
    def test_decay_and_rate_ratio(self, lazy, lin):
        sweep = default_sweep(lambdas=(1e-2, 1e-3), replicas=5000)
        curves = max_height_floor(sweep, delta=0.8)
        for c in curves:
            assert c.fit.exponent < 0
            assert all(a >= b for a, b in zip(c.p_below, c.p_below[1:]))
        # per-site decay rate scales like lambda^{2/3}
        expect = (1e-2 / 1e-3) ** (2.0 / 3.0)
        got = curves[0].fit.exponent / curves[1].fit.exponent
        assert expect / 2 < got < expect * 2

    def test_matches_exact_dp(self, lazy, lin):
        sweep = default_sweep(lambdas=(1e-2,), replicas=5000)
        curve = max_height_floor(sweep, delta=0.8, multipliers=(1.0, 2.0))[0]
        spec = make_spec(lazy, lin, 1e-2, curve.sizes[0])
        exact = transfer.max_height_probability(spec, math.floor(0.8 * curve.H))
        assert abs(curve.p_below[0] - exact) < 4 * curve.stderr[0] + 1e-9
