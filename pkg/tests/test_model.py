import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prewet.errors import (
    BracketFailure,
    EmptySupport,
    InvalidParameter,
    NonFiniteObjective,
)
from prewet.model import (
    BridgeSpec,
    Potential,
    StepDistribution,
    builtin_steps,
    conditional_step,
    gaussian_step,
    geometric_step,
    lazy_srw,
    linear_potential,
    power_potential,
    solve_H,
    table_potential,
)


class TestSolveH:
    def test_linear_closed_form(self, lin):
        # lam H^2 V(2*0.5*H) = lam H^3 = 1
        assert solve_H(lin, 0.5, 1e-3) == pytest.approx(10.0, rel=1e-9)

    def test_quadratic_closed_form(self):
        sq = power_potential(2)
        assert solve_H(sq, 0.5, 1e-4) == pytest.approx(10.0, rel=1e-9)

    def test_lambda_power_third(self, lin):
        # H proportional to lambda^{-1/3} for V = |x|, exactly at every gamma
        for lam in (1e-2, 1e-3, 1e-4, 1e-5):
            expect = (2.0 * lam) ** (-1.0 / 3.0)
            assert solve_H(lin, 1.0, lam) == pytest.approx(expect, rel=1e-9)

    def test_gamma_monotonicity(self, lin):
        # gamma^{1/3} H_gamma is non-increasing in gamma
        sq = power_potential(2)
        for pot in (lin, sq):
            vals = [g ** (1.0 / 3.0) * solve_H(pot, g, 1e-3)
                    for g in (0.25, 0.5, 1.0, 2.0, 4.0)]
            assert all(b <= a * (1 + 1e-9) for a, b in zip(vals, vals[1:]))

    def test_strictly_decreasing_in_lambda(self, lin):
        hs = [solve_H(lin, 1.0, lam) for lam in (1e-2, 3e-3, 1e-3, 3e-4)]
        assert all(b > a for a, b in zip(hs, hs[1:]))

    def test_bracket_failure_flat_potential(self):
        flat = Potential("flat", lambda x: 0.0, lambda a: 1.0)
        with pytest.raises(BracketFailure):
            solve_H(flat, 1.0, 1e-3)

    def test_non_finite_objective(self):
        bad = Potential("bad", lambda x: math.inf if x > 1 else x, lambda a: a)
        with pytest.raises(NonFiniteObjective):
            solve_H(bad, 1.0, 1e-3)

    def test_preconditions(self, lin):
        with pytest.raises(InvalidParameter):
            solve_H(lin, 1.0, 0.0)
        with pytest.raises(InvalidParameter):
            solve_H(lin, -1.0, 1e-3)


class TestConditionalStep:
    def test_lazy_at_wall(self, lazy):
        cs = conditional_step(lazy, 0)
        assert cs.support == (0, 1)
        assert cs.probs == pytest.approx((2 / 3, 1 / 3))
        assert cs.mean == pytest.approx(1 / 3)

    def test_inactive_constraint(self):
        for step in builtin_steps().values():
            x = -step.min_step
            cs = conditional_step(step, x)
            assert cs.support == step.support
            assert cs.mean == pytest.approx(0.0, abs=1e-12)

    def test_geometric_x1_vs_direct_sum(self):
        step = geometric_step(0.5, 30)
        cs = conditional_step(step, 1)
        mass = sum(p for k, p in zip(step.support, step.probs) if k >= -1)
        expect_mean = sum(k * p for k, p in zip(step.support, step.probs)
                          if k >= -1) / mass
        assert cs.mean == pytest.approx(expect_mean, rel=1e-12)
        assert sum(cs.probs) == pytest.approx(1.0, abs=1e-12)

    def test_mean_decreasing_to_zero(self):
        for step in builtin_steps().values():
            means = [conditional_step(step, x).mean
                     for x in range(-step.min_step + 3)]
            assert all(b <= a + 1e-12 for a, b in zip(means, means[1:]))
            assert means[-1] == pytest.approx(0.0, abs=1e-12)

    def test_variance_bound(self, lazy):
        for x in range(4):
            cs = conditional_step(lazy, x)
            mass = sum(p for k, p in zip(lazy.support, lazy.probs) if k >= -x)
            assert cs.variance <= lazy.variance / mass + 1e-12

    def test_empty_support_guard(self):
        # unreachable through from_weights (zero mean forces upward mass);
        # construct directly to exercise the guard
        step = StepDistribution(support=(-2, -1), probs=(0.5, 0.5),
                                mean=-1.5, variance=0.25,
                                aperiodicity_constant=1)
        with pytest.raises(EmptySupport):
            conditional_step(step, 0)

    def test_negative_height_rejected(self, lazy):
        with pytest.raises(InvalidParameter):
            conditional_step(lazy, -1)


class TestCatalog:
    def test_lazy_srw(self, lazy):
        assert lazy.variance == pytest.approx(0.5)
        assert lazy.aperiodicity_constant == 1
        assert lazy.exact_probs is not None

    def test_geometric_variance(self):
        # untruncated two-sided geometric has variance 2q/(1-q)^2
        step = geometric_step(0.5, 30)
        assert abs(step.variance - 4.0) < 1e-5

    def test_gaussian_symmetric(self):
        step = gaussian_step(2.0, 20)
        assert step.mean == 0.0
        assert step.prob(3) == step.prob(-3)

    def test_invariants_all(self):
        for step in builtin_steps().values():
            assert abs(sum(step.probs) - 1.0) < 1e-12
            assert abs(step.mean) < 1e-12
            assert step.variance > 0

    def test_aperiodicity_window(self):
        for step in builtin_steps().values():
            a = step.aperiodicity_constant
            for n in range(a, a + 6):
                sup, pr = step.n_step_law(n)
                for k in (-1, 0, 1):
                    assert pr[k - sup[0]] > 0.0

    def test_invalid_parameters(self):
        with pytest.raises(InvalidParameter):
            geometric_step(q=1.5)
        with pytest.raises(InvalidParameter):
            geometric_step(q=0.0)
        with pytest.raises(InvalidParameter):
            gaussian_step(s=0.0)

    def test_nonzero_mean_rejected(self):
        with pytest.raises(InvalidParameter):
            StepDistribution.from_weights([0, 1], [1.0, 1.0])

    @given(q=st.floats(0.05, 0.9), x_max=st.integers(5, 40))
    @settings(max_examples=25, deadline=None)
    def test_geometric_invariants_fuzz(self, q, x_max):
        step = geometric_step(q, x_max)
        assert abs(step.mean) < 1e-12
        assert abs(sum(step.probs) - 1.0) < 1e-12
        assert step.variance > 0


class TestPotentials:
    def test_linear(self, lin):
        assert lin(0.0) == 0.0
        assert lin.growth(2.0) == 2.0

    @given(beta=st.floats(1.0, 4.0), alpha=st.floats(0.25, 4.0))
    @settings(max_examples=25, deadline=None)
    def test_power_growth_certificate(self, beta, alpha):
        pot = power_potential(beta)
        # for pure powers the certificate is exact: V(a x)/V(x) == a^beta
        x = 7.3
        assert pot(alpha * x) / pot(x) == pytest.approx(pot.growth(alpha), rel=1e-9)

    def test_power_requires_convex(self):
        with pytest.raises(InvalidParameter):
            power_potential(0.5)

    def test_table_potential(self):
        pot = table_potential([0.0, 1.0, 2.5, 4.5])
        assert pot(0.0) == 0.0
        assert pot(1.5) == pytest.approx(1.75)
        assert pot(5.0) == pytest.approx(4.5 + 2 * 2.0)  # last slope extended
        assert pot.growth(2.0) < math.inf

    def test_table_rejects_nonconvex(self):
        with pytest.raises(InvalidParameter):
            table_potential([0.0, 5.0, 6.0, 20.0, 21.0])

    def test_growth_finite_on_required_grid(self, lin):
        for pot in (lin, power_potential(2), table_potential([0, 1, 2, 3])):
            for alpha in (0.5, 1.0, 2.0, 4.0, 8.0):
                assert math.isfinite(pot.growth(alpha))


class TestBridgeSpec:
    def test_boundary_exceeds_truncation(self, lazy, lin):
        with pytest.raises(InvalidParameter):
            BridgeSpec(lazy, lin, 0.1, 5, a=9, b=0, K=6)

    def test_tolerance_range(self, lazy, lin):
        with pytest.raises(InvalidParameter):
            BridgeSpec(lazy, lin, 0.1, 5, a=0, b=0, K=6, tail_tolerance=1e-3)

    def test_negative_lambda(self, lazy, lin):
        with pytest.raises(InvalidParameter):
            BridgeSpec(lazy, lin, -0.1, 5, a=0, b=0, K=6)
