import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prewet import oracle, transfer
from prewet.errors import (
    AreaDPBudget,
    IndexOrder,
    InvalidParameter,
    SpecMismatch,
    ThresholdBeyondTruncation,
    TruncationOverflow,
)
from prewet.experiments import ols
from prewet.model import lazy_srw, linear_potential, make_spec, solve_H


class TestBuildTables:
    def test_single_step(self, lazy, lin):
        spec = make_spec(lazy, lin, 0.9, 1, a=0, b=0, K=3, tail_tolerance=1e-6)
        tables = transfer.build_tables(spec, check_truncation=False)
        assert tables.Z == pytest.approx(0.5)

    def test_two_step_closed_form(self, lazy, lin):
        spec = make_spec(lazy, lin, 0.5, 2, a=0, b=0, K=6, tail_tolerance=1e-6)
        tables = transfer.build_tables(spec, check_truncation=False)
        assert tables.Z == pytest.approx(0.25 + math.exp(-0.5) / 16, rel=1e-12)

    def test_canonical_matches_oracle(self, canonical_tables, canonical_law):
        assert canonical_tables.Z == pytest.approx(canonical_law.Z, rel=1e-12)
        assert canonical_tables.consistency_error() < 1e-10

    def test_truncation_overflow_and_auto_double(self, lazy, lin):
        spec = make_spec(lazy, lin, 1e-3, 400, a=0, b=0, K=6)
        with pytest.raises(TruncationOverflow):
            transfer.build_tables(spec)
        tables = transfer.build_tables_auto(spec)
        assert tables.spec.K > 6

    def test_doubling_K_stability(self, lazy, lin):
        spec = make_spec(lazy, lin, 1e-2, 300)
        z1 = transfer.build_tables(spec).log_Z
        z2 = transfer.build_tables(spec.with_(K=2 * spec.K)).log_Z
        assert abs(math.expm1(z2 - z1)) < 10 * spec.tail_tolerance

    def test_monotone_in_lambda(self, lazy, lin):
        zs = []
        for lam in (0.0, 0.1, 0.3, 1.0):
            spec = make_spec(lazy, lin, lam, 6, a=0, b=0, K=8,
                             tail_tolerance=1e-6)
            zs.append(transfer.build_tables(spec, check_truncation=False).log_Z)
        assert all(b < a for a, b in zip(zs, zs[1:]))

    @given(lam=st.floats(0.0, 1.0), n=st.integers(2, 9),
           a=st.integers(0, 3), b=st.integers(0, 3))
    @settings(max_examples=20, deadline=None)
    def test_oracle_equivalence_fuzz(self, lam, n, a, b, lazy, lin):
        spec = make_spec(lazy, lin, lam, n, a=a, b=b, K=6, tail_tolerance=1e-6)
        if abs(a - b) > n:
            return
        law = oracle.enumerate_paths(spec)
        tables = transfer.build_tables(spec, check_truncation=False)
        assert tables.Z == pytest.approx(law.Z, rel=1e-10)
        assert tables.consistency_error() < 1e-10


class TestMarginals:
    def test_boundary_point_mass(self, canonical_tables):
        m0 = transfer.marginal(canonical_tables, 0)
        assert m0.pmf[0] == 1.0 and m0.pmf[1:].sum() == 0.0
        mN = transfer.marginal(canonical_tables, 6)
        assert mN.pmf[1] == 1.0

    def test_matches_oracle_everywhere(self, canonical_tables, canonical_law):
        for k in range(7):
            pmf = transfer.marginal(canonical_tables, k).pmf
            exact = canonical_law.marginal(k)
            for x in range(7):
                assert pmf[x] == pytest.approx(exact.get(x, 0.0), abs=1e-12)

    def test_normalized(self, canonical_tables):
        for k in range(7):
            assert transfer.marginal(canonical_tables, k).pmf.sum() == \
                pytest.approx(1.0, abs=1e-12)

    def test_index_contract(self, canonical_tables):
        with pytest.raises(InvalidParameter):
            transfer.marginal(canonical_tables, 7)

    def test_lambda_zero_diffusive_growth(self, lazy, lin):
        means = []
        for n in (64, 144, 256):
            k = int(8 * math.sqrt(n))
            spec = make_spec(lazy, lin, 0.0, n, K=k, tail_tolerance=1e-6)
            tables = transfer.build_tables(spec)
            means.append(transfer.marginal(tables, n // 2).mean)
        assert means[0] < means[1] < means[2]
        ratios = [m / math.sqrt(n) for m, n in zip(means, (64, 144, 256))]
        assert max(ratios) / min(ratios) < 2.0

    def test_stochastic_domination_in_lambda(self, lazy, lin):
        prev = None
        for lam in (0.0, 0.1, 0.3, 1.0):
            spec = make_spec(lazy, lin, lam, 8, a=0, b=0, K=8,
                             tail_tolerance=1e-6)
            tables = transfer.build_tables(spec, check_truncation=False)
            means = [transfer.marginal(tables, k).mean for k in range(1, 8)]
            if prev is not None:
                assert all(m <= p + 1e-12 for m, p in zip(means, prev))
            prev = means


class TestPartitionRatio:
    def test_identity_at_lambda_zero(self, lazy, lin):
        spec = make_spec(lazy, lin, 0.0, 6, a=0, b=0, K=6, tail_tolerance=1e-6)
        assert transfer.partition_ratio(spec, spec) == pytest.approx(1.0)

    def test_matches_oracle_expectation(self, canonical_spec):
        base = canonical_spec.with_(lam=0.0)
        law0 = oracle.enumerate_paths(base)
        lam, pot = canonical_spec.lam, canonical_spec.potential
        expect = math.fsum(
            pr * math.exp(-lam * sum(pot(x) for x in path[1:-1]))
            for path, pr in zip(law0.paths, law0.probs))
        ratio = transfer.partition_ratio(canonical_spec, base)
        assert ratio == pytest.approx(expect, rel=1e-12)
        assert 0.0 < ratio <= 1.0

    def test_spec_mismatch(self, canonical_spec):
        with pytest.raises(SpecMismatch):
            transfer.partition_ratio(canonical_spec,
                                     canonical_spec.with_(lam=0.0, b=0))

    def test_exponential_scaling_in_n(self, lazy, lin):
        # -log(Z^lam / Z^0) grows linearly in N, at a rate stable on the
        # scale H^-2 across lambda (the basic comparison of partition
        # functions, with constants fitted)
        slopes = {}
        for lam in (1e-2, 1e-3):
            h = solve_H(lin, 1.0, lam)
            xs, ys = [], []
            for mult in (1, 2, 4):
                n = int(round(mult * h * h))
                spec = make_spec(lazy, lin, lam, n)
                xs.append(n)
                ys.append(-math.log(
                    transfer.partition_ratio(spec, spec.with_(lam=0.0))))
            slope, _, _, r2 = ols(xs, ys)
            assert r2 > 0.98
            slopes[lam] = slope * h * h
        vals = list(slopes.values())
        assert max(vals) / min(vals) < 2.0

    def test_b_sweep_lambda_zero_vs_oracle(self, lazy, lin):
        for b in range(4):
            spec = make_spec(lazy, lin, 0.0, 8, a=0, b=b, K=8,
                             tail_tolerance=1e-6)
            law = oracle.enumerate_paths(spec)
            tables = transfer.build_tables(spec, check_truncation=False)
            assert tables.Z == pytest.approx(law.Z, rel=1e-10)


class TestTailProbability:
    def test_bounds(self, canonical_tables):
        p = transfer.tail_probability(canonical_tables, 3, 0.0)
        assert 0.0 < p < 1.0

    def test_threshold_contract(self, canonical_tables):
        with pytest.raises(ThresholdBeyondTruncation):
            transfer.tail_probability(canonical_tables, 3, 5.5)

    def test_matches_oracle(self, canonical_tables, canonical_law):
        for thr in (0.5, 1.0, 2.5):
            assert transfer.tail_probability(canonical_tables, 3, thr) == \
                pytest.approx(canonical_law.tail(3, thr), abs=1e-12)


class TestCovariance:
    def test_variance_non_negative(self, canonical_tables):
        for k in range(1, 6):
            var = transfer.covariance(canonical_tables, k, k)
            pmf = transfer.marginal(canonical_tables, k)
            direct = pmf.moment(2.0) - pmf.mean ** 2
            assert var >= 0.0
            assert var == pytest.approx(direct, abs=1e-12)

    def test_matches_oracle(self, canonical_tables, canonical_law):
        assert transfer.covariance(canonical_tables, 2, 4) == \
            pytest.approx(canonical_law.covariance(2, 4), abs=1e-10)

    def test_index_order(self, canonical_tables):
        with pytest.raises(IndexOrder):
            transfer.covariance(canonical_tables, 4, 2)

    def test_exponential_decay_profile(self, lazy, lin):
        lam = 1e-2
        h = solve_H(lin, 1.0, lam)
        n = int(round(20 * h * h))
        tables = transfer.build_tables_auto(make_spec(lazy, lin, lam, n))
        i = n // 2
        covs = [transfer.covariance(tables, i, i + r)
                for r in (0, 14, 28, 42)]
        assert all(b < a for a, b in zip(covs, covs[1:]))
        # log-linear in r
        _, _, _, r2 = ols([0, 14, 28, 42], [math.log(c) for c in covs])
        assert r2 > 0.99


class TestAreaStatistics:
    def test_two_step_mean(self, lazy, lin):
        spec = make_spec(lazy, lin, 0.0, 2, a=0, b=0, K=4, tail_tolerance=1e-6)
        tables = transfer.build_tables(spec, check_truncation=False)
        stats = transfer.area_statistics(tables, 0.5, H=1.0)
        assert stats.mean_area == pytest.approx(0.2, abs=1e-12)

    def test_matches_oracle_exactly(self, lazy, lin):
        spec = make_spec(lazy, lin, 0.5, 8, a=0, b=0, K=5, tail_tolerance=1e-6)
        law = oracle.enumerate_paths(spec)
        tables = transfer.build_tables(spec, check_truncation=False)
        stats = transfer.area_statistics(tables, 0.5)
        mean, p_up, p_lo = law.area_probs(stats.lower_threshold,
                                          stats.upper_threshold)
        assert stats.bucket_size == 1
        assert stats.mean_area == pytest.approx(mean, rel=1e-12)
        assert stats.p_upper == pytest.approx(p_up, rel=1e-10)
        assert stats.p_lower == pytest.approx(p_lo, rel=1e-10)

    def test_budget_guard(self, lazy, lin):
        tables = transfer.build_tables_auto(make_spec(lazy, lin, 1e-3, 500))
        with pytest.raises(AreaDPBudget):
            transfer.area_statistics(tables, 0.5, budget_cells=1000)

    def test_bucketed_close_to_exact(self, lazy, lin):
        # force g > 1 and compare against the exact g = 1 run
        spec = make_spec(lazy, lin, 5e-2, 120)
        tables = transfer.build_tables_auto(spec)
        exact = transfer.area_statistics(tables, 0.5, n_buckets=10 ** 6)
        coarse = transfer.area_statistics(tables, 0.5, n_buckets=64)
        assert exact.bucket_size == 1
        assert coarse.bucket_size > 1
        assert coarse.p_upper == pytest.approx(exact.p_upper,
                                               abs=coarse.upper_err + 1e-9)
        assert coarse.p_lower == pytest.approx(exact.p_lower,
                                               abs=coarse.lower_err + 1e-9)
        assert coarse.mean_area == pytest.approx(exact.mean_area, rel=1e-12)


class TestMaxHeight:
    def test_ratio_of_partition_functions(self, lazy, lin):
        spec = make_spec(lazy, lin, 0.3, 6, a=0, b=1, K=6, tail_tolerance=1e-6)
        law = oracle.enumerate_paths(spec)
        for cap in (2, 3, 4):
            expect = math.fsum(pr for path, pr in zip(law.paths, law.probs)
                               if max(path) <= cap)
            assert transfer.max_height_probability(spec, cap) == \
                pytest.approx(expect, rel=1e-10)
