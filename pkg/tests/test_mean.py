import math

import numpy as np
import pytest

from abgarch import mean
from abgarch.errors import DivergenceError, SpecError
from abgarch.params import TvArSpec

from conftest import (classical_ar2_autocov, iterate_mean, random_ar_spec,
                      tridiag_matrix)


def panel_b():
    return TvArSpec.from_lists([100, 120, 140], 0.0, [0.98, 0.80, 0.70, 0.90])


def panel_c():
    return TvArSpec.from_lists([100, 121, 142], 0.0, [0.60, 1.20, 0.80, 0.92])


class TestImpulseWeights:
    def test_initial_values(self):
        spec = TvArSpec.constant(0.0, 0.5, 0.2)
        assert mean.impulse_weight(spec, 0) == 1.0
        assert mean.impulse_weight(spec, -1) == 0.0

    def test_constant_ar1_powers(self):
        spec = TvArSpec.constant(0.0, 0.9)
        assert mean.impulse_weight(spec, 7) == pytest.approx(0.9**7, rel=1e-14)

    def test_constant_ar2_forward_recursion(self):
        # forward psi-weight recursion as the independent oracle
        spec = TvArSpec.constant(0.0, 0.5, 0.2)
        psi = [1.0, 0.5]
        for _ in range(2, 9):
            psi.append(0.5 * psi[-1] + 0.2 * psi[-2])
        assert psi[3] == pytest.approx(0.325)
        got = mean.impulse_weights(spec, 8)
        assert got == pytest.approx(psi, rel=1e-14)

    def test_matches_direct_determinant(self, rng):
        for _ in range(30):
            spec = random_ar_spec(rng)
            for k in range(1, 13):
                det = np.linalg.det(tridiag_matrix(spec, k))
                got = mean.impulse_weight(spec, k)
                assert got == pytest.approx(det, rel=1e-12, abs=1e-12)

    def test_determinant_with_shifted_reference(self, rng):
        spec = random_ar_spec(rng)
        for ref in (-5, 3, 47):
            for k in (1, 4, 9):
                det = np.linalg.det(tridiag_matrix(spec, k, ref))
                assert mean.impulse_weight(spec, k, ref) == \
                    pytest.approx(det, rel=1e-12, abs=1e-12)

    def test_cross_time_recursion_identity(self, rng):
        # w_k at time s equals ar1(s) w_{k-1}(s-1) + ar2(s) w_{k-2}(s-2)
        spec = random_ar_spec(rng)
        for ref in (0, 5):
            p = spec.regimes[spec.schedule.regime_index(ref)]
            for k in range(1, 10):
                lhs = mean.impulse_weight(spec, k, ref)
                rhs = p.ar1 * mean.impulse_weight(spec, k - 1, ref + 1) \
                    + p.ar2 * mean.impulse_weight(spec, k - 2, ref + 2)
                assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


class TestGeneralSolution:
    def test_one_step_reduces_to_recursion(self):
        spec = TvArSpec.constant(0.3, 0.5, 0.2)
        sol = mean.general_solution(spec, 1, (1.5, -0.7), [0.25])
        assert sol.total == pytest.approx(0.3 + 0.5 * 1.5 + 0.2 * (-0.7) + 0.25)

    def test_pure_homogeneous_ar1(self):
        spec = TvArSpec.constant(0.0, 0.9)
        sol = mean.general_solution(spec, 5, (2.0, 1.0), np.zeros(5))
        assert sol.total == pytest.approx(0.9**5 * 2.0, rel=1e-14)
        assert sol.particular == 0.0

    def test_matches_forward_iteration(self, rng):
        for _ in range(60):
            spec = random_ar_spec(rng, stable_tail=False)
            k = int(rng.integers(1, 50))
            init = rng.normal(size=2)
            shocks = rng.standard_t(5, size=k)
            want = iterate_mean(spec, k, init, shocks)
            got = mean.general_solution(spec, k, init, shocks).total
            assert got == pytest.approx(want, rel=1e-10, abs=1e-10)

    def test_decomposition_is_exact(self, rng):
        spec = random_ar_spec(rng)
        sol = mean.general_solution(spec, 20, (1.0, 2.0), rng.normal(size=20))
        assert sol.homogeneous + sol.particular == sol.total

    def test_break_drift_sum_collapses_by_regime(self, rng):
        # the drift part equals sum over regimes of drift_l times the block
        # sum of the weights within that regime's offset range
        for _ in range(10):
            spec = random_ar_spec(rng)
            k = 55
            sol = mean.general_solution(spec, k, (0.0, 0.0), np.zeros(k))
            w = mean.impulse_weights(spec, k)
            edges = (0,) + tuple(min(b, k) for b in spec.schedule.offsets) + (k,)
            total = 0.0
            for ell, reg in enumerate(spec.regimes[:len(edges) - 1]):
                lo, hi = edges[ell], edges[ell + 1]
                total += reg.drift * w[lo:hi].sum()
            assert sol.total == pytest.approx(total, rel=1e-10, abs=1e-12)

    def test_shock_length_mismatch(self):
        with pytest.raises(SpecError):
            mean.general_solution(TvArSpec.constant(0, 0.5), 3, (0, 0), [1.0])


class TestPredictor:
    def test_one_step_textbook(self):
        spec = TvArSpec.constant(0.3, 0.5, 0.2)
        assert mean.predict_mean(spec, 1, (1.5, -0.7)) == \
            pytest.approx(0.3 + 0.75 - 0.14)

    def test_ar1_geometric_decay(self):
        spec = TvArSpec.constant(0.0, 0.9)
        assert mean.predict_mean(spec, 3, (2.0, 0.0)) == pytest.approx(1.458)

    def test_one_break_ar1_forward_oracle(self):
        # recent regime phi=0.5 for two steps, older phi=0.8
        spec = TvArSpec.from_lists([2], 0.0, [0.5, 0.8])
        assert mean.predict_mean(spec, 3, (1.0, 0.0)) == \
            pytest.approx(0.5 * 0.5 * 0.8)

    def test_equals_zero_shock_solution(self, rng):
        spec = random_ar_spec(rng)
        init = (0.8, -1.1)
        assert mean.predict_mean(spec, 12, init) == \
            mean.general_solution(spec, 12, init, np.zeros(12)).total

    def test_predictor_error_split(self, rng):
        for _ in range(20):
            spec = random_ar_spec(rng)
            k = int(rng.integers(1, 40))
            init = rng.normal(size=2)
            shocks = rng.normal(size=k)
            total = mean.general_solution(spec, k, init, shocks).total
            pred = mean.predict_mean(spec, k, init)
            fe = mean.forecast_error(spec, k, shocks)
            assert total - pred == pytest.approx(fe, rel=1e-12, abs=1e-12)


class TestForecastErrorVariance:
    def test_one_step(self):
        spec = TvArSpec.constant(0.0, 0.5, 0.2)
        assert mean.forecast_error_variance(spec, 1, [1.7]) == 1.7

    def test_constant_ar1_geometric_sum(self):
        spec = TvArSpec.constant(0.0, 0.9)
        got = mean.forecast_error_variance(spec, 3, np.ones(3))
        assert got == pytest.approx(1 + 0.81 + 0.6561)

    def test_rejects_nonpositive_variance(self):
        with pytest.raises(SpecError):
            mean.forecast_error_variance(TvArSpec.constant(0, 0.5), 2, [1.0, 0.0])

    def test_matches_simulated_forecast_errors(self, rng):
        from abgarch import montecarlo as mc
        from abgarch.params import TvGarchSpec

        spec = TvArSpec.from_lists([6, 17], [0.1, 0.0, -0.1],
                                   [0.4, 0.9, 0.6], [0.1, -0.2, 0.15])
        garch = TvGarchSpec.constant(0.04, 0.05, 0.06, 0.85)
        k = 12
        cfg = mc.SimConfig(ar=spec, garch=garch, length=k + 2, paths=100_000,
                           burn_in=300, seed=99)
        out = mc.simulate(cfg)
        w = mean.impulse_weights(spec, k)
        p2 = spec.regimes[spec.schedule.regime_index(k - 1)].ar2
        drift = mean.predict_mean(spec, k, (0.0, 0.0))
        yk = out.y[:, out.column(k)]
        yk1 = out.y[:, out.column(k + 1)]
        fe = out.y[:, out.column(0)] - (drift + w[k] * yk + p2 * w[k - 1] * yk1)
        sample_var = fe.var(ddof=1)
        mc_se = np.sqrt((np.mean((fe - fe.mean())**4)
                         - sample_var**2) / fe.shape[0])
        from abgarch.variance import unconditional_variance

        want = mean.forecast_error_variance(
            spec, k, [unconditional_variance(garch, off)
                      for off in range(k - 1, -1, -1)])
        assert abs(sample_var - want) < 3.0 * mc_se


class TestSummability:
    def test_stationary_ar1(self):
        rep = mean.check_summability(TvArSpec.constant(0.0, 0.9))
        assert rep.convergent and rep.tail_rate == pytest.approx(0.9)

    def test_unit_root(self):
        rep = mean.check_summability(TvArSpec.constant(0.0, 1.0))
        assert not rep.convergent

    def test_interior_explosive_regime_admissible(self):
        rep = mean.check_summability(panel_c())
        assert rep.convergent and rep.tail_rate == pytest.approx(0.92)
        # the weight series square-sums despite the interior 1.20 regime
        m = mean.unconditional_moments(panel_c(), 1.0, ref_offset=0)
        assert np.isfinite(m.variance)

    def test_divergent_moments_raise(self):
        spec = TvArSpec.constant(0.1, 1.01)
        with pytest.raises(DivergenceError):
            mean.unconditional_moments(spec, 1.0)


class TestUnconditionalMoments:
    def test_stationary_ar1_closed_form(self):
        spec = TvArSpec.constant(1.0, 0.9)
        m = mean.unconditional_moments(spec, 2.0)
        assert m.mean == pytest.approx(10.0, rel=1e-10)
        assert m.variance == pytest.approx(2.0 / (1 - 0.81), rel=1e-10)
        assert m.second_moment == pytest.approx(m.mean**2 + m.variance)

    def test_zero_drift_zero_mean(self, rng):
        spec = random_ar_spec(rng)
        spec = TvArSpec(tuple(r._replace(drift=0.0) for r in spec.regimes),
                        spec.schedule)
        assert mean.unconditional_moments(spec, 1.0).mean == 0.0

    def test_classical_ar2_reduction(self):
        drift, ar1, ar2, sigma2 = 0.4, 0.5, 0.2, 1.3
        spec = TvArSpec.constant(drift, ar1, ar2)
        m = mean.unconditional_moments(spec, sigma2, lags=(1, 2, 3))
        want = classical_ar2_autocov(drift, ar1, ar2, sigma2, (0, 1, 2, 3))
        assert m.mean == pytest.approx(drift / (1 - ar1 - ar2), rel=1e-10)
        assert m.variance == pytest.approx(want[0], rel=1e-9)
        for k in (1, 2, 3):
            assert m.autocov[k] == pytest.approx(want[k], rel=1e-9)

    def test_panel_b_limits(self):
        spec = panel_b()
        assert mean.autocorrelation(spec, 1.0, 1, ref_offset=140) == \
            pytest.approx(0.90, abs=1e-9)
        assert mean.autocorrelation(spec, 1.0, 1, ref_offset=-10_000) == \
            pytest.approx(0.98, abs=1e-6)

    def test_truncation_tail_reported(self):
        m = mean.unconditional_moments(TvArSpec.constant(0.0, 0.9), 1.0)
        assert 0.0 <= m.truncation_tail < 1e-12


class TestAutocovariance:
    def test_lag_zero_is_variance(self, rng):
        spec = random_ar_spec(rng)
        m = mean.unconditional_moments(spec, 1.0)
        assert mean.autocovariance(spec, 1.0, 0) == \
            pytest.approx(m.variance, rel=1e-12)

    def test_panel_c_lag7_endpoints(self):
        spec = panel_c()
        assert mean.autocorrelation(spec, 1.0, 7, ref_offset=142) == \
            pytest.approx(0.92**7, abs=1e-9)
        assert mean.autocorrelation(spec, 1.0, 7, ref_offset=-10_000) == \
            pytest.approx(0.60**7, abs=1e-6)

    def test_second_identity(self, rng):
        # the covariance also satisfies the recursion through the
        # homogeneous solution coefficients
        for _ in range(10):
            spec = random_ar_spec(rng)
            k = int(rng.integers(1, 8))
            i = int(rng.integers(-5, 30))
            g = mean.autocovariance(spec, 1.0, k, ref_offset=i)
            wk = mean.impulse_weights(spec, k, ref_offset=i)
            var_k = mean.unconditional_moments(spec, 1.0, ref_offset=i + k).variance
            cov_k1 = mean.autocovariance(spec, 1.0, 1, ref_offset=i + k)
            p2 = spec.regimes[spec.schedule.regime_index(i + k - 1)].ar2
            rhs = wk[k] * var_k + p2 * wk[k - 1] * cov_k1
            assert g == pytest.approx(rhs, rel=1e-9, abs=1e-10)

    def test_matches_monte_carlo(self, rng):
        from abgarch import montecarlo as mc
        from abgarch.params import TvGarchSpec

        spec = TvArSpec.from_lists([9, 22], 0.0, [0.5, 0.8, 0.3], [0.2, -0.1, 0.1])
        garch = TvGarchSpec.constant(0.05, 0.0, 0.0, 0.0)  # homoscedastic
        cfg = mc.SimConfig(ar=spec, garch=garch, length=8, paths=150_000,
                           burn_in=250, seed=5)
        out = mc.simulate(cfg)
        est = mc.estimate_moments(out, "autocov", offsets=[0, 3], lag=2)
        for off, got, se in zip(est.offsets, est.values, est.ses):
            want = mean.autocovariance(spec, 0.05, 2, ref_offset=off)
            assert abs(got - want) < 3.0 * se
