import numpy as np
import pytest

from abgarch import variance as var
from abgarch.errors import DivergenceError, SpecError
from abgarch.params import GarchParams, ShockMoments, TvGarchSpec

from conftest import iterate_garch, random_garch_spec


def sp500_spec():
    """S&P variance-path regimes: published per-regime persistences.

    The most recent regime's value is the published rounded one (0.990);
    the older three equal the coefficient-table sums.  Break gaps are
    weekday counts between the three reported breakdates and the sample
    end.  Only (omega, persistence) matter for the unconditional path.
    """
    return TvGarchSpec.from_persistence(
        [326, 326 + 148, 326 + 148 + 2985], omega=0.001,
        persistence=[0.990, 0.999, 0.9905, 0.9835])


class TestPersistenceProducts:
    def test_constant_power(self):
        spec = TvGarchSpec.constant(0.01, 0.05, 0.0, 0.90)
        assert var.persistence_product_expected(spec, 10) == \
            pytest.approx(0.95**10, rel=1e-14)
        assert 0.95**10 == pytest.approx(0.59874, abs=5e-6)

    def test_k_zero_is_one(self, rng):
        spec = random_garch_spec(rng)
        assert var.persistence_product_expected(spec, 0) == 1.0

    def test_two_regime_clipped_product(self):
        # regime persistences 0.9 (two most recent steps) then 0.8
        spec = TvGarchSpec.from_persistence([2], 0.01, [0.9, 0.8])
        assert var.persistence_product_expected(spec, 5) == \
            pytest.approx(0.9**2 * 0.8**3, rel=1e-14)

    def test_recursion_matches_direct_product(self, rng):
        for _ in range(5):
            spec = random_garch_spec(rng)
            k = 1000
            got = var.persistence_products_expected(spec, k)
            cb = [var.regime_persistence(
                spec.regimes[spec.schedule.regime_index(j)]) for j in range(k)]
            direct = np.concatenate([[1.0], np.cumprod(cb)])
            assert np.allclose(got, direct, rtol=1e-14, atol=0)

    def test_realized_uses_sign_path(self, rng):
        spec = random_garch_spec(rng, max_breaks=1)
        k = 12
        signs = (rng.random(k) < 0.5).astype(float)
        got = var.persistence_products_realized(spec, k, signs)
        acc = 1.0
        for j in range(k):
            p = spec.regimes[spec.schedule.regime_index(j)]
            acc *= p.alpha + p.gamma * signs[k - 1 - j] + p.beta
            assert got[j + 1] == pytest.approx(acc, rel=1e-14)

    def test_expected_equals_mean_of_realized(self, rng):
        # Monte Carlo over sign paths validates the independence structure
        spec = random_garch_spec(rng, max_breaks=2)
        k, n = 8, 200_000
        signs = (rng.random((n, k)) < 0.5).astype(float)
        vals = np.empty(n)
        for i in range(n):
            vals[i] = var.persistence_products_realized(spec, k, signs[i])[k]
        want = var.persistence_product_expected(spec, k)
        se = vals.std(ddof=1) / np.sqrt(n)
        assert abs(vals.mean() - want) < 3.0 * se


class TestGarchGeneralSolution:
    def test_one_step_form(self):
        spec = TvGarchSpec.constant(0.01, 0.05, 0.08, 0.90)
        sol = var.garch_general_solution(spec, 1, 2.0, [0.3], [1.0])
        c = 0.05 + 0.08 + 0.90
        astar = 0.05 + 0.08
        assert sol.total == pytest.approx(0.01 + c * 2.0 + astar * 0.3)

    def test_zero_innovations_zero_drift_scaling(self, rng):
        spec = random_garch_spec(rng)
        k = 9
        signs = (rng.random(k) < 0.5).astype(float)
        sol = var.garch_general_solution(spec, k, 3.0, np.zeros(k), signs)
        zeta = var.persistence_products_realized(spec, k, signs)
        drift = sol.particular
        assert sol.homogeneous == pytest.approx(zeta[k] * 3.0, rel=1e-13)
        assert sol.total == pytest.approx(zeta[k] * 3.0 + drift, rel=1e-13)

    def test_matches_forward_recursion(self, rng):
        for _ in range(60):
            spec = random_garch_spec(rng)
            k = int(rng.integers(1, 100))
            h0 = float(rng.uniform(0.1, 3.0))
            v = rng.normal(0, 0.3, k)
            signs = (rng.random(k) < 0.5).astype(float)
            want = iterate_garch(spec, k, h0, v, signs)
            got = var.garch_general_solution(spec, k, h0, v, signs).total
            assert got == pytest.approx(want, rel=1e-10, abs=1e-12)

    def test_length_mismatch_and_bad_start(self):
        spec = TvGarchSpec.constant(0.01, 0.05, 0.0, 0.9)
        with pytest.raises(SpecError):
            var.garch_general_solution(spec, 3, 1.0, [0.1], [1, 0, 1])
        with pytest.raises(SpecError):
            var.garch_general_solution(spec, 1, 0.0, [0.1], [1])


class TestPredictVariance:
    def test_one_step(self):
        spec = TvGarchSpec.constant(0.01, 0.05, 0.08, 0.90)
        cbar = 0.05 + 0.90 + 0.04
        assert var.predict_variance(spec, 1, 0.7) == \
            pytest.approx(0.01 + cbar * 0.7)

    def test_long_horizon_converges_to_limit(self):
        spec = TvGarchSpec.constant(0.02, 0.05, 0.02, 0.88)
        lim = var.unconditional_variance_path(spec, [0]).past_limit
        assert var.predict_variance(spec, 3000, 5.0) == \
            pytest.approx(lim, rel=1e-10)

    def test_matches_monte_carlo_mean(self, rng):
        spec = TvGarchSpec.from_lists([5], omega=[0.02, 0.05],
                                      alpha=[0.05, 0.08], gamma=[0.04, 0.0],
                                      beta=[0.88, 0.82])
        k, n = 9, 120_000
        h0 = 1.4
        want = var.predict_variance(spec, k, h0)
        # simulate h forward from the fixed start
        h = np.full(n, h0)
        e = rng.standard_normal((n, k + 1))
        eps2 = h0 * e[:, 0] ** 2
        neg = (e[:, 0] < 0).astype(float)
        for j in range(k, 0, -1):
            p = spec.regimes[spec.schedule.regime_index(j - 1)]
            h = p.omega + (p.alpha + p.gamma * neg) * eps2 + p.beta * h
            eps2 = h * e[:, k + 1 - j] ** 2
            neg = (e[:, k + 1 - j] < 0).astype(float)
        se = h.std(ddof=1) / np.sqrt(n)
        assert abs(h.mean() - want) < 3.0 * se


class TestVarianceMse:
    def test_symmetric_one_step(self):
        spec = TvGarchSpec.constant(0.01, 0.05, 0.0, 0.90)
        got = var.variance_mse(spec, 1, [1.0], ShockMoments.gaussian())
        assert got == pytest.approx(2.0 * 0.05**2 * 1.0)
        assert got == pytest.approx(0.005)

    def test_eps_sq_adds_current_term(self):
        spec = TvGarchSpec.constant(0.01, 0.05, 0.0, 0.90)
        shock = ShockMoments.gaussian()
        base = var.variance_mse(spec, 1, [1.0], shock)
        full = var.variance_mse(spec, 1, [1.0, 1.3], shock, target="eps_sq")
        assert full == pytest.approx(base + 2.0 * 1.3)

    def test_matches_monte_carlo(self, rng):
        # unconditional MSE: the conditioning variance is drawn from its
        # stationary law, every path supplies its own predictor
        from abgarch import montecarlo as mc
        from abgarch.params import TvArSpec

        spec = TvGarchSpec.from_lists([3], omega=[0.02, 0.04],
                                      alpha=[0.06, 0.05], gamma=[0.05, 0.02],
                                      beta=[0.85, 0.80])
        shock = ShockMoments.gaussian()
        k, n = 5, 150_000
        cfg = mc.SimConfig(ar=TvArSpec.constant(0.0, 0.0), garch=spec,
                           length=k + 1, paths=n, burn_in=400, seed=31,
                           keep=("h",))
        out = mc.simulate(cfg)
        zbar = var.persistence_products_expected(spec, k)
        drift = sum(zbar[r]
                    * spec.regimes[spec.schedule.regime_index(r)].omega
                    for r in range(k))
        pred = drift + zbar[k] * out.h[:, out.column(k)]
        fe = out.h[:, out.column(0)] - pred
        sample_mse = np.mean(fe**2)
        se = np.std(fe**2, ddof=1) / np.sqrt(n)
        hs = var.h_second_moment_path(spec, shock, np.arange(k, 0, -1))
        want = var.variance_mse(spec, k, hs.h_second, shock)
        assert abs(sample_mse - want) < 3.0 * se


class TestUnconditionalVariancePath:
    def test_sp500_anchors(self):
        spec = sp500_spec()
        path = var.unconditional_variance_path(
            spec, [-10_000, 326, 326 + 148, 326 + 148 + 2985])
        assert path.values[0] == pytest.approx(0.100, abs=0.002)
        assert path.values[1] == pytest.approx(0.228, abs=0.002)
        assert path.values[2] == pytest.approx(0.105, abs=0.002)
        assert path.values[3] == pytest.approx(0.061, abs=0.002)
        assert path.future_limit == pytest.approx(0.100, abs=0.002)
        assert path.past_limit == pytest.approx(0.061, abs=0.002)

    def test_nikkei_limits(self):
        spec = TvGarchSpec.from_lists(
            [5000], omega=0.007, alpha=[0.019, 0.019],
            gamma=[0.117, 0.117], beta=[0.901, 0.820])
        path = var.unconditional_variance_path(spec, [0])
        assert path.future_limit == pytest.approx(0.326, abs=0.002)
        assert path.past_limit == pytest.approx(0.068, abs=0.002)

    def test_dax_limits_and_mid_segment(self):
        # three effective breaks; the middle segments are long enough that
        # the value at each break edge is close to that regime's own limit
        gaps = [260, 1200, 1550]
        breaks = list(np.cumsum(gaps))
        spec = TvGarchSpec.from_persistence(
            breaks, omega=0.011, persistence=[0.976, 0.938, 0.9795, 0.9505])
        path = var.unconditional_variance_path(
            spec, [-10_000, breaks[0], 10_000])
        assert path.values[0] == pytest.approx(0.458, abs=0.002)
        assert path.values[1] == pytest.approx(0.177, abs=0.002)
        assert path.values[2] == pytest.approx(0.222, abs=0.002)

    def test_constant_garch_flat(self):
        spec = TvGarchSpec.constant(0.02, 0.05, 0.02, 0.88)
        path = var.unconditional_variance_path(spec, [-50, 0, 50])
        lim = 0.02 / (1 - 0.95)
        assert np.allclose(path.values, lim)
        assert path.future_limit == pytest.approx(lim)

    def test_divergence_names_regime(self):
        spec = TvGarchSpec.from_lists([10], omega=0.01, alpha=[0.05, 0.2],
                                      gamma=0.0, beta=[0.9, 0.85])
        with pytest.raises(DivergenceError, match="oldest"):
            var.unconditional_variance_path(spec, [0])

    def test_boundary_consistency_across_segments(self, rng):
        # stepping the one-step mean recursion across a break must agree
        # with the closed form on both sides
        spec = random_garch_spec(rng, max_breaks=3)
        offs = np.arange(-5, 70)
        path = var.unconditional_variance_path(spec, offs)
        for j in range(len(offs) - 1, 0, -1):
            p = spec.regimes[spec.schedule.regime_index(int(offs[j - 1]))]
            stepped = p.omega + var.regime_persistence(p) * path.values[j]
            assert stepped == pytest.approx(path.values[j - 1], rel=1e-12)

    def test_ma_infinity_truncation_reproduces_path(self, rng):
        # the truncated expected-weights sum converges to the closed form
        spec = random_garch_spec(rng, max_breaks=2, max_persistence=0.9)
        for off in (-3, 0, 7, 30):
            zbar = var.persistence_products_expected(spec, 600, ref_offset=off)
            omegas = [spec.regimes[spec.schedule.regime_index(off + r)].omega
                      for r in range(600)]
            approx = float(np.dot(zbar[:600], omegas))
            want = var.unconditional_variance(spec, off)
            assert approx == pytest.approx(want, rel=1e-9)


class TestHSecondMomentPath:
    def test_classical_symmetric_fixed_point(self):
        # gamma = 0, Gaussian shocks: solve the stated recursion at its
        # fixed point and compare with the classical closed form
        w, a, b = 0.02, 0.05, 0.88
        spec = TvGarchSpec.constant(w, a, 0.0, b)
        res = var.h_second_moment_path(spec, ShockMoments.gaussian(), [0])
        cbar = a + b
        want = w**2 * (1 + cbar) / ((1 - cbar) * (1 - b**2 - 2 * a * b - 3 * a**2))
        assert res.h_second[0] == pytest.approx(want, rel=1e-12)
        assert res.v_variance[0] == pytest.approx(2.0 * want, rel=1e-12)

    def test_degenerate_omega_limit(self):
        # as omega shrinks the second moment collapses quadratically
        spec = TvGarchSpec.constant(1e-8, 0.05, 0.0, 0.88)
        res = var.h_second_moment_path(spec, ShockMoments.gaussian(), [0])
        assert res.h_second[0] == pytest.approx(0.0, abs=1e-12)

    def test_existence_condition(self):
        spec = TvGarchSpec.constant(0.01, 0.30, 0.0, 0.60)
        # E(M^2) = b^2 + 2ab + 3a^2 = 0.36 + 0.36 + 0.27 = 0.99 < 1 fine;
        # raising alpha pushes it over one
        var.h_second_moment_path(spec, ShockMoments.gaussian(), [0])
        bad = TvGarchSpec.constant(0.01, 0.35, 0.0, 0.60)
        with pytest.raises(DivergenceError):
            var.h_second_moment_path(bad, ShockMoments.gaussian(), [0])

    def test_cg1_diagnostic(self):
        spec = TvGarchSpec.constant(0.01, 0.05, 0.04, 0.88)
        res = var.h_second_moment_path(spec, ShockMoments.gaussian(), [0])
        assert res.cg1.converges
        ab, g = 0.93, 0.04
        assert res.cg1.tail_rate == pytest.approx(ab**2 + ab * g + g**2 / 2)

    def test_one_break_matches_monte_carlo(self, rng):
        from abgarch import montecarlo as mc
        from abgarch.params import TvArSpec

        spec = TvGarchSpec.from_lists([6], omega=[0.03, 0.05],
                                      alpha=[0.05, 0.08], gamma=[0.04, 0.02],
                                      beta=[0.82, 0.78])
        cfg = mc.SimConfig(ar=TvArSpec.constant(0.0, 0.0), garch=spec,
                           length=12, paths=200_000, burn_in=400, seed=17,
                           keep=("h",))
        out = mc.simulate(cfg)
        offsets = np.array([0, 5, 6, 10])
        res = var.h_second_moment_path(spec, ShockMoments.gaussian(), offsets)
        for off, want in zip(offsets, res.h_second):
            x = out.h[:, out.column(int(off))] ** 2
            se = x.std(ddof=1) / np.sqrt(x.shape[0])
            assert abs(x.mean() - want) < 3.0 * se

    def test_h_mean_agrees_with_closed_form(self, rng):
        spec = random_garch_spec(rng, max_breaks=2, max_persistence=0.95)
        offs = np.array([-4, 0, 3, 11, 40])
        res = var.h_second_moment_path(spec, ShockMoments.gaussian(), offs)
        for off, got in zip(offs, res.h_mean):
            assert got == pytest.approx(
                var.unconditional_variance(spec, int(off)), rel=1e-11)
        # second moment dominates squared first moment
        assert np.all(res.h_second >= res.h_mean**2)
