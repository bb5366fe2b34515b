import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abgarch.errors import SpecError
from abgarch.params import (ArParams, BreakSchedule, GarchParams, ShockMoments,
                            TvArSpec, TvGarchSpec, coeff_at,
                            increments_from_regimes, persistence,
                            regime_persistence, regimes_from_increments)


def figure1_panel_b():
    return TvArSpec.from_lists([100, 120, 140], 0.0, [0.98, 0.80, 0.70, 0.90])


class TestBreakSchedule:
    def test_invariants(self):
        s = BreakSchedule((100, 120, 140), horizon=200)
        assert s.n_breaks == 3 and s.n_regimes == 4

    def test_rejects_bad_offsets(self):
        with pytest.raises(SpecError):
            BreakSchedule((0, 10))
        with pytest.raises(SpecError):
            BreakSchedule((10, 10))
        with pytest.raises(SpecError):
            BreakSchedule((20, 10))
        with pytest.raises(SpecError):
            BreakSchedule((10,), horizon=10)

    def test_empty_schedule_allowed(self):
        s = BreakSchedule()
        assert s.n_regimes == 1
        assert s.regime_index(0) == 0
        assert s.regime_index(10**6) == 0


class TestCoeffAt:
    def test_no_breaks_returns_single_regime(self):
        spec = TvArSpec.constant(0.1, 0.5, 0.2)
        for off in (0, 1, 7, 10**4):
            assert coeff_at(spec, off) == ArParams(0.1, 0.5, 0.2)

    def test_figure1_interior_offset(self):
        # offset 110 lies between the first two breaks: second regime
        assert coeff_at(figure1_panel_b(), 110).ar1 == 0.80

    def test_boundary_belongs_to_older_regime(self):
        # derived from the per-regime index ranges: regime l covers
        # offsets k_{l-1} .. k_l - 1, so offset k_1 opens regime 2
        spec = figure1_panel_b()
        assert coeff_at(spec, 99).ar1 == 0.98
        assert coeff_at(spec, 100).ar1 == 0.80
        assert coeff_at(spec, 139).ar1 == 0.70
        assert coeff_at(spec, 140).ar1 == 0.90

    def test_beyond_horizon_is_oldest(self):
        assert coeff_at(figure1_panel_b(), 10**6).ar1 == 0.90

    def test_negative_offset_rejected(self):
        with pytest.raises(SpecError):
            coeff_at(figure1_panel_b(), -1)

    @given(st.integers(0, 300))
    @settings(max_examples=60, deadline=None)
    def test_piecewise_constant(self, off):
        spec = figure1_panel_b()
        params = coeff_at(spec, off)
        breaks = spec.schedule.offsets
        nxt = off + 1
        if nxt in breaks:
            assert params != coeff_at(spec, nxt)
        else:
            assert params == coeff_at(spec, nxt)


class TestPersistence:
    def test_nikkei_pre_break(self):
        p = GarchParams(0.007, 0.019, 0.117, 0.820)
        assert regime_persistence(p) == pytest.approx(0.8975)
        assert round(regime_persistence(p), 3) == pytest.approx(0.897, abs=1e-9)

    def test_symmetric_reduces_to_alpha_plus_beta(self):
        p = GarchParams(0.01, 0.05, 0.0, 0.9)
        assert regime_persistence(p) == pytest.approx(0.95)

    def test_sp_base_regime(self):
        p = GarchParams(0.001, 0.018, 0.023, 0.954)
        assert regime_persistence(p) == pytest.approx(0.9835)

    def test_ordering_most_recent_first(self):
        spec = TvGarchSpec.from_lists([50], omega=[0.01, 0.02],
                                      alpha=[0.05, 0.04], gamma=[0.0, 0.0],
                                      beta=[0.90, 0.80])
        assert persistence(spec) == pytest.approx((0.95, 0.84))


class TestGarchSpecInvariants:
    def test_rejects_nonpositive_omega(self):
        with pytest.raises(SpecError):
            TvGarchSpec.constant(0.0, 0.05, 0.0, 0.9)

    def test_rejects_negative_alpha_plus_gamma(self):
        with pytest.raises(SpecError):
            TvGarchSpec.constant(0.01, 0.05, -0.06, 0.9)

    def test_accepts_negative_gamma_within_bound(self):
        spec = TvGarchSpec.constant(0.01, 0.05, -0.05, 0.9)
        assert spec.regimes[0].gamma == -0.05


class TestDummyRegimeBijection:
    def test_sp_cumulative_map(self):
        # S&P columns: increments switch on chronologically (oldest break
        # first); the most recent regime accumulates every increment
        base = GarchParams(0.001, 0.018, 0.023, 0.954)
        incs = [GarchParams(0.0, -0.039, 0.092, 0.0),
                GarchParams(0.0, 0.0, 0.113, -0.048),
                GarchParams(0.0, 0.0, -0.094, 0.039)]
        regimes = regimes_from_increments(base, incs)
        pers = [regime_persistence(r) for r in regimes]
        assert pers == pytest.approx([0.991, 0.999, 0.9905, 0.9835])

    @given(st.integers(0, 5), st.integers(0, 2**31 - 1))
    @settings(max_examples=40, deadline=None)
    def test_roundtrip(self, n_breaks, seed):
        r = np.random.default_rng(seed)
        base = GarchParams(*r.normal(0.1, 0.3, 4))
        incs = [GarchParams(*r.normal(0, 0.1, 4)) for _ in range(n_breaks)]
        regimes = regimes_from_increments(base, incs)
        base2, incs2 = increments_from_regimes(regimes)
        assert np.allclose(base2, base)
        for a, b in zip(incs, incs2):
            assert np.allclose(a, b, atol=1e-12)


class TestShockMoments:
    def test_gaussian(self):
        m = ShockMoments.gaussian()
        assert m.fourth == 3.0 and m.excess == 2.0 and m.neg_prob == 0.5

    def test_student_t(self):
        m = ShockMoments.student_t(8.0)
        assert m.fourth == pytest.approx(4.5)

    def test_jensen_bound(self):
        with pytest.raises(SpecError):
            ShockMoments(fourth=0.5)

    def test_df_bound(self):
        with pytest.raises(SpecError):
            ShockMoments.student_t(4.0)
