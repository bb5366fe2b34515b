"""Closed-form objects for the AR(2) mean process with breaks.

Everything here is built from the time-varying impulse weights ``w[k]``: the
determinants of the k-by-k tridiagonal matrix stacking the lag coefficients
along the horizon.  They generalise the familiar constant-coefficient AR
psi-weights and are computed by the O(k) continuant recursion

    w[k] = ar1(s - k + 1) * w[k-1] + ar2(s - k + 2) * w[k-2],

with w[0] = 1 and w[-1] = 0, for a fixed reference time ``s``.  The k-step
solution, predictor, forecast-error variance, unconditional moments and
autocovariances are all weighted sums over these values.

Infinite sums are truncated once the geometric tail bound of the oldest
regime drops below a tolerance; the bound is reported alongside the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, SpecError
from .params import TvArSpec

__all__ = [
    "MeanSolution",
    "MeanMomentResult",
    "SummabilityReport",
    "impulse_weight",
    "impulse_weights",
    "general_solution",
    "predict_mean",
    "forecast_error",
    "forecast_error_variance",
    "check_summability",
    "unconditional_moments",
    "autocovariance",
    "autocorrelation",
]

_MAX_EXTRA_TERMS = 4_000_000


def _coeff_lists(spec: TvArSpec, start: int, count: int):
    """Per-offset (drift, ar1, ar2) lists for offsets start..start+count-1.

    Negative offsets extend regime 1 into the future.
    """
    if count <= 0:
        return [], [], []
    idx = spec.schedule.regime_indices(np.arange(start, start + count))
    drift = [spec.regimes[i].drift for i in idx]
    ar1 = [spec.regimes[i].ar1 for i in idx]
    ar2 = [spec.regimes[i].ar2 for i in idx]
    return drift, ar1, ar2


def impulse_weights(spec: TvArSpec, kmax: int, ref_offset: int = 0) -> np.ndarray:
    """Impulse weights w[0..kmax] for reference time ``t - ref_offset``."""
    if kmax < 0:
        raise SpecError("kmax must be non-negative")
    _, ar1, ar2 = _coeff_lists(spec, ref_offset - 1, kmax + 1)
    # ar1[j] / ar2[j] now hold the coefficients at offset ref_offset - 1 + j
    w = [0.0] * (kmax + 1)
    w[0] = 1.0
    prev2, prev = 0.0, 1.0
    for k in range(1, kmax + 1):
        cur = ar1[k] * prev + ar2[k - 1] * prev2
        w[k] = cur
        prev2, prev = prev, cur
    return np.asarray(w)


def impulse_weight(spec: TvArSpec, k: int, ref_offset: int = 0) -> float:
    """Single impulse weight; k = 0 gives 1, k = -1 gives 0."""
    if k < -1:
        raise SpecError("k must be >= -1")
    if k == -1:
        return 0.0
    return float(impulse_weights(spec, k, ref_offset)[k])


@dataclass(frozen=True)
class MeanSolution:
    """k-step solution split into its homogeneous and particular parts."""

    total: float
    homogeneous: float
    particular: float


def _solution_parts(spec: TvArSpec, horizon: int, init, ref_offset: int = 0):
    if horizon < 1:
        raise SpecError("horizon must be >= 1")
    y_km, y_km1 = float(init[0]), float(init[1])
    w = impulse_weights(spec, horizon, ref_offset)
    drift, _, ar2 = _coeff_lists(spec, ref_offset, horizon)
    hom = w[horizon] * y_km + ar2[horizon - 1] * w[horizon - 1] * y_km1
    # oldest term first
    drift_sum = math.fsum(w[r] * drift[r] for r in range(horizon - 1, -1, -1))
    return w, float(hom), drift_sum


def general_solution(spec: TvArSpec, horizon: int, init, shocks) -> MeanSolution:
    """Value at the reference time from conditions ``horizon`` steps back.

    ``init`` is ``(y_{t-k}, y_{t-k-1})``; ``shocks`` holds the k error terms
    from time t-k+1 through t, oldest first.
    """
    shocks = np.asarray(shocks, dtype=float)
    if shocks.shape != (horizon,):
        raise SpecError(f"expected {horizon} shocks, got shape {shocks.shape}")
    w, hom, drift_sum = _solution_parts(spec, horizon, init)
    shock_sum = math.fsum(w[r] * shocks[horizon - 1 - r]
                          for r in range(horizon - 1, -1, -1))
    particular = drift_sum + shock_sum
    return MeanSolution(hom + particular, hom, particular)


def predict_mean(spec: TvArSpec, horizon: int, init,
                 ref_offset: int = 0) -> float:
    """Optimal linear k-step predictor: the solution with all shocks zeroed.

    ``ref_offset`` moves the predicted time; a negative value targets a
    future time, with the conditioning pair sitting at offsets
    ``ref_offset + horizon`` and one step older.
    """
    _, hom, drift_sum = _solution_parts(spec, horizon, init, ref_offset)
    return hom + drift_sum


def forecast_error(spec: TvArSpec, horizon: int, shocks) -> float:
    """Realised k-step forecast error: the shock part of the solution."""
    shocks = np.asarray(shocks, dtype=float)
    if shocks.shape != (horizon,):
        raise SpecError(f"expected {horizon} shocks, got shape {shocks.shape}")
    w = impulse_weights(spec, horizon, 0)
    return math.fsum(w[r] * shocks[horizon - 1 - r]
                     for r in range(horizon - 1, -1, -1))


def forecast_error_variance(spec: TvArSpec, horizon: int, error_vars,
                            ref_offset: int = 0) -> float:
    """Mean square error of the k-step predictor.

    ``error_vars`` holds the k error variances over the prediction window,
    oldest first (the newest entry sits at the predicted time).
    """
    sig = np.asarray(error_vars, dtype=float)
    if sig.shape != (horizon,):
        raise SpecError(f"expected {horizon} variances, got shape {sig.shape}")
    if np.any(sig <= 0):
        raise SpecError("error variances must be positive")
    w = impulse_weights(spec, horizon, ref_offset)
    return math.fsum(w[r] ** 2 * sig[horizon - 1 - r] for r in range(horizon))


@dataclass(frozen=True)
class SummabilityReport:
    convergent: bool
    tail_rate: float


def check_summability(spec: TvArSpec) -> SummabilityReport:
    """Whether the infinite-past sums converge.

    With piecewise-constant coefficients only the oldest regime contributes
    infinitely many terms, so convergence is governed by the spectral radius
    of its companion matrix; interior explosive regimes are admissible.
    """
    oldest = spec.regimes[-1]
    comp = np.array([[oldest.ar1, oldest.ar2], [1.0, 0.0]])
    rate = float(np.max(np.abs(np.linalg.eigvals(comp))))
    return SummabilityReport(convergent=rate < 1.0, tail_rate=rate)


@dataclass(frozen=True)
class MeanMomentResult:
    """Unconditional first/second moments at one reference time."""

    mean: float
    variance: float
    second_moment: float
    autocov: dict
    truncation_tail: float


def _sigma2_fn(error_vars):
    if callable(error_vars):
        return error_vars
    s = float(error_vars)
    return lambda offset: s


def _require_convergent(spec: TvArSpec) -> float:
    rep = check_summability(spec)
    if not rep.convergent:
        raise DivergenceError(
            f"oldest regime companion spectral radius {rep.tail_rate:.6g} >= 1"
        )
    return rep.tail_rate


def _tail_start(spec: TvArSpec, ref_offset: int) -> int:
    offs = spec.schedule.offsets
    last = offs[-1] if offs else 0
    return max(last - ref_offset, 0) + 2


def _truncated_sum(spec, ref_offset, term, scale_fn, rate, tol):
    """Sum term(r) for r >= 0 until the oldest-regime geometric bound < tol.

    ``term(r)`` must eventually decay like rate**r (mean sums) or rate**(2r)
    (variance-type sums); ``scale_fn(r)`` supplies the bound's magnitude from
    the latest raw weights.  Returns (value, final bound).
    """
    start = _tail_start(spec, ref_offset)
    terms = []
    r = 0
    bound = math.inf
    while True:
        terms.append(term(r))
        if r >= start and (r - start) % 8 == 0:
            bound = scale_fn(r)
            if bound < tol:
                break
        if r - start > _MAX_EXTRA_TERMS:
            raise DivergenceError("truncated sum failed to converge")
        r += 1
    return math.fsum(terms), bound


def unconditional_moments(spec: TvArSpec, error_vars, ref_offset: int = 0,
                          lags=(), tol: float = 1e-12) -> MeanMomentResult:
    """Unconditional mean, variance and optional autocovariances.

    ``error_vars`` is a constant or a callable mapping a backward offset to
    the error variance at that time (negative offsets address future times);
    it must settle to a constant in the infinite past.
    """
    rate = _require_convergent(spec)
    sig = _sigma2_fn(error_vars)
    i = ref_offset
    gl = 1.0 / (1.0 - rate) if rate < 1 else math.inf
    gl2 = 1.0 / (1.0 - rate**2) if rate < 1 else math.inf
    drift_old = abs(spec.regimes[-1].drift)

    w = _WeightSeq(spec, i)
    mean, b_mean = _truncated_sum(
        spec, i,
        lambda r: w.get(r) * spec.regimes[spec.schedule.regime_index(i + r)].drift,
        lambda r: max(abs(w.get(r)), abs(w.get(r - 1))) * drift_old * rate * gl,
        rate, tol)

    wv = _WeightSeq(spec, i)
    var, b_var = _truncated_sum(
        spec, i,
        lambda r: wv.get(r) ** 2 * _pos_sigma(sig, i + r),
        lambda r: max(wv.get(r) ** 2, wv.get(r - 1) ** 2)
        * _pos_sigma(sig, i + r) * rate**2 * gl2,
        rate, tol)

    autocov = {}
    tail = max(b_mean, b_var)
    for k in lags:
        g, b = _autocov_tail(spec, sig, int(k), i, rate, tol)
        autocov[int(k)] = g
        tail = max(tail, b)
    return MeanMomentResult(mean=mean, variance=var,
                            second_moment=mean**2 + var,
                            autocov=autocov, truncation_tail=tail)


class _WeightSeq:
    """Impulse weights for one reference time, grown on demand."""

    def __init__(self, spec: TvArSpec, ref_offset: int):
        self.spec = spec
        self.ref = ref_offset
        self.w = [1.0]

    def get(self, r: int) -> float:
        if r < 0:
            return 0.0
        while len(self.w) <= r:
            k = len(self.w)
            p = self.spec.regimes[self.spec.schedule.regime_index(self.ref + k - 1)]
            q = self.spec.regimes[self.spec.schedule.regime_index(self.ref + k - 2)]
            prev = self.w[k - 1]
            prev2 = self.w[k - 2] if k >= 2 else 0.0
            self.w.append(p.ar1 * prev + q.ar2 * prev2)
        return self.w[r]


def _pos_sigma(sig, offset: int) -> float:
    v = float(sig(offset))
    if v <= 0:
        raise SpecError(f"error variance at offset {offset} is not positive")
    return v


def _autocov_tail(spec, sig, lag, ref_offset, rate, tol):
    if lag < 0:
        raise SpecError("lag must be non-negative")
    wa = _WeightSeq(spec, ref_offset)          # anchor s
    wb = _WeightSeq(spec, ref_offset + lag)    # anchor s - lag
    gl2 = 1.0 / (1.0 - rate**2)
    return _truncated_sum(
        spec, ref_offset + lag,
        lambda r: wa.get(lag + r) * wb.get(r) * _pos_sigma(sig, ref_offset + lag + r),
        lambda r: max(abs(wa.get(lag + r) * wb.get(r)),
                      abs(wa.get(lag + r - 1) * wb.get(r - 1)))
        * _pos_sigma(sig, ref_offset + lag + r) * rate**2 * gl2,
        rate, tol)


def autocovariance(spec: TvArSpec, error_vars, lag: int, ref_offset: int = 0,
                   tol: float = 1e-12) -> float:
    """Covariance of the values at offsets ``ref_offset`` and ``ref_offset + lag``."""
    rate = _require_convergent(spec)
    sig = _sigma2_fn(error_vars)
    g, _ = _autocov_tail(spec, sig, int(lag), ref_offset, rate, tol)
    return g


def autocorrelation(spec: TvArSpec, error_vars, lag: int, ref_offset: int = 0,
                    tol: float = 1e-12) -> float:
    """Autocorrelation at the given lag and reference offset."""
    g = autocovariance(spec, error_vars, lag, ref_offset, tol)
    v0 = unconditional_moments(spec, error_vars, ref_offset, tol=tol).variance
    vk = unconditional_moments(spec, error_vars, ref_offset + lag, tol=tol).variance
    return g / math.sqrt(v0 * vk)
