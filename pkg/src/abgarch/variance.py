"""Closed-form objects for the AGARCH(1,1) variance process with breaks.

Writing the conditional variance as an ARMA-type recursion in the squared
innovation,

    h(s) = omega(s) + c(s) h(s-1) + a*(s) v(s-1),

with c(s) = alpha(s) + beta(s) + gamma(s)*1{e(s-1) < 0} and v = eps^2 - h,
every multi-step object is a weighted sum over products of the persistence
terms c(.).  Realised products condition on an observed sign path; expected
products replace each factor by its mean alpha + beta + neg_prob*gamma.
The abrupt-break unconditional variance path has a fully closed form, used
for the per-offset expected conditional variance and its two limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, SpecError
from .params import GarchParams, ShockMoments, TvGarchSpec, regime_persistence

__all__ = [
    "VarianceSolution",
    "VariancePath",
    "InnovationVariance",
    "persistence_product_expected",
    "persistence_products_expected",
    "persistence_products_realized",
    "innovation_weights_realized",
    "innovation_weight_sq_expected",
    "garch_general_solution",
    "predict_variance",
    "variance_mse",
    "unconditional_variance",
    "unconditional_variance_path",
    "h_second_moment_path",
]


def _regime(spec: TvGarchSpec, offset: int) -> GarchParams:
    return spec.regimes[spec.schedule.regime_index(offset)]


def _cbar_list(spec: TvGarchSpec, start: int, count: int, neg_prob: float):
    idx = spec.schedule.regime_indices(np.arange(start, start + count))
    return [regime_persistence(spec.regimes[i], neg_prob) for i in idx]


def persistence_products_expected(spec: TvGarchSpec, kmax: int,
                                  ref_offset: int = 0,
                                  neg_prob: float = 0.5) -> np.ndarray:
    """Expected persistence products for k = 0..kmax at one reference time.

    Entry k is the product of the expected one-step persistence over the k
    most recent steps; entry 0 is 1.  For the break model this is the product
    of per-regime persistences raised to the regime lengths clipped to k.
    """
    if kmax < 0:
        raise SpecError("kmax must be non-negative")
    cb = _cbar_list(spec, ref_offset, kmax, neg_prob)
    out = np.empty(kmax + 1)
    out[0] = 1.0
    acc = 1.0
    for j, c in enumerate(cb):
        acc *= c
        out[j + 1] = acc
    return out


def persistence_product_expected(spec: TvGarchSpec, k: int, ref_offset: int = 0,
                                 neg_prob: float = 0.5) -> float:
    """Single expected persistence product; k = 0 gives 1."""
    return float(persistence_products_expected(spec, k, ref_offset, neg_prob)[k])


def _signs(sign_path, need: int) -> np.ndarray:
    sp = np.asarray(sign_path, dtype=float)
    if sp.ndim != 1 or sp.shape[0] < need:
        raise SpecError(f"sign path must supply at least {need} indicators")
    if np.any((sp != 0.0) & (sp != 1.0)):
        raise SpecError("sign path entries must be 0 or 1")
    return sp


def persistence_products_realized(spec: TvGarchSpec, kmax: int, sign_path,
                                  ref_offset: int = 0) -> np.ndarray:
    """Realised persistence products along an observed sign path.

    ``sign_path`` holds the negative-shock indicators for the kmax shocks
    preceding the reference time, oldest first: entry j flags the shock at
    backward offset kmax - j.
    """
    if kmax < 0:
        raise SpecError("kmax must be non-negative")
    sp = _signs(sign_path, kmax)
    out = np.empty(kmax + 1)
    out[0] = 1.0
    acc = 1.0
    for j in range(kmax):  # factor c at time s - j, sign of shock at s - j - 1
        p = _regime(spec, ref_offset + j)
        s = sp[kmax - 1 - j]
        acc *= p.alpha + p.gamma * s + p.beta
        out[j + 1] = acc
    return out


def innovation_weights_realized(spec: TvGarchSpec, kmax: int, sign_path,
                                ref_offset: int = 0) -> np.ndarray:
    """Realised innovation weights g[1..kmax] (index 0 unused, set to 0).

    g[r] couples the variance innovation r steps back to the current
    variance: the realised persistence product over r-1 steps times the
    shock response alpha* in force at time s - r + 1.
    """
    zeta = persistence_products_realized(spec, max(kmax - 1, 0), sign_path[1:]
                                         if kmax >= 1 else sign_path, ref_offset)
    sp = _signs(sign_path, kmax)
    g = np.zeros(kmax + 1)
    for r in range(1, kmax + 1):
        p = _regime(spec, ref_offset + r - 1)
        s = sp[kmax - r]  # sign of the shock at offset r
        g[r] = zeta[r - 1] * (p.alpha + p.gamma * s)
    return g


def innovation_weight_sq_expected(spec: TvGarchSpec, kmax: int,
                                  shock: ShockMoments,
                                  ref_offset: int = 0) -> np.ndarray:
    """Expected squared innovation weights E(g^2)[1..kmax] (index 0 set to 0).

    Uses the sign/magnitude independence of the shocks:
    E[(alpha + gamma S)^2] = alpha^2 + 2 p alpha gamma + p gamma^2 and
    E[c^2] = (alpha+beta)^2 + 2 p (alpha+beta) gamma + p gamma^2 with
    p the negative-shock probability.
    """
    p = shock.neg_prob
    out = np.zeros(kmax + 1)
    acc = 1.0  # E(zeta^2) over r-1 factors
    for r in range(1, kmax + 1):
        q = _regime(spec, ref_offset + r - 1)
        out[r] = acc * (q.alpha**2 + 2.0 * p * q.alpha * q.gamma + p * q.gamma**2)
        ab = q.alpha + q.beta
        acc *= ab**2 + 2.0 * p * ab * q.gamma + p * q.gamma**2
    return out


@dataclass(frozen=True)
class VarianceSolution:
    total: float
    homogeneous: float
    particular: float


def garch_general_solution(spec: TvGarchSpec, horizon: int, h_start: float,
                           innovations, sign_path) -> VarianceSolution:
    """Conditional variance at the reference time from a start value k steps back.

    ``innovations`` holds the k variance innovations v = eps^2 - h from time
    t-k through t-1, oldest first; ``sign_path`` the matching k negative-shock
    indicators for the shocks at offsets k..1, oldest first.  Equals the
    forward recursion of the one-step variance equation.
    """
    if horizon < 1:
        raise SpecError("horizon must be >= 1")
    if h_start <= 0:
        raise SpecError("starting variance must be positive")
    v = np.asarray(innovations, dtype=float)
    if v.shape != (horizon,):
        raise SpecError(f"expected {horizon} innovations, got shape {v.shape}")
    zeta = persistence_products_realized(spec, horizon, sign_path)
    g = innovation_weights_realized(spec, horizon, sign_path)
    hom = zeta[horizon] * h_start
    drift_sum = math.fsum(zeta[r] * _regime(spec, r).omega
                          for r in range(horizon - 1, -1, -1))
    # v[horizon - r] is the innovation r steps back
    shock_sum = math.fsum(g[r] * v[horizon - r] for r in range(horizon, 0, -1))
    particular = drift_sum + shock_sum
    return VarianceSolution(hom + particular, hom, particular)


def predict_variance(spec: TvGarchSpec, horizon: int, h_start: float,
                     neg_prob: float = 0.5, ref_offset: int = 0) -> float:
    """Expected variance k steps ahead of a known value ``h_start``.

    ``ref_offset`` moves the predicted time; a negative value targets the
    future, with ``h_start`` sitting at offset ``ref_offset + horizon``.
    """
    if horizon < 1:
        raise SpecError("horizon must be >= 1")
    if h_start <= 0:
        raise SpecError("starting variance must be positive")
    zbar = persistence_products_expected(spec, horizon, ref_offset, neg_prob)
    acc = math.fsum(zbar[r] * _regime(spec, ref_offset + r).omega
                    for r in range(horizon - 1, -1, -1))
    return acc + zbar[horizon] * h_start


def variance_mse(spec: TvGarchSpec, horizon: int, h_second_moments,
                 shock: ShockMoments, target: str = "h") -> float:
    """Mean square error of the k-step variance (or squared-shock) forecast.

    For ``target='h'`` supply the k second moments E(h^2) from time t-k
    through t-1, oldest first.  For ``target='eps_sq'`` supply k+1 values
    ending with E(h_t^2); the extra current-time term carries weight 1.
    """
    hs = np.asarray(h_second_moments, dtype=float)
    need = horizon if target == "h" else horizon + 1
    if target not in ("h", "eps_sq"):
        raise SpecError("target must be 'h' or 'eps_sq'")
    if hs.shape != (need,):
        raise SpecError(f"expected {need} second moments, got shape {hs.shape}")
    if np.any(hs < 0):
        raise SpecError("second moments must be non-negative")
    gsq = innovation_weight_sq_expected(spec, horizon, shock)
    total = math.fsum(gsq[r] * hs[horizon - r] for r in range(1, horizon + 1))
    if target == "eps_sq":
        total += hs[horizon]  # r = 0 term, unit weight
    return shock.excess * total


@dataclass(frozen=True)
class VariancePath:
    """Expected conditional variance over a grid of backward offsets."""

    offsets: np.ndarray
    values: np.ndarray
    past_limit: float
    future_limit: float


def _persistences(spec: TvGarchSpec, neg_prob: float):
    return [regime_persistence(r, neg_prob) for r in spec.regimes]


def _check_oldest(spec: TvGarchSpec, cb) -> None:
    if cb[-1] >= 1.0:
        raise DivergenceError(
            f"oldest regime persistence {cb[-1]:.6g} >= 1: "
            "unconditional variance does not exist"
        )


def _geo_block(c: float, n: int) -> float:
    """Sum of c^0 + ... + c^(n-1)."""
    if n <= 0:
        return 0.0
    if c == 1.0:
        return float(n)
    return (1.0 - c**n) / (1.0 - c)


def unconditional_variance(spec: TvGarchSpec, offset: int,
                           neg_prob: float = 0.5) -> float:
    """Expected conditional variance at one backward offset (closed form).

    Sums the expected persistence products against the drift path: within
    the offset's own regime the sum is a finite geometric block, each older
    regime contributes its block scaled by the product of the persistences
    crossed on the way, and the oldest regime contributes its infinite tail
    (which requires its persistence below one).
    """
    cb = _persistences(spec, neg_prob)
    _check_oldest(spec, cb)
    offs = spec.schedule.offsets
    m = len(offs)
    p = spec.schedule.regime_index(offset) if offset >= 0 else 0
    total = 0.0
    prefix = 1.0
    for ell in range(p, m + 1):
        w = spec.regimes[ell].omega
        c = cb[ell]
        if ell == m:
            total += prefix * w / (1.0 - c)
        else:
            lo = offset if ell == p else offs[ell - 1]
            n = offs[ell] - lo
            total += prefix * w * _geo_block(c, n)
            prefix *= c**n
    return total


def unconditional_variance_path(spec: TvGarchSpec, offsets,
                                neg_prob: float = 0.5) -> VariancePath:
    """Expected conditional variance over a grid of offsets plus both limits.

    The past limit (before every break) always exists under the oldest-regime
    condition; the limit toward the infinite future exists only when the most
    recent regime's persistence is below one (NaN otherwise).
    """
    cb = _persistences(spec, neg_prob)
    _check_oldest(spec, cb)
    grid = np.asarray(offsets, dtype=int)
    vals = np.array([unconditional_variance(spec, int(i), neg_prob)
                     for i in grid.ravel()]).reshape(grid.shape)
    past = spec.regimes[-1].omega / (1.0 - cb[-1])
    future = (spec.regimes[0].omega / (1.0 - cb[0])) if cb[0] < 1.0 else math.nan
    return VariancePath(offsets=grid, values=vals,
                        past_limit=past, future_limit=future)


@dataclass(frozen=True)
class Cg1Diagnostic:
    """Tail diagnostic for the squared-weight series driving forecast MSEs."""

    converges: bool
    tail_rate: float


@dataclass(frozen=True)
class InnovationVariance:
    """Second-moment path of the conditional variance and its innovation."""

    offsets: np.ndarray
    h_mean: np.ndarray
    h_second: np.ndarray
    v_variance: np.ndarray
    cg1: Cg1Diagnostic


def _second_moment_factors(p: GarchParams, shock: ShockMoments):
    """E[M] and E[M^2] for the random one-step multiplier M = beta + alpha* e^2."""
    q = shock.neg_prob
    em = p.beta + p.alpha + q * p.gamma
    asq = p.alpha**2 + 2.0 * q * p.alpha * p.gamma + q * p.gamma**2
    em2 = p.beta**2 + 2.0 * p.beta * (p.alpha + q * p.gamma) + shock.fourth * asq
    return em, em2


def h_second_moment_path(spec: TvGarchSpec, shock: ShockMoments,
                         offsets) -> InnovationVariance:
    """E(h), E(h^2) and the innovation variance over a grid of offsets.

    Writing h(s) = omega + M(s-1) h(s-1) with M = beta + (alpha + gamma S) e^2
    independent of h(s-1), the first two moments obey the linear recursions

        E(h)   -> omega + E(M) E(h)
        E(h^2) -> omega^2 + 2 omega E(M) E(h) + E(M^2) E(h^2)

    iterated forward from the oldest regime's fixed point.  Existence needs
    E(M^2) < 1 in the oldest regime.  The innovation variance is the shock's
    excess kurtosis times E(h^2).
    """
    grid = np.asarray(offsets, dtype=int)
    cb = _persistences(spec, shock.neg_prob)
    _check_oldest(spec, cb)
    oldest = spec.regimes[-1]
    em_old, em2_old = _second_moment_factors(oldest, shock)
    if em2_old >= 1.0:
        raise DivergenceError(
            f"oldest regime second-moment factor {em2_old:.6g} >= 1: "
            "E(h^2) does not exist"
        )
    eh = oldest.omega / (1.0 - em_old)
    eh2 = (oldest.omega**2 + 2.0 * oldest.omega * em_old * eh) / (1.0 - em2_old)

    offs = spec.schedule.offsets
    start = offs[-1] if offs else 0
    lo = int(grid.min())
    h_mean = np.empty(grid.shape)
    h_sec = np.empty(grid.shape)
    # fixed point covers every offset at or past the oldest break
    mask = grid >= start
    h_mean[mask] = eh
    h_sec[mask] = eh2
    cur_h, cur_h2 = eh, eh2
    for i in range(start - 1, lo - 1, -1):
        p = _regime(spec, i)
        em, em2 = _second_moment_factors(p, shock)
        cur_h2 = p.omega**2 + 2.0 * p.omega * em * cur_h + em2 * cur_h2
        cur_h = p.omega + em * cur_h
        hit = grid == i
        h_mean[hit] = cur_h
        h_sec[hit] = cur_h2

    # tail ratio of the squared-weight series: E[c^2] of the oldest regime
    q = shock.neg_prob
    ab = oldest.alpha + oldest.beta
    ec2_old = ab**2 + 2.0 * q * ab * oldest.gamma + q * oldest.gamma**2
    cg1 = Cg1Diagnostic(converges=ec2_old < 1.0, tail_rate=ec2_old)
    return InnovationVariance(offsets=grid, h_mean=h_mean, h_second=h_sec,
                              v_variance=shock.excess * h_sec, cg1=cg1)
