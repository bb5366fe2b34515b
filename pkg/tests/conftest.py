"""Shared test helpers: random break specs and brute-force oracles.

The oracles here deliberately avoid the package's closed-form machinery:
determinants are evaluated directly, processes are iterated step by step,
and classical AR(2) moments come from the Yule-Walker equations.
"""

import numpy as np
import pytest

from abgarch.params import (ArParams, BreakSchedule, GarchParams, TvArSpec,
                            TvGarchSpec)


def random_break_schedule(rng, max_breaks=3, lo=3, hi=60) -> BreakSchedule:
    n = int(rng.integers(0, max_breaks + 1))
    if n == 0:
        return BreakSchedule()
    offsets = np.sort(rng.choice(np.arange(lo, hi), size=n, replace=False))
    return BreakSchedule(tuple(int(k) for k in offsets))


def random_ar_spec(rng, max_breaks=3, stable_tail=True) -> TvArSpec:
    sched = random_break_schedule(rng, max_breaks)
    regimes = []
    for i in range(sched.n_regimes):
        ar1 = float(rng.uniform(-1.2, 1.2))
        ar2 = float(rng.uniform(-0.5, 0.5))
        drift = float(rng.uniform(-0.5, 0.5))
        if stable_tail and i == sched.n_regimes - 1:
            # keep the infinite-past regime comfortably stationary
            ar1 = float(rng.uniform(-0.85, 0.85))
            ar2 = float(rng.uniform(-0.4, 0.4))
            while max(abs(np.roots([1.0, -ar1, -ar2]))) >= 0.95:
                ar1 *= 0.8
                ar2 *= 0.8
        regimes.append(ArParams(drift, ar1, ar2))
    return TvArSpec(tuple(regimes), sched)


def random_garch_spec(rng, max_breaks=3, max_persistence=0.97) -> TvGarchSpec:
    sched = random_break_schedule(rng, max_breaks)
    regimes = []
    for _ in range(sched.n_regimes):
        alpha = float(rng.uniform(0.01, 0.12))
        gamma = float(rng.uniform(-0.5, 1.5)) * alpha
        beta = float(rng.uniform(0.3, 0.9))
        cap = max_persistence
        cbar = alpha + beta + gamma / 2.0
        if cbar >= cap:
            beta -= cbar - cap + 0.02
        omega = float(rng.uniform(0.005, 0.1))
        regimes.append(GarchParams(omega, alpha, gamma, max(beta, 0.0)))
    return TvGarchSpec(tuple(regimes), sched)


def tridiag_matrix(spec: TvArSpec, k: int, ref_offset: int = 0) -> np.ndarray:
    """The k-by-k banded coefficient matrix whose determinant is w[k].

    Row i (1-based) carries ar1 at offset ref + k - i on the diagonal, -1 on
    the superdiagonal, and ar2 at the same time as the ar1 one row down.
    """
    m = np.zeros((k, k))
    for i in range(1, k + 1):
        t_off = ref_offset + k - i  # time t - off enters row i via ar1
        reg = spec.regimes[spec.schedule.regime_index(t_off)]
        m[i - 1, i - 1] = reg.ar1
        if i >= 2:
            m[i - 1, i - 2] = reg.ar2
        if i < k:
            m[i - 1, i] = -1.0
    return m


def iterate_mean(spec: TvArSpec, horizon: int, init, shocks) -> float:
    """Step the AR(2) recursion forward from (y_{t-k}, y_{t-k-1})."""
    y1, y2 = float(init[0]), float(init[1])
    for j, e in enumerate(shocks):  # shocks oldest first
        off = horizon - 1 - j
        reg = spec.regimes[spec.schedule.regime_index(off)]
        y = reg.drift + reg.ar1 * y1 + reg.ar2 * y2 + e
        y2, y1 = y1, y
    return y1


def iterate_garch(spec: TvGarchSpec, horizon: int, h_start, innovations,
                  sign_path) -> float:
    """Step h(s) = omega + c(s) h(s-1) + a*(s) v(s-1) forward.

    ``innovations`` and ``sign_path`` are oldest first, matching
    garch_general_solution.
    """
    h = float(h_start)
    for j in range(horizon):
        off = horizon - 1 - j
        reg = spec.regimes[spec.schedule.regime_index(off)]
        s = sign_path[j]
        v = innovations[j]
        astar = reg.alpha + reg.gamma * s
        h = reg.omega + (astar + reg.beta) * h + astar * v
    return h


def classical_ar2_autocov(drift, ar1, ar2, sigma2, lags):
    """Yule-Walker autocovariances of a stationary constant AR(2)."""
    denom = (1.0 + ar2) * ((1.0 - ar2) ** 2 - ar1**2)
    gamma0 = sigma2 * (1.0 - ar2) / denom
    gamma1 = ar1 * gamma0 / (1.0 - ar2)
    out = [gamma0, gamma1]
    for _ in range(2, max(lags) + 1 if lags else 0):
        out.append(ar1 * out[-1] + ar2 * out[-2])
    return {k: out[k] for k in lags}


@pytest.fixture
def rng():
    return np.random.default_rng(20240314)
