"""Residual serial-correlation diagnostics.

Ljung-Box for single series (optionally on squared values) and the Hosking
multivariate portmanteau for systems, both against chi-square references.
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from .errors import DataError

__all__ = ["ljung_box", "hosking_q"]


def ljung_box(residuals, lags: int, squared: bool = False):
    """Ljung-Box statistic and p-value on (squared) residuals.

    Returns ``(statistic, p_value)``; the reference distribution is
    chi-square with ``lags`` degrees of freedom.
    """
    x = np.asarray(residuals, dtype=float).ravel()
    T = x.shape[0]
    if T <= lags:
        raise DataError("series shorter than the number of lags")
    if squared:
        x = x**2
    x = x - x.mean()
    denom = np.dot(x, x)
    if denom <= 0:
        raise DataError("degenerate (constant) series")
    stat = 0.0
    for j in range(1, lags + 1):
        r = np.dot(x[j:], x[:-j]) / denom
        stat += r * r / (T - j)
    stat *= T * (T + 2.0)
    return float(stat), float(stats.chi2.sf(stat, lags))


def hosking_q(residuals, lags: int, squared: bool = False, var_order: int = 0):
    """Hosking multivariate portmanteau statistic and p-value.

    ``residuals`` is (T, N).  Uses the small-sample weighting
    T^2 sum_j tr(C_j' C_0^-1 C_j C_0^-1) / (T - j) with N^2*(lags - var_order)
    degrees of freedom; pass the fitted VAR order to adjust them.
    """
    u = np.asarray(residuals, dtype=float)
    if u.ndim != 2:
        raise DataError("residuals must be a (T, N) array")
    T, N = u.shape
    if T <= lags:
        raise DataError("series shorter than the number of lags")
    if squared:
        u = u**2
    u = u - u.mean(axis=0)
    c0 = u.T @ u / T
    if np.linalg.matrix_rank(c0) < N:
        raise DataError("rank-deficient residual covariance")
    c0inv = np.linalg.inv(c0)
    stat = 0.0
    for j in range(1, lags + 1):
        cj = u[j:].T @ u[:-j] / T
        m = cj.T @ c0inv @ cj @ c0inv
        stat += np.trace(m) / (T - j)
    stat *= T * T
    df = N * N * (lags - var_order)
    return float(stat), float(stats.chi2.sf(stat, df))
