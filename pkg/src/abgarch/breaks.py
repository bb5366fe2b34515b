"""Data-driven variance breakdate detection.

Binary segmentation on the centred cumulative-sum-of-squares statistic: for
a segment of squared (demeaned) observations, the deviation of the running
share of the total sum of squares from its linear trend is scaled by
sqrt(T/2); under a constant variance the maximum absolute deviation follows
the supremum distribution of a Brownian bridge, which supplies critical
values and p-values.  Segments containing a significant maximum are split
at its location and both sides are scanned again.

Detected dates are advisory: estimation commands always prefer
user-supplied breakdates when both are given.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DataError

__all__ = ["BreakScanResult", "scan_variance_breaks"]


@dataclass(frozen=True)
class BreakScanResult:
    """Detected variance breaks and the resulting segmentation.

    ``breaks[i]`` is the index of the first observation of segment i+1;
    ``stats``/``pvalues`` align with ``breaks``.  Segments are half-open
    ``[start, stop)`` index pairs covering the whole series.
    """

    breaks: tuple
    stats: tuple
    pvalues: tuple
    segments: tuple
    segment_mean: tuple
    segment_variance: tuple


def _segment_stat(sq: np.ndarray):
    """Max scaled centred CUSUM deviation of a squared-value segment."""
    T = sq.shape[0]
    total = sq.sum()
    if total <= 0:
        raise DataError("zero-variance segment")
    share = np.cumsum(sq) / total
    dev = np.abs(share - np.arange(1, T + 1) / T)
    k = int(np.argmax(dev))
    stat = float(np.sqrt(T / 2.0) * dev[k])
    return k, stat


def scan_variance_breaks(series, min_segment: int = 30,
                         level: float = 0.05) -> BreakScanResult:
    """Scan a return series for variance breaks.

    Returns the detected breakdates (indices of the first observation of
    each new regime), their test statistics and asymptotic p-values, and
    per-segment sample moments.  Deterministic given the inputs.
    """
    x = np.asarray(series, dtype=float).ravel()
    T = x.shape[0]
    if T < 2 * min_segment:
        raise DataError(f"need at least {2 * min_segment} observations")
    if not np.all(np.isfinite(x)):
        raise DataError("series contains non-finite values")
    if np.var(x) <= 0:
        raise DataError("zero-variance series")
    sq = (x - x.mean()) ** 2
    crit = float(stats.kstwobign.isf(level))

    found = []

    def recurse(lo: int, hi: int):
        if hi - lo < 2 * min_segment:
            return
        k, stat = _segment_stat(sq[lo:hi])
        if stat <= crit:
            return
        split = lo + k + 1  # first index of the right-hand regime
        if split - lo < min_segment or hi - split < min_segment:
            return
        found.append((split, stat, float(stats.kstwobign.sf(stat))))
        recurse(lo, split)
        recurse(split, hi)

    recurse(0, T)
    found.sort()
    breaks = tuple(b for b, _, _ in found)
    edges = (0,) + breaks + (T,)
    segments = tuple((a, b) for a, b in zip(edges, edges[1:]))
    return BreakScanResult(
        breaks=breaks,
        stats=tuple(s for _, s, _ in found),
        pvalues=tuple(p for _, _, p in found),
        segments=segments,
        segment_mean=tuple(float(x[a:b].mean()) for a, b in segments),
        segment_variance=tuple(float(x[a:b].var()) for a, b in segments),
    )
