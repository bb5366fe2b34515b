"""Break schedules and piecewise-constant parameter paths.

Time is indexed backward from a reference point ("now"): offset 0 is the most
recent observation, offset i is the observation i steps earlier.  A
:class:`BreakSchedule` partitions offsets into regimes; regime 1 is the most
recent and extends indefinitely into the future, the oldest regime extends
indefinitely into the past.  An observation sitting exactly on a break offset
belongs to the older regime.

Parameter paths are piecewise constant over the regimes: :class:`TvArSpec`
carries one ``(drift, ar1, ar2)`` triple per regime for the conditional mean,
:class:`TvGarchSpec` one ``(omega, alpha, gamma, beta)`` quadruple per regime
for the conditional variance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import SpecError

__all__ = [
    "BreakSchedule",
    "ArParams",
    "GarchParams",
    "TvArSpec",
    "TvGarchSpec",
    "ShockMoments",
    "coeff_at",
    "persistence",
    "regime_persistence",
    "regimes_from_increments",
    "increments_from_regimes",
]


@dataclass(frozen=True)
class BreakSchedule:
    """Ordered break offsets measured backward from the reference time.

    Parameters
    ----------
    offsets : tuple of int
        Strictly increasing positive offsets ``k_1 < ... < k_n``.  Empty for
        a model without breaks.
    horizon : int, optional
        Total window length; must exceed the largest offset.  Defaults to
        ``offsets[-1] + 1`` (or 1 with no breaks).
    """

    offsets: tuple = ()
    horizon: int = None

    def __post_init__(self):
        offs = tuple(int(k) for k in self.offsets)
        object.__setattr__(self, "offsets", offs)
        if any(k <= 0 for k in offs):
            raise SpecError("break offsets must be positive")
        if any(b <= a for a, b in zip(offs, offs[1:])):
            raise SpecError("break offsets must be strictly increasing")
        horizon = self.horizon
        if horizon is None:
            horizon = offs[-1] + 1 if offs else 1
        horizon = int(horizon)
        if offs and horizon <= offs[-1]:
            raise SpecError("horizon must exceed the largest break offset")
        if horizon < 1:
            raise SpecError("horizon must be positive")
        object.__setattr__(self, "horizon", horizon)

    @property
    def n_breaks(self) -> int:
        return len(self.offsets)

    @property
    def n_regimes(self) -> int:
        return len(self.offsets) + 1

    def regime_index(self, offset: int) -> int:
        """0-based regime index containing ``offset``.

        Offsets at or beyond a break belong to the older regime; negative
        offsets (future times) belong to regime 0, which has no upper end.
        """
        if offset < 0:
            return 0
        return int(np.searchsorted(self.offsets, offset, side="right"))

    def regime_indices(self, offsets) -> np.ndarray:
        """Vectorised :meth:`regime_index`."""
        offs = np.asarray(offsets)
        idx = np.searchsorted(self.offsets, offs, side="right")
        return np.where(offs < 0, 0, idx)


class ArParams(NamedTuple):
    """AR(2) regime parameters: drift and the two lag coefficients."""

    drift: float
    ar1: float
    ar2: float = 0.0


class GarchParams(NamedTuple):
    """AGARCH(1,1) regime parameters.

    ``alpha`` is the response to a squared shock, ``gamma`` the extra
    response when the shock was negative, ``beta`` the variance carry-over.
    """

    omega: float
    alpha: float
    gamma: float
    beta: float


def regime_persistence(p: GarchParams, neg_prob: float = 0.5) -> float:
    """Expected one-step variance persistence ``alpha + beta + neg_prob*gamma``."""
    return p.alpha + p.beta + neg_prob * p.gamma


@dataclass(frozen=True)
class TvArSpec:
    """Piecewise-constant AR(2) coefficient path.

    ``regimes[0]`` is the most recent regime; ``regimes[-1]`` is the oldest
    (in force before every break).
    """

    regimes: tuple
    schedule: BreakSchedule

    def __post_init__(self):
        regimes = tuple(ArParams(*r) for r in self.regimes)
        object.__setattr__(self, "regimes", regimes)
        if len(regimes) != self.schedule.n_regimes:
            raise SpecError(
                f"expected {self.schedule.n_regimes} regimes, got {len(regimes)}"
            )
        for r in regimes:
            if not all(np.isfinite(v) for v in r):
                raise SpecError("AR coefficients must be finite")

    @classmethod
    def constant(cls, drift: float, ar1: float, ar2: float = 0.0) -> "TvArSpec":
        return cls((ArParams(drift, ar1, ar2),), BreakSchedule())

    @classmethod
    def from_lists(cls, breaks: Sequence[int], drift, ar1, ar2=None,
                   horizon: int = None) -> "TvArSpec":
        """Build from per-regime coefficient lists (most recent regime first)."""
        n = len(breaks) + 1
        drift, ar1 = _aslist(drift, n), _aslist(ar1, n)
        ar2 = [0.0] * n if ar2 is None else _aslist(ar2, n)
        sched = BreakSchedule(tuple(breaks), horizon)
        return cls(tuple(zip(drift, ar1, ar2)), sched)


@dataclass(frozen=True)
class TvGarchSpec:
    """Piecewise-constant AGARCH(1,1) coefficient path.

    Regime ordering matches :class:`TvArSpec`.  Construction enforces the
    positivity constraints ``omega > 0``, ``alpha >= 0``, ``beta >= 0`` and
    ``alpha + gamma >= 0`` (so the variance response stays non-negative for
    either shock sign).
    """

    regimes: tuple
    schedule: BreakSchedule

    def __post_init__(self):
        regimes = tuple(GarchParams(*r) for r in self.regimes)
        object.__setattr__(self, "regimes", regimes)
        if len(regimes) != self.schedule.n_regimes:
            raise SpecError(
                f"expected {self.schedule.n_regimes} regimes, got {len(regimes)}"
            )
        for i, r in enumerate(regimes):
            if not all(np.isfinite(v) for v in r):
                raise SpecError("GARCH coefficients must be finite")
            if r.omega <= 0:
                raise SpecError(f"regime {i + 1}: omega must be positive")
            if r.alpha < 0:
                raise SpecError(f"regime {i + 1}: alpha must be non-negative")
            if r.beta < 0:
                raise SpecError(f"regime {i + 1}: beta must be non-negative")
            if r.alpha + r.gamma < 0:
                raise SpecError(f"regime {i + 1}: alpha + gamma must be non-negative")

    @classmethod
    def constant(cls, omega: float, alpha: float, gamma: float,
                 beta: float) -> "TvGarchSpec":
        return cls((GarchParams(omega, alpha, gamma, beta),), BreakSchedule())

    @classmethod
    def from_lists(cls, breaks: Sequence[int], omega, alpha, gamma, beta,
                   horizon: int = None) -> "TvGarchSpec":
        n = len(breaks) + 1
        cols = [_aslist(c, n) for c in (omega, alpha, gamma, beta)]
        sched = BreakSchedule(tuple(breaks), horizon)
        return cls(tuple(zip(*cols)), sched)

    @classmethod
    def from_persistence(cls, breaks: Sequence[int], omega, persistence,
                         alpha: float = 0.01, horizon: int = None) -> "TvGarchSpec":
        """Symmetric spec with prescribed per-regime persistence values.

        Useful when only ``(omega, persistence)`` pairs are known, e.g. from
        a published persistence table: sets ``gamma = 0`` and
        ``beta = persistence - alpha`` in every regime.
        """
        n = len(breaks) + 1
        omega, pers = _aslist(omega, n), _aslist(persistence, n)
        regimes = tuple(GarchParams(w, alpha, 0.0, c - alpha)
                        for w, c in zip(omega, pers))
        return cls(regimes, BreakSchedule(tuple(breaks), horizon))

    def persistence(self, neg_prob: float = 0.5) -> tuple:
        """Per-regime persistence, most recent regime first."""
        return tuple(regime_persistence(r, neg_prob) for r in self.regimes)


Spec = Union[TvArSpec, TvGarchSpec]


def coeff_at(spec: Spec, offset: int):
    """Regime parameters in force at the given backward offset.

    Offsets at or beyond the horizon fall in the oldest regime.  Negative
    offsets are rejected; engines that evaluate future times extend regime 1
    internally.
    """
    if offset < 0:
        raise SpecError("offset must be non-negative")
    return spec.regimes[spec.schedule.regime_index(offset)]


def persistence(spec: TvGarchSpec, neg_prob: float = 0.5) -> tuple:
    """Per-regime expected variance persistence, most recent regime first."""
    return spec.persistence(neg_prob)


def regimes_from_increments(base: GarchParams, increments) -> tuple:
    """Regime parameters implied by break-dummy increments.

    ``base`` holds the pre-break (oldest regime) parameters; ``increments``
    lists one ``GarchParams`` of additive shifts per break, oldest break
    first.  Crossing break ``i`` (moving forward in time) switches its dummy
    on, so the regime in force after breaks ``1..j`` has parameters
    ``base + sum(increments[:j])``.  The returned tuple is ordered most
    recent regime first, matching :class:`TvGarchSpec`.  No positivity
    checks are applied: estimated dummy sums may stray outside the admissible
    region and this map is pure arithmetic.
    """
    base = GarchParams(*base)
    out = [base]
    cur = np.array(base, dtype=float)
    for inc in increments:
        cur = cur + np.asarray(GarchParams(*inc), dtype=float)
        out.append(GarchParams(*cur))
    return tuple(reversed(out))


def increments_from_regimes(regimes):
    """Inverse of :func:`regimes_from_increments`.

    Returns ``(base, increments)`` with increments ordered oldest break
    first.  Together the two maps are a bijection between the per-regime and
    the dummy parameterisations.
    """
    ordered = [np.asarray(GarchParams(*r), dtype=float) for r in reversed(regimes)]
    base = GarchParams(*ordered[0])
    incs = tuple(GarchParams(*(b - a)) for a, b in zip(ordered, ordered[1:]))
    return base, incs


@dataclass(frozen=True)
class ShockMoments:
    """Second/fourth moments and sign probability of the i.i.d. shocks.

    The second moment is pinned at 1 (unit-variance normalisation); the
    fourth moment must satisfy Jensen's bound.  ``neg_prob`` is the
    probability of a negative shock, 0.5 for symmetric distributions.
    The expectation formulas built on these moments assume the shock's sign
    and magnitude are independent, which holds for any symmetric law.
    """

    fourth: float
    neg_prob: float = 0.5
    second: float = 1.0

    def __post_init__(self):
        if self.second != 1.0:
            raise SpecError("shock variance is normalised to 1")
        if self.fourth < self.second**2:
            raise SpecError("fourth moment must be >= squared second moment")
        if not 0.0 < self.neg_prob < 1.0:
            raise SpecError("neg_prob must lie strictly between 0 and 1")

    @property
    def excess(self) -> float:
        """Variance of the squared shock (fourth moment minus 1)."""
        return self.fourth - 1.0

    @classmethod
    def gaussian(cls) -> "ShockMoments":
        return cls(fourth=3.0)

    @classmethod
    def student_t(cls, df: float) -> "ShockMoments":
        """Unit-variance scaled Student-t; needs df > 4 for a finite fourth moment."""
        if df <= 4:
            raise SpecError("Student-t shocks need df > 4")
        return cls(fourth=3.0 * (df - 2.0) / (df - 4.0))


def _aslist(x, n: int) -> list:
    if np.isscalar(x):
        return [float(x)] * n
    out = [float(v) for v in x]
    if len(out) != n:
        raise SpecError(f"expected {n} values, got {len(out)}")
    return out
