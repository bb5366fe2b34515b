"""Monte Carlo paths of the break AR(2)-AGARCH(1,1) process.

Paths end at the reference time: column j of an output array is the
observation at backward offset ``length - 1 - j``, so the last column sits at
offset 0 and the break schedule applies relative to the path end.  The
burn-in happens before the window and therefore runs under the oldest
regime whenever the breaks lie inside the window.

Reproducibility: path p draws from ``PCG64(SeedSequence(seed, spawn_key=(p,)))``,
so output is bit-identical for a given seed regardless of how paths are
chunked into blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpecError
from .params import ShockMoments, TvArSpec, TvGarchSpec, regime_persistence

__all__ = ["SimConfig", "SimOutput", "MomentEstimate", "simulate",
           "iter_blocks", "estimate_moments", "shock_moments"]

_ARRAYS = ("y", "h", "eps", "v")


@dataclass(frozen=True)
class SimConfig:
    ar: TvArSpec
    garch: TvGarchSpec
    length: int
    paths: int = 1
    burn_in: int = 200
    distribution: str = "normal"
    df: float = 8.0
    seed: int = 0
    keep: tuple = _ARRAYS

    def __post_init__(self):
        if self.length < 1 or self.paths < 1:
            raise SpecError("length and paths must be >= 1")
        if self.burn_in < 0:
            raise SpecError("burn_in must be >= 0")
        if self.distribution not in ("normal", "student_t"):
            raise SpecError("distribution must be 'normal' or 'student_t'")
        if self.distribution == "student_t" and self.df <= 4:
            raise SpecError("Student-t shocks need df > 4")
        bad = set(self.keep) - set(_ARRAYS)
        if bad:
            raise SpecError(f"unknown arrays in keep: {sorted(bad)}")


def shock_moments(config: SimConfig) -> ShockMoments:
    """Moments of the configured shock distribution."""
    if config.distribution == "normal":
        return ShockMoments.gaussian()
    return ShockMoments.student_t(config.df)


@dataclass(frozen=True)
class SimOutput:
    """Simulated paths; arrays are (paths, length), newest observation last.

    ``v`` is the variance innovation eps^2 - h.  Arrays excluded from
    ``config.keep`` are None.
    """

    config: SimConfig
    y: np.ndarray = None
    h: np.ndarray = None
    eps: np.ndarray = None
    v: np.ndarray = None

    def column(self, offset: int) -> int:
        """Array column holding the observation at a backward offset."""
        if not 0 <= offset < self.config.length:
            raise SpecError(f"offset {offset} outside the simulated window")
        return self.config.length - 1 - offset


def _draw_shocks(config: SimConfig, path_start: int, n_paths: int,
                 steps: int) -> np.ndarray:
    out = np.empty((n_paths, steps))
    scale = 1.0
    if config.distribution == "student_t":
        scale = 1.0 / np.sqrt(config.df / (config.df - 2.0))
    for p in range(n_paths):
        ss = np.random.SeedSequence(config.seed, spawn_key=(path_start + p,))
        rng = np.random.Generator(np.random.PCG64(ss))
        if config.distribution == "normal":
            out[p] = rng.standard_normal(steps)
        else:
            out[p] = rng.standard_t(config.df, steps) * scale
    return out


def _start_state(config: SimConfig):
    gar = config.garch.regimes[-1]
    cbar = regime_persistence(gar)
    h0 = gar.omega / (1.0 - cbar) if cbar < 1.0 else gar.omega
    arp = config.ar.regimes[-1]
    comp = np.array([[arp.ar1, arp.ar2], [1.0, 0.0]])
    stationary = np.max(np.abs(np.linalg.eigvals(comp))) < 1.0
    y0 = arp.drift / (1.0 - arp.ar1 - arp.ar2) if stationary else 0.0
    return h0, y0


def _simulate_block(config: SimConfig, path_start: int, n_paths: int) -> dict:
    length, burn = config.length, config.burn_in
    steps = burn + length
    e = _draw_shocks(config, path_start, n_paths, steps + 1)
    h0, y0 = _start_state(config)

    ar_idx = config.ar.schedule.regime_indices(
        np.arange(length - 1 + burn, -1, -1))
    g_idx = config.garch.schedule.regime_indices(
        np.arange(length - 1 + burn, -1, -1))

    h_prev = np.full(n_paths, h0)
    eps_prev = e[:, 0] * np.sqrt(h0)
    y1 = np.full(n_paths, y0)
    y2 = np.full(n_paths, y0)

    want = set(config.keep) | {"y"}  # y always materialised, cheap
    out = {name: (np.empty((n_paths, length)) if name in want else None)
           for name in _ARRAYS}
    need_v = out["v"] is not None

    for j in range(steps):
        gp = config.garch.regimes[g_idx[j]]
        ap = config.ar.regimes[ar_idx[j]]
        neg = eps_prev < 0.0
        h = gp.omega + (gp.alpha + gp.gamma * neg) * eps_prev**2 + gp.beta * h_prev
        eps = e[:, j + 1] * np.sqrt(h)
        y = ap.drift + ap.ar1 * y1 + ap.ar2 * y2 + eps
        if j >= burn:
            col = j - burn
            out["y"][:, col] = y
            if out["h"] is not None:
                out["h"][:, col] = h
            if out["eps"] is not None:
                out["eps"][:, col] = eps
            if need_v:
                out["v"][:, col] = eps**2 - h
        y2, y1 = y1, y
        h_prev, eps_prev = h, eps
    if "y" not in config.keep:
        out["y"] = None
    return out


def simulate(config: SimConfig) -> SimOutput:
    """Simulate all configured paths in one block."""
    arrays = _simulate_block(config, 0, config.paths)
    return SimOutput(config=config, **arrays)


def iter_blocks(config: SimConfig, chunk: int = 20000):
    """Yield SimOutput blocks of at most ``chunk`` paths.

    Concatenating the blocks reproduces :func:`simulate` bit for bit; use
    this to keep memory flat in large moment studies.
    """
    done = 0
    while done < config.paths:
        n = min(chunk, config.paths - done)
        arrays = _simulate_block(config, done, n)
        yield SimOutput(config=config, **arrays)
        done += n


@dataclass(frozen=True)
class MomentEstimate:
    """Cross-path moment estimates with standard errors."""

    target: str
    offsets: tuple
    lag: int
    values: np.ndarray
    ses: np.ndarray
    paths: int


def _col(output: SimOutput, name: str, offset: int) -> np.ndarray:
    arr = getattr(output, name)
    if arr is None:
        raise SpecError(f"array '{name}' was not kept in this simulation")
    return arr[:, output.column(offset)]


def estimate_moments(output: SimOutput, target: str, offsets, lag: int = 0,
                     min_paths: int = 100) -> MomentEstimate:
    """Cross-sectional moment estimates at fixed offsets.

    Targets: 'mean', 'variance', 'autocov', 'autocorr' (on y, the last two
    pairing each offset with offset + lag), 'h_mean', 'h_second'.
    """
    n = output.config.paths
    if n < min_paths:
        raise SpecError(f"need at least {min_paths} paths for standard errors")
    offs = tuple(int(i) for i in np.atleast_1d(offsets))
    vals, ses = [], []
    for i in offs:
        if target == "mean":
            x = _col(output, "y", i)
            vals.append(x.mean())
            ses.append(x.std(ddof=1) / np.sqrt(n))
        elif target == "variance":
            x = _col(output, "y", i)
            d = x - x.mean()
            v = np.mean(d**2)
            vals.append(v * n / (n - 1))
            ses.append(np.sqrt(max(np.mean(d**4) - v**2, 0.0) / n))
        elif target in ("autocov", "autocorr"):
            x = _col(output, "y", i)
            z = _col(output, "y", i + lag)
            w = (x - x.mean()) * (z - z.mean())
            cov = w.mean()
            se = w.std(ddof=1) / np.sqrt(n)
            if target == "autocorr":
                denom = np.sqrt(np.var(x) * np.var(z))
                cov, se = cov / denom, se / denom
            vals.append(cov)
            ses.append(se)
        elif target == "h_mean":
            x = _col(output, "h", i)
            vals.append(x.mean())
            ses.append(x.std(ddof=1) / np.sqrt(n))
        elif target == "h_second":
            x = _col(output, "h", i) ** 2
            vals.append(x.mean())
            ses.append(x.std(ddof=1) / np.sqrt(n))
        else:
            raise SpecError(f"unknown target '{target}'")
    return MomentEstimate(target=target, offsets=offs, lag=lag,
                          values=np.asarray(vals), ses=np.asarray(ses), paths=n)
