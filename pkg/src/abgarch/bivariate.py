"""Bivariate AR(2) mean with spillover AGARCH(1,1) variances and dynamic correlations.

The variance system lets each series' conditional variance load on the other
series' lagged squared shock and lagged variance (shock and volatility
spillovers), with optional additive shifts of the cross entries that switch
on at known break dates or with the sign of the lagged counterpart return.
Correlations follow the scalar dynamic-correlation recursion on a
pseudo-covariance matrix rescaled to a correlation at every step.

Estimation is two-stage quasi-ML: stage one fits the variance system with
the correlation fixed at identity, stage two fits the two correlation
scalars with the long-run matrix targeted at the sample correlation of the
stage-one standardised residuals.  Positivity of the variance system is
report-only at the optimum, mirroring how the four sufficient conditions
are treated in empirical work: the fitted path must stay positive, the
conditions themselves may fail.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import expit, logit

from . import backend
from .diagnostics import hosking_q
from .errors import FilterError, FitError, SpecError

__all__ = ["SpilloverShift", "SignShift", "BivariateSpec", "PositivityReport",
           "check_positivity", "check_positivity_matrices", "BivariateFilterResult",
           "bivariate_filter", "ShiftConfig", "BivariateFitConfig",
           "BivariateFitResult", "fit_bivariate", "BivariateSimOutput",
           "simulate_bivariate"]

_LOG2PI = math.log(2.0 * math.pi)
_PENALTY = 1.0e7


@dataclass(frozen=True)
class SpilloverShift:
    """Additive shifts of the cross entries for one break."""

    a12: float = 0.0
    a21: float = 0.0
    b12: float = 0.0
    b21: float = 0.0


@dataclass(frozen=True)
class SignShift:
    """Cross-entry shifts switching on the sign of the lagged counterpart return.

    ``a12_neg`` adds to the shock spillover onto series 1 when series 2's
    previous return was negative; ``b12_pos`` adds to the volatility
    spillover onto series 1 when it was positive (and symmetrically for the
    21 entries).
    """

    a12_neg: float = 0.0
    a21_neg: float = 0.0
    b12_pos: float = 0.0
    b21_pos: float = 0.0


def _as_matrix(x, name):
    m = np.asarray(x, dtype=float)
    if m.shape != (2, 2):
        raise SpecError(f"{name} must be 2x2")
    return m


def _as_vec(x, name):
    v = np.asarray(x, dtype=float)
    if v.shape != (2,):
        raise SpecError(f"{name} must have 2 entries")
    return v


@dataclass(frozen=True)
class BivariateSpec:
    """Full parameterisation of the two-series system."""

    mu: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    omega: np.ndarray
    alpha: np.ndarray
    gamma: np.ndarray
    beta: np.ndarray
    break_shifts: tuple = ()
    sign_shift: SignShift = None
    dcc_alpha: float = 0.0
    dcc_beta: float = 0.0
    qbar: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, "mu", _as_vec(self.mu, "mu"))
        object.__setattr__(self, "phi1", _as_matrix(self.phi1, "phi1"))
        object.__setattr__(self, "phi2", _as_matrix(self.phi2, "phi2"))
        object.__setattr__(self, "omega", _as_vec(self.omega, "omega"))
        object.__setattr__(self, "alpha", _as_matrix(self.alpha, "alpha"))
        object.__setattr__(self, "gamma", _as_vec(self.gamma, "gamma"))
        object.__setattr__(self, "beta", _as_matrix(self.beta, "beta"))
        object.__setattr__(self, "break_shifts",
                           tuple(SpilloverShift(*np.atleast_1d(s)) if not
                                 isinstance(s, SpilloverShift) else s
                                 for s in self.break_shifts))
        qbar = np.eye(2) if self.qbar is None else _as_matrix(self.qbar, "qbar")
        object.__setattr__(self, "qbar", qbar)
        if np.any(self.omega <= 0):
            raise SpecError("omega entries must be positive")
        if np.any(self.alpha < 0):
            raise SpecError("alpha entries must be non-negative")
        if np.any(self.alpha.diagonal() + self.gamma < 0):
            raise SpecError("alpha + gamma must be non-negative on the diagonal")
        if self.dcc_alpha < 0 or self.dcc_beta < 0:
            raise SpecError("correlation scalars must be non-negative")
        if self.dcc_alpha + self.dcc_beta >= 1:
            raise SpecError("correlation scalars must sum below one")
        if not np.allclose(qbar, qbar.T):
            raise SpecError("qbar must be symmetric")
        if np.any(np.linalg.eigvalsh(qbar) <= 0):
            raise SpecError("qbar must be positive definite")
        comp = np.zeros((4, 4))
        comp[:2, :2] = self.phi1
        comp[:2, 2:] = self.phi2
        comp[2:, :2] = np.eye(2)
        if np.max(np.abs(np.linalg.eigvals(comp))) >= 1.0:
            raise SpecError("mean companion roots must lie inside the unit circle")


@dataclass(frozen=True)
class PositivityReport:
    """Outcome of the four sufficient conditions for positive variances.

    ``phi1``/``phi2`` are the eigenvalues of the volatility carry-over
    matrix (the inverse roots of its lag polynomial), largest first when
    real.  Margins are the smallest slack in each condition.  The boolean
    results use non-strict comparisons for (ii)-(iv): a decoupled system
    sits exactly on those boundaries (zero rows in the condition-(iv)
    product) yet keeps its variances positive whenever (i) holds, so zero
    margins must not fail the check; callers wanting strictness can test
    the margins directly.
    """

    phi1: complex
    phi2: complex
    cond_i: bool
    cond_ii: bool
    cond_iii: bool
    cond_iv: bool
    margins: dict

    @property
    def all_ok(self) -> bool:
        return self.cond_i and self.cond_ii and self.cond_iii and self.cond_iv


def _sign_states(alpha, gamma, sign_shift):
    """Elementwise shock-response matrices over all sign configurations."""
    states = []
    shift = sign_shift or SignShift()
    for s1 in (0.0, 1.0):
        for s2 in (0.0, 1.0):
            for d1 in (0.0, 1.0):
                for d2 in (0.0, 1.0):
                    m = alpha.copy()
                    m[0, 0] += gamma[0] * s1
                    m[1, 1] += gamma[1] * s2
                    m[0, 1] += shift.a12_neg * d2
                    m[1, 0] += shift.a21_neg * d1
                    states.append(m)
                    if sign_shift is None:
                        break
                if sign_shift is None:
                    break
    return states


def check_positivity_matrices(omega, alpha, gamma, beta,
                              sign_shift: SignShift = None) -> PositivityReport:
    """Evaluate the positivity conditions on raw coefficient matrices."""
    omega = _as_vec(omega, "omega")
    alpha = _as_matrix(alpha, "alpha")
    gamma = _as_vec(gamma, "gamma")
    beta = _as_matrix(beta, "beta")

    m1 = (1.0 - beta[1, 1]) * omega[0] + beta[0, 1] * omega[1]
    m2 = (1.0 - beta[0, 0]) * omega[1] + beta[1, 0] * omega[0]
    cond_i = m1 > 0 and m2 > 0

    eig = np.linalg.eigvals(beta)
    if np.max(np.abs(eig.imag)) < 1e-12:
        ev = np.sort(eig.real)[::-1]
        phi1, phi2 = float(ev[0]), float(ev[1])
        cond_ii = phi1 >= abs(phi2)
        margin_ii = phi1 - abs(phi2)
    else:
        order = np.argsort(-eig.real)
        phi1, phi2 = complex(eig[order[0]]), complex(eig[order[1]])
        cond_ii = False
        margin_ii = float("nan")

    states = _sign_states(alpha, gamma, sign_shift)
    margin_iii = min(float(m.min()) for m in states)
    cond_iii = margin_iii >= 0.0

    if cond_ii:
        lead = beta - max(phi2, 0.0) * np.eye(2)
        margin_iv = min(float((lead @ m).min()) for m in states)
        cond_iv = margin_iv >= 0.0
    else:
        margin_iv = float("nan")
        cond_iv = False

    return PositivityReport(
        phi1=phi1, phi2=phi2, cond_i=cond_i, cond_ii=cond_ii,
        cond_iii=cond_iii, cond_iv=cond_iv,
        margins={"i": min(m1, m2), "ii": margin_ii,
                 "iii": margin_iii, "iv": margin_iv})


def check_positivity(spec: BivariateSpec) -> PositivityReport:
    """Positivity report for a full specification."""
    return check_positivity_matrices(spec.omega, spec.alpha, spec.gamma,
                                     spec.beta, spec.sign_shift)


# ---------------------------------------------------------------------------
# filtering


def _mean_residuals(returns: np.ndarray, mu, phi1, phi2, lags: int = 2):
    L = lags
    eps = returns[L:] - mu
    if L >= 1:
        eps = eps - returns[L - 1:returns.shape[0] - 1] @ phi1.T
    if L == 2:
        eps = eps - returns[:-2] @ phi2.T
    return eps


def _lagged_sign_dummies(returns: np.ndarray, L: int, n: int):
    """neg[t, j] / pos[t, j]: sign of series j's return one step before sample index t."""
    neg = np.zeros((n, 2))
    pos = np.zeros((n, 2))
    if L >= 1:
        prev = returns[L - 1:L + n - 1]
        neg[:] = prev < 0.0
        pos[:] = prev > 0.0
    else:  # no presample return for the first observation
        prev = returns[:n - 1]
        neg[1:] = prev < 0.0
        pos[1:] = prev > 0.0
    return neg, pos


def _effective_paths(alpha, gamma, beta, eps_neg_prev, ret_neg_prev,
                     ret_pos_prev, break_shifts, shift_dummies, sign_shift):
    """Per-observation response matrices with every shift folded in."""
    n = eps_neg_prev.shape[0]
    a_eff = np.broadcast_to(alpha, (n, 2, 2)).copy()
    b_eff = np.broadcast_to(beta, (n, 2, 2)).copy()
    a_eff[:, 0, 0] += gamma[0] * eps_neg_prev[:, 0]
    a_eff[:, 1, 1] += gamma[1] * eps_neg_prev[:, 1]
    if break_shifts:
        if shift_dummies is None:
            raise SpecError("break_shifts need matching shift dummies")
        d = np.asarray(shift_dummies, dtype=float)
        if d.shape != (len(break_shifts), 2, n):
            raise SpecError(
                f"shift dummies must have shape ({len(break_shifts)}, 2, {n})")
        for s, dl in zip(break_shifts, d):
            a_eff[:, 0, 1] += s.a12 * dl[1]
            a_eff[:, 1, 0] += s.a21 * dl[0]
            b_eff[:, 0, 1] += s.b12 * dl[1]
            b_eff[:, 1, 0] += s.b21 * dl[0]
    if sign_shift is not None:
        a_eff[:, 0, 1] += sign_shift.a12_neg * ret_neg_prev[:, 1]
        a_eff[:, 1, 0] += sign_shift.a21_neg * ret_neg_prev[:, 0]
        b_eff[:, 0, 1] += sign_shift.b12_pos * ret_pos_prev[:, 1]
        b_eff[:, 1, 0] += sign_shift.b21_pos * ret_pos_prev[:, 0]
    return a_eff, b_eff


@dataclass(frozen=True)
class BivariateFilterResult:
    h: np.ndarray
    rho: np.ndarray
    std_resid: np.ndarray
    eps: np.ndarray
    loglik: float
    variance_loglik: float


def bivariate_filter(spec: BivariateSpec, returns, shift_dummies=None,
                     mean_lags: int = 2, h_init=None, eps2_init=None,
                     neg_init=None) -> BivariateFilterResult:
    """Deterministic filtration of variances, correlations and residuals.

    ``returns`` is (T, 2).  ``shift_dummies`` has shape (n_shifts, 2, n)
    aligned to the likelihood sample; slot [l, j] is the dummy path of
    source series j+1 for break-shift l.  Initial conditions default to the
    sample variance of each series with a non-negative presample shock.
    Raises FilterError (with the offending sample index) if a variance
    turns non-positive.
    """
    r = np.asarray(returns, dtype=float)
    if r.ndim != 2 or r.shape[1] != 2:
        raise SpecError("returns must be a (T, 2) array")
    if r.shape[0] < 3:
        raise SpecError("need at least 3 observations")
    L = mean_lags
    eps = _mean_residuals(r, spec.mu, spec.phi1, spec.phi2, L)
    n = eps.shape[0]
    h0 = np.var(r, axis=0) if h_init is None else _as_vec(h_init, "h_init")
    e20 = h0 if eps2_init is None else _as_vec(eps2_init, "eps2_init")
    s0 = np.zeros(2) if neg_init is None else _as_vec(neg_init, "neg_init")

    eps2_prev = np.empty((n, 2))
    eps2_prev[0] = e20
    eps2_prev[1:] = eps[:-1] ** 2
    eps_neg_prev = np.empty((n, 2))
    eps_neg_prev[0] = s0
    eps_neg_prev[1:] = (eps[:-1] < 0.0).astype(float)
    ret_neg_prev, ret_pos_prev = _lagged_sign_dummies(r, L, n)

    a_eff, b_eff = _effective_paths(spec.alpha, spec.gamma, spec.beta,
                                    eps_neg_prev, ret_neg_prev, ret_pos_prev,
                                    spec.break_shifts, shift_dummies,
                                    spec.sign_shift)
    w = np.broadcast_to(spec.omega, (n, 2)).copy()
    h, first_bad = backend.biv_filter(w, a_eff, b_eff, eps2_prev,
                                      np.ascontiguousarray(h0, dtype=float))
    if first_bad >= 0:
        raise FilterError(f"non-positive conditional variance at sample "
                          f"index {first_bad + L}")
    z = eps / np.sqrt(h)
    rho = backend.dcc_path(np.ascontiguousarray(z), spec.qbar,
                           spec.dcc_alpha, spec.dcc_beta)
    var_ll = -0.5 * np.sum(2.0 * _LOG2PI + np.log(h[:, 0] * h[:, 1])
                           + z[:, 0] ** 2 + z[:, 1] ** 2)
    quad = (z[:, 0] ** 2 + z[:, 1] ** 2 - 2.0 * rho * z[:, 0] * z[:, 1]) \
        / (1.0 - rho**2)
    full_ll = -0.5 * np.sum(2.0 * _LOG2PI + np.log(h[:, 0] * h[:, 1])
                            + np.log(1.0 - rho**2) + quad)
    return BivariateFilterResult(h=h, rho=rho, std_resid=z, eps=eps,
                                 loglik=float(full_ll),
                                 variance_loglik=float(var_ll))


# ---------------------------------------------------------------------------
# simulation


@dataclass(frozen=True)
class BivariateSimOutput:
    y: np.ndarray
    h: np.ndarray
    rho: np.ndarray
    eps: np.ndarray
    spec: BivariateSpec


def _stationary_init(spec: BivariateSpec):
    abar = spec.alpha + 0.5 * np.diag(spec.gamma)
    lead = np.eye(2) - abar - spec.beta
    try:
        h0 = np.linalg.solve(lead, spec.omega)
    except np.linalg.LinAlgError:
        h0 = spec.omega.copy()
    if np.any(h0 <= 0) or np.max(np.abs(np.linalg.eigvals(abar + spec.beta))) >= 1:
        h0 = spec.omega.copy()
    lead_m = np.eye(2) - spec.phi1 - spec.phi2
    try:
        y0 = np.linalg.solve(lead_m, spec.mu)
    except np.linalg.LinAlgError:
        y0 = np.zeros(2)
    return h0, y0


def simulate_bivariate(spec: BivariateSpec, length: int, seed: int = 0,
                       burn_in: int = 500, shift_dummies=None,
                       distribution: str = "normal",
                       df: float = 8.0) -> BivariateSimOutput:
    """Simulate the system; the window ends at the reference time.

    ``shift_dummies`` (n_shifts, 2, length) is aligned to the output window;
    break dummies are zero throughout the burn-in.  Raises FilterError if a
    simulated variance turns non-positive (the step index is reported
    relative to the start of the burn-in).
    """
    if length < 1 or burn_in < 0:
        raise SpecError("length must be >= 1 and burn_in >= 0")
    steps = burn_in + length
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if distribution == "normal":
        z = rng.standard_normal((steps, 2))
    elif distribution == "student_t":
        if df <= 4:
            raise SpecError("Student-t shocks need df > 4")
        z = rng.standard_t(df, (steps, 2)) / math.sqrt(df / (df - 2.0))
    else:
        raise SpecError("distribution must be 'normal' or 'student_t'")

    da = np.zeros((steps, 2, 2))
    db = np.zeros((steps, 2, 2))
    if spec.break_shifts:
        if shift_dummies is None:
            raise SpecError("break_shifts need matching shift dummies")
        d = np.asarray(shift_dummies, dtype=float)
        if d.shape != (len(spec.break_shifts), 2, length):
            raise SpecError(
                f"shift dummies must have shape ({len(spec.break_shifts)}, 2, {length})")
        for s, dl in zip(spec.break_shifts, d):
            da[burn_in:, 0, 1] += s.a12 * dl[1]
            da[burn_in:, 1, 0] += s.a21 * dl[0]
            db[burn_in:, 0, 1] += s.b12 * dl[1]
            db[burn_in:, 1, 0] += s.b21 * dl[0]

    ss = spec.sign_shift
    sign_pack = (ss.a12_neg, ss.a21_neg, ss.b12_pos, ss.b21_pos) if ss \
        else (0.0, 0.0, 0.0, 0.0)
    h0, y0 = _stationary_init(spec)
    y, h, rho, eps, first_bad = backend.biv_sim(
        z, spec.omega, spec.alpha, spec.gamma, spec.beta, da, db,
        sign_pack, ss is not None, spec.qbar, spec.dcc_alpha, spec.dcc_beta,
        spec.mu, spec.phi1, spec.phi2, h0, y0, y0.copy(), h0.copy(),
        np.zeros(2))
    if first_bad >= 0:
        err = FilterError(f"simulated variance turned non-positive at step "
                          f"{first_bad}")
        err.step = first_bad
        raise err
    return BivariateSimOutput(y=y[burn_in:], h=h[burn_in:], rho=rho[burn_in:],
                              eps=eps[burn_in:], spec=spec)


# ---------------------------------------------------------------------------
# two-stage estimation


@dataclass(frozen=True)
class ShiftConfig:
    """One estimated cross-entry shift: which entry moves and from which index."""

    entry: str
    start_index: int

    def __post_init__(self):
        if self.entry not in ("a12", "a21", "b12", "b21"):
            raise SpecError("entry must be one of a12, a21, b12, b21")


@dataclass(frozen=True)
class BivariateFitConfig:
    mean_lags: int = 2
    asymmetry: bool = True
    spillovers: bool = True
    shifts: tuple = ()
    sign_entries: tuple = ()
    restarts: int = 3
    seed: int = 1
    tse_statistic: float = None

    def __post_init__(self):
        if self.mean_lags not in (0, 1, 2):
            raise SpecError("mean_lags must be 0, 1 or 2")
        shifts = tuple(s if isinstance(s, ShiftConfig) else ShiftConfig(*s)
                       for s in self.shifts)
        object.__setattr__(self, "shifts", shifts)
        allowed = {"a12_neg", "a21_neg", "b12_pos", "b21_pos"}
        bad = set(self.sign_entries) - allowed
        if bad:
            raise SpecError(f"unknown sign entries: {sorted(bad)}")


@dataclass
class BivariateFitResult:
    config: BivariateFitConfig
    mean: dict
    params: dict
    se: dict
    dcc: dict
    qbar: np.ndarray
    loglik: float
    diagnostics: dict
    positivity: PositivityReport
    convergence: dict
    meta: dict = field(default_factory=dict)

    def to_json(self) -> str:
        pos = {
            "phi1": repr(self.positivity.phi1),
            "phi2": repr(self.positivity.phi2),
            "conditions": [self.positivity.cond_i, self.positivity.cond_ii,
                           self.positivity.cond_iii, self.positivity.cond_iv],
            "margins": self.positivity.margins,
        }
        out = {
            "mean": self.mean,
            "params": self.params,
            "se": self.se,
            "dcc": self.dcc,
            "qbar": self.qbar.tolist(),
            "loglik": self.loglik,
            "diagnostics": self.diagnostics,
            "positivity": pos,
            "convergence": self.convergence,
            "meta": self.meta,
        }
        return json.dumps(out, indent=2, sort_keys=True)

    def to_table(self) -> str:
        lines = ["parameter      estimate      (robust se)"]
        for name, est in self.params.items():
            se = self.se.get(name, float("nan"))
            mark = ""
            if se > 0 and math.isfinite(se):
                t = abs(est / se)
                mark = "a" if t > 2.576 else "b" if t > 1.960 else \
                    "c" if t > 1.645 else ""
            lines.append(f"{name:<12} {est:>12.5f}   ({se:.5f}){mark}")
        for name in ("alpha_d", "beta_d"):
            lines.append(f"{name:<12} {self.dcc[name]:>12.5f}   "
                         f"({self.dcc['se_' + name]:.5f})")
        lines.append(f"loglik       {self.loglik:>12.2f}")
        for label, (stat, pval) in self.diagnostics.items():
            lines.append(f"{label:<12} {stat:>12.3f}   [{pval:.3f}]")
        return "\n".join(lines)


def _ols_mean(r: np.ndarray, lags: int):
    T = r.shape[0]
    L = lags
    cols = [np.ones(T - L)]
    if L >= 1:
        cols += [r[L - 1:T - 1, 0], r[L - 1:T - 1, 1]]
    if L == 2:
        cols += [r[:T - 2, 0], r[:T - 2, 1]]
    X = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(X, r[L:], rcond=None)
    mu = coef[0]
    phi1 = np.zeros((2, 2))
    phi2 = np.zeros((2, 2))
    if L >= 1:
        phi1 = coef[1:3].T
    if L == 2:
        phi2 = coef[3:5].T
    eps = r[L:] - X @ coef
    return mu, phi1, phi2, eps


def _stage1_names(config: BivariateFitConfig):
    names = ["omega1", "omega2", "a11", "a22"]
    if config.spillovers:
        names += ["a12", "a21"]
    if config.asymmetry:
        names += ["g1", "g2"]
    names += ["b11", "b22"]
    if config.spillovers:
        names += ["b12", "b21"]
    names += [f"{s.entry}_s{j}" for j, s in enumerate(config.shifts, start=1)]
    names += list(config.sign_entries)
    return names


def _stage1_matrices(config, p: dict):
    alpha = np.array([[p["a11"], p.get("a12", 0.0)],
                      [p.get("a21", 0.0), p["a22"]]])
    beta = np.array([[p["b11"], p.get("b12", 0.0)],
                     [p.get("b21", 0.0), p["b22"]]])
    gamma = np.array([p.get("g1", 0.0), p.get("g2", 0.0)])
    omega = np.array([p["omega1"], p["omega2"]])
    return omega, alpha, gamma, beta


def _stage1_transform(config, p: dict) -> np.ndarray:
    u = []
    for name in _stage1_names(config):
        v = p[name]
        if name.startswith("omega"):
            u.append(math.log(max(v, 1e-12)))
        elif name in ("a11", "a22", "b11", "b22"):
            u.append(_softplus_inv(max(v, 1e-10)))
        elif name in ("g1", "g2"):
            diag = "a11" if name == "g1" else "a22"
            u.append(_softplus_inv(max(p[diag] + v, 1e-10)))
        else:
            u.append(v)
    return np.asarray(u)


def _stage1_untransform(config, u: np.ndarray) -> dict:
    names = _stage1_names(config)
    p = {n: float(v) for n, v in zip(names, u)}
    p["omega1"] = math.exp(min(p["omega1"], 50.0))
    p["omega2"] = math.exp(min(p["omega2"], 50.0))
    for n in ("a11", "a22", "b11", "b22"):
        p[n] = float(_softplus(p[n]))
    if "g1" in p:
        p["g1"] = float(_softplus(p["g1"])) - p["a11"]
        p["g2"] = float(_softplus(p["g2"])) - p["a22"]
    return p


def _softplus(u):
    return np.logaddexp(0.0, u)


def _softplus_inv(x):
    return x + math.log(-math.expm1(-x)) if x < 30 else x


def fit_bivariate(returns, config: BivariateFitConfig = None) -> BivariateFitResult:
    """Two-stage quasi-ML fit of the spillover system with dynamic correlations."""
    config = config or BivariateFitConfig()
    r = np.asarray(returns, dtype=float)
    if r.ndim != 2 or r.shape[1] != 2:
        raise SpecError("returns must be a (T, 2) array")
    L = config.mean_lags
    mu, phi1, phi2, eps = _ols_mean(r, L)
    n = eps.shape[0]
    h_init = np.ascontiguousarray(np.var(r, axis=0))

    eps2_prev = np.empty((n, 2))
    eps2_prev[0] = h_init
    eps2_prev[1:] = eps[:-1] ** 2
    eps_neg_prev = np.zeros((n, 2))
    eps_neg_prev[1:] = (eps[:-1] < 0.0).astype(float)
    ret_neg_prev, ret_pos_prev = _lagged_sign_dummies(r, L, n)

    masks = [np.zeros(n) for _ in config.shifts]
    for m, s in zip(masks, config.shifts):
        start = max(s.start_index - L, 0)
        m[start:] = 1.0

    w_path = np.empty((n, 2))

    def build(p: dict):
        omega, alpha, gamma, beta = _stage1_matrices(config, p)
        a_eff = np.broadcast_to(alpha, (n, 2, 2)).copy()
        b_eff = np.broadcast_to(beta, (n, 2, 2)).copy()
        a_eff[:, 0, 0] += gamma[0] * eps_neg_prev[:, 0]
        a_eff[:, 1, 1] += gamma[1] * eps_neg_prev[:, 1]
        for jdx, (m, s) in enumerate(zip(masks, config.shifts), start=1):
            val = p[f"{s.entry}_s{jdx}"]
            i, j = (0, 1) if s.entry.endswith("12") else (1, 0)
            tgt = a_eff if s.entry.startswith("a") else b_eff
            tgt[:, i, j] += val * m
        if "a12_neg" in p:
            a_eff[:, 0, 1] += p["a12_neg"] * ret_neg_prev[:, 1]
        if "a21_neg" in p:
            a_eff[:, 1, 0] += p["a21_neg"] * ret_neg_prev[:, 0]
        if "b12_pos" in p:
            b_eff[:, 0, 1] += p["b12_pos"] * ret_pos_prev[:, 1]
        if "b21_pos" in p:
            b_eff[:, 1, 0] += p["b21_pos"] * ret_pos_prev[:, 0]
        w_path[:, 0] = omega[0]
        w_path[:, 1] = omega[1]
        return w_path, a_eff, b_eff

    def stage1_ll(p: dict):
        w, a_eff, b_eff = build(p)
        h, first_bad = backend.biv_filter(w, a_eff, b_eff, eps2_prev, h_init)
        if first_bad >= 0:
            return -_PENALTY * (1.0 + (n - first_bad) / n), None
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            ll = -0.5 * np.sum(2.0 * _LOG2PI + np.log(h[:, 0] * h[:, 1])
                               + eps[:, 0] ** 2 / h[:, 0]
                               + eps[:, 1] ** 2 / h[:, 1])
        if not np.isfinite(ll):
            return -_PENALTY * 2.0, None
        return float(ll), h

    start = {"omega1": 0.05 * h_init[0], "omega2": 0.05 * h_init[1],
             "a11": 0.05, "a22": 0.05, "b11": 0.85, "b22": 0.85}
    for name in _stage1_names(config):
        start.setdefault(name, 0.05 if name in ("g1", "g2") else 0.0)

    def objective(u):
        return -stage1_ll(_stage1_untransform(config, u))[0]

    rng = np.random.default_rng(config.seed)
    u0 = _stage1_transform(config, start)
    best_u, best_val = None, math.inf
    n_starts = 0
    for attempt in range(config.restarts + 1):
        u_try = u0 if attempt == 0 else \
            (best_u if best_u is not None else u0) \
            + rng.normal(0.0, 0.15, size=u0.shape)
        res = optimize.minimize(objective, u_try, method="L-BFGS-B")
        n_starts += 1
        if res.fun < best_val:
            best_val, best_u = float(res.fun), res.x
        if best_val < _PENALTY:
            break
    res = optimize.minimize(objective, best_u, method="Nelder-Mead",
                            options={"maxiter": 8000, "fatol": 1e-9})
    if res.fun < best_val:
        best_val, best_u = float(res.fun), res.x
    if best_val >= _PENALTY:
        raise FitError(f"stage-1 optimiser failed after {n_starts} starts")
    params = _stage1_untransform(config, best_u)
    ll1, h = stage1_ll(params)
    z = eps / np.sqrt(h)

    # correlation targeting: long-run matrix = sample correlation of z
    c = z.T @ z / n
    d = np.sqrt(np.diag(c))
    qbar = c / np.outer(d, d)

    def corr_ll_terms(a, b):
        rho = backend.dcc_path(np.ascontiguousarray(z), qbar, a, b)
        quad = (z[:, 0] ** 2 + z[:, 1] ** 2
                - 2.0 * rho * z[:, 0] * z[:, 1]) / (1.0 - rho**2)
        return -0.5 * (np.log(1.0 - rho**2) + quad)

    def stage2_obj(v):
        s, w_ = expit(v[0]), expit(v[1])
        return -float(np.sum(corr_ll_terms(s * w_, s * (1.0 - w_))))

    v0 = np.array([logit(0.97), logit(0.03)])
    res2 = optimize.minimize(stage2_obj, v0, method="Nelder-Mead",
                             options={"xatol": 1e-9, "fatol": 1e-10,
                                      "maxiter": 2000})
    s, w_ = expit(res2.x[0]), expit(res2.x[1])
    a_d, b_d = float(s * w_), float(s * (1.0 - w_))

    se = _stage1_sandwich(config, params, stage1_ll, eps)
    dcc_se = _stage2_sandwich(corr_ll_terms, a_d, b_d)
    quad_ll = float(np.sum(corr_ll_terms(a_d, b_d))
                    + 0.5 * np.sum(z[:, 0] ** 2 + z[:, 1] ** 2))
    full_ll = ll1 + quad_ll

    omega, alpha, gamma, beta = _stage1_matrices(config, params)
    positivity = check_positivity_matrices(
        omega, alpha, gamma, beta,
        SignShift(params.get("a12_neg", 0.0), params.get("a21_neg", 0.0),
                  params.get("b12_pos", 0.0), params.get("b21_pos", 0.0))
        if config.sign_entries else None)

    diagnostics = {"hosking5": hosking_q(z, 5),
                   "hosking5_sq": hosking_q(z, 5, squared=True)}
    mean = {"mu": mu.tolist(), "phi1": phi1.tolist(), "phi2": phi2.tolist()}
    dcc = {"alpha_d": a_d, "beta_d": b_d,
           "se_alpha_d": dcc_se[0], "se_beta_d": dcc_se[1]}
    meta = {
        "backend": backend.BACKEND,
        "stages": "OLS mean; QML variance with identity correlation; "
                  "correlation scalars with targeted long-run matrix",
        "se": "stage-wise sandwich (cross-stage terms ignored)",
    }
    if config.tse_statistic is not None:
        meta["tse_statistic"] = config.tse_statistic
    convergence = {"converged": True, "stage1_starts": n_starts,
                   "stage1_loglik": ll1, "stage2_success": bool(res2.success)}
    return BivariateFitResult(config=config, mean=mean, params=params, se=se,
                              dcc=dcc, qbar=qbar, loglik=full_ll,
                              diagnostics=diagnostics, positivity=positivity,
                              convergence=convergence, meta=meta)


def _stage1_sandwich(config, params, stage1_ll, eps):
    names = _stage1_names(config)
    k = len(names)
    theta = np.array([params[n] for n in names])
    steps = 1e-4 * np.maximum(np.abs(theta), 1e-3)
    n = eps.shape[0]

    def terms(vec):
        p = {nm: float(v) for nm, v in zip(names, vec)}
        ll, h = stage1_ll(p)
        if h is None:
            raise FitError("sandwich evaluation left the feasible region")
        return -0.5 * (2.0 * _LOG2PI + np.log(h[:, 0] * h[:, 1])
                       + eps[:, 0] ** 2 / h[:, 0] + eps[:, 1] ** 2 / h[:, 1])

    scores = np.empty((n, k))
    for i in range(k):
        up, dn = theta.copy(), theta.copy()
        up[i] += steps[i]
        dn[i] -= steps[i]
        scores[:, i] = (terms(up) - terms(dn)) / (2.0 * steps[i])
    smat = scores.T @ scores
    f0 = float(np.sum(terms(theta)))
    hess = np.empty((k, k))
    for i in range(k):
        up, dn = theta.copy(), theta.copy()
        up[i] += steps[i]
        dn[i] -= steps[i]
        hess[i, i] = (float(np.sum(terms(up))) - 2.0 * f0
                      + float(np.sum(terms(dn)))) / steps[i] ** 2
    for i in range(k):
        for j in range(i + 1, k):
            pp, pm, mp, mm = (theta.copy() for _ in range(4))
            pp[[i, j]] += [steps[i], steps[j]]
            pm[i] += steps[i]
            pm[j] -= steps[j]
            mp[i] -= steps[i]
            mp[j] += steps[j]
            mm[[i, j]] -= [steps[i], steps[j]]
            hess[i, j] = hess[j, i] = (
                float(np.sum(terms(pp))) - float(np.sum(terms(pm)))
                - float(np.sum(terms(mp))) + float(np.sum(terms(mm)))
            ) / (4.0 * steps[i] * steps[j])
    info = -hess
    cond = float(np.linalg.cond(info))
    inv = np.linalg.pinv(info) if (not np.isfinite(cond) or cond > 1e12) \
        else np.linalg.inv(info)
    cov = inv @ smat @ inv
    return {nm: float(math.sqrt(max(cov[i, i], 0.0)))
            for i, nm in enumerate(names)}


def _stage2_sandwich(corr_ll_terms, a_d, b_d):
    theta = np.array([a_d, b_d])
    steps = 1e-5 * np.maximum(np.abs(theta), 1e-2)

    def terms(v):
        return corr_ll_terms(max(v[0], 0.0), max(v[1], 0.0))

    k = 2
    n = terms(theta).shape[0]
    scores = np.empty((n, k))
    for i in range(k):
        up, dn = theta.copy(), theta.copy()
        up[i] += steps[i]
        dn[i] -= steps[i]
        scores[:, i] = (terms(up) - terms(dn)) / (2.0 * steps[i])
    smat = scores.T @ scores
    f0 = float(np.sum(terms(theta)))
    hess = np.empty((k, k))
    for i in range(k):
        up, dn = theta.copy(), theta.copy()
        up[i] += steps[i]
        dn[i] -= steps[i]
        hess[i, i] = (float(np.sum(terms(up))) - 2.0 * f0
                      + float(np.sum(terms(dn)))) / steps[i] ** 2
    pp, pm, mp, mm = (theta.copy() for _ in range(4))
    pp += steps
    pm[0] += steps[0]
    pm[1] -= steps[1]
    mp[0] -= steps[0]
    mp[1] += steps[1]
    mm -= steps
    hess[0, 1] = hess[1, 0] = (
        float(np.sum(terms(pp))) - float(np.sum(terms(pm)))
        - float(np.sum(terms(mp))) + float(np.sum(terms(mm)))
    ) / (4.0 * steps[0] * steps[1])
    info = -hess
    try:
        cov = np.linalg.inv(info) @ smat @ np.linalg.inv(info)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(info) @ smat @ np.linalg.pinv(info)
    return (float(math.sqrt(max(cov[0, 0], 0.0))),
            float(math.sqrt(max(cov[1, 1], 0.0))))
