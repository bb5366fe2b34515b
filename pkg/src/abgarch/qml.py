"""Quasi-maximum-likelihood estimation of the univariate models.

Covers the AR(0|1|2) mean with an AGARCH(1,1) variance in three flavours:
plain, break dummies (additive shifts of omega/alpha/beta/gamma switching on
at known dates) and sign-regime dummies (coefficients switching on the sign
of the previous return).  The Gaussian quasi-likelihood is maximised over a
reparameterised space: the base variance coefficients are mapped through
log/softplus so positivity holds by construction, dummy increments stay
unconstrained and any parameter point whose implied regime coefficients
break positivity is rejected through a smooth penalty.  Standard errors are
sandwich-form with numerically differentiated scores and Hessian.

The paper-style conventions live here: the variance recursion starts at the
sample variance of the returns, the presample squared shock is that same
value with a non-negative sign, and persistence per regime is the cumulated
dummy sum alpha + beta + gamma/2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from . import backend
from .diagnostics import ljung_box
from .errors import FitError, SpecError
from .params import GarchParams, regime_persistence, regimes_from_increments

__all__ = ["UnivariateModelSpec", "FitOptions", "ConvergenceReport",
           "FitResult", "param_names", "default_params", "loglik",
           "loglik_details", "loglik_gradient", "filter_variance", "fit",
           "robust_se"]

_LOG2PI = math.log(2.0 * math.pi)
_PENALTY = 1.0e7
_FAMILIES = ("omega", "alpha", "beta", "gamma")


@dataclass(frozen=True)
class UnivariateModelSpec:
    """Model layout for one return series.

    ``break_indices`` are observation indices at which each new regime
    starts (dummy = 1 from that index on).  ``free`` lists, per break, which
    coefficient families get an increment; empty means all families allowed
    by the asymmetry flag.
    """

    mean_lags: int = 0
    variance: str = "gjr"  # gjr | break | sign
    asymmetry: bool = True
    break_indices: tuple = ()
    free: tuple = ()

    def __post_init__(self):
        if self.mean_lags not in (0, 1, 2):
            raise SpecError("mean_lags must be 0, 1 or 2")
        if self.variance not in ("gjr", "break", "sign"):
            raise SpecError("variance must be 'gjr', 'break' or 'sign'")
        if self.variance == "sign" and self.asymmetry:
            raise SpecError("the sign-regime model is symmetric; "
                            "set asymmetry=False")
        breaks = tuple(int(i) for i in self.break_indices)
        object.__setattr__(self, "break_indices", breaks)
        if self.variance != "break":
            if breaks or self.free:
                raise SpecError("break_indices/free only apply to variance='break'")
            return
        if not breaks:
            raise SpecError("variance='break' needs at least one break index")
        if any(b <= a for a, b in zip(breaks, breaks[1:])):
            raise SpecError("break indices must be strictly increasing")
        families = _FAMILIES if self.asymmetry else ("omega", "alpha", "beta")
        free = self.free if self.free else tuple(families for _ in breaks)
        if len(free) != len(breaks):
            raise SpecError("free must list one family subset per break")
        norm = []
        for fams in free:
            fams = tuple(fams)
            bad = set(fams) - set(families)
            if bad:
                raise SpecError(f"unknown or disallowed families: {sorted(bad)}")
            norm.append(fams)
        object.__setattr__(self, "free", tuple(norm))

    def validate_sample(self, T: int, min_segment: int = 50) -> None:
        """Check break placement against a sample of length T."""
        edges = (0,) + self.break_indices + (T,)
        if any(not 0 < b < T for b in self.break_indices):
            raise SpecError("break indices must lie strictly inside the sample")
        if any(b - a < min_segment for a, b in zip(edges, edges[1:])):
            raise SpecError(f"every segment needs >= {min_segment} observations")


def param_names(spec: UnivariateModelSpec) -> list:
    names = ["mu"]
    if spec.mean_lags >= 1:
        names.append("phi1")
    if spec.mean_lags == 2:
        names.append("phi2")
    names.append("omega")
    names.append("alpha")
    if spec.asymmetry:
        names.append("gamma")
    names.append("beta")
    if spec.variance == "break":
        for i, fams in enumerate(spec.free, start=1):
            for fam in _FAMILIES:
                if fam in fams:
                    names.append(f"{fam}_{i}")
    elif spec.variance == "sign":
        names += ["omega_neg", "alpha_neg", "beta_neg"]
    return names


def default_params(returns, spec: UnivariateModelSpec) -> dict:
    r = np.asarray(returns, dtype=float)
    v = float(np.var(r))
    p = {"mu": float(np.mean(r))}
    if spec.mean_lags >= 1:
        p["phi1"] = 0.0
    if spec.mean_lags == 2:
        p["phi2"] = 0.0
    p["omega"] = 0.05 * v
    p["alpha"] = 0.05
    if spec.asymmetry:
        p["gamma"] = 0.05
    p["beta"] = 0.85
    for name in param_names(spec):
        if name not in p:
            p[name] = 0.0
    return p


def _residuals(r: np.ndarray, spec: UnivariateModelSpec, p: dict) -> np.ndarray:
    L = spec.mean_lags
    eps = r[L:] - p["mu"]
    if L >= 1:
        eps = eps - p["phi1"] * r[L - 1:-1]
    if L == 2:
        eps = eps - p["phi2"] * r[:-2]
    return eps


def _regime_table(spec: UnivariateModelSpec, p: dict):
    """Per-regime (omega, alpha, gamma, beta), most recent regime first."""
    g0 = p.get("gamma", 0.0)
    base = GarchParams(p["omega"], p["alpha"], g0, p["beta"])
    if spec.variance == "gjr":
        return (base,)
    if spec.variance == "sign":
        neg = GarchParams(p["omega"] + p["omega_neg"],
                          p["alpha"] + p["alpha_neg"], g0,
                          p["beta"] + p["beta_neg"])
        return (neg, base)  # ordering is nominal; both states recur
    incs = [GarchParams(p.get(f"omega_{i}", 0.0), p.get(f"alpha_{i}", 0.0),
                        p.get(f"gamma_{i}", 0.0), p.get(f"beta_{i}", 0.0))
            for i in range(1, len(spec.break_indices) + 1)]
    return regimes_from_increments(base, incs)


def _feasibility_gap(spec: UnivariateModelSpec, p: dict) -> float:
    """Total positivity violation across implied regimes (0 when feasible)."""
    gap = 0.0
    for reg in _regime_table(spec, p):
        gap += max(0.0, -reg.omega + 1e-12)
        gap += max(0.0, -reg.alpha)
        gap += max(0.0, -reg.beta)
        gap += max(0.0, -(reg.alpha + reg.gamma))
    return gap


def _variance_inputs(r: np.ndarray, spec: UnivariateModelSpec, p: dict):
    """Residuals plus per-observation coefficient paths for the filter."""
    eps = _residuals(r, spec, p)
    n = eps.shape[0]
    w = np.full(n, p["omega"])
    a = np.full(n, p["alpha"])
    g = np.full(n, p.get("gamma", 0.0))
    b = np.full(n, p["beta"])
    L = spec.mean_lags
    if spec.variance == "break":
        t_index = np.arange(L, L + n)
        for i, bk in enumerate(spec.break_indices, start=1):
            d = (t_index >= bk).astype(float)
            w += p.get(f"omega_{i}", 0.0) * d
            a += p.get(f"alpha_{i}", 0.0) * d
            g += p.get(f"gamma_{i}", 0.0) * d
            b += p.get(f"beta_{i}", 0.0) * d
    elif spec.variance == "sign":
        # dummy is the sign of the previous raw return; zero presample
        prev_neg = np.zeros(n)
        prev_neg[1:] = (r[L:L + n - 1] < 0.0).astype(float)
        if L >= 1:
            prev_neg[0] = float(r[L - 1] < 0.0)
        w = w + p["omega_neg"] * prev_neg
        a = a + p["alpha_neg"] * prev_neg
        b = b + p["beta_neg"] * prev_neg
    h_init = float(np.var(r))
    eps2_prev = np.empty(n)
    eps2_prev[0] = h_init
    eps2_prev[1:] = eps[:-1] ** 2
    neg_prev = np.zeros(n)
    neg_prev[1:] = (eps[:-1] < 0.0).astype(float)
    return eps, (w, a, g, b, eps2_prev, neg_prev, h_init)


def filter_variance(returns, spec: UnivariateModelSpec, params: dict):
    """Conditional-variance path implied by the parameters.

    Returns ``(h, eps, first_bad)``; ``first_bad`` is -1 when the whole path
    stayed positive.
    """
    r = np.asarray(returns, dtype=float)
    eps, args = _variance_inputs(r, spec, params)
    h, first_bad = backend.garch_filter(*args)
    return h, eps, first_bad


def loglik_details(returns, spec: UnivariateModelSpec, params: dict):
    """(loglik, h, eps, ok); a penalised loglik carries ok=False."""
    r = np.asarray(returns, dtype=float)
    gap = _feasibility_gap(spec, params)
    if gap > 0.0:
        return -_PENALTY * (1.0 + gap), None, None, False
    h, eps, first_bad = filter_variance(r, spec, params)
    if first_bad >= 0:
        depth = (h.shape[0] - first_bad) / h.shape[0]
        return -_PENALTY * (1.0 + depth), None, None, False
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        ll = -0.5 * np.sum(_LOG2PI + np.log(h) + eps**2 / h)
    if not np.isfinite(ll):
        return -_PENALTY * 2.0, None, None, False
    return float(ll), h, eps, True


def loglik(returns, spec: UnivariateModelSpec, params: dict) -> float:
    """Gaussian quasi-log-likelihood (penalised outside the feasible region)."""
    return loglik_details(returns, spec, params)[0]


def loglik_gradient(returns, spec: UnivariateModelSpec, params: dict,
                    rel_step: float = 1e-6) -> dict:
    """Central-difference gradient of the quasi-log-likelihood."""
    names = param_names(spec)
    grad = {}
    for name in names:
        step = rel_step * max(abs(params[name]), 1e-2)
        up = dict(params)
        dn = dict(params)
        up[name] = params[name] + step
        dn[name] = params[name] - step
        grad[name] = (loglik(returns, spec, up)
                      - loglik(returns, spec, dn)) / (2.0 * step)
    return grad


# ---------------------------------------------------------------------------
# optimiser plumbing


def _softplus(u):
    return np.logaddexp(0.0, u)


def _softplus_inv(x):
    x = max(x, 1e-12)
    return x + math.log(-math.expm1(-x)) if x < 30 else x


def _to_unconstrained(spec, p: dict) -> np.ndarray:
    u = []
    for name in param_names(spec):
        v = p[name]
        if name == "omega":
            u.append(math.log(max(v, 1e-12)))
        elif name == "alpha":
            u.append(_softplus_inv(max(v, 1e-10)))
        elif name == "beta":
            u.append(_softplus_inv(max(v, 1e-10)))
        elif name == "gamma":
            u.append(_softplus_inv(max(p["alpha"] + v, 1e-10)))
        else:
            u.append(v)
    return np.asarray(u)


def _from_unconstrained(spec, u: np.ndarray) -> dict:
    p = {}
    names = param_names(spec)
    for name, v in zip(names, u):
        p[name] = float(v)
    p["omega"] = math.exp(min(p["omega"], 50.0))
    alpha = float(_softplus(p["alpha"]))
    p["alpha"] = alpha
    p["beta"] = float(_softplus(p["beta"]))
    if "gamma" in p:
        p["gamma"] = float(_softplus(p["gamma"])) - alpha
    return p


@dataclass(frozen=True)
class FitOptions:
    restarts: int = 4
    seed: int = 1
    polish: bool = True
    prune: bool = False
    prune_level: float = 0.10
    start: dict = None


@dataclass(frozen=True)
class ConvergenceReport:
    converged: bool
    n_starts: int
    accepted_loglik: tuple
    message: str


@dataclass
class FitResult:
    spec: UnivariateModelSpec
    params: dict
    se: dict
    loglik: float
    persistence: dict
    second_order: dict
    diagnostics: dict
    convergence: ConvergenceReport
    meta: dict = field(default_factory=dict)

    def to_json(self) -> str:
        out = {
            "params": self.params,
            "se": self.se,
            "loglik": self.loglik,
            "persistence": self.persistence,
            "second_order": self.second_order,
            "diagnostics": self.diagnostics,
            "convergence": {
                "converged": self.convergence.converged,
                "n_starts": self.convergence.n_starts,
                "accepted_loglik": list(self.convergence.accepted_loglik),
                "message": self.convergence.message,
            },
            "meta": self.meta,
        }
        return json.dumps(out, indent=2, sort_keys=True)

    def to_table(self) -> str:
        """Aligned estimate table with robust SEs and significance marks."""
        lines = ["parameter      estimate      (robust se)"]
        for name in param_names(self.spec):
            est = self.params[name]
            se = self.se.get(name, float("nan"))
            mark = ""
            if se > 0 and math.isfinite(se):
                t = abs(est / se)
                mark = "a" if t > 2.576 else "b" if t > 1.960 else \
                    "c" if t > 1.645 else ""
            lines.append(f"{name:<12} {est:>12.5f}   ({se:.5f}){mark}")
        lines.append(f"loglik       {self.loglik:>12.2f}")
        for label, (stat, pval) in self.diagnostics.items():
            lines.append(f"{label:<12} {stat:>12.3f}   [{pval:.3f}]")
        for label, value in self.persistence.items():
            lines.append(f"pers[{label}] {value:>12.4f}")
        return "\n".join(lines)


def _persistence_report(spec: UnivariateModelSpec, p: dict):
    regimes = _regime_table(spec, p)
    if spec.variance == "sign":
        values = {"pos": regime_persistence(regimes[1]),
                  "neg": regime_persistence(regimes[0])}
    elif spec.variance == "break":
        values = {f"regime_{i + 1}": regime_persistence(r)
                  for i, r in enumerate(regimes)}
    else:
        values = {"all": regime_persistence(regimes[0])}
    ok = all(v < 1.0 for v in values.values())
    second_order = {"satisfied": ok, "values": dict(values)}
    return values, second_order


def fit(returns, spec: UnivariateModelSpec, options: FitOptions = None) -> FitResult:
    """Maximise the Gaussian quasi-likelihood and assemble the fit report."""
    options = options or FitOptions()
    r = np.asarray(returns, dtype=float)
    if not np.all(np.isfinite(r)):
        raise SpecError("returns must be finite")
    if spec.variance == "break":
        spec.validate_sample(r.shape[0])

    start = dict(default_params(r, spec))
    if options.start:
        start.update(options.start)

    def objective(u):
        return -loglik(r, spec, _from_unconstrained(spec, u))

    rng = np.random.default_rng(options.seed)
    accepted = []
    best_u, best_val = None, math.inf
    u0 = _to_unconstrained(spec, start)
    n_starts = 0
    for attempt in range(options.restarts + 1):
        if attempt == 0:
            u_try = u0
        else:
            u_try = best_u if best_u is not None else u0
            u_try = u_try + rng.normal(0.0, 0.15, size=u_try.shape)
        res = optimize.minimize(objective, u_try, method="L-BFGS-B")
        n_starts += 1
        if res.fun < best_val:
            best_val, best_u = float(res.fun), res.x
            accepted.append(-best_val)
        if best_val < _PENALTY:
            break  # feasible optimum found; restarts only cure failures
    if options.polish and best_u is not None:
        res = optimize.minimize(objective, best_u, method="Nelder-Mead",
                                options={"maxiter": 4000, "xatol": 1e-8,
                                         "fatol": 1e-10})
        if res.fun < best_val:
            best_val, best_u = float(res.fun), res.x
            accepted.append(-best_val)
    if best_u is None or best_val >= _PENALTY:
        raise FitError("optimiser failed to find a feasible optimum "
                       f"after {n_starts} starts")

    params = _from_unconstrained(spec, best_u)
    ll, h, eps, ok = loglik_details(r, spec, params)
    if not ok:
        raise FitError("optimum is infeasible")
    se, se_info = robust_se(r, spec, params)

    if options.prune:
        pruned = _prune_insignificant(r, spec, params, se, options)
        if pruned is not None:
            return pruned

    z = eps / np.sqrt(h)
    diagnostics = {"lb5": ljung_box(z, 5), "lb5_sq": ljung_box(z, 5, squared=True)}
    persistence, second_order = _persistence_report(spec, params)
    conv = ConvergenceReport(converged=True, n_starts=n_starts,
                             accepted_loglik=tuple(accepted),
                             message="ok")
    meta = {
        "backend": backend.BACKEND,
        "optimizer": "L-BFGS-B on log/softplus-reparameterised base "
                     "coefficients with raw dummy increments, up to "
                     f"{options.restarts} jittered restarts, Nelder-Mead polish",
        "se": "sandwich with central-difference scores and Hessian",
        "h_init": "sample variance of returns",
        "quasi_likelihood": "gaussian",
        "se_condition_number": se_info["cond"],
        "se_singular": se_info["singular"],
    }
    return FitResult(spec=spec, params=params, se=se, loglik=ll,
                     persistence=persistence, second_order=second_order,
                     diagnostics=diagnostics, convergence=conv, meta=meta)


def _prune_insignificant(r, spec, params, se, options):
    """Drop the weakest insignificant dummy increment and refit (iteratively)."""
    from scipy.stats import norm

    crit = norm.isf(options.prune_level / 2.0)
    weakest, weakest_t = None, math.inf
    for i, fams in enumerate(spec.free, start=1):
        for fam in fams:
            name = f"{fam}_{i}"
            s = se.get(name, float("nan"))
            if not (s > 0 and math.isfinite(s)):
                continue
            t = abs(params[name] / s)
            if t < crit and t < weakest_t:
                weakest, weakest_t = (i - 1, fam), t
    if weakest is None:
        return None
    idx, fam = weakest
    free = list(list(f) for f in spec.free)
    free[idx].remove(fam)
    new_spec = replace(spec, free=tuple(tuple(f) for f in free))
    return fit(r, new_spec, replace(options, prune=True))


def robust_se(returns, spec: UnivariateModelSpec, params: dict):
    """Sandwich standard errors at the (interior) optimum.

    Returns ``(se, info)`` with the per-parameter standard errors and a
    report carrying the Hessian condition number; a singular Hessian falls
    back to the pseudo-inverse and is flagged.
    """
    r = np.asarray(returns, dtype=float)
    names = param_names(spec)
    k = len(names)
    theta = np.array([params[n] for n in names])
    steps = 1e-4 * np.maximum(np.abs(theta), 1e-3)

    def ll_terms(vec):
        p = {n: float(v) for n, v in zip(names, vec)}
        _, h, eps, ok = loglik_details(r, spec, p)
        if not ok:
            raise FitError("robust_se requires an interior feasible optimum")
        return -0.5 * (_LOG2PI + np.log(h) + eps**2 / h)

    base = ll_terms(theta)
    T = base.shape[0]
    scores = np.empty((T, k))
    for i in range(k):
        up, dn = theta.copy(), theta.copy()
        up[i] += steps[i]
        dn[i] -= steps[i]
        scores[:, i] = (ll_terms(up) - ll_terms(dn)) / (2.0 * steps[i])
    smat = scores.T @ scores

    def ll_total(vec):
        return float(np.sum(ll_terms(vec)))

    f0 = float(np.sum(base))
    hess = np.empty((k, k))
    for i in range(k):
        up, dn = theta.copy(), theta.copy()
        up[i] += steps[i]
        dn[i] -= steps[i]
        hess[i, i] = (ll_total(up) - 2.0 * f0 + ll_total(dn)) / steps[i] ** 2
    for i in range(k):
        for j in range(i + 1, k):
            pp, pm, mp, mm = (theta.copy() for _ in range(4))
            pp[[i, j]] += [steps[i], steps[j]]
            pm[i] += steps[i]
            pm[j] -= steps[j]
            mp[i] -= steps[i]
            mp[j] += steps[j]
            mm[[i, j]] -= [steps[i], steps[j]]
            val = (ll_total(pp) - ll_total(pm) - ll_total(mp) + ll_total(mm)) \
                / (4.0 * steps[i] * steps[j])
            hess[i, j] = hess[j, i] = val
    info_mat = -hess
    cond = float(np.linalg.cond(info_mat))
    singular = not np.isfinite(cond) or cond > 1e12
    inv = np.linalg.pinv(info_mat) if singular else np.linalg.inv(info_mat)
    cov = inv @ smat @ inv
    se = {n: float(math.sqrt(max(cov[i, i], 0.0))) for i, n in enumerate(names)}
    return se, {"cond": cond, "singular": singular}
