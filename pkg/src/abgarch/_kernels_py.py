"""Pure-Python fallbacks for the compiled recursion kernels.

Same signatures and same arithmetic order as ``_kernels.pyx`` so the two
backends agree to the last bit; these run orders of magnitude slower and are
selected only when the extension is unavailable (see ``backend``).
"""

import math

import numpy as np

BACKEND = "python"


def garch_filter(w, a, g, b, eps2_prev, neg_prev, h0):
    """One-series AGARCH recursion with per-observation coefficients.

    h[t] = w[t] + (a[t] + g[t]*neg_prev[t]) * eps2_prev[t] + b[t]*h[t-1],
    h[-1] = h0.  Returns (h, first_bad) where first_bad is the index of the
    first non-positive variance (-1 if none); h is unreliable past that point.
    """
    T = len(w)
    h = np.empty(T)
    prev = h0
    first_bad = -1
    for t in range(T):
        cur = w[t] + (a[t] + g[t] * neg_prev[t]) * eps2_prev[t] + b[t] * prev
        h[t] = cur
        if cur <= 0.0:
            first_bad = t
            break
        prev = cur
    return h, first_bad


def biv_filter(w, a_eff, b_eff, eps2_prev, h0):
    """Two-series spillover variance recursion.

    h[t] = w[t] + a_eff[t] @ eps2_prev[t] + b_eff[t] @ h[t-1] with h[-1] = h0;
    coefficient paths are (T,2) and (T,2,2) arrays with every regime/sign
    shift already folded in.  Returns (h, first_bad).
    """
    T = w.shape[0]
    h = np.empty((T, 2))
    p0, p1 = h0[0], h0[1]
    first_bad = -1
    for t in range(T):
        e0, e1 = eps2_prev[t, 0], eps2_prev[t, 1]
        c0 = (w[t, 0] + a_eff[t, 0, 0] * e0 + a_eff[t, 0, 1] * e1
              + b_eff[t, 0, 0] * p0 + b_eff[t, 0, 1] * p1)
        c1 = (w[t, 1] + a_eff[t, 1, 0] * e0 + a_eff[t, 1, 1] * e1
              + b_eff[t, 1, 0] * p0 + b_eff[t, 1, 1] * p1)
        h[t, 0] = c0
        h[t, 1] = c1
        if c0 <= 0.0 or c1 <= 0.0:
            first_bad = t
            break
        p0, p1 = c0, c1
    return h, first_bad


def dcc_path(u, qbar, a, b):
    """Correlation path of the scalar dynamic-correlation recursion.

    ``u`` holds unit-variance standardised residuals.  The recursion runs on
    the pseudo-covariance Q with the driving outer product rescaled by the
    current diagonal of Q, starting from Qed at the long-run matrix.
    Returns the correlation series.
    """
    T = u.shape[0]
    rho = np.empty(T)
    q11, q22, q12 = qbar[0, 0], qbar[1, 1], qbar[0, 1]
    c11 = (1.0 - a - b) * qbar[0, 0]
    c22 = (1.0 - a - b) * qbar[1, 1]
    c12 = (1.0 - a - b) * qbar[0, 1]
    for t in range(T):
        rho[t] = q12 / math.sqrt(q11 * q22)
        e0 = u[t, 0] * math.sqrt(q11)
        e1 = u[t, 1] * math.sqrt(q22)
        q11 = c11 + a * e0 * e0 + b * q11
        q22 = c22 + a * e1 * e1 + b * q22
        q12 = c12 + a * e0 * e1 + b * q12
    return rho


def biv_sim(z, w, a, g, bmat, da, db, sign_shift, use_sign, qbar, a_d, b_d,
            mu, p1, p2, h_init, y_init, y_init2, eps2_init, neg_init):
    """Simulate the two-series spillover model with dynamic correlations.

    ``z`` is a (T,2) block of i.i.d. standard draws; ``da``/``db`` are (T,2,2)
    break-shift paths (zeros when absent); ``sign_shift`` packs the four
    sign-regime spillover entries (a12-, a21-, b12+, b21+).  Returns
    (y, h, rho, eps, first_bad).
    """
    T = z.shape[0]
    y = np.empty((T, 2))
    h = np.empty((T, 2))
    rho = np.empty(T)
    eps = np.empty((T, 2))
    sa12, sa21, sb12, sb21 = sign_shift
    q11, q22, q12 = qbar[0, 0], qbar[1, 1], qbar[0, 1]
    c11 = (1.0 - a_d - b_d) * qbar[0, 0]
    c22 = (1.0 - a_d - b_d) * qbar[1, 1]
    c12 = (1.0 - a_d - b_d) * qbar[0, 1]
    hp0, hp1 = h_init[0], h_init[1]
    yp0, yp1 = y_init[0], y_init[1]
    yq0, yq1 = y_init2[0], y_init2[1]
    e20, e21 = eps2_init[0], eps2_init[1]
    s0, s1 = neg_init[0], neg_init[1]
    first_bad = -1
    for t in range(T):
        a00 = a[0, 0] + g[0] * s0 + da[t, 0, 0]
        a11 = a[1, 1] + g[1] * s1 + da[t, 1, 1]
        a01 = a[0, 1] + da[t, 0, 1]
        a10 = a[1, 0] + da[t, 1, 0]
        b00 = bmat[0, 0] + db[t, 0, 0]
        b11 = bmat[1, 1] + db[t, 1, 1]
        b01 = bmat[0, 1] + db[t, 0, 1]
        b10 = bmat[1, 0] + db[t, 1, 0]
        if use_sign:
            if yp1 < 0.0:
                a01 += sa12
            if yp0 < 0.0:
                a10 += sa21
            if yp1 > 0.0:
                b01 += sb12
            if yp0 > 0.0:
                b10 += sb21
        h0 = w[0] + a00 * e20 + a01 * e21 + b00 * hp0 + b01 * hp1
        h1 = w[1] + a10 * e20 + a11 * e21 + b10 * hp0 + b11 * hp1
        h[t, 0] = h0
        h[t, 1] = h1
        if h0 <= 0.0 or h1 <= 0.0:
            first_bad = t
            break
        r = q12 / math.sqrt(q11 * q22)
        rho[t] = r
        u0 = z[t, 0]
        u1 = r * z[t, 0] + math.sqrt(1.0 - r * r) * z[t, 1]
        ep0 = u0 * math.sqrt(h0)
        ep1 = u1 * math.sqrt(h1)
        eps[t, 0] = ep0
        eps[t, 1] = ep1
        e0 = u0 * math.sqrt(q11)
        e1 = u1 * math.sqrt(q22)
        q11 = c11 + a_d * e0 * e0 + b_d * q11
        q22 = c22 + a_d * e1 * e1 + b_d * q22
        q12 = c12 + a_d * e0 * e1 + b_d * q12
        cy0 = mu[0] + p1[0, 0] * yp0 + p1[0, 1] * yp1 + p2[0, 0] * yq0 + p2[0, 1] * yq1 + ep0
        cy1 = mu[1] + p1[1, 0] * yp0 + p1[1, 1] * yp1 + p2[1, 0] * yq0 + p2[1, 1] * yq1 + ep1
        y[t, 0] = cy0
        y[t, 1] = cy1
        yq0, yq1 = yp0, yp1
        yp0, yp1 = cy0, cy1
        hp0, hp1 = h0, h1
        e20, e21 = ep0 * ep0, ep1 * ep1
        s0 = 1.0 if u0 < 0.0 else 0.0
        s1 = 1.0 if u1 < 0.0 else 0.0
    return y, h, rho, eps, first_bad
