# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled recursion kernels.

Mirrors ``_kernels_py`` operation for operation (same arithmetic order) so
the two backends produce bit-identical output; see that module for the
docstrings.
"""

from libc.math cimport sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def garch_filter(double[::1] w, double[::1] a, double[::1] g, double[::1] b,
                 double[::1] eps2_prev, double[::1] neg_prev, double h0):
    cdef Py_ssize_t T = w.shape[0]
    cdef cnp.ndarray[double, ndim=1] h_arr = np.empty(T)
    cdef double[::1] h = h_arr
    cdef double prev = h0
    cdef double cur
    cdef Py_ssize_t t
    cdef Py_ssize_t first_bad = -1
    for t in range(T):
        cur = w[t] + (a[t] + g[t] * neg_prev[t]) * eps2_prev[t] + b[t] * prev
        h[t] = cur
        if cur <= 0.0:
            first_bad = t
            break
        prev = cur
    return h_arr, first_bad


def biv_filter(double[:, ::1] w, double[:, :, ::1] a_eff,
               double[:, :, ::1] b_eff, double[:, ::1] eps2_prev,
               double[::1] h0):
    cdef Py_ssize_t T = w.shape[0]
    cdef cnp.ndarray[double, ndim=2] h_arr = np.empty((T, 2))
    cdef double[:, ::1] h = h_arr
    cdef double p0 = h0[0], p1 = h0[1]
    cdef double c0, c1, e0, e1
    cdef Py_ssize_t t
    cdef Py_ssize_t first_bad = -1
    for t in range(T):
        e0 = eps2_prev[t, 0]
        e1 = eps2_prev[t, 1]
        c0 = (w[t, 0] + a_eff[t, 0, 0] * e0 + a_eff[t, 0, 1] * e1
              + b_eff[t, 0, 0] * p0 + b_eff[t, 0, 1] * p1)
        c1 = (w[t, 1] + a_eff[t, 1, 0] * e0 + a_eff[t, 1, 1] * e1
              + b_eff[t, 1, 0] * p0 + b_eff[t, 1, 1] * p1)
        h[t, 0] = c0
        h[t, 1] = c1
        if c0 <= 0.0 or c1 <= 0.0:
            first_bad = t
            break
        p0 = c0
        p1 = c1
    return h_arr, first_bad


def dcc_path(double[:, ::1] u, double[:, ::1] qbar, double a, double b):
    cdef Py_ssize_t T = u.shape[0]
    cdef cnp.ndarray[double, ndim=1] rho_arr = np.empty(T)
    cdef double[::1] rho = rho_arr
    cdef double q11 = qbar[0, 0], q22 = qbar[1, 1], q12 = qbar[0, 1]
    cdef double c11 = (1.0 - a - b) * qbar[0, 0]
    cdef double c22 = (1.0 - a - b) * qbar[1, 1]
    cdef double c12 = (1.0 - a - b) * qbar[0, 1]
    cdef double e0, e1
    cdef Py_ssize_t t
    for t in range(T):
        rho[t] = q12 / sqrt(q11 * q22)
        e0 = u[t, 0] * sqrt(q11)
        e1 = u[t, 1] * sqrt(q22)
        q11 = c11 + a * e0 * e0 + b * q11
        q22 = c22 + a * e1 * e1 + b * q22
        q12 = c12 + a * e0 * e1 + b * q12
    return rho_arr


def biv_sim(double[:, ::1] z, double[::1] w, double[:, ::1] a, double[::1] g,
            double[:, ::1] bmat, double[:, :, ::1] da, double[:, :, ::1] db,
            sign_shift, bint use_sign, double[:, ::1] qbar, double a_d,
            double b_d, double[::1] mu, double[:, ::1] p1, double[:, ::1] p2,
            double[::1] h_init, double[::1] y_init, double[::1] y_init2,
            double[::1] eps2_init, double[::1] neg_init):
    cdef Py_ssize_t T = z.shape[0]
    cdef cnp.ndarray[double, ndim=2] y_arr = np.empty((T, 2))
    cdef cnp.ndarray[double, ndim=2] h_arr = np.empty((T, 2))
    cdef cnp.ndarray[double, ndim=1] rho_arr = np.empty(T)
    cdef cnp.ndarray[double, ndim=2] eps_arr = np.empty((T, 2))
    cdef double[:, ::1] y = y_arr
    cdef double[:, ::1] h = h_arr
    cdef double[::1] rho = rho_arr
    cdef double[:, ::1] eps = eps_arr
    cdef double sa12 = sign_shift[0], sa21 = sign_shift[1]
    cdef double sb12 = sign_shift[2], sb21 = sign_shift[3]
    cdef double q11 = qbar[0, 0], q22 = qbar[1, 1], q12 = qbar[0, 1]
    cdef double c11 = (1.0 - a_d - b_d) * qbar[0, 0]
    cdef double c22 = (1.0 - a_d - b_d) * qbar[1, 1]
    cdef double c12 = (1.0 - a_d - b_d) * qbar[0, 1]
    cdef double hp0 = h_init[0], hp1 = h_init[1]
    cdef double yp0 = y_init[0], yp1 = y_init[1]
    cdef double yq0 = y_init2[0], yq1 = y_init2[1]
    cdef double e20 = eps2_init[0], e21 = eps2_init[1]
    cdef double s0 = neg_init[0], s1 = neg_init[1]
    cdef double a00, a01, a10, a11, b00, b01, b10, b11
    cdef double h0, h1, r, u0, u1, ep0, ep1, e0, e1, cy0, cy1
    cdef Py_ssize_t t
    cdef Py_ssize_t first_bad = -1
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
        r = q12 / sqrt(q11 * q22)
        rho[t] = r
        u0 = z[t, 0]
        u1 = r * z[t, 0] + sqrt(1.0 - r * r) * z[t, 1]
        ep0 = u0 * sqrt(h0)
        ep1 = u1 * sqrt(h1)
        eps[t, 0] = ep0
        eps[t, 1] = ep1
        e0 = u0 * sqrt(q11)
        e1 = u1 * sqrt(q22)
        q11 = c11 + a_d * e0 * e0 + b_d * q11
        q22 = c22 + a_d * e1 * e1 + b_d * q22
        q12 = c12 + a_d * e0 * e1 + b_d * q12
        cy0 = mu[0] + p1[0, 0] * yp0 + p1[0, 1] * yp1 + p2[0, 0] * yq0 + p2[0, 1] * yq1 + ep0
        cy1 = mu[1] + p1[1, 0] * yp0 + p1[1, 1] * yp1 + p2[1, 0] * yq0 + p2[1, 1] * yq1 + ep1
        y[t, 0] = cy0
        y[t, 1] = cy1
        yq0 = yp0
        yq1 = yp1
        yp0 = cy0
        yp1 = cy1
        hp0 = h0
        hp1 = h1
        e20 = ep0 * ep0
        e21 = ep1 * ep1
        s0 = 1.0 if u0 < 0.0 else 0.0
        s1 = 1.0 if u1 < 0.0 else 0.0
    return y_arr, h_arr, rho_arr, eps_arr, first_bad
