# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled kernel backend.

Sequential C loops over the latent path.  Arithmetic matches pure.py
expression for expression so the two backends take the same accept/reject
decisions; see setup.py for the flags that keep the compiler from
re-associating floating point.
"""

import numpy as np

from libc.math cimport exp, isfinite

from svhmc.errors import NumericalRangeError
from svhmc._kernels.pure import H_OVERFLOW, _nonfinite_message, _overflow_message

cdef double H_MIN = H_OVERFLOW


cdef int _grad_into(const double[::1] y2, const double[::1] h, double mu, double phi,
                    double s2, double[::1] g):
    # fills g; returns -1 on success, else first out-of-range site
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t i
    cdef double e
    for i in range(n):
        if h[i] < H_MIN:
            return <int> i
    for i in range(n):
        g[i] = 0.5 - 0.5 * y2[i] * exp(-h[i])
    g[0] += (1.0 - phi * phi) * (h[0] - mu) / s2
    for i in range(n - 1):
        e = (h[i + 1] - mu) - phi * (h[i] - mu)
        g[i + 1] += e / s2
        g[i] -= phi * e / s2
    for i in range(n):
        if not isfinite(g[i]):
            return <int> i
    return -1


def potential_energy(const double[::1] y2, const double[::1] h, double mu, double phi,
                     double s2):
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t i
    cdef double acc = 0.0
    cdef double term, e, d0
    for i in range(n):
        if h[i] < H_MIN:
            raise NumericalRangeError(_overflow_message(i, h[i]))
    for i in range(n):
        term = 0.5 * h[i] + 0.5 * y2[i] * exp(-h[i])
        if not isfinite(term):
            raise NumericalRangeError(_nonfinite_message(i))
        acc += term
    d0 = h[0] - mu
    acc += (1.0 - phi * phi) * d0 * d0 / (2.0 * s2)
    for i in range(n - 1):
        e = (h[i + 1] - mu) - phi * (h[i] - mu)
        term = e * e / (2.0 * s2)
        if not isfinite(term):
            raise NumericalRangeError(_nonfinite_message(i + 1))
        acc += term
    if not isfinite(acc):
        raise NumericalRangeError(_nonfinite_message(0))
    return acc


def potential_gradient(const double[::1] y2, const double[::1] h, double mu, double phi,
                       double s2):
    cdef Py_ssize_t n = h.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] g = out
    cdef int bad = _grad_into(y2, h, mu, phi, s2, g)
    if bad >= 0:
        if h[bad] < H_MIN:
            raise NumericalRangeError(_overflow_message(bad, h[bad]))
        raise NumericalRangeError(_nonfinite_message(bad))
    return out


def leapfrog_trajectory(const double[::1] y2, const double[::1] h, const double[::1] p,
                        double mu, double phi, double s2,
                        double step_size, long n_steps):
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t i, s
    h_out = np.empty(n, dtype=np.float64)
    p_out = np.empty(n, dtype=np.float64)
    g_buf = np.empty(n, dtype=np.float64)
    cdef double[::1] hv = h_out
    cdef double[::1] pv = p_out
    cdef double[::1] gv = g_buf
    for i in range(n):
        hv[i] = h[i]
        pv[i] = p[i]
    cdef int bad = _grad_into(y2, hv, mu, phi, s2, gv)
    if bad >= 0:
        return h_out, p_out, False, bad
    cdef double half = 0.5 * step_size
    for s in range(n_steps):
        for i in range(n):
            pv[i] -= half * gv[i]
        for i in range(n):
            hv[i] += step_size * pv[i]
        bad = _grad_into(y2, hv, mu, phi, s2, gv)
        if bad >= 0:
            return h_out, p_out, False, bad
        for i in range(n):
            pv[i] -= half * gv[i]
    return h_out, p_out, True, -1


def metropolis_sweep(const double[::1] y2, double[::1] h, double mu, double phi,
                     double s2, double width,
                     const double[::1] u_prop, const double[::1] u_acc):
    cdef Py_ssize_t n = h.shape[0]
    if n < 2:
        raise ValueError("latent path must have at least 2 sites")
    cdef Py_ssize_t i
    cdef long accepted = 0
    cdef double inv_2s2 = 0.5 / s2
    cdef double one_minus_phi2 = 1.0 - phi * phi
    cdef double hi, hp, dobs, di, dp, e1, e1p, em, emp, dpr, du
    for i in range(n):
        hi = h[i]
        hp = hi + width * (2.0 * u_prop[i] - 1.0)
        if hp < H_MIN:
            continue
        if y2[i] > 0.0:
            dobs = 0.5 * (hp - hi) + 0.5 * y2[i] * (exp(-hp) - exp(-hi))
        else:
            dobs = 0.5 * (hp - hi)
        di = hi - mu
        dp = hp - mu
        if i == 0:
            e1 = (h[1] - mu) - phi * di
            e1p = (h[1] - mu) - phi * dp
            dpr = one_minus_phi2 * (dp * dp - di * di) * inv_2s2 \
                + (e1p * e1p - e1 * e1) * inv_2s2
        elif i == n - 1:
            em = di - phi * (h[i - 1] - mu)
            emp = dp - phi * (h[i - 1] - mu)
            dpr = (emp * emp - em * em) * inv_2s2
        else:
            em = di - phi * (h[i - 1] - mu)
            emp = dp - phi * (h[i - 1] - mu)
            e1 = (h[i + 1] - mu) - phi * di
            e1p = (h[i + 1] - mu) - phi * dp
            dpr = (emp * emp - em * em) * inv_2s2 \
                + (e1p * e1p - e1 * e1) * inv_2s2
        du = dobs + dpr
        if du <= 0.0 or u_acc[i] < exp(-du):
            h[i] = hp
            accepted += 1
    return accepted
