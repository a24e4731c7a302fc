# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: path-Laplacian solve, recentering bisection, radial RK4."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow, copysign, isfinite

cnp.import_array()


def neumann_solve(const double[::1] edge, const double[::1] mass, const double[::1] rhs):
    """Zero-mean solution of ``S u = mass * (rhs - mean(rhs))``.

    ``S`` is the path Laplacian with conductances ``edge`` (length n-1).
    Eliminating the bordered system reduces to a flux sweep and a
    potential sweep.
    """
    cdef Py_ssize_t n = rhs.shape[0], i
    cdef double total_m = 0.0, mean = 0.0, flux = 0.0, acc = 0.0
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] u = out
    for i in range(n):
        total_m += mass[i]
        mean += mass[i] * rhs[i]
    mean /= total_m
    u[0] = 0.0
    for i in range(n - 1):
        flux += mass[i] * (rhs[i] - mean)
        u[i + 1] = u[i] - flux / edge[i]
    for i in range(n):
        acc += mass[i] * u[i]
    acc /= total_m
    for i in range(n):
        u[i] -= acc
    return out


cdef inline double _odd_power(double t, double p) nogil:
    if t == 0.0:
        return 0.0
    return copysign(pow(fabs(t), p), t)


def balance_residual(const double[::1] w, const double[::1] mass, double p, double c):
    cdef Py_ssize_t i, n = w.shape[0]
    cdef double g = 0.0
    for i in range(n):
        g += mass[i] * _odd_power(w[i] + c, p)
    return g


def bisect_shift(const double[::1] w, const double[::1] mass, double p,
                 double lo, double hi, int maxiter):
    """Bisection for the root of ``c -> sum mass |w+c|^(p-1) (w+c)`` in [lo, hi]."""
    cdef Py_ssize_t i, n = w.shape[0]
    cdef int it = 0
    cdef double mid, g
    while it < maxiter:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g = 0.0
        for i in range(n):
            g += mass[i] * _odd_power(w[i] + mid, p)
        if g > 0.0:
            hi = mid
        elif g < 0.0:
            lo = mid
        else:
            lo = mid
            hi = mid
            it += 1
            break
        it += 1
    return 0.5 * (lo + hi), it


cdef inline double _force(double u, double p, double frozen) nogil:
    # frozen != 0 selects the sign nonlinearity on the current segment
    if frozen != 0.0:
        return frozen
    if u == 0.0:
        return 0.0
    return copysign(pow(fabs(u), p), u)


cdef inline void _rk4(double r, double u, double v, double h, double p,
                      double dim1, double frozen, double* uo, double* vo) nogil:
    cdef double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v, rm, re
    rm = r + 0.5 * h
    re = r + h
    k1u = v
    k1v = -dim1 * v / r - _force(u, p, frozen)
    k2u = v + 0.5 * h * k1v
    k2v = -dim1 * k2u / rm - _force(u + 0.5 * h * k1u, p, frozen)
    k3u = v + 0.5 * h * k2v
    k3v = -dim1 * k3u / rm - _force(u + 0.5 * h * k2u, p, frozen)
    k4u = v + h * k3v
    k4v = -dim1 * k4u / re - _force(u + h * k3u, p, frozen)
    uo[0] = u + h * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0
    vo[0] = v + h * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0


cdef inline double _segment_sign(double u, double v) nogil:
    if u > 0.0:
        return 1.0
    if u < 0.0:
        return -1.0
    if v > 0.0:
        return 1.0
    if v < 0.0:
        return -1.0
    return 0.0


def rk4_radial(double r0, double h, Py_ssize_t n_steps, double u0, double v0,
               double p, int dim, double overflow, double event_tol):
    """Fixed-step RK4 for ``u'' = -(dim-1)/r u' - |u|^(p-1) u`` from ``r0``.

    ``p == 0`` switches to the sign nonlinearity with event location at
    zeros. Returns (u, v, n_valid, blown).
    """
    cdef double dim1 = dim - 1.0
    cdef double r = r0, u = u0, v = v0, un, vn, frozen, rem, lo, hi, mid
    cdef double ut, vt
    cdef Py_ssize_t i
    cdef int k, blown = 0
    cdef Py_ssize_t n_valid = n_steps + 1
    u_out = np.full(n_steps + 1, np.nan)
    v_out = np.full(n_steps + 1, np.nan)
    cdef double[::1] uo = u_out
    cdef double[::1] vo = v_out
    uo[0] = u
    vo[0] = v
    with nogil:
        for i in range(n_steps):
            if p == 0.0:
                rem = h
                k = 0
                while rem > 0.0 and k < 8:
                    frozen = _segment_sign(u, v)
                    _rk4(r, u, v, rem, p, dim1, frozen, &un, &vn)
                    if frozen != 0.0 and un * frozen < 0.0:
                        lo = 0.0
                        hi = rem
                        while hi - lo > event_tol * h:
                            mid = 0.5 * (lo + hi)
                            _rk4(r, u, v, mid, p, dim1, frozen, &ut, &vt)
                            if ut * frozen > 0.0:
                                lo = mid
                            else:
                                hi = mid
                        _rk4(r, u, v, hi, p, dim1, frozen, &ut, &vt)
                        r += hi
                        rem -= hi
                        u = 0.0
                        v = vt
                    else:
                        u = un
                        v = vn
                        r += rem
                        rem = 0.0
                    k += 1
                r = r0 + (i + 1) * h
            else:
                _rk4(r, u, v, h, p, dim1, 0.0, &un, &vn)
                u = un
                v = vn
                r = r0 + (i + 1) * h
            if not (isfinite(u) and isfinite(v)) or fabs(u) > overflow:
                blown = 1
                n_valid = i + 1
                break
            uo[i + 1] = u
            vo[i + 1] = v
    return u_out, v_out, n_valid, bool(blown)
