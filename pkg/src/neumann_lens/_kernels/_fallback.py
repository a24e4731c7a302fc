"""Pure-Python versions of the compiled kernels.

Same signatures and semantics as ``_core.pyx``; used when the extension
is not built or when ``NEUMANN_LENS_PURE=1`` is set.
"""

import math

import numpy as np


def neumann_solve(edge, mass, rhs):
    mean = np.dot(mass, rhs) / mass.sum()
    flux = np.cumsum(mass[:-1] * (rhs[:-1] - mean))
    u = np.empty_like(rhs)
    u[0] = 0.0
    u[1:] = np.cumsum(-flux / edge)
    u -= np.dot(mass, u) / mass.sum()
    return u


def _odd_power(t, p):
    return np.sign(t) * np.abs(t) ** p


def balance_residual(w, mass, p, c):
    return float(np.dot(mass, _odd_power(w + c, p)))


def bisect_shift(w, mass, p, lo, hi, maxiter):
    it = 0
    while it < maxiter:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g = np.dot(mass, _odd_power(w + mid, p))
        it += 1
        if g > 0.0:
            hi = mid
        elif g < 0.0:
            lo = mid
        else:
            lo = hi = mid
            break
    return 0.5 * (lo + hi), it


def _force(u, p, frozen):
    if frozen != 0.0:
        return frozen
    if u == 0.0:
        return 0.0
    try:
        return math.copysign(abs(u) ** p, u)
    except OverflowError:  # C pow returns inf here; keep the two backends in step
        return math.copysign(math.inf, u)


def _rk4(r, u, v, h, p, dim1, frozen):
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
    return (u + h * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0,
            v + h * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0)


def _segment_sign(u, v):
    if u != 0.0:
        return math.copysign(1.0, u)
    if v != 0.0:
        return math.copysign(1.0, v)
    return 0.0


def rk4_radial(r0, h, n_steps, u0, v0, p, dim, overflow, event_tol):
    dim1 = dim - 1.0
    u_out = np.full(n_steps + 1, np.nan)
    v_out = np.full(n_steps + 1, np.nan)
    u, v, r = u0, v0, r0
    u_out[0], v_out[0] = u, v
    for i in range(n_steps):
        if p == 0.0:
            rem = h
            k = 0
            while rem > 0.0 and k < 8:
                frozen = _segment_sign(u, v)
                un, vn = _rk4(r, u, v, rem, p, dim1, frozen)
                if frozen != 0.0 and un * frozen < 0.0:
                    lo, hi = 0.0, rem
                    while hi - lo > event_tol * h:
                        mid = 0.5 * (lo + hi)
                        ut, _ = _rk4(r, u, v, mid, p, dim1, frozen)
                        if ut * frozen > 0.0:
                            lo = mid
                        else:
                            hi = mid
                    _, vt = _rk4(r, u, v, hi, p, dim1, frozen)
                    r += hi
                    rem -= hi
                    u, v = 0.0, vt
                else:
                    u, v = un, vn
                    r += rem
                    rem = 0.0
                k += 1
        else:
            u, v = _rk4(r, u, v, h, p, dim1, 0.0)
        r = r0 + (i + 1) * h
        if not (math.isfinite(u) and math.isfinite(v)) or abs(u) > overflow:
            return u_out, v_out, i + 1, True
        u_out[i + 1], v_out[i + 1] = u, v
    return u_out, v_out, n_steps + 1, False
