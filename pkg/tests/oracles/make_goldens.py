"""Regenerate goldens.json from oracles that share no code with the package.

Run from the repository root: ``python3 tests/oracles/make_goldens.py``.
Uses mpmath (Bessel functions, quadrature) and scipy's DOP853 integrator.
"""

import json
import math
from pathlib import Path

import mpmath as mp
import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

mp.mp.dps = 40
out = {}

# -- interval (0, pi): psi = sqrt(2/pi) cos r, mu = 1 -------------------------
psi = lambda r: mp.sqrt(2 / mp.pi) * mp.cos(r)
ent = mp.quad(lambda r: psi(r) ** 2 * mp.log(psi(r) ** 2), [0, mp.pi / 2, mp.pi])
out["interval_kappa"] = float(mp.exp(-ent / 2))
out["interval_entropy"] = float(ent)

# closed-form sign solution u0 on (0, pi) and its energy
u0 = lambda r: r**2 / 2 - mp.pi**2 / 8 if r <= mp.pi / 2 else -(r - mp.pi) ** 2 / 2 + mp.pi**2 / 8
du0 = lambda r: r if r <= mp.pi / 2 else -(r - mp.pi)
I0 = mp.quad(lambda r: du0(r) ** 2 / 2 - abs(u0(r)), [0, mp.pi / 2, mp.pi])
out["interval_I0"] = float(I0)
out["interval_u0_start"] = float(-mp.pi**2 / 8)
# u0'' = sgn(u0) on each side: check the ODE -u'' = sgn(u) and Neumann data
out["interval_u0_checks"] = {
    "left_second_derivative": float(mp.diff(u0, mp.mpf(0.5), 2)),
    "right_second_derivative": float(mp.diff(u0, mp.mpf(2.5), 2)),
    "slope_at_0": float(du0(mp.mpf(0))),
    "slope_at_pi": float(du0(mp.pi)),
}

# -- annulus 1 < r < b in R^4 with mu_1,rad = 1 -------------------------------
# radial eigenfunctions r^-1 Z_1(k r); Neumann data means Z_2(k a) = Z_2(k b) = 0
a = mp.mpf(1)
det = lambda b: mp.besselj(2, a) * mp.bessely(2, b) - mp.besselj(2, b) * mp.bessely(2, a)
b_star = mp.findroot(det, mp.mpf("5.21"))
out["annulus_b"] = float(b_star)
sigma3 = 2 * mp.pi**2
raw = lambda r: (mp.bessely(2, a) * mp.besselj(1, r) - mp.besselj(2, a) * mp.bessely(1, r)) / r
nrm = mp.sqrt(mp.quad(lambda r: raw(r) ** 2 * sigma3 * r**3, [a, b_star]))
psi_a = lambda r: raw(r) / nrm
z = mp.findroot(lambda r: raw(r), mp.mpf(3))
ent_a = mp.quad(lambda r: psi_a(r) ** 2 * mp.log(psi_a(r) ** 2) * sigma3 * r**3, [a, z, b_star])
out["annulus_kappa"] = float(mp.exp(-ent_a / 2))
out["annulus_psi_at_a"] = float(abs(psi_a(a)))
# mu as a function of b at two nearby radii (for monotonicity of the tuner)
for bb in ("5.0", "5.5"):
    f = lambda k: mp.besselj(2, k * a) * mp.bessely(2, k * mp.mpf(bb)) - mp.besselj(2, k * mp.mpf(bb)) * mp.bessely(2, k * a)
    k = mp.findroot(f, mp.mpf(5.21) / mp.mpf(bb))
    out[f"annulus_mu_b={bb}"] = float(k**2)

# -- radial shooting oracle by DOP853 ------------------------------------------
def shoot_ivp(p, s, a, b, N):
    def rhs(r, y):
        u, v = y
        return [v, -(N - 1) / r * v - math.copysign(abs(u) ** p, u)]
    sol = solve_ivp(rhs, (a, b), [s, 0.0], method="DOP853", rtol=1e-13, atol=1e-14, dense_output=True)
    return sol


def least_energy(p, a, b, N, smin, smax, n=400):
    sig = 2 * math.pi**2
    best = None
    for sg in (-1, 1):
        ss = sg * np.geomspace(smin, smax, n)
        ms = [shoot_ivp(p, s, a, b, N).y[1, -1] for s in ss]
        for s0, s1, m0, m1 in zip(ss, ss[1:], ms, ms[1:]):
            if m0 * m1 < 0:
                s = brentq(lambda x: shoot_ivp(p, x, a, b, N).y[1, -1], min(s0, s1), max(s0, s1), xtol=1e-14)
                sol = shoot_ivp(p, s, a, b, N)
                r = np.linspace(a, b, 200001)
                u, v = sol.sol(r)
                if np.count_nonzero(np.diff(np.sign(u))) != 1:
                    continue
                w = sig * r ** (N - 1)
                kin = np.trapezoid(w * v**2, r)
                pot = np.trapezoid(w * np.abs(u) ** (p + 1), r)
                I = 0.5 * kin - pot / (p + 1)
                lam = kin / pot ** (2 / (p + 1))
                k = np.nonzero(np.diff(np.sign(u)))[0][0]
                r0 = brentq(lambda x: sol.sol(x)[0], r[k], r[k + 1], xtol=1e-14)
                cand = {"s": s, "energy": I, "Lambda": lam, "r0": r0, "sup": float(np.max(np.abs(u)))}
                if best is None or I < best["energy"]:
                    best = cand
    return best


bf = float(b_star)
out["annulus_p3"] = least_energy(3.0, 1.0, bf, 4, 0.05, 50)
out["annulus_p0.5"] = least_energy(0.5, 1.0, bf, 4, 0.05, 50)

# -- critical bubble in R^4: U = 1/(1 + r^2/8) solves -Lap U = U^3 --------------
U = lambda r: 1 / (1 + r**2 / 8)
lap = lambda r: mp.diff(U, r, 2) + 3 / r * mp.diff(U, r)
out["bubble_residual"] = float(max(abs(lap(mp.mpf(x)) + U(mp.mpf(x)) ** 3) for x in ("0.3", "1", "4", "20")))

path = Path(__file__).with_name("goldens.json")
path.write_text(json.dumps(out, indent=2) + "\n")
print(json.dumps(out, indent=2))
