"""Finite-volume step for the 1-D isentropic compressible Navier-Stokes equations.

Conserved variables ``(rho, m = rho u)`` on uniform cells, MUSCL-minmod
reconstruction of ``(rho, u)``, local Lax-Friedrichs (Rusanov) flux, central
viscous flux and forward Euler in time.  Two ghost cells per side copy the
boundary cell (outflow).
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import CflViolation, NegativeDensity
from ..moments import ConstantViscosity, ModelParams, PowerLawViscosity

VACUUM = 1e-12
NG = 2


def velocity(rho, mom, vacuum=VACUUM):
    """``u = m / rho`` with ``u = 0`` in vacuum cells."""
    return np.where(rho > vacuum, mom / np.where(rho > vacuum, rho, 1.0), 0.0)


def sound_speed(rho, gamma):
    return np.sqrt(gamma * np.power(np.maximum(rho, 0.0), gamma - 1.0))


def minmod(a, b):
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _pad(a):
    return np.concatenate([np.full(NG, a[0]), a, np.full(NG, a[-1])])


def stiffness(rho, params: ModelParams):
    """Cell values of the 1-D viscous coefficient ``2 mu + lambda``."""
    v = params.viscosity
    if v is None:
        return None
    mu, lam = v.coefficients(rho)
    return 2.0 * mu + lam


def face_stiffness(rho, params: ModelParams, vacuum=VACUUM):
    """``2 mu + lambda`` on the ``n + 1`` faces (zero where a neighbour is vacuum)."""
    kap = stiffness(rho, params)
    if kap is None:
        return None
    kp = _pad(kap)
    rp = _pad(rho)
    left, right = kp[NG - 1:-NG], kp[NG:-NG + 1 or None]
    ok = (rp[NG - 1:-NG] > vacuum) & (rp[NG:-NG + 1 or None] > vacuum)
    return np.where(ok, 0.5 * (left + right), 0.0)


def max_wave_speed(rho, mom, gamma, vacuum=VACUUM):
    u = velocity(rho, mom, vacuum)
    return float(np.max(np.abs(u) + sound_speed(rho, gamma), initial=0.0))


def stable_dt(rho, mom, params: ModelParams, dx: float, cfl: float, vacuum=VACUUM) -> float:
    """Largest step allowed by the advective CFL number and the explicit viscous limit."""
    a = max_wave_speed(rho, mom, params.gamma, vacuum)
    dt = cfl * dx / a if a > 0 else math.inf
    kf = face_stiffness(rho, params, vacuum)
    if kf is not None:
        load = kf[:-1] + kf[1:]
        live = (rho > vacuum) & (load > 0)
        if np.any(live):
            dt = min(dt, 0.5 * dx * dx * float(np.min(rho[live] / load[live])))
    return dt


def fluxes(rho, mom, params: ModelParams, dx: float, vacuum=VACUUM):
    """Numerical mass and momentum fluxes on the ``n + 1`` faces."""
    g = params.gamma
    u = velocity(rho, mom, vacuum)
    rp, up = _pad(rho), _pad(u)

    dr = np.diff(rp)
    du = np.diff(up)
    sr = minmod(dr[:-1], dr[1:])
    su = minmod(du[:-1], du[1:])
    # reconstructed values on the cells 1 .. n+2 of the padded array
    rc, uc = rp[1:-1], up[1:-1]
    r_minus, r_plus = rc - 0.5 * sr, rc + 0.5 * sr
    u_minus, u_plus = uc - 0.5 * su, uc + 0.5 * su
    # face f sits between padded cells f+1 and f+2, i.e. reconstructed slots f and f+1
    rL, rR = r_plus[:-1], r_minus[1:]
    uL, uR = u_plus[:-1], u_minus[1:]
    uL = np.where(rL > vacuum, uL, 0.0)
    uR = np.where(rR > vacuum, uR, 0.0)
    mL, mR = rL * uL, rR * uR
    pL, pR = np.power(rL, g), np.power(rR, g)
    a = np.maximum(np.abs(uL) + sound_speed(rL, g), np.abs(uR) + sound_speed(rR, g))
    f_rho = 0.5 * (mL + mR) - 0.5 * a * (rR - rL)
    f_mom = 0.5 * (mL * uL + pL + mR * uR + pR) - 0.5 * a * (mR - mL)

    kf = face_stiffness(rho, params, vacuum)
    if kf is not None:
        f_mom = f_mom - kf * np.diff(up[NG - 1:-NG + 1]) / dx
    return f_rho, f_mom


def boundary_energy_flux(rho, mom, params: ModelParams, vacuum=VACUUM):
    """Outflow energy flux ``(E + p) u`` at the left and right boundary faces."""
    g = params.gamma
    out = []
    for i in (0, -1):
        r = rho[i]
        u = mom[i] / r if r > vacuum else 0.0
        p = r**g
        out.append((0.5 * r * u * u + p / (g - 1.0) + p) * u)
    return out[0], out[1]


def step_fluid_arrays(rho, mom, x, params: ModelParams, dt: float, dx: float, t: float = 0.0,
                      vacuum=VACUUM):
    """Advance ``(rho, mom)`` by ``dt``.

    Returns
    -------
    rho, mom : ndarray
        Updated conserved variables.
    leak : dict
        Mass, momentum, energy, inertia and momentum-weight that left through
        the two boundary faces during the step.
    """
    f_rho, f_mom = fluxes(rho, mom, params, dx, vacuum)
    lam = dt / dx
    rho_new = rho - lam * np.diff(f_rho)
    mom_new = mom - lam * np.diff(f_mom)
    if np.any(rho_new < 0):
        i = int(np.argmin(rho_new))
        if rho_new[i] < -1e-14 * max(1.0, float(np.max(rho))):
            raise NegativeDensity(t + dt, i, float(rho_new[i]))
        rho_new = np.maximum(rho_new, 0.0)
    eL, eR = boundary_energy_flux(rho, mom, params, vacuum)
    xl, xr = x[0], x[-1]
    leak = {
        "mass_rho": dt * (f_rho[-1] - f_rho[0]),
        "mom": dt * (f_mom[-1] - f_mom[0]),
        "energy": dt * (eR - eL),
        "inertia": dt * 0.5 * (f_rho[-1] * xr * xr - f_rho[0] * xl * xl),
        "weight": dt * (f_mom[-1] * xr - f_mom[0] * xl),
    }
    return rho_new, mom_new, leak


def check_dt(dt: float, rho, mom, params: ModelParams, dx: float, cfl: float, vacuum=VACUUM):
    limit = stable_dt(rho, mom, params, dx, cfl, vacuum)
    if dt > limit * (1 + 1e-12):
        raise CflViolation(f"dt={dt:.3e} exceeds the stable step {limit:.3e}")
    return limit


__all__ = [
    "ConstantViscosity",
    "PowerLawViscosity",
    "boundary_energy_flux",
    "check_dt",
    "fluxes",
    "max_wave_speed",
    "stable_dt",
    "step_fluid_arrays",
    "velocity",
]
