"""Particle push, drag exchange with the host cells and alignment operators."""

from __future__ import annotations

import math

import numpy as np

from ..moments import Drag, GlobalAlignment, LocalAlignment, cic_stencil
from .fluid import VACUUM, velocity


def drag_stencil(xp, rho, x_lo: float, dx: float, vacuum=VACUUM):
    """Cloud-in-cell stencil restricted to non-vacuum cells.

    Returns left index, right index, the two renormalised weights and a mask
    of particles that see at least one non-vacuum cell.
    """
    n = rho.size
    i, frac = cic_stencil(xp, x_lo, dx, n)
    j = np.minimum(i + 1, n - 1)
    wl = np.where(rho[i] > vacuum, 1.0 - frac, 0.0)
    wr = np.where(rho[j] > vacuum, frac, 0.0)
    tot = wl + wr
    live = tot > 0
    safe = np.where(live, tot, 1.0)
    return i, j, wl / safe, wr / safe, live


def _interp(field, i, j, wl, wr):
    return wl * field[i] + wr * field[j]


def _deposit(values, i, j, wl, wr, n):
    return np.bincount(i, weights=values * wl, minlength=n) + np.bincount(
        j, weights=values * wr, minlength=n
    )


def drag_substeps(drag: Drag, rho, mom_unused, xp, wp, x_lo, dx, dt, minimum=1, cap=10000,
                  vacuum=VACUUM, rates=None):
    """Number of drag sub-steps that keeps the exchange dissipative.

    For linear drag the per-substep relaxation ``theta = 1 - exp(-k h)`` must
    not exceed ``1 / (1 + r)`` with ``r`` the largest particle-to-fluid
    density ratio over the cells.
    """
    if xp.size == 0 or rates is None:
        return max(1, minimum)
    kmax = float(np.max(np.abs(rates), initial=0.0))
    if kmax == 0:
        return max(1, minimum)
    i, j, wl, wr, live = drag_stencil(xp, rho, x_lo, dx, vacuum)
    n_dep = _deposit(wp * live, i, j, wl, wr, rho.size) / dx
    fluid = rho > vacuum
    r = float(np.max(np.where(fluid, n_dep / np.where(fluid, rho, 1.0), 0.0), initial=0.0))
    if r == 0:
        return max(1, minimum)
    per = math.log1p(1.0 / r)
    return int(min(cap, max(minimum, math.ceil(kmax * dt / per - 1e-12))))


def couple_drag_arrays(rho, mom, xp, vp, wp, drag: Drag, x_lo: float, dx: float, dt: float,
                       substeps: int = 1, max_substeps: int = 10000, vacuum=VACUUM):
    """Exchange drag momentum between particles and host cells.

    Particles see the fluid velocity and density interpolated by the
    cloud-in-cell stencil; the opposite impulse is deposited with the same
    weights, so total momentum changes only by round-off.  Linear-in-``y``
    laws use the exact exponential relaxation within each sub-step, the rest
    a two-stage Runge-Kutta step.

    Returns
    -------
    mom, vp : ndarray
        Updated fluid momentum and particle velocities.
    n_sub : int
        Sub-steps used.
    """
    n = rho.size
    if xp.size == 0 or drag is None:
        return mom, vp, 0
    i, j, wl, wr, live = drag_stencil(xp, rho, x_lo, dx, vacuum)
    rho_p = _interp(rho, i, j, wl, wr)
    u0 = _interp(velocity(rho, mom, vacuum), i, j, wl, wr)
    k0 = np.where(live, drag.rate(rho_p, u0 - vp), 0.0)
    n_sub = drag_substeps(drag, rho, mom, xp, wp, x_lo, dx, dt, substeps, max_substeps, vacuum,
                          rates=k0)
    h = dt / n_sub
    mom = mom.copy()
    vp = vp.copy()
    for _ in range(n_sub):
        up = _interp(velocity(rho, mom, vacuum), i, j, wl, wr)
        if drag.is_linear:
            k = np.where(live, drag.rate(rho_p, up - vp), 0.0)
            v_new = up + (vp - up) * np.exp(-k * h)
        else:
            def accel(v):
                return np.where(live, drag.force(rho_p, up - v), 0.0)

            k1 = accel(vp)
            k2 = accel(vp + h * k1)
            v_new = vp + 0.5 * h * (k1 + k2)
        impulse = wp * (v_new - vp)
        mom -= _deposit(impulse, i, j, wl, wr, n) / dx
        vp = v_new
    return mom, vp, n_sub


def frozen_drag(rho, mom, xp, vp, drag: Drag, x_lo: float, dx: float, dt: float, vacuum=VACUUM):
    """Particle velocities after ``dt`` of drag in a fluid held fixed (one-way coupling)."""
    if xp.size == 0 or drag is None:
        return vp
    i, j, wl, wr, live = drag_stencil(xp, rho, x_lo, dx, vacuum)
    rho_p = _interp(rho, i, j, wl, wr)
    up = _interp(velocity(rho, mom, vacuum), i, j, wl, wr)
    if drag.is_linear:
        k = np.where(live, drag.rate(rho_p, up - vp), 0.0)
        return up + (vp - up) * np.exp(-k * dt)
    n_sub = max(1, math.ceil(dt / 1e-3))
    h = dt / n_sub
    v = vp.copy()
    for _ in range(n_sub):
        k1 = np.where(live, drag.force(rho_p, up - v), 0.0)
        k2 = np.where(live, drag.force(rho_p, up - (v + h * k1)), 0.0)
        v = v + 0.5 * h * (k1 + k2)
    return v


def local_alignment(xp, vp, wp, op: LocalAlignment, x_lo: float, dx: float, n: int, dt: float):
    """Relax each velocity toward the weighted mean particle velocity of its cell."""
    if xp.size == 0 or op.strength == 0:
        return vp
    cell = np.clip(np.floor((xp - x_lo) / dx).astype(np.int64), 0, n - 1)
    mass = np.bincount(cell, weights=wp, minlength=n)
    mom = np.bincount(cell, weights=wp * vp, minlength=n)
    mean = np.where(mass > 0, mom / np.where(mass > 0, mass, 1.0), 0.0)[cell]
    return mean + (vp - mean) * math.exp(-op.strength * dt)


def global_alignment(xp, vp, wp, op: GlobalAlignment, dt: float):
    """Explicit pairwise alignment ``dv_i = sum_j psi(x_j - x_i) w_j (v_j - v_i) dt``.

    Sub-steps keep ``h * max_i sum_j psi_ij w_j <= 1``, which makes every
    sub-step a convex averaging and hence dissipative.
    """
    if xp.size < 2 or op.strength == 0:
        return vp
    psi = op.psi(xp[:, None] - xp[None, :]) * wp[None, :]
    row = psi.sum(axis=1)
    n_sub = max(1, math.ceil(dt * float(np.max(row)) - 1e-12))
    h = dt / n_sub
    v = vp.copy()
    for _ in range(n_sub):
        v = v + h * (psi @ v - row * v)
    return v
