"""Pressureless dispersed phase ``(n, w)`` coupled to the barotropic fluid by drag.

The dispersed phase is carried by Lagrangian parcels, one per cell centre at
``t = 0``, each moving with its own velocity.  Between parcel crossings this
is the exact characteristic solution of the pressureless equations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import InvalidParams
from ..moments import FluidField, ModelParams, MomentVector
from .run import RunResult, SimConfig, SimState, simulate


@dataclass(frozen=True, eq=False)
class DispersedPhase:
    """Grid values of the dispersed density ``n`` and velocity ``w``."""

    x_lo: float
    x_hi: float
    n: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.n, dtype=float)
        w = np.asarray(self.w, dtype=float)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "w", w)
        if n.shape != w.shape or n.ndim != 1:
            raise InvalidParams("n and w must be 1-D arrays of equal length")
        if np.any(n < 0):
            raise InvalidParams("dispersed density must be nonnegative")

    @property
    def dx(self) -> float:
        return (self.x_hi - self.x_lo) / self.n.size

    @property
    def x(self) -> np.ndarray:
        return self.x_lo + (np.arange(self.n.size) + 0.5) * self.dx

    @classmethod
    def gaussian(cls, x_lo, x_hi, cells, mass=1.0, center=0.0, width=1.0, drift=0.0, slope=0.0):
        dx = (x_hi - x_lo) / cells
        x = x_lo + (np.arange(cells) + 0.5) * dx
        n = mass * np.exp(-0.5 * ((x - center) / width) ** 2) / (width * np.sqrt(2.0 * np.pi))
        return cls(x_lo, x_hi, n, drift + slope * x)


def parcels(phase: DispersedPhase):
    """Parcel positions, velocities and masses seeded at the occupied cell centres."""
    m = phase.n * phase.dx
    keep = m > 0
    return phase.x[keep], phase.w[keep], m[keep]


def dispersed_moments(state: SimState, params: ModelParams) -> MomentVector:
    """Fluid functionals plus the dispersed-phase mass, momentum, weight, inertia and energy."""
    from .run import state_moments

    fluid = state_moments(_fluid_only(state), params)
    x, w, m = state.xp, state.vp, state.wp
    return MomentVector(
        t=state.t,
        m_rho=fluid.m_rho, M_rho=fluid.M_rho, W_rho=fluid.W_rho, I_rho=fluid.I_rho,
        E_k=fluid.E_k, E_i=fluid.E_i,
        m_f=float(m.sum()),
        M_f=float((m * w).sum()),
        W_f=float((m * x * w).sum()),
        I_f=float(0.5 * (m * x * x).sum()),
        E_f=float(0.5 * (m * w * w).sum()),
    )


def _fluid_only(state: SimState) -> SimState:
    empty = np.zeros(0)
    return SimState(state.t, state.x_lo, state.x_hi, state.rho, state.mom, empty, empty, empty)


def run_two_phase(fluid: FluidField, phase: DispersedPhase, params: ModelParams,
                  config: SimConfig, check: bool = True) -> RunResult:
    """Evolve the fluid and the pressureless dispersed phase together.

    The dispersed phase occupies the particle slots of the moment vectors
    (``m_f`` is its total mass ``n_c``, ``E_f`` its kinetic energy, and so on).
    """
    from .identities import check_identities

    if params.collision is not None:
        raise InvalidParams("the pressureless dispersed phase has no collision operator")
    if (phase.x_lo, phase.x_hi) != (fluid.x_lo, fluid.x_hi):
        raise InvalidParams("dispersed phase and fluid must share the domain")
    xp, vp, mp = parcels(phase)
    state = SimState(0.0, fluid.x_lo, fluid.x_hi, fluid.rho.copy(), fluid.rho * fluid.u,
                     xp, vp, mp, "monokinetic")
    result = simulate(state, params, config, sample=dispersed_moments)
    if check:
        result.identities = check_identities(result.series, params, dx=result.dx,
                                             dt=result.dt_max, t_stop=result.verdict.t_detect)
    return result


def crossing_detected(state: SimState, tol: Optional[float] = None) -> bool:
    """True once two parcels have swapped order, after which the single-velocity closure fails."""
    return bool(np.any(np.diff(state.xp) < 0)) if state.xp.size > 1 else False
