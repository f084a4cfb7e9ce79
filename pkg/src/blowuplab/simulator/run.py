"""Simulation state, single steps, the blow-up sentinel and the scenario driver."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..errors import (
    CflViolation,
    InvalidParams,
    NegativeDensity,
    NonFiniteField,
    NonFiniteParticle,
)
from ..moments import (
    FluidField,
    GlobalAlignment,
    InitialDataSpec,
    LocalAlignment,
    ModelParams,
    MomentVector,
    ParticleCloud,
    build_initial_data,
    fluid_moments,
    particle_moments,
)
from . import fluid as fl
from . import particles as pt

LEAK_KEYS = ("mass_rho", "mass_f", "mom", "energy", "inertia", "weight")


def _zero_leak() -> dict:
    return {k: 0.0 for k in LEAK_KEYS}


@dataclass(frozen=True)
class SimConfig:
    """Numerical controls.

    ``dt`` fixes the step (an error is raised if it breaks stability);
    otherwise the step follows ``cfl``.  Moments are sampled every ``stride``
    steps.  ``blowup_threshold`` is the largest velocity jump between
    neighbouring non-vacuum cells, relative to the initial maximal signal
    speed, tolerated before a singularity is declared.
    """

    cfl: float = 0.4
    t_end: float = 1.0
    max_steps: int = 1_000_000
    dt: Optional[float] = None
    dt_floor: float = 1e-10
    stride: int = 10
    blowup_threshold: float = 0.05
    drag_substeps: int = 1
    max_drag_substeps: int = 10000
    stop_on_blowup: bool = True
    vacuum: float = fl.VACUUM

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise InvalidParams("cfl must lie in (0, 1]")
        if not self.dt_floor > 0:
            raise InvalidParams("dt_floor must be > 0")
        if self.t_end < 0 or self.max_steps < 0 or self.stride < 1:
            raise InvalidParams("t_end >= 0, max_steps >= 0 and stride >= 1 required")
        if self.dt is not None and not self.dt > 0:
            raise InvalidParams("fixed dt must be > 0")
        if not self.blowup_threshold > 0:
            raise InvalidParams("blowup_threshold must be > 0")


@dataclass(frozen=True, eq=False)
class SimState:
    t: float
    x_lo: float
    x_hi: float
    rho: np.ndarray
    mom: np.ndarray
    xp: np.ndarray
    vp: np.ndarray
    wp: np.ndarray
    mode: str = "kinetic"
    leak: dict = field(default_factory=_zero_leak)
    dt_last: float = 0.0

    @property
    def n(self) -> int:
        return self.rho.size

    @property
    def dx(self) -> float:
        return (self.x_hi - self.x_lo) / self.n

    @property
    def x(self) -> np.ndarray:
        return self.x_lo + (np.arange(self.n) + 0.5) * self.dx

    @property
    def u(self) -> np.ndarray:
        return fl.velocity(self.rho, self.mom)

    @property
    def fluid(self) -> FluidField:
        return FluidField(self.x_lo, self.x_hi, self.rho, self.u)

    @property
    def particles(self) -> ParticleCloud:
        return ParticleCloud(self.xp, self.vp, self.wp, self.mode)

    @classmethod
    def from_data(cls, field_: FluidField, cloud: Optional[ParticleCloud] = None, t: float = 0.0):
        cloud = cloud if cloud is not None else ParticleCloud.empty()
        return cls(
            t, field_.x_lo, field_.x_hi, field_.rho.copy(), field_.rho * field_.u,
            cloud.x.copy(), cloud.v.copy(), cloud.w.copy(), cloud.mode,
        )


def _add_leak(leak: dict, extra: dict) -> dict:
    out = dict(leak)
    for k, v in extra.items():
        out[k] = out.get(k, 0.0) + float(v)
    return out


def state_moments(state: SimState, params: ModelParams) -> MomentVector:
    """All functionals of a state; the fluid part is evaluated on ``(rho, m)`` directly."""
    rho, mom, x, dx, g = state.rho, state.mom, state.x, state.dx, params.gamma
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(mom))):
        raise NonFiniteField(f"non-finite fluid state at t={state.t:.6g}")
    u = fl.velocity(rho, mom)
    mv = MomentVector(
        t=state.t,
        m_rho=float(np.sum(rho) * dx),
        M_rho=float(np.sum(mom) * dx),
        W_rho=float(np.sum(mom * x) * dx),
        I_rho=float(0.5 * np.sum(rho * x * x) * dx),
        E_k=float(0.5 * np.sum(mom * u) * dx),
        E_i=float(np.sum(np.power(rho, g)) * dx / (g - 1.0)),
    )
    if state.xp.size:
        mv = mv.combine(particle_moments(state.particles, state.t))
    return mv


# ---------------------------------------------------------------------------
# single steps
# ---------------------------------------------------------------------------


def step_fluid(state: SimState, params: ModelParams, dt: float, cfl: float = 1.0) -> SimState:
    """Advance the fluid alone by ``dt``; raises :class:`CflViolation` if unstable."""
    fl.check_dt(dt, state.rho, state.mom, params, state.dx, cfl)
    rho, mom, leak = fl.step_fluid_arrays(state.rho, state.mom, state.x, params, dt, state.dx,
                                          state.t)
    return replace(state, rho=rho, mom=mom, leak=_add_leak(state.leak, leak))


def couple_drag(state: SimState, params: ModelParams, dt: float, substeps: int = 1,
                max_substeps: int = 10000) -> SimState:
    """Two-way drag exchange over ``dt`` (particles do not move)."""
    if params.drag is None or state.xp.size == 0:
        return state
    mom, vp, _ = pt.couple_drag_arrays(state.rho, state.mom, state.xp, state.vp, state.wp,
                                       params.drag, state.x_lo, state.dx, dt, substeps,
                                       max_substeps)
    return replace(state, mom=mom, vp=vp)


def step_particles(state: SimState, params: ModelParams, dt: float, drag: bool = True) -> SimState:
    """Velocity update (drag in a frozen fluid, then alignment) followed by ``x += v dt``.

    Particles that leave the domain are retired and their mass, momentum,
    energy, inertia and momentum weight are booked in the leakage ledger.
    """
    if state.xp.size == 0:
        return replace(state, t=state.t)
    vp = state.vp
    if drag and params.drag is not None:
        vp = pt.frozen_drag(state.rho, state.mom, state.xp, vp, params.drag, state.x_lo,
                            state.dx, dt)
    q = params.collision
    if isinstance(q, LocalAlignment):
        vp = pt.local_alignment(state.xp, vp, state.wp, q, state.x_lo, state.dx, state.n, dt)
    elif isinstance(q, GlobalAlignment):
        vp = pt.global_alignment(state.xp, vp, state.wp, q, dt)
    xp = state.xp + vp * dt
    if not (np.all(np.isfinite(xp)) and np.all(np.isfinite(vp))):
        raise NonFiniteParticle(f"non-finite particle state at t={state.t + dt:.6g}")
    out = (xp <= state.x_lo) | (xp >= state.x_hi)
    leak = state.leak
    wp = state.wp
    if np.any(out):
        w, v, x = wp[out], vp[out], xp[out]
        leak = _add_leak(leak, {
            "mass_f": np.sum(w),
            "mom": np.sum(w * v),
            "energy": 0.5 * np.sum(w * v * v),
            "inertia": 0.5 * np.sum(w * x * x),
            "weight": np.sum(w * x * v),
        })
        keep = ~out
        xp, vp, wp = xp[keep], vp[keep], wp[keep]
    return replace(state, xp=xp, vp=vp, wp=wp, leak=leak)


# ---------------------------------------------------------------------------
# blow-up sentinel
# ---------------------------------------------------------------------------


class VerdictKind(str, enum.Enum):
    COMPLETED_SMOOTH = "completed_smooth"
    BLOWUP_DETECTED = "blowup_detected"
    ABORTED = "aborted"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    t_detect: Optional[float] = None
    trigger: Optional[str] = None
    reason: Optional[str] = None

    def as_dict(self) -> dict:
        return {"kind": self.kind.value, "t_detect": self.t_detect, "trigger": self.trigger,
                "reason": self.reason}


def reference_speed(state: SimState, params: ModelParams) -> float:
    """Initial signal speed scale ``max(|u| + c)`` (1 for a fluid at rest in vacuum)."""
    a = fl.max_wave_speed(state.rho, state.mom, params.gamma)
    return a if a > 0 else 1.0


def velocity_jump(state: SimState, rel_floor: float = 1e-6) -> float:
    """Largest ``|u_{i+1} - u_i|`` over faces whose cells both carry non-negligible mass."""
    rho = state.rho
    rmax = float(np.max(rho, initial=0.0))
    if rmax <= 0:
        return 0.0
    live = rho > rel_floor * rmax
    both = live[:-1] & live[1:]
    if not np.any(both):
        return 0.0
    return float(np.max(np.abs(np.diff(state.u))[both]))


def detect_blowup(state: SimState, config: SimConfig, u_ref: float, dt: Optional[float] = None,
                  error: Optional[Exception] = None) -> Optional[str]:
    """Name of the first trigger that fires for this state, or ``None``."""
    if isinstance(error, NegativeDensity):
        return "negative_density"
    if dt is not None and dt < config.dt_floor:
        return "dt_floor"
    if math.isfinite(config.blowup_threshold):
        if velocity_jump(state) > config.blowup_threshold * u_ref:
            return "gradient"
    return None


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


@dataclass
class MomentSeries:
    t: list = field(default_factory=list)
    moments: list = field(default_factory=list)
    leaks: list = field(default_factory=list)

    def append(self, mv: MomentVector, leak: dict):
        self.t.append(mv.t)
        self.moments.append(mv)
        self.leaks.append(dict(leak))

    def __len__(self):
        return len(self.moments)

    def column(self, name: str) -> np.ndarray:
        if name in LEAK_KEYS:
            return np.array([lk[name] for lk in self.leaks])
        return np.array([getattr(mv, name) for mv in self.moments], dtype=float)


@dataclass
class RunResult:
    series: MomentSeries
    verdict: Verdict
    final: SimState
    steps: int
    dx: float
    dt_min: float
    dt_max: float
    identities: object = None


def advance(state: SimState, params: ModelParams, config: SimConfig, dt: float) -> SimState:
    """One full step: fluid, two-way drag, then particle alignment and push."""
    state = step_fluid(state, params, dt, config.cfl if config.dt is None else 1.0)
    state = couple_drag(state, params, dt, config.drag_substeps, config.max_drag_substeps)
    state = step_particles(state, params, dt, drag=False)
    return replace(state, t=state.t + dt, dt_last=dt)


def simulate(state: SimState, params: ModelParams, config: SimConfig, sample=None) -> RunResult:
    """Time-step ``state`` to ``config.t_end`` with moment sampling and the blow-up sentinel.

    ``sample`` replaces :func:`state_moments` as the moment function.
    """
    sample = sample or state_moments
    series = MomentSeries()
    series.append(sample(state, params), state.leak)
    u_ref = reference_speed(state, params)
    steps = 0
    dts = []
    verdict = Verdict(VerdictKind.COMPLETED_SMOOTH)
    n_fixed = None
    if config.dt is not None:
        n_fixed = int(round(config.t_end / config.dt))
        if abs(n_fixed * config.dt - config.t_end) > 1e-9 * max(1.0, config.t_end):
            raise InvalidParams("t_end must be a whole number of fixed steps")

    trig = detect_blowup(state, config, u_ref)
    if trig is not None:
        verdict = Verdict(VerdictKind.BLOWUP_DETECTED, state.t, trig)
        if config.stop_on_blowup:
            return RunResult(series, verdict, state, 0, state.dx, 0.0, 0.0)

    while steps < config.max_steps:
        if n_fixed is not None:
            if steps >= n_fixed:
                break
            dt = config.dt
        else:
            remaining = config.t_end - state.t
            if remaining <= 1e-14 * max(1.0, config.t_end):
                break
            dt = min(fl.stable_dt(state.rho, state.mom, params, state.dx, config.cfl), remaining)
            if dt < config.dt_floor and dt < remaining:
                verdict = Verdict(VerdictKind.BLOWUP_DETECTED, state.t, "dt_floor")
                break
        try:
            new = advance(state, params, config, dt)
        except NegativeDensity as exc:
            verdict = Verdict(VerdictKind.BLOWUP_DETECTED, exc.t, "negative_density")
            break
        except CflViolation as exc:
            verdict = Verdict(VerdictKind.ABORTED, reason=str(exc))
            break
        except (NonFiniteField, NonFiniteParticle) as exc:
            verdict = Verdict(VerdictKind.ABORTED, reason=str(exc))
            break
        state = new
        steps += 1
        dts.append(dt)
        at_end = (n_fixed is not None and steps == n_fixed) or (
            n_fixed is None and config.t_end - state.t <= 1e-14 * max(1.0, config.t_end)
        )
        try:
            if steps % config.stride == 0 or at_end:
                series.append(sample(state, params), state.leak)
        except NonFiniteField as exc:
            verdict = Verdict(VerdictKind.ABORTED, reason=str(exc))
            break
        if verdict.kind == VerdictKind.COMPLETED_SMOOTH:
            trig = detect_blowup(state, config, u_ref)
            if trig is not None:
                verdict = Verdict(VerdictKind.BLOWUP_DETECTED, state.t, trig)
                if config.stop_on_blowup:
                    break
    else:
        if verdict.kind == VerdictKind.COMPLETED_SMOOTH and state.t < config.t_end:
            verdict = Verdict(VerdictKind.ABORTED, reason=f"max_steps={config.max_steps} reached")

    if series.t[-1] != state.t:
        try:
            series.append(sample(state, params), state.leak)
        except NonFiniteField:
            pass
    return RunResult(series, verdict, state, steps, state.dx,
                     min(dts) if dts else 0.0, max(dts) if dts else 0.0)


def run_scenario(spec: InitialDataSpec, params: ModelParams, config: SimConfig,
                 check: bool = True, strict: bool = False, envelope=None) -> RunResult:
    """Build initial data, evolve it and (optionally) evaluate the identity checks.

    Parameters
    ----------
    spec, params, config
        Initial data, model and numerical controls.
    check : bool
        Attach an :class:`~blowuplab.simulator.identities.IdentityReport`.
    strict : bool
        Raise :class:`~blowuplab.errors.IdentityViolation` on the first
        identity outside tolerance.
    envelope : callable, optional
        ``t -> J upper envelope``; enables the envelope slack series.
    """
    from .identities import check_identities

    field_, cloud = build_initial_data(spec, params)
    state = SimState.from_data(field_, cloud)
    result = simulate(state, params, config)
    if check:
        result.identities = check_identities(result.series, params, dx=result.dx,
                                             dt=result.dt_max, strict=strict, envelope=envelope,
                                             t_stop=result.verdict.t_detect)
    return result


def initial_moments(spec: InitialDataSpec, params: ModelParams) -> MomentVector:
    field_, cloud = build_initial_data(spec, params)
    mv = fluid_moments(field_, params)
    if len(cloud):
        mv = mv.combine(particle_moments(cloud))
    return mv
