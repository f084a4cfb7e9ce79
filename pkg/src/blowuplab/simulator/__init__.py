"""Desk-scale 1-D solver for the kinetic-fluid, fluid-only and two-phase systems."""

from .identities import IdentityCheck, IdentityReport, check_identities
from .run import (
    MomentSeries,
    RunResult,
    SimConfig,
    SimState,
    Verdict,
    VerdictKind,
    advance,
    couple_drag,
    detect_blowup,
    initial_moments,
    run_scenario,
    simulate,
    state_moments,
    step_fluid,
    step_particles,
)

__all__ = [
    "IdentityCheck",
    "IdentityReport",
    "MomentSeries",
    "RunResult",
    "SimConfig",
    "SimState",
    "Verdict",
    "VerdictKind",
    "advance",
    "check_identities",
    "couple_drag",
    "detect_blowup",
    "initial_moments",
    "run_scenario",
    "simulate",
    "state_moments",
    "step_fluid",
    "step_particles",
]
