"""Leakage-corrected checks of the a priori identities on a sampled moment series."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..criteria import const_C0
from ..errors import IdentityViolation
from ..moments import GlobalAlignment, ModelParams
from .run import MomentSeries


@dataclass
class IdentityCheck:
    name: str
    times: np.ndarray
    residuals: np.ndarray
    tolerance: float
    applicable: bool = True

    @property
    def worst(self) -> float:
        return float(np.max(self.residuals, initial=0.0)) if self.residuals.size else 0.0

    @property
    def ok(self) -> bool:
        return (not self.applicable) or self.worst <= self.tolerance

    def first_violation(self):
        bad = np.nonzero(self.residuals > self.tolerance)[0]
        if not self.applicable or bad.size == 0:
            return None
        i = int(bad[0])
        return float(self.times[i]), float(self.residuals[i])

    def summary(self) -> dict:
        return {"applicable": self.applicable, "max_residual": self.worst,
                "tolerance": self.tolerance, "ok": self.ok}


@dataclass
class IdentityReport:
    checks: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> IdentityCheck:
        return self.checks[name]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks.values())

    def violations(self) -> list:
        return [n for n, c in self.checks.items() if not c.ok]

    def to_json_dict(self) -> dict:
        out = {}
        for name, c in self.checks.items():
            d = c.summary()
            d["t"] = [float(v) for v in c.times]
            d["residual"] = [float(v) for v in c.residuals]
            out[name] = d
        return out


def central_rate(t: np.ndarray, y: np.ndarray):
    """Central differences at the interior samples (nonuniform spacing allowed)."""
    return t[1:-1], (y[2:] - y[:-2]) / (t[2:] - t[:-2])


def check_identities(series: MomentSeries, params: ModelParams, dx: float = 0.0, dt: float = 0.0,
                     strict: bool = False, envelope: Optional[Callable] = None,
                     t_stop: Optional[float] = None, tolerances: Optional[dict] = None
                     ) -> IdentityReport:
    """Evaluate conservation, energy, virial and lower/upper-bound identities.

    Parameters
    ----------
    series : MomentSeries
        Samples with the cumulative leakage ledger.
    params : ModelParams
    dx, dt : float
        Resolution, used to scale the tolerances of the derivative checks.
    strict : bool
        Raise :class:`IdentityViolation` for the first failing check.
    envelope : callable, optional
        ``t -> upper envelope of J``; adds the ``j_envelope`` check.
    t_stop : float, optional
        Samples after this time (e.g. a detected singularity) are ignored.
    tolerances : dict, optional
        Per-check overrides.

    Notes
    -----
    Every residual is defined so that a positive value is bad.  Derivative
    checks use central differences of the leakage-corrected series, so they
    measure the time discretisation as well as the identity.
    """
    tol = {
        "mass": 1e-12,
        "momentum": 1e-10,
        "energy": 1e-8,
        "virial": None,
        "virial_second": None,
        "internal_energy_lower_bound": 1e-9,
        "j_envelope": 0.05,
    }
    tol.update(tolerances or {})

    t = np.asarray(series.t, dtype=float)
    keep = np.ones(t.size, dtype=bool) if t_stop is None else t <= t_stop
    t = t[keep]

    def col(name):
        return series.column(name)[keep]

    m_rho, m_f = col("m_rho"), col("m_f")
    M, W, I = col("M"), col("W"), col("I")
    E_k, E_i, E_f = col("E_k"), col("E_i"), col("E_f")
    E = E_k + E_i + E_f
    leak_mr, leak_mf = col("mass_rho"), col("mass_f")
    leak_M, leak_E = col("mom"), col("energy")
    leak_I, leak_W = col("inertia"), col("weight")

    checks = {}
    m0 = max(m_rho[0], 0.0)
    mf0 = max(m_f[0], 0.0)
    scale_m = m0 if m0 > 0 else 1.0
    scale_f = mf0 if mf0 > 0 else 1.0
    drift = np.maximum(np.abs(m_rho + leak_mr - m_rho[0]) / scale_m,
                       np.abs(m_f + leak_mf - m_f[0]) / scale_f)
    checks["mass"] = IdentityCheck("mass", t, drift, tol["mass"])

    drift_M = np.abs(M + leak_M - M[0]) / (1.0 + abs(M[0]))
    checks["momentum"] = IdentityCheck("momentum", t, drift_M, tol["momentum"])

    Et = E + leak_E
    inc = np.diff(Et) / (E[0] if E[0] > 0 else 1.0)
    checks["energy"] = IdentityCheck("energy", t[1:], inc, tol["energy"])

    It = I + leak_I
    if t.size >= 3:
        tc, dI = central_rate(t, It)
        res = np.abs(dI - W[1:-1])
        w_scale = max(1.0, float(np.max(np.abs(W), initial=0.0)))
        h = float(np.max(np.diff(t)))
        vt = tol["virial"] if tol["virial"] is not None else 10.0 * (dx + h + dt) * w_scale
        checks["virial"] = IdentityCheck("virial", tc, res, vt)

        Wt = W + leak_W
        tc2, dW = central_rate(t, Wt)
        rhs = 2.0 * E_k + params.k * E_i + 2.0 * E_f
        res2 = np.abs(dW - rhs[1:-1])
        e_scale = max(1.0, float(np.max(np.abs(rhs), initial=0.0)))
        vt2 = tol["virial_second"] if tol["virial_second"] is not None else 10.0 * (dx + h + dt) * e_scale
        checks["virial_second"] = IdentityCheck(
            "virial_second", tc2, res2, vt2, applicable=_virial_second_applies(params),
        )
    else:
        empty = np.zeros(0)
        checks["virial"] = IdentityCheck("virial", empty, empty, 0.0)
        checks["virial_second"] = IdentityCheck("virial_second", empty, empty, 0.0, False)

    I_rho = col("I_rho")
    C0 = np.array([const_C0(max(m, 0.0), params.d, params.gamma) for m in m_rho])
    with np.errstate(divide="ignore", invalid="ignore"):
        lower = np.where(I_rho > 0, C0 / np.power(I_rho, 0.5 * params.k), 0.0)
    slack = (lower - E_i) / np.where(E_i > 0, E_i, 1.0)
    checks["internal_energy_lower_bound"] = IdentityCheck(
        "internal_energy_lower_bound", t, slack, tol["internal_energy_lower_bound"]
    )

    if envelope is not None:
        J = I - (t + 1.0) * W + (t + 1.0) ** 2 * E
        env = np.asarray(envelope(t), dtype=float)
        checks["j_envelope"] = IdentityCheck("j_envelope", t, J / env - 1.0, tol["j_envelope"])

    report = IdentityReport(checks)
    if strict:
        for name, c in checks.items():
            hit = c.first_violation()
            if hit is not None:
                raise IdentityViolation(name, hit[0], hit[1], c.tolerance)
    return report


def _virial_second_applies(params: ModelParams) -> bool:
    if params.viscosity is not None:
        mu_zero = getattr(params.viscosity, "coefficient", None) == 0 or (
            getattr(params.viscosity, "mu", None) == 0 and getattr(params.viscosity, "lam", None) == 0
        )
        if not mu_zero:
            return False
    return not isinstance(params.collision, GlobalAlignment)
