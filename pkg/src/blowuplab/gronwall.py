"""Closed-form bounds for ``f' <= a f/(t+1) + b f**beta / (t+1)**(2 beta)`` and an RK4 oracle."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, StepTooLarge

CRITICAL_TOL = 1e-12


class GronwallCase(str, enum.Enum):
    BETA_ONE = "beta_one"
    LOG_CRITICAL = "log_critical"
    POWER_GENERIC = "power_generic"


@dataclass(frozen=True)
class GronwallParams:
    """Coefficients of the differential inequality.

    Parameters
    ----------
    a : float
        Linear growth coefficient, ``a > 0``.
    b : float
        Forcing coefficient, ``b >= 0`` (``b = 0`` is the continuous extension).
    beta : float
        Exponent in ``(0, 1]``.
    f0 : float
        Initial value, ``f0 >= 0``.

    Fields may also be numpy arrays of a common shape; every operation then
    broadcasts over them.
    """

    a: float
    b: float
    beta: float
    f0: float

    def __post_init__(self):
        a, b, beta, f0 = (np.asarray(v, dtype=float) for v in (self.a, self.b, self.beta, self.f0))
        if not np.all(np.isfinite(a) & np.isfinite(b) & np.isfinite(beta) & np.isfinite(f0)):
            raise InvalidParams("Gronwall parameters must be finite")
        if np.any(a <= 0):
            raise InvalidParams("a must be > 0")
        if np.any(b < 0):
            raise InvalidParams("b must be >= 0")
        if np.any(beta <= 0) or np.any(beta > 1):
            raise InvalidParams("beta must lie in (0, 1]")
        if np.any(f0 < 0):
            raise InvalidParams("f0 must be >= 0")

    def critical_exponent(self):
        """``2 beta + a (1 - beta)``; the log case is when this equals 1."""
        return 2.0 * np.asarray(self.beta) + np.asarray(self.a) * (1.0 - np.asarray(self.beta))


def case_classifier(p: GronwallParams) -> GronwallCase:
    if p.beta == 1.0:
        return GronwallCase.BETA_ONE
    if abs(p.critical_exponent() - 1.0) <= CRITICAL_TOL:
        return GronwallCase.LOG_CRITICAL
    return GronwallCase.POWER_GENERIC


def gronwall_bound(p: GronwallParams, t):
    """Upper bound on ``f(t)`` for any solution of the inequality with ``f(0) = f0``.

    Parameters
    ----------
    p : GronwallParams
    t : float or array_like
        Times ``t >= 0``.

    Returns
    -------
    float or ndarray
        ``f0 e^b (t+1)^a`` for ``beta = 1``; for ``beta < 1`` the exact solution
        of the equality ODE, i.e. ``g**(1/(1-beta))`` with ``g`` the bound on
        ``f**(1-beta)``.

    Notes
    -----
    For ``beta < 1`` write ``L = ln(t+1)``, ``A = a(1-beta)``,
    ``c = 2 beta + A``.  Then

        g = (t+1)^A [f0^(1-beta) + b(1-beta) expm1((1-c) L) / (1-c)],

    which is the power-difference formula rearranged so that the removable
    singularity at ``c = 1`` is evaluated without cancellation.  At
    ``|c - 1| <= 1e-12`` the quotient is replaced by its limit ``L``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise InvalidParams("t must be finite and >= 0")
    a, b, beta, f0 = (np.asarray(v, dtype=float) for v in (p.a, p.b, p.beta, p.f0))
    L = np.log1p(t)
    one = beta == 1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lin = f0 * np.exp(b + a * L)
        q = 1.0 - beta
        A = a * q
        e = 1.0 - (2.0 * beta + A)
        crit = np.abs(e) <= CRITICAL_TOL
        safe_e = np.where(crit, 1.0, e)
        quot = np.where(crit, L, np.expm1(safe_e * L) / safe_e)
        g = np.exp(A * L) * (f0**q + b * q * quot)
        sub = g ** (1.0 / np.where(one, 1.0, q))
    out = np.where(one, lin, sub)
    return out[()] if out.ndim == 0 else out


def _rhs(t, f, a, b, beta):
    s = t + 1.0
    return a * f / s + b * np.power(np.maximum(f, 0.0), beta) / s ** (2.0 * beta)


def _rk4(t, f, h, a, b, beta):
    k1 = _rhs(t, f, a, b, beta)
    k2 = _rhs(t + 0.5 * h, f + 0.5 * h * k1, a, b, beta)
    k3 = _rhs(t + 0.5 * h, f + 0.5 * h * k2, a, b, beta)
    k4 = _rhs(t + h, f + h * k3, a, b, beta)
    return f + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


@dataclass(frozen=True)
class OracleTrajectory:
    t: np.ndarray
    f: np.ndarray
    max_local_error: float


def ode_oracle(p: GronwallParams, t_end: float, dt: float, t_eval=None, tol: float = 1e-9):
    """Fourth-order Runge-Kutta solution of the equality ODE from ``f(0) = f0``.

    Parameters
    ----------
    p : GronwallParams
        Scalar or array-valued parameters; arrays are integrated together.
    t_end : float
        Final time.
    dt : float
        Maximal step.  Every entry of ``t_eval`` is hit exactly by shrinking
        the steps of the segment that ends there.
    t_eval : array_like, optional
        Output times in ``[0, t_end]``.  Defaults to every step.
    tol : float
        Bound on the step-doubling estimate of the relative local error.

    Returns
    -------
    OracleTrajectory
        ``f`` has shape ``(len(t), *param_shape)``.

    Raises
    ------
    StepTooLarge
        If the local error estimate exceeds ``tol`` on any step.
    """
    if not (dt > 0 and math.isfinite(dt)):
        raise InvalidParams("dt must be > 0")
    if not (t_end >= 0 and math.isfinite(t_end)):
        raise InvalidParams("t_end must be finite and >= 0")
    a, b, beta, f0 = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (p.a, p.b, p.beta, p.f0))
    )
    if t_eval is None:
        n = max(1, math.ceil(t_end / dt))
        marks = np.linspace(0.0, t_end, n + 1)
        record_all = True
    else:
        marks = np.unique(np.concatenate([[0.0], np.asarray(t_eval, dtype=float)]))
        if marks[-1] > t_end * (1 + 1e-15) or marks[0] < 0:
            raise InvalidParams("t_eval must lie in [0, t_end]")
        record_all = False

    f = f0.astype(float).copy()
    out_t, out_f = [0.0], [f.copy()]
    worst = 0.0
    t = 0.0
    for target in marks[1:]:
        span = target - t
        n = max(1, math.ceil(span / dt - 1e-9))
        h = span / n
        for i in range(n):
            full = _rk4(t, f, h, a, b, beta)
            mid = _rk4(t, f, 0.5 * h, a, b, beta)
            half = _rk4(t + 0.5 * h, mid, 0.5 * h, a, b, beta)
            err = np.max(np.abs(full - half) / (1.0 + np.abs(half)), initial=0.0)
            worst = max(worst, float(err))
            if err > tol:
                raise StepTooLarge(
                    f"local error estimate {err:.3e} exceeds {tol:.1e} at t={t:.6g}; reduce dt"
                )
            f = half
            t = target if i == n - 1 else t + h
        out_t.append(t)
        out_f.append(f.copy())
    if record_all:
        return OracleTrajectory(np.asarray(out_t), np.asarray(out_f), worst)
    keep = np.isin(np.asarray(out_t), np.asarray(t_eval, dtype=float))
    if t_eval is not None and 0.0 not in np.asarray(t_eval, dtype=float):
        keep[0] = False
    return OracleTrajectory(np.asarray(out_t)[keep], np.asarray(out_f)[keep], worst)
