"""Explicit constants, blow-up gates, J envelopes and the numeric lifespan bound.

Every criterion has the same skeleton.  A lower bound for the internal energy

    E_i(t) >= C0 / I(t)**(k/2),       I(t) <= I0 + P1 t + P2 t**2,

is played against an upper bound from the envelope of ``J``

    E_i(t) <= J(t) / (t+1)**2 <= C_up / (t+1)**k,

with ``k = d (gamma - 1)``.  A classical solution cannot exist past the first
time the two bounds become incompatible, which is what
:func:`lifespan_upper_bound` locates.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import InvalidParams, MissingInput, NoCrossing, RegimeError
from .moments import (
    ConstantViscosity,
    ModelParams,
    MomentVector,
    PowerLawViscosity,
    unit_ball_volume,
)


class SystemKind(str, enum.Enum):
    VLASOV_NS = "vlasov_ns"
    ISENTROPIC_NS = "isentropic_ns"
    TWO_PHASE = "two_phase"
    THICK_SPRAYS = "thick_sprays"


class Theorem(str, enum.Enum):
    GENERAL = "general_viscosity"
    POWER_CRITICAL = "power_viscosity_critical"
    POWER_SUBCRITICAL = "power_viscosity_subcritical"
    CONSTANT = "constant_viscosity"
    THICK_SPRAYS = "thick_sprays"


@dataclass(frozen=True)
class SystemSpec:
    """System selector plus the extra scalars some systems need.

    ``rho_max`` is the assumed uniform bound on the density (thick sprays only).
    """

    kind: SystemKind = SystemKind.VLASOV_NS
    rho_max: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", SystemKind(self.kind))
        if self.rho_max is not None and not (self.rho_max > 0 and math.isfinite(self.rho_max)):
            raise InvalidParams("rho_max must be finite and > 0")


@dataclass(frozen=True)
class ConstantsBundle:
    k: float
    m_rho: float
    m_f: float
    I0: float
    W0: float
    E0: float
    J0: float
    C0: float
    M_mu: float
    M_lambda: float
    C1: float
    C2: float
    C3: Optional[float] = None
    C4: Optional[float] = None
    C5: Optional[float] = None
    nu: Optional[float] = None
    C0_alpha: Optional[float] = None
    J0_alpha: Optional[float] = None
    E0_alpha: Optional[float] = None
    I0_alpha: Optional[float] = None
    W0_alpha: Optional[float] = None

    def as_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass(frozen=True)
class CrossingInputs:
    """The scalars of the necessary inequality ``C0 / P(t)**(k/2) <= C_up / (t+1)**k``."""

    C0: float
    C_up: float
    I0: float
    P1: float
    P2: float
    k: float

    def phi(self, t):
        """Log of lower over upper bound; the necessary inequality holds where ``phi <= 0``."""
        t = np.asarray(t, dtype=float)
        P = self.I0 + self.P1 * t + self.P2 * t * t
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.C0 <= 0:
                return np.full_like(t, -np.inf)[()]
            if self.C_up <= 0:
                return np.full_like(t, np.inf)[()]
            val = (
                math.log(self.C0)
                - 0.5 * self.k * np.log(np.where(P > 0, P, 1.0))
                - math.log(self.C_up)
                + self.k * np.log1p(t)
            )
            val = np.where(P > 0, val, np.inf)
        return val[()] if val.ndim == 0 else val

    def asymptotic_margin(self) -> float:
        """``C0 - C_up * P2**(k/2)``; positive means the inequality fails for large t."""
        return self.C0 - self.C_up * self.P2 ** (0.5 * self.k)


@dataclass(frozen=True)
class LifespanBound:
    t_star: float
    bracket_lo: float
    bracket_hi: float
    certified: bool
    samples_checked: int

    def as_dict(self) -> dict:
        return {"t_star": self.t_star, "bracket_lo": self.bracket_lo, "bracket_hi": self.bracket_hi}


@dataclass
class CriterionReport:
    system: SystemKind
    theorem: Theorem
    branch: str
    constants: ConstantsBundle
    gate: bool
    margin: float
    crossing: Optional[CrossingInputs] = None
    lifespan_bound: Optional[LifespanBound] = None
    notes: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "system": self.system.value,
            "theorem": self.theorem.value,
            "branch": self.branch,
            "constants": self.constants.as_dict(),
            "gate": bool(self.gate),
            "margin": float(self.margin),
            "lifespan_bound": None if self.lifespan_bound is None else self.lifespan_bound.as_dict(),
            "notes": list(self.notes),
        }


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------


def const_C0(m_rho: float, d: int, gamma: float) -> float:
    """Constant of the internal-energy lower bound ``E_i >= C0 / I_rho**(d(gamma-1)/2)``.

    Parameters
    ----------
    m_rho : float
        Fluid mass (or the fraction-weighted mass), ``>= 0``.
    d : int
        Spatial dimension.
    gamma : float
        Adiabatic exponent, ``> 1``.

    Returns
    -------
    float
        ``|B_1|**(1-gamma) m**e / (2**e (gamma-1))`` with ``e = ((d+2) gamma - d)/2``
        and ``|B_1|`` the unit-ball volume.
    """
    if m_rho < 0 or not gamma > 1:
        raise InvalidParams("const_C0 needs m_rho >= 0 and gamma > 1")
    if m_rho == 0:
        return 0.0
    e = 0.5 * ((d + 2) * gamma - d)
    return unit_ball_volume(d) ** (1.0 - gamma) * (m_rho / 2.0) ** e / (gamma - 1.0)


def viscosity_mass_bound(params: ModelParams, m_rho: float, E0: float) -> float:
    """Bound on ``int mu(rho)`` for ``mu = c rho**delta`` via interpolation between mass and energy."""
    v = params.viscosity
    if not isinstance(v, PowerLawViscosity):
        raise RegimeError("viscosity_mass_bound applies to power-law viscosity only")
    g, delta = params.gamma, v.exponent
    if m_rho == 0:
        return 0.0
    return (
        v.coefficient
        * m_rho ** ((g - delta) / (g - 1.0))
        * (g - 1.0) ** ((delta - 1.0) / (g - 1.0))
        * E0 ** ((delta - 1.0) / (g - 1.0))
    )


def _initial_functionals(system: SystemKind, mv0: MomentVector):
    """Select (m_rho, I0, W0, E0, J0) according to which phases the system carries."""
    if system == SystemKind.ISENTROPIC_NS:
        I0, W0, E0 = mv0.I_rho, mv0.W_rho, mv0.E_k + mv0.E_i
    else:
        I0, W0, E0 = mv0.I, mv0.W, mv0.E
    s = mv0.t + 1.0
    return mv0.m_rho, I0, W0, E0, I0 - s * W0 + s * s * E0


def _power_gronwall_coeffs(params: ModelParams, m_rho: float):
    """``(a, b, beta)`` of the differential inequality satisfied by J under power-law viscosity."""
    v = params.viscosity
    g, d, delta = params.gamma, params.d, v.exponent
    a = 2.0 - params.k
    nu = 0.5 * (1.0 + d * (delta - 1.0))
    b = (
        v.coefficient
        * m_rho ** ((g - delta) / (g - 1.0))
        * (g - 1.0) ** ((delta - 1.0) / (g - 1.0))
        * nu
    )
    beta = (delta - 1.0) / (g - 1.0)
    return a, b, beta, nu


def _subcritical_constant(J0: float, params: ModelParams, m_rho: float) -> float:
    v = params.viscosity
    g, d, delta = params.gamma, params.d, v.exponent
    q = (g - delta) / (g - 1.0)
    extra = (
        v.coefficient
        * (1.0 + d * (delta - 1.0))
        * m_rho**q
        * (g - 1.0) ** ((delta - g) / (g - 1.0))
        * (g - delta)
        / (2.0 * (1.0 - d * (g - delta)))
    )
    return (J0**q + extra) ** (1.0 / q)


def const_envelope_pack(
    mv0: MomentVector,
    params: ModelParams,
    M_mu: Optional[float] = None,
    M_lambda: Optional[float] = None,
    system: Union[SystemKind, str] = SystemKind.VLASOV_NS,
) -> ConstantsBundle:
    """Fill every constant that the initial moments and the model determine.

    ``M_mu``/``M_lambda`` default to the interpolation bound for power-law
    viscosity, to 0 without viscosity, and are unused for constant
    coefficients.  Constants whose regime does not apply are left ``None``.
    """
    system = SystemKind(system)
    d, g, k = params.d, params.gamma, params.k
    m_rho, I0, W0, E0, J0 = _initial_functionals(system, mv0)
    v = params.viscosity

    if isinstance(v, PowerLawViscosity):
        mu_default = viscosity_mass_bound(params, m_rho, E0)
        M_mu = mu_default if M_mu is None else float(M_mu)
        M_lambda = 2.0 * (v.exponent - 1.0) * M_mu if M_lambda is None else float(M_lambda)
    elif v is None or isinstance(v, ConstantViscosity):
        M_mu = 0.0 if M_mu is None else float(M_mu)
        M_lambda = 0.0 if M_lambda is None else float(M_lambda)
    if M_mu < 0 or M_lambda < 0:
        raise InvalidParams("M_mu and M_lambda must be >= 0")

    C1 = W0 + E0 + 2.0 * d * M_mu
    C2 = 0.5 * (0.5 * M_mu + max(2.0, k) * E0)
    C3 = J0 + (0.5 * M_mu + 0.25 * d * M_lambda) / (1.0 - k) if k < 1 else None

    nu = C4 = C5 = None
    if isinstance(v, PowerLawViscosity):
        delta = v.exponent
        nu = 0.5 * (1.0 + d * (delta - 1.0))
        if k < 2 and g - 1.0 / d < delta < g and delta > 1:
            C4 = _subcritical_constant(J0, params, m_rho)
            if system == SystemKind.TWO_PHASE:
                C5, C4 = C4, None

    extra = {}
    if mv0.has_alpha:
        E0a = mv0.E_k_a + mv0.E_i_a + mv0.E_f
        I0a = mv0.I_rho_a + mv0.I_f
        W0a = mv0.W_rho_a + mv0.W_f
        s = mv0.t + 1.0
        extra = dict(
            C0_alpha=const_C0(mv0.m_rho_a, d, g),
            E0_alpha=E0a,
            I0_alpha=I0a,
            W0_alpha=W0a,
            J0_alpha=I0a - s * W0a + s * s * E0a,
        )

    return ConstantsBundle(
        k=k, m_rho=m_rho, m_f=mv0.m_f, I0=I0, W0=W0, E0=E0, J0=J0,
        C0=const_C0(m_rho, d, g), M_mu=M_mu, M_lambda=M_lambda,
        C1=C1, C2=C2, C3=C3, C4=C4, C5=C5, nu=nu, **extra,
    )


# ---------------------------------------------------------------------------
# regimes, envelopes, crossing inputs
# ---------------------------------------------------------------------------


def select_theorem(system: SystemKind, params: ModelParams) -> Theorem:
    """Default criterion for a system and viscosity law."""
    if system == SystemKind.THICK_SPRAYS:
        return Theorem.THICK_SPRAYS
    v = params.viscosity
    if isinstance(v, ConstantViscosity):
        return Theorem.CONSTANT
    if isinstance(v, PowerLawViscosity):
        g, delta = params.gamma, v.exponent
        if delta == g and delta > 1:
            return Theorem.POWER_CRITICAL
        if g - 1.0 / params.d < delta < g and delta > 1:
            return Theorem.POWER_SUBCRITICAL
        return Theorem.GENERAL
    return Theorem.GENERAL if params.k < 1 else Theorem.CONSTANT


def check_regime(theorem: Theorem, system: SystemKind, params: ModelParams) -> None:
    """Raise :class:`RegimeError` unless ``(gamma, delta, d)`` lie in the theorem's range."""
    k, g, d, v = params.k, params.gamma, params.d, params.viscosity
    if theorem == Theorem.THICK_SPRAYS and system != SystemKind.THICK_SPRAYS:
        raise RegimeError("the thick-sprays criterion needs the thick_sprays system")
    if system == SystemKind.THICK_SPRAYS and theorem != Theorem.THICK_SPRAYS:
        raise RegimeError("the thick_sprays system only has the thick-sprays criterion")
    if theorem == Theorem.GENERAL:
        if not k < 1:
            raise RegimeError(f"general criterion needs d(gamma-1) < 1, got {k:g}")
        if isinstance(v, ConstantViscosity) and (v.mu != 0 or v.lam != 0):
            raise RegimeError("constant nonzero viscosity has no finite integral bound M_mu")
    elif theorem in (Theorem.POWER_CRITICAL, Theorem.POWER_SUBCRITICAL):
        if not isinstance(v, PowerLawViscosity):
            raise RegimeError(f"{theorem.value} needs power-law viscosity")
        if not k < 2:
            raise RegimeError(f"{theorem.value} needs d(gamma-1) < 2, got {k:g}")
        delta = v.exponent
        if theorem == Theorem.POWER_CRITICAL and not (delta == g and delta > 1):
            raise RegimeError(f"{theorem.value} needs delta = gamma, got delta={delta:g}, gamma={g:g}")
        if theorem == Theorem.POWER_SUBCRITICAL and not (g - 1.0 / d < delta < g and delta > 1):
            raise RegimeError(
                f"{theorem.value} needs gamma - 1/d < delta < gamma, got delta={delta:g}"
            )
    elif theorem in (Theorem.CONSTANT, Theorem.THICK_SPRAYS):
        if not k <= 2:
            raise RegimeError(f"{theorem.value} needs d(gamma-1) <= 2, got {k:g}")
        if theorem == Theorem.CONSTANT and isinstance(v, PowerLawViscosity):
            raise RegimeError("constant-viscosity criterion used with power-law viscosity")


def _critical_upper(c: ConstantsBundle, params: ModelParams) -> float:
    _, b, _, _ = _power_gronwall_coeffs(params, c.m_rho)
    return c.J0 * math.exp(b)


def envelope_J(regime: Union[Theorem, str], constants: ConstantsBundle, t, params: ModelParams,
               relaxed: bool = False):
    """Upper envelope of ``J(t)`` (``J^alpha`` for thick sprays) in the given regime.

    Parameters
    ----------
    regime : Theorem
    constants : ConstantsBundle
    t : float or array_like
    params : ModelParams
    relaxed : bool
        For the subcritical power-law regime, return the simpler bound
        ``C4 (t+1)**(2-k)`` instead of the exact solution of the comparison
        ODE.  Other regimes ignore it.
    """
    regime = Theorem(regime)
    t = np.asarray(t, dtype=float)
    k = constants.k
    s = t + 1.0
    if regime == Theorem.GENERAL:
        if constants.C3 is None:
            raise RegimeError("general envelope needs d(gamma-1) < 1")
        out = constants.C3 * s ** (2.0 - k)
    elif regime == Theorem.POWER_CRITICAL:
        out = _critical_upper(constants, params) * s ** (2.0 - k)
    elif regime == Theorem.POWER_SUBCRITICAL:
        c_sub = constants.C4 if constants.C4 is not None else constants.C5
        if c_sub is None:
            raise RegimeError("subcritical envelope needs gamma - 1/d < delta < gamma and k < 2")
        if relaxed:
            out = c_sub * s ** (2.0 - k)
        else:
            g, d = params.gamma, params.d
            delta = params.viscosity.exponent
            q = (g - delta) / (g - 1.0)
            K = c_sub**q - constants.J0**q
            # exponent 1 - (2 beta + a (1 - beta)) = d (gamma - delta) - 1 < 0
            decay = np.power(s, d * (g - delta) - 1.0)
            out = s ** (2.0 - k) * (constants.J0**q + K * (1.0 - decay)) ** (1.0 / q)
    elif regime in (Theorem.CONSTANT, Theorem.THICK_SPRAYS):
        J0 = constants.J0 if regime == Theorem.CONSTANT else constants.J0_alpha
        if J0 is None:
            raise RegimeError("thick-sprays envelope needs fraction-weighted moments")
        out = J0 * s ** max(2.0 - k, 0.0)
    else:  # pragma: no cover
        raise RegimeError(f"unknown regime {regime}")
    return out[()] if np.ndim(out) == 0 else out


def crossing_inputs(regime: Union[Theorem, str], constants: ConstantsBundle, params: ModelParams,
                    rho_max: Optional[float] = None) -> CrossingInputs:
    """Scalars of the necessary inequality for a regime (see the module docstring)."""
    regime = Theorem(regime)
    c = constants
    k = c.k
    if regime == Theorem.CONSTANT:
        return CrossingInputs(c.C0, c.J0, c.I0, c.W0, max(1.0, 0.5 * k) * c.E0, k)
    if regime == Theorem.THICK_SPRAYS:
        if rho_max is None:
            raise MissingInput("thick-sprays criterion needs rho_max")
        if c.C0_alpha is None:
            raise RegimeError("thick-sprays criterion needs fraction-weighted moments")
        P2 = max(1.0, 0.5 * k) * c.E0_alpha + 0.5 * params.d * rho_max**params.gamma * c.m_f
        return CrossingInputs(c.C0_alpha, c.J0_alpha, c.I0_alpha, c.W0_alpha, P2, k)
    C_up = float(envelope_J(regime, c, 0.0, params, relaxed=True))
    return CrossingInputs(c.C0, C_up, c.I0, c.C1, c.C2, k)


def lower_bound_Ei(regime: Union[Theorem, str], constants: ConstantsBundle,
                   I_path: Optional[Callable] = None, t=0.0, params: Optional[ModelParams] = None,
                   rho_max: Optional[float] = None):
    """``C0 / I(t)**(k/2)``; ``I_path`` defaults to the regime's quadratic bound on ``I``."""
    t = np.asarray(t, dtype=float)
    if I_path is None:
        if params is None:
            raise InvalidParams("params are needed for the default I path")
        ci = crossing_inputs(regime, constants, params, rho_max)
        C0 = ci.C0
        I = ci.I0 + ci.P1 * t + ci.P2 * t * t
    else:
        C0 = constants.C0_alpha if Theorem(regime) == Theorem.THICK_SPRAYS else constants.C0
        I = np.asarray(I_path(t), dtype=float)
    if C0 == 0:
        out = np.zeros_like(I)
    else:
        with np.errstate(divide="ignore"):
            out = C0 / np.power(I, 0.5 * constants.k)
    return out[()] if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# lifespan
# ---------------------------------------------------------------------------

T_HORIZON = 1e12


def lifespan_upper_bound(ci: CrossingInputs, horizon: float = T_HORIZON, rtol: float = 1e-9,
                         certify_samples: int = 400) -> LifespanBound:
    """First time the necessary inequality fails, found by scan and bisection.

    Parameters
    ----------
    ci : CrossingInputs
    horizon : float
        Largest time searched.
    rtol : float
        The returned bracket satisfies ``hi - lo <= rtol * (1 + t_star)``.
    certify_samples : int
        Number of log-spaced times in ``(T*, 10 T*]`` at which the failure of
        the inequality is re-checked.

    Returns
    -------
    LifespanBound
        ``t_star = 0`` if the inequality already fails at ``t = 0``, which
        only happens for constants no admissible solution can produce.

    Raises
    ------
    NoCrossing
        If the inequality holds on the whole grid up to ``horizon``.
    """
    if float(ci.phi(0.0)) > 0:
        return LifespanBound(0.0, 0.0, 0.0, True, 0)
    grid = np.concatenate([[0.0], np.logspace(-9, math.log10(horizon), 4000)])
    vals = ci.phi(grid)
    bad = np.nonzero(vals > 0)[0]
    if bad.size == 0:
        raise NoCrossing(
            f"necessary inequality holds for all sampled t <= {horizon:g}", horizon
        )
    i = int(bad[0])
    lo, hi = float(grid[i - 1]), float(grid[i])
    while hi - lo > rtol * (1.0 + lo):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if ci.phi(mid) > 0:
            hi = mid
        else:
            lo = mid
    t_star = hi
    ts = t_star * np.logspace(0.0, 1.0, certify_samples + 1)[1:]
    ok = bool(np.all(ci.phi(ts) > 0))
    return LifespanBound(t_star, lo, hi, ok, certify_samples)


# ---------------------------------------------------------------------------
# gates
# ---------------------------------------------------------------------------


def _rhs(theorem: Theorem, c: ConstantsBundle, params: ModelParams, rho_max):
    k = c.k
    if theorem == Theorem.GENERAL:
        return c.C2 * c.C3
    if theorem == Theorem.POWER_CRITICAL:
        return c.C2 * _critical_upper(c, params)
    if theorem == Theorem.POWER_SUBCRITICAL:
        return c.C2 * (c.C4 if c.C4 is not None else c.C5)
    if theorem == Theorem.CONSTANT:
        return (max(1.0, 0.5 * k) * c.E0) ** (0.5 * k) * c.J0
    if rho_max is None:
        raise MissingInput("thick-sprays criterion needs rho_max")
    base = max(1.0, 0.5 * k) * c.E0_alpha + 0.5 * params.d * rho_max**params.gamma * c.m_f
    return base ** (0.5 * k) * c.J0_alpha


def gate(system: Union[SystemSpec, SystemKind, str], params: ModelParams, mv0: MomentVector,
         overrides: Optional[dict] = None) -> CriterionReport:
    """Evaluate a blow-up criterion on initial moments.

    Parameters
    ----------
    system : SystemSpec, SystemKind or str
    params : ModelParams
    mv0 : MomentVector
        Moments at ``t = 0``.
    overrides : dict, optional
        ``theorem`` forces a criterion (otherwise chosen from the viscosity
        law), ``M_mu`` and ``M_lambda`` replace the default viscosity bounds,
        ``rho_max`` supplies the density bound for thick sprays.

    Returns
    -------
    CriterionReport
        ``gate`` is the strict inequality ``C0 > rhs`` as stated; ``margin`` is
        ``C0 - rhs``.  When the gate is true the lifespan bound is attempted
        and a failed search is recorded in ``notes``.
    """
    overrides = dict(overrides or {})
    if not isinstance(system, SystemSpec):
        system = SystemSpec(SystemKind(system), overrides.get("rho_max"))
    rho_max = overrides.get("rho_max", system.rho_max)
    kind = system.kind
    theorem = Theorem(overrides["theorem"]) if overrides.get("theorem") else select_theorem(kind, params)
    check_regime(theorem, kind, params)
    if theorem == Theorem.THICK_SPRAYS:
        if rho_max is None:
            raise MissingInput("thick-sprays criterion needs rho_max")
        if not mv0.has_alpha:
            raise MissingInput("thick-sprays criterion needs a gas volume fraction")

    c = const_envelope_pack(mv0, params, overrides.get("M_mu"), overrides.get("M_lambda"), kind)
    notes = []
    if isinstance(params.viscosity, PowerLawViscosity) and overrides.get("M_mu") is None:
        notes.append("M_mu from the mass/energy interpolation bound; M_lambda = 2(delta-1) M_mu")
    if params.viscosity is None:
        notes.append("inviscid fluid: M_mu = M_lambda = 0")

    lhs = c.C0_alpha if theorem == Theorem.THICK_SPRAYS else c.C0
    rhs = _rhs(theorem, c, params, rho_max)
    margin = lhs - rhs
    verdict = bool(margin > 0)
    branch = _branch_label(theorem, params)

    if theorem == Theorem.GENERAL:
        notes.append(
            f"leading-order large-t form C0 > C2^(k/2) C3: rhs = {c.C2 ** (0.5 * c.k) * c.C3:.6g}"
        )
    if theorem == Theorem.POWER_SUBCRITICAL and kind == SystemKind.TWO_PHASE:
        literal = c.C2 * c.C5 * c.C5
        notes.append(
            f"displayed condition with the subcritical constant repeated (C0 > C2 C5^2 = "
            f"{literal:.6g}) gives gate={lhs > literal}"
        )

    ci = crossing_inputs(theorem, c, params, rho_max)
    notes.append(f"necessary inequality fails for large t iff C0 > C_up P2^(k/2): "
                 f"margin {ci.asymptotic_margin():.6g}")
    report = CriterionReport(kind, theorem, branch, c, verdict, float(margin), ci, None, notes)
    if verdict:
        try:
            lb = lifespan_upper_bound(ci)
            report.lifespan_bound = lb
            if lb.t_star == 0.0:
                notes.append("necessary inequality already fails at t = 0: constants inconsistent")
            elif not lb.certified:
                notes.append("inequality holds again somewhere in (T*, 10 T*]")
        except NoCrossing as exc:
            notes.append(f"no lifespan bound: {exc}")
    return report


def _branch_label(theorem: Theorem, params: ModelParams) -> str:
    k = params.k
    if theorem == Theorem.GENERAL:
        return "d(gamma-1) < 1"
    if theorem == Theorem.POWER_CRITICAL:
        return "delta = gamma"
    if theorem == Theorem.POWER_SUBCRITICAL:
        return "gamma - 1/d < delta < gamma"
    return "2 - d(gamma-1) > 0" if k < 2 else "2 - d(gamma-1) = 0"
