"""Model parameters, discrete states and the physical functionals built on them.

All fluid integrals use the midpoint rule on the uniform cell grid, so a
finite-volume cell average and a quadrature node are the same number and the
solver's discrete conservation carries over to the moments unchanged.
Particle integrals are plain weighted sums.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import (
    BadSpec,
    HypothesisViolated,
    InvalidParams,
    IoError,
    NonFiniteField,
    NonFiniteParticle,
)

# ---------------------------------------------------------------------------
# constitutive laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerLawViscosity:
    """``mu(rho) = c rho**delta``; the bulk coefficient follows from ``lam = 2 rho mu' - 2 mu``."""

    coefficient: float = 1.0
    exponent: float = 1.0

    def coefficients(self, rho):
        mu = self.coefficient * np.power(rho, self.exponent)
        return mu, 2.0 * (self.exponent - 1.0) * mu


@dataclass(frozen=True)
class ConstantViscosity:
    mu: float = 0.0
    lam: float = 0.0

    def coefficients(self, rho):
        rho = np.asarray(rho, dtype=float)
        return np.full_like(rho, self.mu), np.full_like(rho, self.lam)


Viscosity = Union[PowerLawViscosity, ConstantViscosity, None]

DRAG_KINDS = ("linear", "density_linear", "power")


@dataclass(frozen=True)
class Drag:
    """Drag law ``D(rho, y) = rate(rho, y) * y`` with ``y = u - v``.

    ``kind="power"`` is ``h(rho) |y|**(exponent-1) y`` with ``h`` either the
    constant 1 or ``rho``.  ``coefficient`` multiplies every law; a negative
    value gives an anti-dissipative drag, which is only useful to check that
    the dissipation diagnostics can fail.
    """

    kind: str = "linear"
    h: str = "1"
    exponent: float = 1.0
    coefficient: float = 1.0

    def __post_init__(self):
        if self.kind not in DRAG_KINDS:
            raise InvalidParams(f"unknown drag kind {self.kind!r}")
        if self.h not in ("1", "rho"):
            raise InvalidParams(f"drag h must be '1' or 'rho', got {self.h!r}")
        if self.exponent < 0:
            raise InvalidParams("drag exponent must be >= 0")

    @property
    def is_linear(self) -> bool:
        """True when the rate does not depend on the relative velocity."""
        return self.kind != "power" or self.exponent == 1.0

    def rate(self, rho, rel):
        rho = np.asarray(rho, dtype=float)
        rel = np.asarray(rel, dtype=float)
        if self.kind == "linear":
            k = np.ones_like(rho + rel)
        elif self.kind == "density_linear":
            k = rho + 0.0 * rel
        else:
            h = np.ones_like(rho) if self.h == "1" else rho
            if self.exponent == 1.0:
                k = h + 0.0 * rel
            else:
                mag = np.abs(rel)
                with np.errstate(divide="ignore", invalid="ignore"):
                    k = np.where(mag > 0, h * mag ** (self.exponent - 1.0), 0.0)
        return self.coefficient * k

    def force(self, rho, rel):
        return self.rate(rho, rel) * np.asarray(rel, dtype=float)


PSI_KERNELS = ("constant", "gaussian", "cucker_smale")


@dataclass(frozen=True)
class GlobalAlignment:
    """Pairwise alignment with an even, nonnegative communication weight psi."""

    kernel: str = "constant"
    scale: float = 1.0
    strength: float = 1.0

    def __post_init__(self):
        if self.kernel not in PSI_KERNELS:
            raise InvalidParams(f"unknown psi kernel {self.kernel!r}")
        if self.scale <= 0 or self.strength < 0:
            raise InvalidParams("psi scale must be > 0 and strength >= 0")

    def psi(self, r):
        r = np.asarray(r, dtype=float)
        if self.kernel == "constant":
            return self.strength * np.ones_like(r)
        if self.kernel == "gaussian":
            return self.strength * np.exp(-0.5 * (r / self.scale) ** 2)
        return self.strength / (1.0 + (r / self.scale) ** 2) ** 0.5


@dataclass(frozen=True)
class LocalAlignment:
    """Relaxation of each particle velocity toward the local mean particle velocity."""

    strength: float = 1.0

    def __post_init__(self):
        if self.strength < 0:
            raise InvalidParams("local alignment strength must be >= 0")


Collision = Union[GlobalAlignment, LocalAlignment, None]


@dataclass(frozen=True)
class ModelParams:
    d: int = 1
    gamma: float = 1.5
    viscosity: Viscosity = None
    drag: Optional[Drag] = None
    collision: Collision = None

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise InvalidParams(f"dimension must be a positive integer, got {self.d}")
        if not self.gamma > 1.0:
            raise InvalidParams(f"adiabatic exponent must exceed 1, got {self.gamma}")
        v = self.viscosity
        if isinstance(v, PowerLawViscosity):
            if v.coefficient < 0:
                raise InvalidParams("viscosity coefficient must be >= 0")
            if not 1.0 <= v.exponent <= self.gamma:
                raise InvalidParams(
                    f"power-law viscosity needs 1 <= delta <= gamma, got delta={v.exponent}"
                )
        elif isinstance(v, ConstantViscosity):
            if v.mu < 0 or 2.0 * v.mu + self.d * v.lam < 0:
                raise InvalidParams("constant viscosity needs mu >= 0 and 2 mu + d lam >= 0")

    @property
    def k(self) -> float:
        """The recurring exponent ``d (gamma - 1)``."""
        return self.d * (self.gamma - 1.0)

    def pressure(self, rho):
        return np.power(rho, self.gamma)


# ---------------------------------------------------------------------------
# discrete states
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FluidField:
    x_lo: float
    x_hi: float
    rho: np.ndarray
    u: np.ndarray
    alpha: Optional[np.ndarray] = None

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        u = np.asarray(self.u, dtype=float)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "u", u)
        if rho.ndim != 1 or rho.shape != u.shape:
            raise InvalidParams("rho and u must be 1-D arrays of equal length")
        if rho.size < 2:
            raise InvalidParams("a fluid field needs at least 2 cells")
        if not self.x_hi > self.x_lo:
            raise InvalidParams("domain must satisfy x_hi > x_lo")
        if np.any(rho < 0):
            raise InvalidParams("density must be nonnegative")
        if self.alpha is not None:
            a = np.asarray(self.alpha, dtype=float)
            object.__setattr__(self, "alpha", a)
            if a.shape != rho.shape:
                raise InvalidParams("alpha must match rho in shape")
            if np.any(a < 0) or np.any(a > 1):
                raise InvalidParams("volume fraction alpha must lie in [0, 1]")

    @property
    def n(self) -> int:
        return self.rho.size

    @property
    def dx(self) -> float:
        return (self.x_hi - self.x_lo) / self.n

    @property
    def x(self) -> np.ndarray:
        return self.x_lo + (np.arange(self.n) + 0.5) * self.dx

    @classmethod
    def zeros(cls, x_lo: float, x_hi: float, n: int) -> "FluidField":
        return cls(x_lo, x_hi, np.zeros(n), np.zeros(n))


KINETIC = "kinetic"
MONOKINETIC = "monokinetic"


@dataclass(frozen=True, eq=False)
class ParticleCloud:
    x: np.ndarray
    v: np.ndarray
    w: np.ndarray
    mode: str = KINETIC

    def __post_init__(self):
        for name in ("x", "v", "w"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).ravel())
        if not (self.x.size == self.v.size == self.w.size):
            raise InvalidParams("particle arrays x, v, w must have equal length")
        if self.mode not in (KINETIC, MONOKINETIC):
            raise InvalidParams(f"unknown particle mode {self.mode!r}")
        if np.any(self.w < 0):
            raise InvalidParams("particle weights must be nonnegative")

    def __len__(self) -> int:
        return self.x.size

    @classmethod
    def empty(cls, mode: str = KINETIC) -> "ParticleCloud":
        return cls(np.zeros(0), np.zeros(0), np.zeros(0), mode)


# ---------------------------------------------------------------------------
# moment vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentVector:
    """One time sample of every functional.

    For the two-phase pressureless system the dispersed phase ``(n, w)`` is
    stored in the ``*_f`` slots.  The ``*_a`` fields are the gas-volume-fraction
    weighted variants and stay ``None`` unless a fraction is present.
    """

    t: float = 0.0
    m_rho: float = 0.0
    m_f: float = 0.0
    M_rho: float = 0.0
    M_f: float = 0.0
    W_rho: float = 0.0
    W_f: float = 0.0
    I_rho: float = 0.0
    I_f: float = 0.0
    E_k: float = 0.0
    E_i: float = 0.0
    E_f: float = 0.0
    m_rho_a: Optional[float] = None
    M_rho_a: Optional[float] = None
    W_rho_a: Optional[float] = None
    I_rho_a: Optional[float] = None
    E_k_a: Optional[float] = None
    E_i_a: Optional[float] = None

    @property
    def M(self) -> float:
        return self.M_rho + self.M_f

    @property
    def W(self) -> float:
        return self.W_rho + self.W_f

    @property
    def I(self) -> float:  # noqa: E743
        return self.I_rho + self.I_f

    @property
    def E(self) -> float:
        return self.E_k + self.E_i + self.E_f

    @property
    def has_alpha(self) -> bool:
        return self.m_rho_a is not None

    @property
    def J(self) -> float:
        return assemble_J(self)

    @property
    def J_alpha(self) -> Optional[float]:
        return assemble_J(self, weighted=True) if self.has_alpha else None

    def combine(self, other: "MomentVector") -> "MomentVector":
        """Merge a fluid-only vector with a particle-only vector (fields are added)."""
        out = {}
        for f in fields(self):
            if f.name == "t":
                out["t"] = self.t
                continue
            a, b = getattr(self, f.name), getattr(other, f.name)
            out[f.name] = None if a is None and b is None else (a or 0.0) + (b or 0.0)
        return MomentVector(**out)

    def as_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(M=self.M, W=self.W, I=self.I, E=self.E, J=self.J)
        if self.has_alpha:
            d["J_alpha"] = self.J_alpha
        return d


def gamma_half_integer(two_x: int) -> float:
    """Gamma(two_x / 2) from the recurrence Gamma(x + 1) = x Gamma(x).

    >>> gamma_half_integer(4)
    1.0
    """
    two_x = int(two_x)
    if two_x < 1:
        raise InvalidParams("gamma_half_integer needs two_x >= 1")
    if two_x % 2 == 0:
        value, start = 1.0, 2  # Gamma(1)
    else:
        value, start = math.sqrt(math.pi), 1  # Gamma(1/2)
    for k in range(start, two_x, 2):
        value *= k / 2.0
    return value


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2.0) / gamma_half_integer(d + 2)


def fluid_moments(field: FluidField, params: ModelParams, t: float = 0.0) -> MomentVector:
    rho, u = field.rho, field.u
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(u))):
        raise NonFiniteField("fluid field contains NaN or infinite values")
    if field.alpha is not None and not np.all(np.isfinite(field.alpha)):
        raise NonFiniteField("volume fraction contains NaN or infinite values")
    x, dx, g = field.x, field.dx, params.gamma
    mom = rho * u
    p = np.power(rho, g)
    out = dict(
        t=t,
        m_rho=float(np.sum(rho) * dx),
        M_rho=float(np.sum(mom) * dx),
        W_rho=float(np.sum(mom * x) * dx),
        I_rho=float(0.5 * np.sum(rho * x * x) * dx),
        E_k=float(0.5 * np.sum(mom * u) * dx),
        E_i=float(np.sum(p) * dx / (g - 1.0)),
    )
    if field.alpha is not None:
        a = field.alpha
        out.update(
            m_rho_a=float(np.sum(a * rho) * dx),
            M_rho_a=float(np.sum(a * mom) * dx),
            W_rho_a=float(np.sum(a * mom * x) * dx),
            I_rho_a=float(0.5 * np.sum(a * rho * x * x) * dx),
            E_k_a=float(0.5 * np.sum(a * mom * u) * dx),
            E_i_a=float(np.sum(a * p) * dx / (g - 1.0)),
        )
    return MomentVector(**out)


def particle_moments(cloud: ParticleCloud, t: float = 0.0) -> MomentVector:
    x, v, w = cloud.x, cloud.v, cloud.w
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
        raise NonFiniteParticle("particle cloud contains NaN or infinite values")
    return MomentVector(
        t=t,
        m_f=float(np.sum(w)),
        M_f=float(np.sum(w * v)),
        W_f=float(np.sum(w * x * v)),
        I_f=float(0.5 * np.sum(w * x * x)),
        E_f=float(0.5 * np.sum(w * v * v)),
    )


def state_moments(
    field: FluidField, cloud: Optional[ParticleCloud], params: ModelParams, t: float = 0.0
) -> MomentVector:
    mv = fluid_moments(field, params, t)
    if cloud is not None and len(cloud):
        mv = mv.combine(particle_moments(cloud, t))
    return mv


def assemble_J(mv: MomentVector, weighted: bool = False) -> float:
    """``I - (t+1) W + (t+1)**2 E``; ``weighted`` uses the fraction-weighted fluid parts."""
    s = mv.t + 1.0
    if not weighted:
        return mv.I - s * mv.W + s * s * mv.E
    if not mv.has_alpha:
        raise InvalidParams("weighted J requested but the moment vector has no alpha variants")
    I_a = mv.I_rho_a + mv.I_f
    W_a = mv.W_rho_a + mv.W_f
    E_a = mv.E_k_a + mv.E_i_a + mv.E_f
    return I_a - s * W_a + s * s * E_a


# ---------------------------------------------------------------------------
# structural hypotheses
# ---------------------------------------------------------------------------


@dataclass
class HypothesisReport:
    drag: str = "not-applicable"
    collision: str = "not-applicable"
    viscosity: str = "not-applicable"
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return "fail" not in (self.drag, self.collision, self.viscosity)


def check_hypotheses(params: ModelParams, samples: int = 64) -> HypothesisReport:
    """Check drag dissipativity, collision invariants and the viscosity relation.

    Drag is sampled on a grid of densities and relative velocities and must
    satisfy ``D(rho, y) * y >= 0``.  The power-law viscosity relation is
    verified symbolically.  Raises :class:`HypothesisViolated` with a witness.
    """
    report = HypothesisReport()

    if params.drag is not None:
        rho = np.concatenate([[0.0], np.logspace(-6, 3, samples)])
        y = np.concatenate([-np.logspace(-6, 3, samples), [0.0], np.logspace(-6, 3, samples)])
        R, Y = np.meshgrid(rho, y, indexing="ij")
        prod = params.drag.force(R, Y) * Y
        bad = np.argwhere(~(prod >= 0))
        if bad.size:
            i, j = bad[0]
            raise HypothesisViolated(
                "drag-dissipation",
                {"rho": float(R[i, j]), "y": float(Y[i, j]), "D.y": float(prod[i, j])},
            )
        report.drag = "pass"
        report.notes.append(f"drag D.y >= 0 on {R.size} sampled (rho, y) points")

    if params.collision is not None:
        if isinstance(params.collision, GlobalAlignment):
            r = np.linspace(-10 * params.collision.scale, 10 * params.collision.scale, 201)
            psi = params.collision.psi(r)
            if np.any(psi < 0) or not np.allclose(psi, psi[::-1], rtol=1e-12, atol=0):
                raise HypothesisViolated("collision-invariants", {"psi": "not even or negative"})
        report.collision = "by-construction"
        report.notes.append(
            "alignment operators conserve mass and momentum and dissipate |v|^2 by construction"
        )

    v = params.viscosity
    if isinstance(v, PowerLawViscosity):
        import sympy as sp

        r, c, delta = sp.symbols("rho c delta", positive=True)
        mu = c * r**delta
        lam_required = sp.simplify(2 * r * sp.diff(mu, r) - 2 * mu)
        lam_model = 2 * (delta - 1) * c * r**delta
        if sp.simplify(lam_required - lam_model) != 0:
            raise HypothesisViolated("viscosity-relation", {"lambda": str(lam_required)})
        lam_here = lam_model.subs({c: v.coefficient, delta: v.exponent})
        report.viscosity = "pass"
        report.notes.append(f"lambda(rho) = {sp.nsimplify(lam_here)} from mu = c rho^delta")
    elif isinstance(v, ConstantViscosity):
        report.viscosity = "not-applicable"
        report.notes.append("constant Lame coefficients: only mu >= 0, 2 mu + d lam >= 0 checked")
    return report


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianBump:
    """``rho = A exp(-x^2 / 2 sigma^2)``, ``u = slope * x`` damped by an optional Gaussian window."""

    amplitude: float = 1.0
    width: float = 1.0
    slope: float = 0.0
    window: Optional[float] = None


@dataclass(frozen=True)
class UniformBump:
    height: float = 0.5
    radius: float = 1.0
    slope: float = 0.0


@dataclass(frozen=True)
class TabulatedField:
    path: str


@dataclass(frozen=True)
class MaxwellianParticles:
    """Gaussian in space, Maxwellian in velocity around ``drift + slope * x``."""

    mass: float = 1.0
    center: float = 0.0
    width: float = 1.0
    temperature: float = 1.0
    drift: float = 0.0
    slope: float = 0.0


@dataclass(frozen=True)
class MonoKineticParticles:
    """Single-velocity phase: density Gaussian in space, velocity ``drift + slope * x``.

    ``placement="quantile"`` puts equal-weight particles at Gaussian quantiles
    instead of random draws; ``placement="grid"`` puts one parcel at every
    cell centre carrying the mass of that cell (``n_particles`` is ignored).
    """

    mass: float = 1.0
    center: float = 0.0
    width: float = 1.0
    drift: float = 0.0
    slope: float = 0.0
    placement: str = "quantile"


@dataclass(frozen=True)
class TabulatedParticles:
    path: str
    mode: str = KINETIC


FluidSpec = Union[GaussianBump, UniformBump, TabulatedField, None]
ParticleSpec = Union[MaxwellianParticles, MonoKineticParticles, TabulatedParticles, None]


@dataclass(frozen=True)
class InitialDataSpec:
    domain: tuple = (-10.0, 10.0)
    cells: int = 1024
    fluid: FluidSpec = None
    particles: ParticleSpec = None
    n_particles: int = 0
    seed: int = 0
    particle_volume: Optional[float] = None  # m_p / rho_p; enables the gas volume fraction


def build_initial_data(spec: InitialDataSpec, params: ModelParams):
    """Construct ``(FluidField, ParticleCloud)``; deterministic for a fixed seed."""
    fl = spec.fluid
    if isinstance(fl, TabulatedField):
        field_ = read_field_csv(fl.path)
    else:
        x_lo, x_hi = (float(b) for b in spec.domain)
        if not x_hi > x_lo or spec.cells < 2:
            raise BadSpec(f"bad grid: domain={spec.domain}, cells={spec.cells}")
        field_ = FluidField.zeros(x_lo, x_hi, int(spec.cells))
        x = field_.x
        if isinstance(fl, GaussianBump):
            if fl.amplitude < 0 or fl.width <= 0:
                raise BadSpec("Gaussian bump needs amplitude >= 0 and width > 0")
            rho = fl.amplitude * np.exp(-0.5 * (x / fl.width) ** 2)
            u = fl.slope * x
            if fl.window is not None:
                if fl.window <= 0:
                    raise BadSpec("velocity window must be positive")
                u = u * np.exp(-0.5 * (x / fl.window) ** 2)
            field_ = FluidField(x_lo, x_hi, rho, u)
        elif isinstance(fl, UniformBump):
            if fl.height < 0 or fl.radius <= 0:
                raise BadSpec("uniform bump needs height >= 0 and radius > 0")
            inside = np.abs(x) <= fl.radius
            field_ = FluidField(x_lo, x_hi, np.where(inside, fl.height, 0.0),
                                np.where(inside, fl.slope * x, 0.0))
        elif fl is not None:
            raise BadSpec(f"unsupported fluid spec {fl!r}")

    cloud = _build_particles(spec, field_)

    if spec.particle_volume is not None:
        if spec.particle_volume <= 0:
            raise BadSpec("particle_volume must be positive")
        alpha = 1.0 - spec.particle_volume * deposit_density(cloud, field_)
        if np.any(alpha < 0):
            raise BadSpec("particle volume fraction exceeds 1; reduce particle_volume or mass")
        field_ = replace(field_, alpha=alpha)
    return field_, cloud


def _build_particles(spec: InitialDataSpec, field_: FluidField) -> ParticleCloud:
    ps = spec.particles
    if ps is None:
        return ParticleCloud.empty()
    if isinstance(ps, TabulatedParticles):
        return read_particles_csv(ps.path, ps.mode)
    n = int(spec.n_particles)
    if isinstance(ps, MonoKineticParticles) and ps.placement == "grid":
        if ps.width <= 0 or ps.mass < 0:
            raise BadSpec("particle family needs width > 0 and mass >= 0")
        x = field_.x
        w = ps.mass * field_.dx * np.exp(-0.5 * ((x - ps.center) / ps.width) ** 2) / (
            ps.width * math.sqrt(2.0 * math.pi)
        )
        keep = w > 0
        return ParticleCloud(x[keep], ps.drift + ps.slope * x[keep], w[keep], MONOKINETIC)
    if n <= 0:
        return ParticleCloud.empty(MONOKINETIC if isinstance(ps, MonoKineticParticles) else KINETIC)
    rng = np.random.default_rng(spec.seed)
    if ps.width <= 0 or ps.mass < 0:
        raise BadSpec("particle family needs width > 0 and mass >= 0")
    w = np.full(n, ps.mass / n)
    if isinstance(ps, MaxwellianParticles):
        if ps.temperature < 0:
            raise BadSpec("temperature must be >= 0")
        x = rng.normal(ps.center, ps.width, n)
        v = ps.drift + ps.slope * x + math.sqrt(ps.temperature) * rng.standard_normal(n)
        mode = KINETIC
    elif isinstance(ps, MonoKineticParticles):
        if ps.placement == "quantile":
            from scipy.special import ndtri

            x = ps.center + ps.width * ndtri((np.arange(n) + 0.5) / n)
        elif ps.placement == "random":
            x = np.sort(rng.normal(ps.center, ps.width, n))
        else:
            raise BadSpec(f"unknown placement {ps.placement!r}")
        v = ps.drift + ps.slope * x
        mode = MONOKINETIC
    else:
        raise BadSpec(f"unsupported particle spec {ps!r}")
    keep = (x > field_.x_lo) & (x < field_.x_hi)
    return ParticleCloud(x[keep], v[keep], w[keep], mode)


def deposit_density(cloud: ParticleCloud, field_: FluidField) -> np.ndarray:
    """Cloud-in-cell deposit of particle weight per unit length onto the cell centres."""
    out = np.zeros(field_.n)
    if len(cloud) == 0:
        return out
    idx, frac = cic_stencil(cloud.x, field_.x_lo, field_.dx, field_.n)
    out += np.bincount(idx, weights=cloud.w * (1.0 - frac), minlength=field_.n)
    out += np.bincount(np.minimum(idx + 1, field_.n - 1), weights=cloud.w * frac,
                       minlength=field_.n)
    return out / field_.dx


def cic_stencil(x, x_lo: float, dx: float, n: int):
    """Left cell index and linear weight of the right neighbour for each position.

    Positions left of the first or right of the last centre collapse onto
    that single cell (``frac`` 0 and index clamped).
    """
    s = (np.asarray(x) - x_lo) / dx - 0.5
    idx = np.floor(s).astype(np.int64)
    frac = s - idx
    left = idx < 0
    right = idx >= n - 1
    idx = np.where(left, 0, np.where(right, n - 1, idx))
    frac = np.where(left | right, 0.0, frac)
    return idx, frac


# ---------------------------------------------------------------------------
# CSV formats
# ---------------------------------------------------------------------------


def read_field_csv(path) -> FluidField:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoError(f"cannot read field table {path}: {exc}") from exc
    if not rows:
        raise BadSpec(f"{path}: empty field table")
    header = [h.strip() for h in rows[0]]
    if header not in (["x", "rho", "u"], ["x", "rho", "u", "alpha"]):
        raise BadSpec(f"{path}: header must be x,rho,u[,alpha], got {','.join(header)}")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise BadSpec(f"{path}: non-numeric entry ({exc})") from exc
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != len(header):
        raise BadSpec(f"{path}: need at least two complete rows")
    x = data[:, 0]
    steps = np.diff(x)
    if np.any(steps <= 0):
        raise BadSpec(f"{path}: x must be strictly increasing")
    dx = float(np.mean(steps))
    if np.max(np.abs(steps - dx)) > 1e-9 * max(1.0, abs(dx)):
        raise BadSpec(f"{path}: x spacing is not uniform")
    alpha = data[:, 3] if len(header) == 4 else None
    try:
        return FluidField(x[0] - 0.5 * dx, x[-1] + 0.5 * dx, data[:, 1], data[:, 2], alpha)
    except InvalidParams as exc:
        raise BadSpec(f"{path}: {exc}") from exc


def write_field_csv(path, field_: FluidField) -> None:
    cols = [field_.x, field_.rho, field_.u]
    header = ["x", "rho", "u"]
    if field_.alpha is not None:
        cols.append(field_.alpha)
        header.append("alpha")
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([repr(float(c)) for c in row])


def read_particles_csv(path, mode: str = KINETIC) -> ParticleCloud:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoError(f"cannot read particle table {path}: {exc}") from exc
    if not rows or [h.strip() for h in rows[0]] != ["x", "v", "w"]:
        raise BadSpec(f"{path}: header must be x,v,w")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise BadSpec(f"{path}: non-numeric entry ({exc})") from exc
    if data.size == 0:
        return ParticleCloud.empty(mode)
    try:
        return ParticleCloud(data[:, 0], data[:, 1], data[:, 2], mode)
    except InvalidParams as exc:
        raise BadSpec(f"{path}: {exc}") from exc


def write_particles_csv(path, cloud: ParticleCloud) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "v", "w"])
        for row in zip(cloud.x, cloud.v, cloud.w):
            w.writerow([repr(float(c)) for c in row])
