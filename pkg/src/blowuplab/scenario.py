"""Scenario files: YAML schema, validation with source positions, and conversion to library objects."""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from . import moments as mo
from .criteria import SystemKind, SystemSpec, Theorem
from .errors import IoError, ScenarioError
from .simulator.run import SimConfig


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# ---- model ----------------------------------------------------------------


class PowerLawViscosityCfg(_Strict):
    kind: Literal["power_law"]
    coefficient: float = Field(1.0, ge=0)
    exponent: float = Field(1.0, ge=1)


class ConstantViscosityCfg(_Strict):
    kind: Literal["constant"]
    mu: float = Field(0.0, ge=0)
    lam: float = 0.0


class DragCfg(_Strict):
    kind: Literal["linear", "density_linear", "power"] = "linear"
    h: Literal["1", "rho"] = "1"
    exponent: float = Field(1.0, ge=0)
    coefficient: float = 1.0

    @field_validator("h", mode="before")
    @classmethod
    def _h_as_text(cls, v):
        return str(v)


class GlobalAlignmentCfg(_Strict):
    kind: Literal["global_alignment"]
    kernel: Literal["constant", "gaussian", "cucker_smale"] = "constant"
    scale: float = Field(1.0, gt=0)
    strength: float = Field(1.0, ge=0)


class LocalAlignmentCfg(_Strict):
    kind: Literal["local_alignment"]
    strength: float = Field(1.0, ge=0)


class ModelCfg(_Strict):
    d: int = Field(1, ge=1)
    gamma: float = Field(..., gt=1)
    viscosity: Optional[
        Annotated[Union[PowerLawViscosityCfg, ConstantViscosityCfg], Field(discriminator="kind")]
    ] = None
    drag: Optional[DragCfg] = None
    collision: Optional[
        Annotated[Union[GlobalAlignmentCfg, LocalAlignmentCfg], Field(discriminator="kind")]
    ] = None


# ---- system ---------------------------------------------------------------


class SystemCfg(_Strict):
    kind: Literal["vlasov_ns", "isentropic_ns", "two_phase", "thick_sprays"] = "vlasov_ns"
    rho_max: Optional[float] = Field(None, gt=0)
    theorem: Optional[
        Literal["general_viscosity", "power_viscosity_critical", "power_viscosity_subcritical",
                "constant_viscosity", "thick_sprays"]
    ] = None
    M_mu: Optional[float] = Field(None, ge=0)
    M_lambda: Optional[float] = Field(None, ge=0)


# ---- initial data ---------------------------------------------------------


class GaussianCfg(_Strict):
    kind: Literal["gaussian"]
    amplitude: float = Field(1.0, ge=0)
    width: float = Field(1.0, gt=0)
    slope: float = 0.0
    window: Optional[float] = Field(None, gt=0)


class UniformCfg(_Strict):
    kind: Literal["uniform"]
    height: float = Field(0.5, ge=0)
    radius: float = Field(1.0, gt=0)
    slope: float = 0.0


class TabulatedFieldCfg(_Strict):
    kind: Literal["tabulated"]
    path: str


class MaxwellianCfg(_Strict):
    kind: Literal["maxwellian"]
    mass: float = Field(1.0, ge=0)
    center: float = 0.0
    width: float = Field(1.0, gt=0)
    temperature: float = Field(1.0, ge=0)
    drift: float = 0.0
    slope: float = 0.0


class MonoKineticCfg(_Strict):
    kind: Literal["monokinetic"]
    mass: float = Field(1.0, ge=0)
    center: float = 0.0
    width: float = Field(1.0, gt=0)
    drift: float = 0.0
    slope: float = 0.0
    placement: Literal["quantile", "random", "grid"] = "quantile"


class TabulatedParticlesCfg(_Strict):
    kind: Literal["tabulated"]
    path: str
    mode: Literal["kinetic", "monokinetic"] = "kinetic"


class InitialDataCfg(_Strict):
    domain: tuple[float, float] = (-10.0, 10.0)
    cells: int = Field(1024, ge=2)
    fluid: Optional[
        Annotated[Union[GaussianCfg, UniformCfg, TabulatedFieldCfg], Field(discriminator="kind")]
    ] = None
    particles: Optional[
        Annotated[Union[MaxwellianCfg, MonoKineticCfg, TabulatedParticlesCfg],
                  Field(discriminator="kind")]
    ] = None
    n_particles: int = Field(0, ge=0)
    seed: int = 0
    particle_volume: Optional[float] = Field(None, gt=0)


# ---- sim / outputs --------------------------------------------------------


class SimCfg(_Strict):
    cfl: float = Field(0.4, gt=0, le=1)
    t_end: float = Field(1.0, ge=0)
    max_steps: int = Field(1_000_000, ge=0)
    dt: Optional[float] = Field(None, gt=0)
    dt_floor: float = Field(1e-10, gt=0)
    stride: int = Field(10, ge=1)
    blowup_threshold: float = Field(0.05, gt=0)
    drag_substeps: int = Field(1, ge=1)
    max_drag_substeps: int = Field(10000, ge=1)
    stop_on_blowup: bool = True
    tolerances: dict[
        Literal["mass", "momentum", "energy", "virial", "virial_second",
                "internal_energy_lower_bound", "j_envelope"],
        float,
    ] = Field(default_factory=dict)


class OutputsCfg(_Strict):
    directory: Optional[str] = None
    formats: list[Literal["csv", "json"]] = Field(default_factory=lambda: ["csv", "json"])


class ScenarioCfg(_Strict):
    model: ModelCfg
    system: SystemCfg = SystemCfg()
    initial_data: InitialDataCfg = InitialDataCfg()
    sim: Optional[SimCfg] = None
    outputs: OutputsCfg = OutputsCfg()


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------


def _node_at(node, loc, key_node: bool = False):
    """Descend a composed YAML node along a pydantic error location.

    With ``key_node`` the last step returns the mapping key instead of its value.
    """
    for depth, key in enumerate(loc):
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == str(key):
                    nxt = k if key_node and depth == len(loc) - 1 else v
                    break
            if nxt is None:
                return node
            node = nxt
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            return node
    return node


def _mark(node) -> str:
    if node is None:
        return ""
    m = node.start_mark
    return f"{m.line + 1}:{m.column + 1}"


def _set_dotted(data: dict, dotted: str, value: Any):
    keys = dotted.split(".")
    cur = data
    for k in keys[:-1]:
        if cur.get(k) is None:
            cur[k] = {}
        if not isinstance(cur[k], dict):
            raise ScenarioError(f"override path {dotted!r} crosses a non-mapping value", key=dotted)
        cur = cur[k]
    cur[keys[-1]] = value


def parse_override(text: str):
    """Split ``key.path=value``; the value is parsed as a YAML scalar."""
    if "=" not in text:
        raise ScenarioError(f"override {text!r} is not of the form key=value", key=text)
    key, raw = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ScenarioError(f"override {text!r} has an empty key", key=text)
    return key, yaml.safe_load(raw) if raw.strip() else None


class Scenario:
    """A validated scenario file and the library objects it describes."""

    def __init__(self, cfg: ScenarioCfg, path: Optional[Path], text: str):
        self.cfg = cfg
        self.path = path
        self.text = text

    @property
    def base_dir(self) -> Path:
        return self.path.parent if self.path is not None else Path.cwd()

    @property
    def digest(self) -> str:
        canon = yaml.safe_dump(self.cfg.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()

    @property
    def stem(self) -> str:
        return self.path.stem if self.path is not None else "scenario"

    def params(self) -> mo.ModelParams:
        m = self.cfg.model
        visc = None
        if isinstance(m.viscosity, PowerLawViscosityCfg):
            visc = mo.PowerLawViscosity(m.viscosity.coefficient, m.viscosity.exponent)
        elif isinstance(m.viscosity, ConstantViscosityCfg):
            visc = mo.ConstantViscosity(m.viscosity.mu, m.viscosity.lam)
        drag = None
        if m.drag is not None:
            drag = mo.Drag(m.drag.kind, m.drag.h, m.drag.exponent, m.drag.coefficient)
        coll = None
        if isinstance(m.collision, GlobalAlignmentCfg):
            coll = mo.GlobalAlignment(m.collision.kernel, m.collision.scale, m.collision.strength)
        elif isinstance(m.collision, LocalAlignmentCfg):
            coll = mo.LocalAlignment(m.collision.strength)
        return mo.ModelParams(m.d, m.gamma, visc, drag, coll)

    def system(self) -> SystemSpec:
        return SystemSpec(SystemKind(self.cfg.system.kind), self.cfg.system.rho_max)

    def overrides(self) -> dict:
        s = self.cfg.system
        out = {}
        if s.theorem is not None:
            out["theorem"] = Theorem(s.theorem)
        if s.M_mu is not None:
            out["M_mu"] = s.M_mu
        if s.M_lambda is not None:
            out["M_lambda"] = s.M_lambda
        if s.rho_max is not None:
            out["rho_max"] = s.rho_max
        return out

    def initial_spec(self) -> mo.InitialDataSpec:
        i = self.cfg.initial_data
        fluid = None
        if isinstance(i.fluid, GaussianCfg):
            fluid = mo.GaussianBump(i.fluid.amplitude, i.fluid.width, i.fluid.slope, i.fluid.window)
        elif isinstance(i.fluid, UniformCfg):
            fluid = mo.UniformBump(i.fluid.height, i.fluid.radius, i.fluid.slope)
        elif isinstance(i.fluid, TabulatedFieldCfg):
            fluid = mo.TabulatedField(str(self.base_dir / i.fluid.path))
        parts = None
        p = i.particles
        if isinstance(p, MaxwellianCfg):
            parts = mo.MaxwellianParticles(p.mass, p.center, p.width, p.temperature, p.drift, p.slope)
        elif isinstance(p, MonoKineticCfg):
            parts = mo.MonoKineticParticles(p.mass, p.center, p.width, p.drift, p.slope, p.placement)
        elif isinstance(p, TabulatedParticlesCfg):
            parts = mo.TabulatedParticles(str(self.base_dir / p.path), p.mode)
        return mo.InitialDataSpec(tuple(i.domain), i.cells, fluid, parts, i.n_particles, i.seed,
                                  i.particle_volume)

    def sim_config(self) -> Optional[SimConfig]:
        s = self.cfg.sim
        if s is None:
            return None
        return SimConfig(s.cfl, s.t_end, s.max_steps, s.dt, s.dt_floor, s.stride,
                         s.blowup_threshold, s.drag_substeps, s.max_drag_substeps,
                         s.stop_on_blowup)


def load_scenario(path, overrides: Optional[list] = None, seed: Optional[int] = None) -> Scenario:
    """Read, override and validate a scenario file.

    Raises
    ------
    ScenarioError
        With ``line:col`` of the offending node and the dotted key.
    IoError
        If the file cannot be read.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise IoError(f"cannot read scenario {path}: {exc}") from exc
    return load_scenario_text(text, path, overrides, seed)


def load_scenario_text(text: str, path: Optional[Path] = None, overrides: Optional[list] = None,
                       seed: Optional[int] = None) -> Scenario:
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f"{mark.line + 1}:{mark.column + 1}" if mark is not None else ""
        raise ScenarioError(f"invalid YAML: {getattr(exc, 'problem', exc)}", location=loc) from exc
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a mapping with a 'model' section", location="1:1")
    for item in overrides or []:
        key, value = parse_override(item)
        _set_dotted(data, key, value)
    if seed is not None:
        data.setdefault("initial_data", {})
        if data["initial_data"] is None:
            data["initial_data"] = {}
        data["initial_data"]["seed"] = int(seed)
    try:
        cfg = ScenarioCfg.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        loc = tuple(x for x in err["loc"] if not (isinstance(x, str) and x in _UNION_TAGS))
        key = ".".join(str(x) for x in loc)
        node = _node_at(root, loc, err["type"] == "extra_forbidden") if root is not None else None
        msg = err["msg"]
        if err["type"] == "extra_forbidden":
            msg = f"unknown key '{loc[-1]}'"
        raise ScenarioError(f"{key}: {msg}", key=key, location=_mark(node)) from exc
    return Scenario(cfg, path, text)


_UNION_TAGS = {
    "power_law", "constant", "global_alignment", "local_alignment", "gaussian", "uniform",
    "tabulated", "maxwellian", "monokinetic",
}
