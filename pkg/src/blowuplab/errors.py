"""Exception hierarchy shared by every blowuplab module."""

from __future__ import annotations


class BlowupLabError(Exception):
    """Base class for all library errors."""


class InvalidParams(BlowupLabError, ValueError):
    pass


class NonFiniteField(BlowupLabError, ValueError):
    pass


class NonFiniteParticle(BlowupLabError, ValueError):
    pass


class BadSpec(BlowupLabError, ValueError):
    pass


class IoError(BlowupLabError, OSError):
    pass


class HypothesisViolated(BlowupLabError):
    """A structural hypothesis on drag, collisions or viscosity failed.

    ``witness`` holds the sample point that violates it.
    """

    def __init__(self, name: str, witness: dict, message: str = ""):
        self.name = name
        self.witness = witness
        super().__init__(message or f"hypothesis {name} violated at {witness}")


class RegimeError(BlowupLabError, ValueError):
    pass


class MissingInput(BlowupLabError, ValueError):
    pass


class NoCrossing(BlowupLabError):
    """The necessary inequality never fails on the searched horizon."""

    def __init__(self, message: str, horizon: float):
        self.horizon = horizon
        super().__init__(message)


class StepTooLarge(BlowupLabError):
    pass


class CflViolation(BlowupLabError):
    pass


class NegativeDensity(BlowupLabError):
    def __init__(self, t: float, cell: int, value: float):
        self.t = t
        self.cell = cell
        self.value = value
        super().__init__(f"negative density {value:.3e} in cell {cell} at t={t:.6g}")


class IdentityViolation(BlowupLabError):
    def __init__(self, name: str, time: float, residual: float, tolerance: float):
        self.name = name
        self.time = time
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"identity '{name}' violated at t={time:.6g}: "
            f"residual {residual:.3e} > tolerance {tolerance:.3e}"
        )


class MissingManifest(BlowupLabError, FileNotFoundError):
    pass


class ScenarioError(BlowupLabError, ValueError):
    """Scenario file failed schema validation; ``location`` is ``line:col``."""

    def __init__(self, message: str, key: str = "", location: str = ""):
        self.key = key
        self.location = location
        prefix = f"{location}: " if location else ""
        super().__init__(f"{prefix}{message}")
