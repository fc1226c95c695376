"""
Exception hierarchy for the simulation engine
"""

from typing import Optional


class FanoError(ValueError):
    """Base class for physics-level failures raised by the engine."""


class ZeroCrossingError(FanoError):
    """The Green function vanished, so Ġ/G and every coefficient built on it diverge."""

    def __init__(self, time: float, magnitude: Optional[float] = None):
        self.time = float(time)
        self.magnitude = magnitude
        detail = f" (|G| = {magnitude:.3e})" if magnitude is not None else ""
        super().__init__(f"Green function zero crossing at t = {self.time:.6g}{detail}")


class PositivityError(FanoError):
    """A Gaussian state violated its uncertainty bound."""

    def __init__(self, time: Optional[float], nu: float):
        self.time = time
        self.nu = float(nu)
        where = f" at t = {time:.6g}" if time is not None else ""
        super().__init__(f"State positivity violated{where}: symplectic eigenvalue {nu:.12g} < 1/2")


class UnsupportedVariantError(FanoError):
    """The requested operation is not defined for this spectral density or input."""


class RedirectError(FanoError):
    """The input must be handled by a different solver."""

    def __init__(self, message: str, target: str):
        self.target = target
        super().__init__(f"{message}; use {target}")


class QuadratureError(FanoError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, estimate: float):
        self.estimate = float(estimate)
        super().__init__(f"{message} (error estimate {estimate:.3e})")


class StepInstabilityError(FanoError):
    """Time stepping diverged even after repeated step halving."""
