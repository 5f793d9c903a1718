"""Typed errors raised by the allocation engine.

Solvers raise these instead of returning sentinel values; the scheme
runner catches the ``InfeasibleError`` family and folds it into an
infeasible report.
"""
from __future__ import annotations


class InvalidInstanceError(ValueError):
    """Instance is structurally broken (empty device list, length mismatch, bad values)."""


class InfeasibleError(Exception):
    """Base class for 'this instance cannot be scheduled' conditions."""


class ScheduleInfeasibleError(InfeasibleError):
    """Per-round time budget is exhausted (local-training window would be <= 0)."""


class EnergyInfeasibleError(InfeasibleError):
    """A device cannot afford any uplink transmit power.

    Carries the index of the first offending device.
    """

    def __init__(self, device_index: int, message: str | None = None):
        self.device_index = int(device_index)
        super().__init__(message or f"device {device_index} has no positive uplink power budget")


class SynthesisInfeasibleError(InfeasibleError):
    """Even zero synthetic data violates the compute/energy constraints."""


class RateOverflowError(ArithmeticError):
    """Internal signal: a candidate rate would overflow 2**x; the bisection
    treats the candidate as infeasible."""
