"""Exception hierarchy shared by the planner, evaluators and CLI."""

from __future__ import annotations


class OdometerError(Exception):
    """Base class for every error raised by this package."""


class InvalidSequence(OdometerError, ValueError):
    """A base sequence violates one of its structural invariants."""


class NotSublinear(OdometerError):
    """The weight function does not make the ratio omega(n)/n vanish."""


class CapExceeded(OdometerError):
    """A search or enumeration ran past its configured cap."""


class NoFillerPrime(OdometerError):
    """A target with only finite exponents ran out of primes before the budgets were met."""


class OmegaOverflow(OdometerError, OverflowError):
    """omega(n) is not representable as a finite float."""


class DepthError(OdometerError, ValueError):
    """The plan is too shallow for the requested level."""
