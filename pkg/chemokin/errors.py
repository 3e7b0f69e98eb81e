"""Exception hierarchy shared by every tier."""

from __future__ import annotations

from typing import Any


class ChemokinError(Exception):
    """Base class for all chemokin failures."""


class DomainError(ChemokinError, ValueError):
    """Input outside the mathematical domain of an operation."""


class EndpointError(DomainError):
    """Log-weight evaluated at or beyond a support endpoint."""


class SingularCaseError(DomainError):
    """The g = 1 degeneracy where a1 = 0 and a2 = 1 coincide with the pathway poles."""


class IntegrabilityError(ChemokinError, ArithmeticError):
    """An endpoint exponent is non-positive so the profile cannot be normalized."""


class MisuseError(ChemokinError, ValueError):
    """Operation called for a regime it does not describe."""


class ConfigurationError(ChemokinError, ValueError):
    """Numerical settings violate a stability or consistency guard."""


class SteadyStateTimeout(ChemokinError, TimeoutError):
    """Steady-state detection ran out of simulated time.

    The statistics gathered so far are kept on ``partial`` so callers can
    still report them.
    """

    def __init__(self, message: str, partial: Any = None) -> None:
        super().__init__(message)
        self.partial = partial
