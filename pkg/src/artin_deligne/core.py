import abc
from typing import Any, Dict, Protocol


class DocumentError(ValueError):
    """Malformed graph, complex or word document."""


class ClassificationError(ValueError):
    """Input graph is outside the class an operation requires."""


class GeometryError(ValueError):
    """Inconsistent or out-of-domain geometric data."""


class ConfigError(ValueError):
    """Invalid run configuration."""


class ConvergenceError(RuntimeError):
    """A numeric search did not converge within its step budget."""


class BudgetExceededError(RuntimeError):
    """A combinatorial enumeration exceeded its documented cap."""


class Certificate(Protocol):
    """Protocol shared by every verification record that enters a report."""

    @property
    @abc.abstractmethod
    def verified(self) -> bool:
        """
        Whether the certified property holds.

        Returns:
            True when the check passed, False when it was refuted.
        """
        ...

    @abc.abstractmethod
    def to_record(self) -> Dict[str, Any]:
        """
        Serializes the certificate for the JSON report.

        Returns:
            A dictionary of plain JSON types.
        """
        ...
