"""Exception taxonomy shared across the package.

Three failure classes are distinguished so that callers (and the command
line) can react differently to user error, to a broken structure guarantee,
and to numerical blow-up.
"""
from __future__ import annotations


class TumorEtdError(Exception):
    """Base class for all package errors."""


class ConfigurationError(TumorEtdError):
    """Invalid parameters, grids, shapes, or configuration input."""


class NumericalFailure(TumorEtdError):
    """A stage of the integrator produced NaN or Inf values."""

    def __init__(self, message: str, *, stage: str | None = None,
                 step: int | None = None, t: float | None = None):
        super().__init__(message)
        self.stage = stage
        self.step = step
        self.t = t

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        where = []
        if self.stage is not None:
            where.append(f"stage={self.stage}")
        if self.step is not None:
            where.append(f"step={self.step}")
        if self.t is not None:
            where.append(f"t={self.t:g}")
        base = super().__str__()
        return f"{base} ({', '.join(where)})" if where else base


class StructureViolation(TumorEtdError):
    """A bound or maximum-bound-principle invariant was breached beyond slack.

    ``violations`` holds ``(check, value, bound)`` triples describing every
    breached invariant of the offending state.
    """

    def __init__(self, message: str, *,
                 violations: list[tuple[str, float, float]] | None = None,
                 step: int | None = None, t: float | None = None):
        super().__init__(message)
        self.violations = violations or []
        self.step = step
        self.t = t

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        base = super().__str__()
        parts = [f"{name}: value={value:.17g} bound={bound:.17g}"
                 for name, value, bound in self.violations]
        if self.step is not None:
            parts.append(f"step={self.step}")
        if self.t is not None:
            parts.append(f"t={self.t:g}")
        return f"{base} [{'; '.join(parts)}]" if parts else base
