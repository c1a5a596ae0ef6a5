"""Exception hierarchy. The CLI maps these onto exit codes."""


class QricError(Exception):
    """Base class for all package errors."""


class LabelError(QricError):
    """Unknown, duplicate, or non-bijective subsystem labels."""


class DimensionError(QricError):
    """Qudit-dimension or operator-shape mismatch."""


class NormalizationError(QricError):
    """State not normalized / not a valid density operator."""


class SizeGuardError(QricError):
    """Requested object exceeds the dense-representation size guard."""


class ConstraintError(QricError):
    """Channel table violates the residue constraints or weight rules."""


class ProtocolError(QricError):
    """Protocol precondition failed (registry mismatch, bad outcome, ...)."""
