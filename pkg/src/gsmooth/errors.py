"""Exception hierarchy.

Every failure mode that callers are expected to handle gets its own class so
the CLI can map it to a stable exit code and a machine-parsable reason prefix.
"""


class GsmoothError(Exception):
    """Base class for all library errors."""

    #: short kebab-case tag used in CLI error lines
    reason = "error"


class DomainError(GsmoothError):
    """Evaluation point outside the unit-square parameter domain."""

    reason = "domain"


class ContractError(GsmoothError):
    """Arguments violate an operation's preconditions (shape, order, range)."""

    reason = "contract"


class UnsupportedOrderError(GsmoothError):
    """Requested jet order exceeds the supported maximum."""

    reason = "unsupported-order"


class SingularJacobianError(GsmoothError):
    """A Jacobian that must be invertible is (numerically) singular."""

    reason = "singular-jacobian"

    def __init__(self, message, det=None):
        super().__init__(message)
        self.det = det


class InversionError(GsmoothError):
    """Newton inversion of a geometry map failed to converge."""

    reason = "inversion-failure"

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class FoldError(GsmoothError):
    """Geometry rejected: Jacobian determinant changes sign (folded patch)."""

    reason = "fold"


class OverlapError(GsmoothError):
    """Geometry rejected: two patch images overlap."""

    reason = "overlap"


class DegenerateSpaceError(GsmoothError):
    """Smoothness constraint system left no solutions (assembly bug: the
    constants always satisfy the constraints)."""

    reason = "degenerate-space"


class SamplingError(GsmoothError):
    """A physical-space probe point left all available patch images."""

    reason = "sampling"


class FileFormatError(GsmoothError):
    """Complex file missing, malformed, or of an unknown version."""

    reason = "file-format"
