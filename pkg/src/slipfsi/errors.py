"""Exception hierarchy shared by all slipfsi modules."""


class SlipFsiError(Exception):
    """Base class for all errors raised by this package."""


class InvalidPolygon(SlipFsiError):
    """Reference polygon violates a structural invariant."""


class NonRectifiablePolygon(SlipFsiError):
    """Polygon cannot be covered by a conforming structured quad mesh."""


class MissingElasticFace(SlipFsiError):
    """Mesh carries no elastic-tagged boundary edge."""


class ClampViolatedInput(SlipFsiError):
    """Interface field does not satisfy the clamped end conditions."""


class MeshMismatch(SlipFsiError):
    """Operands were built on different meshes."""


class DegenerateTangent(SlipFsiError):
    """Interface stretch factor vanished at a quadrature point."""


class ZeroDeformation(SlipFsiError):
    """Symmetrized gradient is numerically zero; ratio undefined."""


class SingularOperator(SlipFsiError):
    """Assembled operator failed the positive-definiteness check."""


class SolverFailure(SlipFsiError):
    """Linear solve failed or produced an unacceptable residual."""


class InadmissibleDomain(SlipFsiError):
    """Jacobian of the domain map dropped below the configured floor."""


class AssemblyShapeMismatch(SlipFsiError):
    """Field arrays passed to assembly have inconsistent shapes."""


class IncompatibleInitialData(SlipFsiError):
    """Initial data failed a compatibility check.

    ``reasons`` holds machine-readable codes, one per failed condition:
    ``divergence``, ``normal_trace``, ``clamp``, ``eta0_guard``,
    ``inadmissible_map``.
    """

    def __init__(self, reasons, message=None):
        self.reasons = tuple(reasons)
        super().__init__(message or f"incompatible initial data: {', '.join(self.reasons)}")


class ShiftTooLarge(SlipFsiError):
    """Requested time shift exceeds the trajectory duration."""


class DegenerateFit(SlipFsiError):
    """All shift values vanish; a power-law fit is undefined."""


class ParseError(SlipFsiError):
    """Configuration file is syntactically invalid."""

    def __init__(self, line, key, reason):
        self.line = line
        self.key = key
        self.reason = reason
        super().__init__(f"line {line}: {key!r}: {reason}")


class ValidationError(SlipFsiError):
    """Configuration value violates a constraint."""

    def __init__(self, key, constraint):
        self.key = key
        self.constraint = constraint
        super().__init__(f"{key!r}: {constraint}")
