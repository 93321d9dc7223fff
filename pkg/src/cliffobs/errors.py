"""Exception types shared across the package."""


class AlgebraError(ValueError):
    """Base class for invalid multivector / metric operations."""


class DimensionError(AlgebraError):
    pass


class ModeError(AlgebraError, TypeError):
    """Mixing exact-rational and float scalars, or using the wrong mode."""


class GradeError(AlgebraError):
    pass


class MetricError(AlgebraError):
    """Metric is not symmetric positive definite, or a map is singular."""


class RingValidationError(ValueError):
    """A cohomology ring presentation violates a structural axiom."""


class DegenerateFormError(RingValidationError):
    """Intersection form has a kernel; impossible for a closed oriented manifold."""


class PresetParseError(ValueError):
    def __init__(self, message, expr, pos):
        self.expr = expr
        self.pos = pos
        pointer = " " * pos + "^"
        super().__init__(f"{message} at position {pos}\n  {expr}\n  {pointer}")


class SearchRefused(RuntimeError):
    """Embedding search refused because an exact obstruction already fires."""
