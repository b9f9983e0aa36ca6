"""Exception hierarchy shared by all quditworks modules."""


class QuditError(ValueError):
    """Base class for every error raised by this package."""


class LabelError(QuditError):
    """Unknown, duplicated or mismatched subsystem labels."""


class ShapeError(QuditError):
    """Dimensions of operands do not agree."""


class NormalizationError(QuditError):
    """A state or coefficient array is not normalized."""


class InvalidStateError(QuditError):
    """A matrix violates the density operator invariants."""


class BipartitionError(QuditError):
    """A bipartite operation was requested without a usable bipartition."""


class BellIndexError(QuditError, IndexError):
    """Bell or Weyl index outside ``[0, d)``."""


class MeasurementError(QuditError):
    """Post-measurement state requested for a zero-probability outcome."""


class ParameterError(QuditError):
    """Physical parameter outside its admissible range."""


class BasisError(QuditError):
    """Encoding basis is inconsistent or not orthonormal."""
