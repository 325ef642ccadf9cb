"""Exception types raised by latentclass."""


class LatentClassError(Exception):
    """Base class for all package errors."""


class SchemaError(LatentClassError, ValueError):
    """Invalid survey schema or schema/data mismatch."""


class DataError(LatentClassError, ValueError):
    """Malformed or unusable response data."""


class ImpossibleObservationError(LatentClassError, ArithmeticError):
    """A response pattern has zero probability under the model."""


class EmptyClassError(LatentClassError, ArithmeticError):
    """A latent class lost all posterior mass during EM."""


class IdentifiabilityError(LatentClassError, ValueError):
    """The requested model has more free parameters than allowed."""


class SelectionError(LatentClassError, RuntimeError):
    """Model selection had no admissible candidate."""


class DesignationError(LatentClassError, ValueError):
    """Optimist and pessimist classes could not be told apart."""
