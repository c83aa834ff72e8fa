# src/utils/errors.py


class QSSError(Exception):
    """Base class for simulator errors."""


class DimensionError(QSSError, ValueError):
    """A state or operator has the wrong dimension for the requested action."""


class NormError(QSSError, ValueError):
    """Amplitudes do not describe a unit-norm pure state."""


class ConfigurationError(QSSError, ValueError):
    """A protocol, encoder or attack parameter is unusable."""


class FeasibilityError(QSSError, ValueError):
    """Gram parameters violate the realisability constraints."""
