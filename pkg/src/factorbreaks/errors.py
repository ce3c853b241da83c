"""Exception types raised across the package.

Every error raised deliberately by this library derives from
``FactorBreaksError`` so callers can catch numerical/data failures without
swallowing programming errors.
"""


class FactorBreaksError(Exception):
    """Base class for all library errors."""


class ShapeError(FactorBreaksError):
    """Array dimensions are inconsistent with the requested operation."""


class DomainError(FactorBreaksError):
    """A value lies outside the mathematical domain of the operation."""


class ParseError(FactorBreaksError):
    """Malformed input file (ragged rows, bad header, ...)."""


class InvalidTransformCode(FactorBreaksError):
    """Transformation code outside the supported set {1..7}."""


class InsufficientData(FactorBreaksError):
    """Too few observations to carry out the requested operation."""


class UnbalancedPanel(FactorBreaksError):
    """Missing or non-finite entries remain after transformation/trimming."""


class DegenerateSeries(FactorBreaksError):
    """A series has zero variance and cannot be standardized."""


class NumericalError(FactorBreaksError):
    """A numerical routine failed to converge or produced invalid output."""


class RankDeficient(NumericalError):
    """A matrix that must be full rank is numerically rank deficient."""


class BandwidthError(FactorBreaksError):
    """HAC bandwidth incompatible with the sample size."""


class BootstrapUnstable(FactorBreaksError):
    """Too many bootstrap replicates failed to produce an estimate."""


class MappingError(FactorBreaksError):
    """A category mapping does not match the panel's series."""
