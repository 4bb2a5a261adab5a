"""Exception types raised across the package."""


class UskError(Exception):
    """Base class for all package errors."""


class DimensionError(UskError, ValueError):
    """Shapes or antenna counts are inconsistent."""


class RankError(UskError, ValueError):
    """A matrix is numerically rank deficient."""


class DomainError(UskError, ValueError):
    """An argument lies outside the domain of the operation."""


class ResourceError(UskError, RuntimeError):
    """An enumeration would exceed its node budget."""
