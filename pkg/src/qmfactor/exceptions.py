class QmFactorError(Exception):
    """Base class for errors raised by qmfactor."""


class DomainError(QmFactorError, ValueError):
    """Argument outside the domain where a formula or routine is defined."""


class ResourceError(QmFactorError):
    """Request exceeds a configured size or ceiling."""


class CheckFailure(QmFactorError):
    """An internal consistency check did not hold."""


class NoRootError(QmFactorError):
    """No sign change found in the searched bracket."""
