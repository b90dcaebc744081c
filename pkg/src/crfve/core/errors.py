"""
CRFVE Edge Schwarz - Errors
===========================

Exception hierarchy shared by the core modules and the experiment driver.

All errors derive from ``CRFVEError``. Parameter errors also derive from
``ValueError`` and factorization errors from ``RuntimeError`` so that callers
using the builtin conventions keep working.
"""

from typing import Optional


class CRFVEError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(CRFVEError, ValueError):
    """A size, ratio, tolerance or coefficient parameter is out of range."""


class SingularGeometryError(CRFVEError, ValueError):
    """A triangle has (numerically) zero area."""


class MatrixNotPSDError(CRFVEError, ValueError):
    """An energy quadratic form came out negative beyond round-off."""


class InsufficientDataError(CRFVEError, ValueError):
    """Too few Krylov steps to form the requested estimate."""


class FactorizationError(CRFVEError, RuntimeError):
    """
    A direct factorization of a sub-block failed.

    Args:
        label: Name of the block (subdomain, interface or coarse space)
        message: Description of the failure
    """

    def __init__(self, label: str, message: str):
        self.label = label
        super().__init__(f"{label}: {message}")


class SchwarzSetupError(FactorizationError):
    """A subspace matrix of the Schwarz decomposition is singular."""


class StageError(CRFVEError):
    """
    Failure of one stage of the experiment pipeline.

    Args:
        stage: One of 'mesh', 'assemble', 'setup', 'solve'
        cause: The original exception (also chained via ``raise ... from``)
    """

    def __init__(self, stage: str, cause: Optional[BaseException] = None):
        self.stage = stage
        self.cause = cause
        detail = f": {cause}" if cause is not None else ""
        super().__init__(f"stage '{stage}' failed{detail}")
