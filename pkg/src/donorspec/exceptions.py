"""Exception hierarchy.

Every error raised by the package derives from :class:`DonorSpecError`, and the
CLI maps the subclasses onto process exit codes.
"""


class DonorSpecError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(DonorSpecError, ValueError):
    """A physical or numerical parameter is outside its valid domain."""


class UnsupportedGeometryError(DonorSpecError, ValueError):
    pass


class DegenerateFieldError(DonorSpecError, ValueError):
    """Raised when an operation needs resolved spin branches but B = 0."""


class UnknownSpeciesError(DonorSpecError, KeyError):
    pass


class EmptyOverlapError(DonorSpecError, ValueError):
    pass


class SingularGeneratorError(DonorSpecError, ArithmeticError):
    """The Liouvillian has no unique steady state."""


class FewerMaximaError(DonorSpecError, ValueError):
    pass


class DegenerateDataError(DonorSpecError, ValueError):
    pass


class NonFiniteModelError(DonorSpecError, ArithmeticError):
    pass


class SpectrumParseError(DonorSpecError, ValueError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
        if line is not None:
            where = f"{where}:{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class NonMonotonicAxisError(SpectrumParseError):
    pass
