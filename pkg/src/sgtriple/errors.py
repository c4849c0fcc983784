"""Exception hierarchy shared by all modules."""


class SgTripleError(Exception):
    pass


class DomainError(SgTripleError, ValueError):
    pass


class PoleError(DomainError):
    pass


class SingularArgumentError(DomainError):
    pass


class WordTooDeepError(DomainError):
    """A cell word is longer than the level of the data."""


class ResolutionError(SgTripleError):
    pass


class RegimeError(SgTripleError):
    """Parameters outside the regime where an operation is meaningful."""


class ResourceError(SgTripleError):
    pass


class RepresentationError(SgTripleError, ValueError):
    pass


class ZeroEnergyError(SgTripleError, ValueError):
    pass


class NonInvertibleError(SgTripleError, ValueError):
    pass


class AliasingError(SgTripleError):
    pass


class NonStabilizedError(SgTripleError):
    pass


class SolverError(SgTripleError):
    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class ParseError(SgTripleError, ValueError):
    pass
