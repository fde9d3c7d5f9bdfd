"""Exception types shared across the package."""


class WlpcheckError(Exception):
    """Base class for all package errors."""


class InvalidModulusError(WlpcheckError, ValueError):
    """A modular rank was requested for a modulus that is not prime."""


class InvalidArgumentError(WlpcheckError, ValueError):
    """An argument lies outside an operation's documented domain."""


class DegreeUnderflowError(WlpcheckError, ValueError):
    """A derivative action would land in negative degree."""


class NotArtinianError(WlpcheckError, ValueError):
    """A quotient did not reach dimension zero within the guard bound."""


class InconsistencyError(WlpcheckError, RuntimeError):
    """Two computations that must agree (an oracle bound and an observed
    rank, or the two rank paths of a multiplication map) disagree."""
