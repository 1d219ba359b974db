"""Exception hierarchy shared across the package."""


class SolitonChainError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(SolitonChainError, ValueError):
    """Invalid argument values (bad couplings, out-of-range indices, ...)."""


class CapacityError(SolitonChainError):
    """An operation would populate states above the excitation cap of the basis."""


class BasisMismatchError(SolitonChainError):
    """Two objects built over different bases were combined."""


class DomainError(SolitonChainError, ValueError):
    """An input violates a type invariant beyond tolerance (e.g. a non-density matrix)."""


class NumericalError(SolitonChainError):
    """A numerical routine failed (non-convergence, too many aborted realizations)."""


class ConfigError(SolitonChainError, ValueError):
    """Malformed or inconsistent run configuration."""
