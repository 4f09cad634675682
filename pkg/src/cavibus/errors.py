"""Exception and warning types shared across the package."""


class SpaceMismatchError(ValueError):
    """Operands live on different Hilbert spaces or have the wrong shape."""


class TruncationError(RuntimeError):
    """A cavity operation leaked more norm past the Fock cutoff than allowed."""


class SingularDetuningError(ValueError):
    """delta = 0: the closed-form loop formulas are undefined."""


class IntegrationError(RuntimeError):
    """A time-ordered integration failed its convergence or sanity checks."""


class TruncationWarning(UserWarning):
    """Leaked norm past the Fock cutoff exceeded the configured threshold."""


class AdvisoryWarning(UserWarning):
    """A physical-regime assumption (charging regime, Lamb-Dicke, ...) looks violated."""
