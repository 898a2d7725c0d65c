class SvyRsqError(Exception):
    """Base class for every error raised by svyrsq."""


class PreconditionError(SvyRsqError, ValueError):
    """Inputs violate a documented precondition."""


class SchemaError(PreconditionError):
    """A CSV file, formula or column schema is malformed."""


class InfeasibleDesignError(PreconditionError):
    """A sampling design cannot be drawn from the given population."""


class FitError(SvyRsqError):
    """A model could not be fitted."""


class SingularSystemError(FitError):
    """The design matrix or information matrix is numerically singular."""


class SeparationError(FitError):
    """The linear predictor separates the binary outcome, so the MLE is infinite."""


class DegenerateResponseError(FitError):
    """The response carries no variation (all 0, all 1, or constant)."""


class NotConvergedError(FitError):
    """A statistic was requested from a fit that did not converge."""


class FamilyNotSupportedError(SvyRsqError):
    """The operation is undefined for the fit's family."""


class UndefinedRatioError(SvyRsqError):
    """A ratio of log-likelihood summaries has a zero denominator."""


class DataNotFoundError(SvyRsqError):
    """Bundled data could not be located."""
