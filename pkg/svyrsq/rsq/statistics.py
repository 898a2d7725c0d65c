"""Cox-Snell and Nagelkerke pseudo-R2, classical (divisor n) and design-based (divisor sum of weights).

Design-based versions replace the likelihood with the weighted pseudolikelihood and n
with N-hat = sum of the weights, in both the Cox-Snell exponent and the Nagelkerke
rescaling, so they are invariant to rescaling the weights and equal the classical
values when every weight is 1.
"""
import logging
import math

from svyrsq.utils import (
    FitResult, RsqSummary, Family, PreconditionError, NotConvergedError, FamilyNotSupportedError,
)

logger = logging.getLogger(__name__)

# fitted minus null loglik more negative than this is a nesting failure, not rounding
NESTING_TOL = 1e-8


def loglik_ratio(fit: FitResult) -> float:
    """Fitted minus null (weighted) loglikelihood, clamped at 0 for rounding noise."""
    diff = fit.loglik - fit.null_loglik
    if diff < -NESTING_TOL * max(1.0, abs(fit.null_loglik)):
        raise PreconditionError(f"Fitted loglik {fit.loglik} is below the null loglik {fit.null_loglik}.")
    return max(diff, 0.0)


def _require_converged(fit: FitResult):
    if not fit.converged:
        raise NotConvergedError(f"Refusing pseudo-R2 for an unconverged fit ({fit.iterations} iterations).")


def _require_logistic(fit: FitResult):
    if fit.family != Family.logistic:
        raise FamilyNotSupportedError(f"Nagelkerke rescaling needs a bounded likelihood; "
                                      f"`{fit.family.value}` fits are not supported.")


def _cox_snell(fit: FitResult, size: float) -> float:
    _require_converged(fit)
    if not size > 0:
        raise PreconditionError("Sample size / weight sum must be positive.")
    return -math.expm1(-2.0 * loglik_ratio(fit) / size)


def max_cox_snell(fit: FitResult, design: bool = False) -> float:
    """Largest attainable Cox-Snell value, 1 - exp(2 l(0) / n) (n replaced by N-hat if design)."""
    _require_logistic(fit)
    size = fit.weight_sum if design else fit.n
    return -math.expm1(2.0 * fit.null_loglik / size)


def cox_snell(fit: FitResult) -> float:
    return _cox_snell(fit, fit.n)


def nagelkerke(fit: FitResult) -> float:
    _require_logistic(fit)
    return cox_snell(fit) / max_cox_snell(fit)


def design_cox_snell(fit: FitResult) -> float:
    return _cox_snell(fit, fit.weight_sum)


def design_nagelkerke(fit: FitResult) -> float:
    _require_logistic(fit)
    return design_cox_snell(fit) / max_cox_snell(fit, design=True)


def rsq_summary(fit: FitResult) -> RsqSummary:
    """All four statistics for one fit; Nagelkerke values are NaN for Gaussian fits."""
    bounded = fit.family == Family.logistic
    return RsqSummary(
        cox_snell=cox_snell(fit),
        nagelkerke=nagelkerke(fit) if bounded else math.nan,
        design_cox_snell=design_cox_snell(fit),
        design_nagelkerke=design_nagelkerke(fit) if bounded else math.nan,
        loglik_ratio=loglik_ratio(fit),
        n=fit.n,
        weight_sum=fit.weight_sum,
    )
