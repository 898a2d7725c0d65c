import logging

import numpy as np
from scipy import linalg

from svyrsq.utils import (
    Dataset, FitResult, Family, PreconditionError, SingularSystemError, DegenerateResponseError,
)
from .solver import SolverOptions, DEFAULT_OPTIONS, check_coef, check_rank

logger = logging.getLogger(__name__)

# RSS/TSS below this is treated as an exact fit, where the MLE variance is zero
EXACT_FIT_RATIO = 1e-20


def gaussian_loglik(data: Dataset, coef, sigma2: float) -> float:
    """Exact weighted Gaussian loglikelihood -1/2 sum w [log(2 pi s2) + r^2 / s2]."""
    coef = check_coef(data, coef)
    if not sigma2 > 0:
        raise PreconditionError(f"sigma2 must be positive, got {sigma2}.")
    resid = data.y - data.design @ coef
    return float(-0.5 * np.sum(data.weights * (np.log(2 * np.pi * sigma2) + resid ** 2 / sigma2)))


def gaussian_score(data: Dataset, coef, sigma2: float = 1.0) -> np.ndarray:
    """Gradient of gaussian_loglik in the regression coefficients."""
    coef = check_coef(data, coef)
    A = data.design
    return A.T @ (data.weights * (data.y - A @ coef)) / sigma2


def _weighted_mean_and_variance(data: Dataset):
    mean = float(np.sum(data.weights * data.y) / data.weight_sum)
    variance = float(np.sum(data.weights * (data.y - mean) ** 2) / data.weight_sum)
    return mean, variance


def fit_gaussian_null(data: Dataset) -> FitResult:
    """Intercept-only Gaussian MLE: weighted mean and weighted MLE variance."""
    mean, variance = _weighted_mean_and_variance(data)
    if not variance > 0:
        raise DegenerateResponseError("Gaussian null model needs a non-constant response.")
    null_data = data.intercept_only()
    coef = np.array([mean])
    loglik = gaussian_loglik(null_data, coef, variance)
    return FitResult(
        family=Family.gaussian_mle, coef=coef, loglik=loglik, null_loglik=loglik,
        n=data.n, weight_sum=data.weight_sum, converged=True, iterations=0,
        max_score_norm=float(np.max(np.abs(gaussian_score(null_data, coef, variance)))),
        names=null_data.coef_names, scale=variance, null_scale=variance,
    )


def fit_gaussian_mle(data: Dataset, opts: SolverOptions = DEFAULT_OPTIONS) -> FitResult:
    """Weighted least squares with the variance also maximised (MLE, divisor sum of weights)."""
    if data.n <= data.p + 1:
        raise SingularSystemError(f"Gaussian MLE needs n > p+1 rows, got n={data.n}, p={data.p}.")
    A = data.design
    check_rank(A, opts.condition_limit)
    null_fit = fit_gaussian_null(data)

    sqrt_w = np.sqrt(data.weights)
    coef = linalg.lstsq(A * sqrt_w[:, None], data.y * sqrt_w)[0]
    resid = data.y - A @ coef
    rss = float(np.sum(data.weights * resid ** 2))
    if rss <= EXACT_FIT_RATIO * null_fit.scale * data.weight_sum:
        raise SingularSystemError("Exact fit: the MLE variance is zero and the loglikelihood is unbounded.")
    sigma2 = rss / data.weight_sum

    score = gaussian_score(data, coef, sigma2)
    return FitResult(
        family=Family.gaussian_mle, coef=coef, loglik=gaussian_loglik(data, coef, sigma2),
        null_loglik=null_fit.loglik, n=data.n, weight_sum=data.weight_sum, converged=True,
        iterations=1, max_score_norm=float(np.max(np.abs(score))), names=data.coef_names,
        scale=sigma2, null_scale=null_fit.scale,
    )
