import logging

import numpy as np
from scipy import linalg
from scipy.special import expit, logit

from svyrsq.utils import (
    Dataset, FitResult, Family, SingularSystemError,
    SeparationError, DegenerateResponseError,
)
from .solver import SolverOptions, DEFAULT_OPTIONS, check_coef, check_rank

logger = logging.getLogger(__name__)


def inverse_logit(eta, clamp: float = DEFAULT_OPTIONS.eta_clamp) -> np.ndarray:
    return expit(np.clip(eta, -clamp, clamp))


def _log_probs(eta, clamp):
    """log(mu) and log(1 - mu) for the clamped linear predictor."""
    eta = np.clip(eta, -clamp, clamp)
    return -np.logaddexp(0.0, -eta), -np.logaddexp(0.0, eta)


def logistic_loglik(data: Dataset, coef, clamp: float = DEFAULT_OPTIONS.eta_clamp) -> float:
    coef = check_coef(data, coef)
    log_mu, log_1mmu = _log_probs(data.design @ coef, clamp)
    return float(np.sum(data.weights * (data.y * log_mu + (1.0 - data.y) * log_1mmu)))


def logistic_score(data: Dataset, coef, clamp: float = DEFAULT_OPTIONS.eta_clamp) -> np.ndarray:
    coef = check_coef(data, coef)
    A = data.design
    mu = inverse_logit(A @ coef, clamp)
    return A.T @ (data.weights * (data.y - mu))


def _check_binary(data: Dataset):
    data.check_family(Family.logistic)
    cases = float(np.sum(data.weights * data.y))
    if cases <= 0 or cases >= data.weight_sum:
        raise DegenerateResponseError("Logistic fit needs both outcome classes with positive weight; "
                                      f"weighted mean of y is {cases / data.weight_sum:g}.")
    return cases


def fit_logistic_null(data: Dataset) -> FitResult:
    """Intercept-only logistic fit in closed form: intercept = logit(weighted mean of y)."""
    cases = _check_binary(data)
    ybar = cases / data.weight_sum
    null_data = data.intercept_only()
    coef = np.array([logit(ybar)])
    loglik = logistic_loglik(null_data, coef)
    score = logistic_score(null_data, coef)
    return FitResult(
        family=Family.logistic, coef=coef, loglik=loglik, null_loglik=loglik,
        n=data.n, weight_sum=data.weight_sum, converged=True, iterations=0,
        max_score_norm=float(np.max(np.abs(score))), names=null_data.coef_names,
    )


def _separated(data: Dataset, eta: np.ndarray, coef: np.ndarray, opts: SolverOptions) -> bool:
    signed = np.where(data.y == 1, eta, -eta)
    if np.all(signed > opts.separation_eta):
        return True
    if np.all(np.abs(eta[data.y == 1]) > opts.separation_eta):
        return True
    return data.p > 0 and np.linalg.norm(coef[1:]) > opts.separation_coef_norm


def _quasi_separated(data: Dataset, eta: np.ndarray, info: np.ndarray, opts: SolverOptions) -> bool:
    """Checks a converged fit for coefficients pushed to the boundary.

    Standard errors come from the information matrix with the weights rescaled to sum
    to n, so the check does not depend on the scale of the weights.
    """
    if np.any(np.abs(eta) >= opts.separation_eta):
        return True
    if data.p == 0:
        return False
    try:
        cov = linalg.inv(info * (data.n / data.weight_sum))
    except (linalg.LinAlgError, ValueError):
        return True
    se = np.sqrt(np.abs(np.diag(cov)))
    return bool(np.max(se) > opts.separation_se)


def fit_logistic(data: Dataset, opts: SolverOptions = DEFAULT_OPTIONS) -> FitResult:
    """Maximise the weighted logistic loglikelihood by safeguarded Newton-Raphson.

    Converged means the per-unit-weight score has infinity norm below ``opts.tol``
    and the relative loglik change of the last step is below ``opts.tol``. An
    exhausted iteration budget returns a result flagged ``converged=False``.
    """
    null_fit = fit_logistic_null(data)
    A = data.design
    check_rank(A, opts.condition_limit)

    w, y = data.weights, data.y
    wsum = data.weight_sum
    coef = np.zeros(data.p + 1)
    coef[0] = null_fit.coef[0]
    loglik = logistic_loglik(data, coef, opts.eta_clamp)

    converged = False
    rel_change = np.inf
    iterations = 0
    while True:
        eta = A @ coef
        mu = inverse_logit(eta, opts.eta_clamp)
        score = A.T @ (w * (y - mu))
        score_norm = float(np.max(np.abs(score)))
        logger.debug("iter %d: loglik=%.12g |score|=%.3g", iterations, loglik, score_norm)

        if score_norm / wsum < opts.tol and rel_change < opts.tol:
            info = A.T @ (A * (w * mu * (1.0 - mu))[:, None])
            if _quasi_separated(data, eta, info, opts):
                raise SeparationError("Quasi-complete separation detected: the fit converged with fitted "
                                      "probabilities at 0 or 1 or with unbounded standard errors.")
            converged = True
            break
        if _separated(data, eta, coef, opts):
            raise SeparationError("Complete separation detected: the fitted linear predictor "
                                  "classifies every row perfectly or the slopes diverge.")
        if iterations >= opts.max_iter:
            break

        info = A.T @ (A * (w * mu * (1.0 - mu))[:, None])
        try:
            delta = linalg.solve(info, score, assume_a="pos")
        except (linalg.LinAlgError, ValueError) as e:
            raise SingularSystemError(f"Information matrix is singular at iteration {iterations}: {e}") from e

        step = 1.0
        for _ in range(opts.max_halvings + 1):
            candidate = coef + step * delta
            new_loglik = logistic_loglik(data, candidate, opts.eta_clamp)
            if new_loglik >= loglik - opts.loglik_slack * abs(loglik):
                break
            step /= 2.0
        else:
            # no ascent available beyond rounding
            candidate, new_loglik = coef, loglik

        rel_change = abs(new_loglik - loglik) / (abs(loglik) + opts.tol)
        coef, loglik = candidate, new_loglik
        iterations += 1

    if not converged:
        logger.warning("fit_logistic did not converge in %d iterations (|score|/N=%.3g, rel change=%.3g)",
                       opts.max_iter, score_norm / wsum, rel_change)

    return FitResult(
        family=Family.logistic, coef=coef, loglik=loglik, null_loglik=null_fit.loglik,
        n=data.n, weight_sum=wsum, converged=converged, iterations=iterations,
        max_score_norm=score_norm, names=data.coef_names,
    )
