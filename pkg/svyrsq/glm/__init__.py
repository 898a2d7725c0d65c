from svyrsq.utils import Dataset, FitResult, Family

from .solver import SolverOptions, DEFAULT_OPTIONS, check_rank
from .logistic import inverse_logit, logistic_loglik, logistic_score, fit_logistic, fit_logistic_null
from .gaussian import gaussian_loglik, gaussian_score, fit_gaussian_mle, fit_gaussian_null
from .spline import SplineSpec, spline_basis
from .formula import Formula, spline

FAMILY_REGISTRY = {
    Family.logistic: {
        "fit": fit_logistic,
        "null": fit_logistic_null,
        "description": "Binary response, logit link; weighted Newton-Raphson.",
    },
    Family.gaussian_mle: {
        "fit": fit_gaussian_mle,
        "null": fit_gaussian_null,
        "description": "Real response, identity link, variance maximised jointly (MLE).",
    },
}


def fit(data: Dataset, family: Family = Family.logistic, opts: SolverOptions = DEFAULT_OPTIONS) -> FitResult:
    return FAMILY_REGISTRY[Family(family)]["fit"](data, opts)


def fit_null(data: Dataset, family: Family = Family.logistic) -> FitResult:
    """Intercept-only fit on the same weights; closed form for both families."""
    return FAMILY_REGISTRY[Family(family)]["null"](data)
