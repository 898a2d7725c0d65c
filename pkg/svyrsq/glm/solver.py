import logging

import numpy as np
from pydantic import BaseModel, Field
from scipy import linalg

from svyrsq.utils import Dataset, PreconditionError, SingularSystemError

logger = logging.getLogger(__name__)


class SolverOptions(BaseModel):
    tol: float = Field(1e-10, gt=0, title="Tolerance on the per-unit-weight score and relative loglik change")
    max_iter: int = Field(50, ge=1, title="Maximum number of Newton iterations")
    max_halvings: int = Field(30, ge=0, title="Maximum step halvings per iteration")
    eta_clamp: float = Field(30.0, gt=0, title="Linear predictor clamp inside the mean function")
    separation_eta: float = Field(25.0, gt=0, title="|eta| above which every row counts as perfectly classified")
    separation_coef_norm: float = Field(1e4, gt=0, title="Slope norm that signals divergence to infinity")
    separation_se: float = Field(100.0, gt=0, title="Standard error, weights rescaled to n, that signals quasi-separation")
    loglik_slack: float = Field(1e-12, ge=0, title="Relative loglik drop accepted as rounding in the line search")
    condition_limit: float = Field(1e10, gt=1, title="Pivoted-QR condition number above which X is singular")


DEFAULT_OPTIONS = SolverOptions()


def check_coef(data: Dataset, coef) -> np.ndarray:
    coef = np.asarray(coef, dtype=np.float64).reshape(-1)
    if coef.shape[0] != data.p + 1:
        raise PreconditionError(f"coef must have length p+1 = {data.p + 1}, got {coef.shape[0]}.")
    return coef


def check_rank(design: np.ndarray, condition_limit: float = DEFAULT_OPTIONS.condition_limit):
    """Raise SingularSystemError when the pivoted-QR condition estimate exceeds the limit."""
    if design.shape[1] > design.shape[0]:
        raise SingularSystemError(f"{design.shape[1]} coefficients cannot be identified from {design.shape[0]} rows.")
    r = linalg.qr(design, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(r))
    if diag[-1] == 0 or diag[0] / diag[-1] > condition_limit:
        raise SingularSystemError("Design matrix is rank deficient (pivoted QR condition "
                                  f"{diag[0] / max(diag[-1], np.finfo(float).tiny):.3g} > {condition_limit:g}).")
    logger.debug("design rank check passed, condition %.3g", diag[0] / diag[-1])
