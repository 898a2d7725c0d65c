from dataclasses import dataclass, asdict
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import PreconditionError


class Family(str, Enum):
    logistic = "logistic"
    gaussian_mle = "gaussian_mle"


INTERCEPT_NAME = "(Intercept)"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Response, predictors (without the intercept column) and sampling weights.

    Absent weights mean unit weights. Arrays are copied to float64 and frozen.
    """
    y: np.ndarray
    X: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    names: Sequence[str] = ()

    def __post_init__(self):
        y = np.array(self.y, dtype=np.float64).reshape(-1)
        n = y.shape[0]
        if n < 1:
            raise PreconditionError("Dataset needs at least one row.")

        X = np.zeros((n, 0)) if self.X is None else np.array(self.X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2 or X.shape[0] != n:
            raise PreconditionError(f"X must have {n} rows, got shape {X.shape}.")

        w = np.ones(n) if self.weights is None else np.array(self.weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != n:
            raise PreconditionError(f"weights must have length {n}, got {w.shape[0]}.")

        if not np.all(np.isfinite(y)):
            raise PreconditionError("y contains non-finite values.")
        if not np.all(np.isfinite(X)):
            raise PreconditionError("X contains non-finite values.")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise PreconditionError("weights must be strictly positive and finite.")

        names = tuple(self.names) if self.names else tuple(f"x{j + 1}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise PreconditionError(f"Expected {X.shape[1]} predictor names, got {len(names)}.")

        for arr in (y, X, w):
            arr.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def weight_sum(self) -> float:
        return float(np.sum(self.weights))

    @property
    def design(self) -> np.ndarray:
        """Design matrix with the intercept column prepended."""
        return np.column_stack([np.ones(self.n), self.X])

    @property
    def coef_names(self) -> tuple:
        return (INTERCEPT_NAME,) + tuple(self.names)

    def check_family(self, family: "Family"):
        if family == Family.logistic and not np.all((self.y == 0) | (self.y == 1)):
            raise PreconditionError("Logistic family requires a binary {0,1} response.")

    def with_weights(self, weights) -> "Dataset":
        return Dataset(y=self.y, X=self.X, weights=weights, names=self.names)

    def unweighted(self) -> "Dataset":
        return self.with_weights(None)

    def scaled(self, c: float) -> "Dataset":
        return self.with_weights(self.weights * c)

    def intercept_only(self) -> "Dataset":
        return Dataset(y=self.y, X=None, weights=self.weights)

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(y=self.y[rows], X=self.X[rows], weights=self.weights[rows], names=self.names)


@dataclass(eq=False)
class FitResult:
    family: Family
    coef: np.ndarray
    loglik: float
    null_loglik: float
    n: int
    weight_sum: float
    converged: bool
    iterations: int
    max_score_norm: float
    names: tuple = ()
    # MLE variance for Gaussian fits, None for logistic
    scale: Optional[float] = None
    null_scale: Optional[float] = None

    def __post_init__(self):
        if not self.weight_sum > 0:
            raise PreconditionError("weight_sum must be positive.")

    def __str__(self) -> str:
        names = self.names or tuple(f"b{j}" for j in range(len(self.coef)))
        width = max(len(name) for name in names)
        lines = [f"{name.ljust(width)}  {float(value)!r}" for name, value in zip(names, self.coef)]
        status = "converged" if self.converged else "NOT converged"
        lines.append(f"[{self.family.value}] {status} after {self.iterations} iterations, "
                     f"|score|_inf = {self.max_score_norm:.3g}")
        return "\n".join(lines)


@dataclass
class RsqSummary:
    cox_snell: float
    nagelkerke: float
    design_cox_snell: float
    design_nagelkerke: float
    loglik_ratio: float
    n: int
    weight_sum: float

    def as_dict(self) -> dict:
        return asdict(self)
