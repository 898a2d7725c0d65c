import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np
import pandas as pd

from svyrsq.glm import inverse_logit
from svyrsq.utils import Dataset, PreconditionError, DegenerateResponseError
from .rng import DEFAULT_SEED, substream

logger = logging.getLogger(__name__)

# (generator, N) -> N x p predictor matrix
PredictorSampler = Callable[[np.random.Generator, int], np.ndarray]


@dataclass(eq=False)
class Population:
    """A finite population drawn from a logistic superpopulation model.

    ``aux`` holds phase-one variables that are not model predictors (for example a
    surrogate measurement used to stratify a two-phase sample).
    """
    X: np.ndarray
    y: np.ndarray
    gen_coef: Optional[np.ndarray] = None
    seed: Optional[int] = None
    aux: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        if self.X.ndim == 1:
            self.X = self.X.reshape(-1, 1)
        self.y = np.asarray(self.y).astype(np.int8).reshape(-1)
        if self.X.shape[0] != self.y.shape[0]:
            raise PreconditionError("Population X and y must have the same number of rows.")
        if not np.all((self.y == 0) | (self.y == 1)):
            raise PreconditionError("Population outcomes must be binary.")
        for name, values in self.aux.items():
            if len(values) != self.N:
                raise PreconditionError(f"Auxiliary variable `{name}` must have {self.N} values.")

    @property
    def N(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def case_count(self) -> int:
        return int(np.sum(self.y))

    @property
    def case_fraction(self) -> float:
        return self.case_count / self.N

    @property
    def is_degenerate(self) -> bool:
        return not 0 < self.case_count < self.N

    @property
    def names(self):
        return tuple(f"x{j + 1}" for j in range(self.p))

    def require_usable(self):
        if self.is_degenerate:
            raise DegenerateResponseError(f"Population has {self.case_count} cases out of {self.N}; "
                                          "both outcome classes are needed.")

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.X, columns=list(self.names))
        frame.insert(0, "y", self.y.astype(np.int64))
        for name, values in self.aux.items():
            frame[name] = values
        return frame

    def to_dataset(self) -> Dataset:
        return Dataset(y=self.y, X=self.X, names=self.names)


def standard_normal_predictors(p: int) -> PredictorSampler:
    return lambda rng, N: rng.standard_normal((N, p))


def generate_population(N: int, coef, seed: int = DEFAULT_SEED,
                        predictor_sampler: Optional[PredictorSampler] = None) -> Population:
    """Draw x ~ N(0, I) (or from ``predictor_sampler``) and y ~ Bernoulli(expit(alpha + x beta))."""
    if N < 2:
        raise PreconditionError(f"Population size must be at least 2, got {N}.")
    coef = np.asarray(coef, dtype=np.float64).reshape(-1)
    if coef.shape[0] < 1:
        raise PreconditionError("coef needs at least an intercept.")
    p = coef.shape[0] - 1

    rng = substream(seed, "population")
    sampler = predictor_sampler or standard_normal_predictors(p)
    X = np.asarray(sampler(rng, N), dtype=np.float64).reshape(N, p)
    mu = inverse_logit(coef[0] + X @ coef[1:])
    y = (rng.random(N) < mu).astype(np.int8)

    pop = Population(X=X, y=y, gen_coef=coef, seed=seed)
    if pop.is_degenerate:
        logger.warning("Generated a degenerate population (%d cases of %d); sampling will refuse it.",
                       pop.case_count, N)
    else:
        logger.info("Generated population N=%d with %d cases (%.3f%%).", N, pop.case_count,
                    100 * pop.case_fraction)
    return pop
