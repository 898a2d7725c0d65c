import logging
from typing import Optional, Union

from svyrsq.glm import Formula, SolverOptions, DEFAULT_OPTIONS, fit_logistic
from svyrsq.sampling import Population
from svyrsq.utils import RsqSummary
from .statistics import rsq_summary

logger = logging.getLogger(__name__)


def census_rsq(pop: Population, model: Optional[Union[str, Formula]] = None,
               opts: SolverOptions = DEFAULT_OPTIONS) -> RsqSummary:
    """Fit the working model to the whole population with unit weights.

    Without a model the population's own predictors are used (``y ~ x1 + ... + xp``).
    """
    pop.require_usable()
    if model is None:
        data = pop.to_dataset()
    else:
        formula = Formula.parse(model) if isinstance(model, str) else model
        data = formula.build(pop.to_frame())
    summary = rsq_summary(fit_logistic(data, opts))
    logger.info("census R2: Cox-Snell %.6g, Nagelkerke %.6g (N=%d)", summary.cox_snell, summary.nagelkerke, pop.N)
    return summary
