"""Case-control simulation: naive versus design-based pseudo-R2 at several matching ratios,
and the check of the N/n heuristic linking sample and census Cox-Snell values."""
import logging
import math
from typing import Dict, List, NamedTuple, Optional, Tuple, Union

from pydantic import BaseModel, Field
from tqdm import tqdm

from svyrsq.glm import Formula, SolverOptions, DEFAULT_OPTIONS, fit_logistic
from svyrsq.rsq import census_rsq, cox_snell, rsq_summary
from svyrsq.sampling import (
    Population, DesignSample, generate_population, draw_case_control, draw_srs,
)
from svyrsq.utils import Dataset, RsqSummary, FitError, PreconditionError, UndefinedRatioError
from .config import ExperimentConfig
from .table import ComparisonRow, ComparisonTable, MomentAccumulator, Report

logger = logging.getLogger(__name__)

# the heuristic is derived for rare outcomes
RARE_OUTCOME_LIMIT = 0.05
UNDEFINED_RSQ = 1e-12

ModelSpec = Optional[Union[str, Formula]]


def _formula(model: ModelSpec) -> Optional[Formula]:
    return Formula.parse(model) if isinstance(model, str) else model


def sample_datasets(sample: DesignSample, model: ModelSpec = None) -> Tuple[Dataset, Dataset]:
    """(unweighted, weighted) datasets for the working model on one sample."""
    formula = _formula(model)
    if formula is None:
        weighted = sample.data
    else:
        frame = sample.to_frame()
        weighted = formula.build(frame, weights=frame["weight"].to_numpy())
    return weighted.unweighted(), weighted


def fit_sample(sample: DesignSample, model: ModelSpec = None,
               opts: SolverOptions = DEFAULT_OPTIONS) -> Tuple[RsqSummary, RsqSummary]:
    """Naive statistics from the unweighted fit and design-based ones from the weighted fit."""
    unweighted, weighted = sample_datasets(sample, model)
    return rsq_summary(fit_logistic(unweighted, opts)), rsq_summary(fit_logistic(weighted, opts))


def accumulate(moments: Dict[str, MomentAccumulator], naive: Optional[RsqSummary], design: RsqSummary):
    values = {"design_cs": design.design_cox_snell, "design_nag": design.design_nagelkerke}
    if naive is not None:
        values.update(naive_cs=naive.cox_snell, naive_nag=naive.nagelkerke)
    for name, value in values.items():
        moments.setdefault(name, MomentAccumulator()).add(value)


def census_row(census: RsqSummary, label: str = "population") -> ComparisonRow:
    return ComparisonRow(design=label, sampling_fraction=1.0,
                         naive_cs=census.cox_snell, design_cs=census.design_cox_snell,
                         naive_nag=census.nagelkerke, design_nag=census.design_nagelkerke)


def _ratio_row(pop: Population, ratio: int, cfg: ExperimentConfig) -> ComparisonRow:
    moments: Dict[str, MomentAccumulator] = {}
    failures, fraction = 0, math.nan
    for replicate in tqdm(range(cfg.draws), desc=f"m={ratio}", disable=not cfg.progress, leave=False):
        sample = draw_case_control(pop, ratio, seed=cfg.base_seed, replicate=replicate)
        fraction = sample.meta["sampling_fraction"]
        try:
            naive, design = fit_sample(sample, cfg.model)
        except FitError as e:
            failures += 1
            logger.warning("m=%d replicate %d failed: %s", ratio, replicate, e)
            continue
        accumulate(moments, naive, design)
    row = ComparisonRow.from_accumulators(f"case_control m={ratio}", fraction, moments, failures)
    logger.info("m=%d: naive Cox-Snell %.4g, design Cox-Snell %.4g (%d replicates, %d failures)",
                ratio, row.naive_cs, row.design_cs, row.replicates, failures)
    return row


def replicate_table2(cfg: Optional[ExperimentConfig] = None) -> ComparisonTable:
    cfg = cfg or ExperimentConfig()
    pop = generate_population(cfg.pop_size, cfg.gen_coef, seed=cfg.base_seed)
    census = census_rsq(pop, cfg.model)
    rows = [_ratio_row(pop, ratio, cfg) for ratio in cfg.ratios]
    rows.append(census_row(census))
    title = (f"Case-control sampling, N={pop.N}, {pop.case_count} cases, "
             f"{cfg.draws} draw(s) per ratio, seed {cfg.base_seed}")
    return ComparisonTable(title=title, rows=rows)


class HeuristicCheck(NamedTuple):
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs


def heuristic_check(pop: Population, sample: DesignSample, model: ModelSpec = None,
                    census: Optional[RsqSummary] = None) -> HeuristicCheck:
    """log(1 - sample Cox-Snell) / log(1 - census Cox-Snell) against N/n.

    For a rare outcome the sample log likelihood ratio is roughly the census one
    spread over n instead of N observations, so the two sides should be close.
    """
    if pop.case_fraction >= RARE_OUTCOME_LIMIT:
        raise PreconditionError(f"Heuristic needs a rare outcome; case fraction is {pop.case_fraction:.3f}.")
    census = census or census_rsq(pop, model)
    if census.cox_snell <= UNDEFINED_RSQ:
        raise UndefinedRatioError(f"Census Cox-Snell is {census.cox_snell:.3g}; the ratio is undefined.")
    unweighted, _ = sample_datasets(sample, model)
    sample_cs = cox_snell(fit_logistic(unweighted))
    lhs = math.log1p(-sample_cs) / math.log1p(-census.cox_snell)
    return HeuristicCheck(lhs=lhs, rhs=pop.N / sample.n)


class HeuristicRow(BaseModel):
    design: str
    n: int = Field(..., ge=1, title="Sample size")
    lhs: float = Field(..., title="log(1 - sample R2_CS) / log(1 - census R2_CS)")
    rhs: float = Field(..., title="N / n")
    ratio: float = Field(..., title="lhs / rhs")
    expected_ratio: float = Field(..., title="m / (m + 1): efficiency-adjusted expectation")


class HeuristicReport(Report):
    rows: List[HeuristicRow] = []

    @property
    def columns(self):
        return ("design", "n", "lhs", "rhs", "ratio", "expected_ratio")

    def records(self):
        return [row.model_dump() for row in self.rows]


def run_heuristic(cfg: Optional[ExperimentConfig] = None) -> HeuristicReport:
    cfg = cfg or ExperimentConfig()
    pop = generate_population(cfg.pop_size, cfg.gen_coef, seed=cfg.base_seed)
    census = census_rsq(pop, cfg.model)
    rows = []
    for ratio in cfg.ratios:
        sample = draw_case_control(pop, ratio, seed=cfg.base_seed)
        check = heuristic_check(pop, sample, cfg.model, census)
        rows.append(HeuristicRow(design=f"case_control m={ratio}", n=sample.n, lhs=check.lhs, rhs=check.rhs,
                                 ratio=check.ratio, expected_ratio=ratio / (ratio + 1)))
    full = draw_srs(pop, pop.N, seed=cfg.base_seed)
    check = heuristic_check(pop, full, cfg.model, census)
    rows.append(HeuristicRow(design="census", n=full.n, lhs=check.lhs, rhs=check.rhs,
                             ratio=check.ratio, expected_ratio=1.0))
    return HeuristicReport(title=f"N/n heuristic, N={pop.N}, seed {cfg.base_seed}", rows=rows)
