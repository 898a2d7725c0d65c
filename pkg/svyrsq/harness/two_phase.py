"""Full cohort, case-control and balanced two-phase samples from one synthetic cohort.

The cohort has a binary exposure x1 that is only known exactly for sampled members; at
phase one every member has a surrogate that disagrees with x1 at a fixed rate, and the
two-phase design samples equally from the four (surrogate x outcome) cells.
"""
import logging
from typing import Dict, Optional

import numpy as np
from tqdm import tqdm

from svyrsq.rsq import census_rsq
from svyrsq.sampling import (
    Population, CaseControlSampling, BalancedTwoPhaseSampling, generate_population, outcome_by_aux, substream,
)
from svyrsq.utils import FitError
from .case_control import accumulate, census_row, fit_sample
from .config import TwoPhaseConfig
from .table import ComparisonRow, ComparisonTable, MomentAccumulator

logger = logging.getLogger(__name__)

SURROGATE = "surrogate"


def generate_cohort(cfg: TwoPhaseConfig) -> Population:
    def predictors(rng, N):
        return np.column_stack([rng.random(N) < cfg.exposure_rate, rng.standard_normal(N)])

    pop = generate_population(cfg.cohort_size, cfg.gen_coef, seed=cfg.base_seed, predictor_sampler=predictors)
    flip = substream(cfg.base_seed, SURROGATE).random(pop.N) < cfg.misclassification
    surrogate = (pop.X[:, 0].astype(bool) ^ flip).astype(np.int64)
    return Population(X=pop.X, y=pop.y, gen_coef=pop.gen_coef, seed=pop.seed, aux={SURROGATE: surrogate})


def _design_row(label: str, pop: Population, design, cfg: TwoPhaseConfig, naive: bool) -> ComparisonRow:
    moments: Dict[str, MomentAccumulator] = {}
    failures, fraction = 0, float("nan")
    for replicate in tqdm(range(cfg.replicates), desc=label, disable=not cfg.progress, leave=False):
        sample = design.draw(pop, seed=cfg.base_seed, replicate=replicate)
        fraction = sample.meta["sampling_fraction"]
        try:
            naive_summary, design_summary = fit_sample(sample)
        except FitError as e:
            failures += 1
            logger.warning("%s replicate %d failed: %s", label, replicate, e)
            continue
        accumulate(moments, naive_summary if naive else None, design_summary)
    return ComparisonRow.from_accumulators(label, fraction, moments, failures)


def replicate_two_phase(cfg: Optional[TwoPhaseConfig] = None) -> ComparisonTable:
    cfg = cfg or TwoPhaseConfig()
    cohort = generate_cohort(cfg)
    census = census_rsq(cohort)
    rows = []
    if cfg.sampling:
        case_control = CaseControlSampling(cfg.ratio)
        stratifier = outcome_by_aux(SURROGATE)
        per_cell = cfg.per_cell
        if per_cell is None:
            cc_size = cohort.case_count * (cfg.ratio + 1)
            _, cell_sizes = np.unique(stratifier(cohort), return_counts=True)
            per_cell = min(cc_size // 4, int(cell_sizes.min()))
        two_phase = BalancedTwoPhaseSampling(stratifier, per_cell)
        rows.append(_design_row("case_control", cohort, case_control, cfg, naive=True))
        # design columns only
        rows.append(_design_row("two_phase", cohort, two_phase, cfg, naive=False))
    rows.append(census_row(census, "full cohort"))
    title = f"Two-phase comparison, cohort N={cohort.N} with {cohort.case_count} cases, seed {cfg.base_seed}"
    return ComparisonTable(title=title, rows=rows)
