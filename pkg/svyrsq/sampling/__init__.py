from .rng import DEFAULT_SEED, substream, purpose_tag
from .population import Population, generate_population, standard_normal_predictors
from .designs import (
    DesignKind, DesignSample, SamplingDesign, SimpleRandomSampling, CaseControlSampling,
    BalancedTwoPhaseSampling, outcome_by_aux, draw_srs, draw_case_control, draw_two_phase_balanced,
)
