from .utils import Dataset, FitResult, RsqSummary, Family
from .glm import fit, fit_null, fit_logistic, fit_gaussian_mle, Formula, SolverOptions
from .sampling import (
    Population, generate_population, draw_srs, draw_case_control, draw_two_phase_balanced,
)
from .rsq import cox_snell, nagelkerke, design_cox_snell, design_nagelkerke, rsq_summary, census_rsq
from .harness import EXPERIMENT_REGISTRY
