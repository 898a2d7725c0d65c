from .table import STATISTICS, TSV_COLUMNS, MomentAccumulator, Report, ComparisonRow, ComparisonTable, format_value
from .config import ExperimentConfig, TwoPhaseConfig
from .case_control import (
    replicate_table2, heuristic_check, run_heuristic, fit_sample, sample_datasets,
    HeuristicCheck, HeuristicRow, HeuristicReport,
)
from .esoph import load_esoph, replicate_esoph, DEFAULT_CONTROL_WEIGHT, MAIN_EFFECTS, INTERACTION
from .two_phase import generate_cohort, replicate_two_phase
from .published import PUBLISHED_TABLE2, PUBLISHED_ESOPH, PUBLISHED_TWO_PHASE

EXPERIMENT_REGISTRY = {
    "table2": {
        "function": replicate_table2,
        "published": PUBLISHED_TABLE2,
        "description": "Case-control samples at 1, 2, 5, 10 and 20 controls per case from a rare-outcome population.",
    },
    "esoph": {
        "function": replicate_esoph,
        "published": PUBLISHED_ESOPH,
        "description": "Grouped esophageal cancer case-control data, controls weighted 440.",
    },
    "heuristic": {
        "function": run_heuristic,
        "published": None,
        "description": "log(1 - R2_CS) scaling between a case-control sample and its population against N/n.",
    },
    "two-phase": {
        "function": replicate_two_phase,
        "published": PUBLISHED_TWO_PHASE,
        "description": "Full cohort versus case-control and balanced two-phase samples of a synthetic cohort.",
    },
}
