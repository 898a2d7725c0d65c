from typing import List, Optional

from pydantic import BaseModel, Field, field_validator

from svyrsq.sampling import DEFAULT_SEED


class ExperimentConfig(BaseModel):
    """Case-control simulation: one population, repeated samples at each matching ratio."""
    pop_size: int = Field(100_000, ge=2, title="Number of population members")
    gen_coef: List[float] = Field([-6.0, 1.0], min_length=1, title="Intercept and slopes of the generating model")
    ratios: List[int] = Field([1, 2, 5, 10, 20], min_length=1, title="Controls per case, one table row each")
    replicates: int = Field(200, ge=1, title="Samples drawn per ratio")
    base_seed: int = Field(DEFAULT_SEED, ge=0, title="Seed for every random stream of the experiment")
    model: Optional[str] = Field(None, title="Working-model formula; default uses all population predictors")
    single_draw: bool = Field(False, title="One sample per ratio, as a one-shot study would")
    progress: bool = Field(False, title="Show a progress bar per ratio")

    @field_validator("ratios")
    @classmethod
    def _positive_ratios(cls, value):
        if any(r < 1 for r in value):
            raise ValueError(f"ratios must be positive, got {value}")
        return value

    @property
    def draws(self) -> int:
        return 1 if self.single_draw else self.replicates


class TwoPhaseConfig(BaseModel):
    """Synthetic cohort with a misclassified binary exposure used as the phase-one stratifier."""
    cohort_size: int = Field(4000, ge=2, title="Number of cohort members")
    gen_coef: List[float] = Field([-3.0, 2.0, 0.5], min_length=3, max_length=3,
                                  title="Intercept, exposure and continuous-covariate coefficients")
    exposure_rate: float = Field(0.2, gt=0, lt=1, title="P(true exposure = 1)")
    misclassification: float = Field(0.15, ge=0, lt=0.5, title="P(surrogate differs from true exposure)")
    ratio: int = Field(1, ge=1, title="Controls per case in the case-control comparison")
    per_cell: Optional[int] = Field(None, ge=1, title="Two-phase draws per cell; default matches the case-control size")
    replicates: int = Field(200, ge=1, title="Samples drawn per design")
    base_seed: int = Field(DEFAULT_SEED, ge=0, title="Seed for every random stream of the experiment")
    sampling: bool = Field(True, title="Draw samples; when off only the full-cohort row is produced")
    progress: bool = Field(False, title="Show progress bars")
