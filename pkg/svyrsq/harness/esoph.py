"""Grouped case-control data on oesophageal cancer (88 age x alcohol x tobacco groups).

The bundled file holds the historical release of the counts (200 cases, 975 controls).
A later release corrected the control counts by subtracting the cases; ``corrected=True``
applies that correction (775 controls).
"""
import io
import logging
import pkgutil
from typing import Optional

import numpy as np
import pandas as pd

from svyrsq.glm import Formula, fit_logistic
from svyrsq.rsq import rsq_summary
from svyrsq.utils import DataNotFoundError, SchemaError
from .table import ComparisonRow, ComparisonTable

logger = logging.getLogger(__name__)

# controls were sampled at about 1 in 440 of the source population
DEFAULT_CONTROL_WEIGHT = 440.0

AGE_GROUPS = ("25-34", "35-44", "45-54", "55-64", "65-74", "75+")
ALCOHOL_GROUPS = ("0-39", "40-79", "80-119", "120+")
TOBACCO_GROUPS = ("0-9", "10-19", "20-29", "30+")

MAIN_EFFECTS = "y ~ C(agegp) + C(alcgp) + C(tobgp)"
# linear-by-linear alcohol x tobacco on the 1..4 group scores
INTERACTION = MAIN_EFFECTS + " + alcgp:tobgp"

ESOPH_MODELS = {"main effects": MAIN_EFFECTS, "interaction": INTERACTION}


def load_grouped() -> pd.DataFrame:
    try:
        raw = pkgutil.get_data("svyrsq.harness", "data/esoph.csv")
    except OSError as e:
        raise DataNotFoundError(f"Bundled esophageal data is missing: {e}") from e
    if raw is None:
        raise DataNotFoundError("Bundled esophageal data cannot be read from this installation.")
    return pd.read_csv(io.BytesIO(raw))


def _scores(column: pd.Series, levels) -> np.ndarray:
    scores = column.map({level: k + 1 for k, level in enumerate(levels)})
    if scores.isna().any():
        raise SchemaError(f"Unknown group labels in `{column.name}`: {sorted(set(column[scores.isna()]))}.")
    return scores.to_numpy(dtype=np.int64)


def load_esoph(control_weight: Optional[float] = DEFAULT_CONTROL_WEIGHT, corrected: bool = False) -> pd.DataFrame:
    """One record per subject: group scores (1-based), outcome y and sampling weight w.

    Cases get weight 1, controls ``control_weight`` (1 when None).
    """
    grouped = load_grouped()
    scored = pd.DataFrame({
        "agegp": _scores(grouped["agegp"], AGE_GROUPS),
        "alcgp": _scores(grouped["alcgp"], ALCOHOL_GROUPS),
        "tobgp": _scores(grouped["tobgp"], TOBACCO_GROUPS),
    })
    controls = grouped["ncontrols"] - grouped["ncases"] if corrected else grouped["ncontrols"]
    if (controls < 0).any():
        raise SchemaError("Control counts must not be negative.")

    w0 = 1.0 if control_weight is None else float(control_weight)
    cases = scored.loc[scored.index.repeat(grouped["ncases"])].assign(y=1, w=1.0)
    ctrls = scored.loc[scored.index.repeat(controls)].assign(y=0, w=w0)
    records = pd.concat([cases, ctrls], ignore_index=True)
    logger.debug("esoph records: %d cases, %d controls, control weight %g", len(cases), len(ctrls), w0)
    return records


def replicate_esoph(control_weight: Optional[float] = DEFAULT_CONTROL_WEIGHT,
                    corrected: bool = False) -> ComparisonTable:
    """Unweighted (naive) and control-weighted (design) pseudo-R2 for both models."""
    records = load_esoph(control_weight, corrected)
    rows = []
    for label, text in ESOPH_MODELS.items():
        data = Formula.parse(text).build(records, weights=records["w"].to_numpy())
        naive = rsq_summary(fit_logistic(data.unweighted()))
        design = rsq_summary(fit_logistic(data))
        rows.append(ComparisonRow(
            design=label,
            sampling_fraction=1.0 / (control_weight or 1.0),
            naive_cs=naive.cox_snell, design_cs=design.design_cox_snell,
            naive_nag=naive.nagelkerke, design_nag=design.design_nagelkerke,
        ))
    version = "corrected" if corrected else "historical"
    weight = "unweighted" if control_weight is None else f"control weight {control_weight:g}"
    return ComparisonTable(title=f"Esophageal cancer, grouped data ({version} counts), {weight}", rows=rows)
