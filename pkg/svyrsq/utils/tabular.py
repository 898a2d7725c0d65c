import logging
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from svyrsq.glm import Formula, SplineSpec
from .data_types import Dataset
from .errors import SchemaError

logger = logging.getLogger(__name__)


def _quoted(column: str) -> str:
    return column if column.isidentifier() else f"Q({column!r})"


class CsvSchema(BaseModel):
    response: str = Field(..., title="Response column")
    predictors: List[str] = Field([], title="Predictor terms, in formula syntax")
    weight: Optional[str] = Field(None, title="Sampling-weight column; unit weights when absent")
    splines: Dict[str, List[float]] = Field({}, title="Knots for predictors entered as linear splines")

    @classmethod
    def from_formula(cls, text: str, weight: Optional[str] = None) -> "CsvSchema":
        formula = Formula.parse(text)
        return cls(response=formula.response, predictors=list(formula.terms), weight=weight)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, response: str, weight: Optional[str] = None,
                   splines: Optional[Dict[str, List[float]]] = None) -> "CsvSchema":
        """Every column other than the response and the weight becomes a predictor."""
        predictors = [_quoted(str(c)) for c in frame.columns if c not in (response, weight)]
        return cls(response=response, predictors=predictors, weight=weight, splines=splines or {})

    def to_formula(self) -> Formula:
        terms = []
        for term in self.predictors:
            if term in self.splines:
                knots = "".join(f"{float(k)!r}, " for k in SplineSpec(knots=self.splines[term]).knots)
                terms.append(f"spline({term}, ({knots.rstrip()}))")
            else:
                terms.append(term)
        unknown = set(self.splines) - set(self.predictors)
        if unknown:
            raise SchemaError(f"Spline columns {sorted(unknown)} are not predictors.")
        return Formula.parse(f"{self.response} ~ " + (" + ".join(terms) or "1"))

    def validate_frame(self, frame: pd.DataFrame) -> Optional[np.ndarray]:
        """Check named columns exist and return the weights (None for unit weights)."""
        missing = [c for c in self.to_formula().columns if c not in frame.columns]
        if self.weight is not None and self.weight not in frame.columns:
            missing.append(self.weight)
        if missing:
            raise SchemaError(f"Columns not found: {', '.join(missing)}.")
        if self.weight is None:
            return None
        weights = pd.to_numeric(frame[self.weight], errors="coerce").to_numpy(dtype=np.float64)
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise SchemaError(f"weight column `{self.weight}` must be positive and finite.")
        return weights

    def build(self, frame: pd.DataFrame) -> Dataset:
        weights = self.validate_frame(frame)
        return self.to_formula().build(frame, weights=weights)


def read_frame(path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise SchemaError(f"Cannot read CSV `{path}`: {e}") from e


def read_csv(path, schema: CsvSchema) -> Dataset:
    frame = read_frame(path)
    logger.info("Read %d rows from %s", len(frame), path)
    return schema.build(frame)


def write_csv(data: Dataset, path, response: str = "y", weight: Optional[str] = "weight"):
    """Write y, predictors and (optionally) weights; floats keep 17 significant digits."""
    frame = pd.DataFrame(data.X, columns=list(data.names))
    frame.insert(0, response, data.y)
    if weight is not None:
        frame[weight] = data.weights
    frame.to_csv(path, index=False, float_format="%.17g")
