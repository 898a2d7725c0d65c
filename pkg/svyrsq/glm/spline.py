import math
from typing import List

import numpy as np
from pydantic import BaseModel, Field, field_validator


class SplineSpec(BaseModel):
    knots: List[float] = Field(..., title="Strictly increasing interior knots")

    @field_validator("knots")
    @classmethod
    def _check_knots(cls, knots):
        if not all(math.isfinite(k) for k in knots):
            raise ValueError("Spline knots must be finite.")
        if any(b <= a for a, b in zip(knots, knots[1:])):
            raise ValueError(f"Spline knots must be strictly increasing, got {knots}.")
        return knots

    def column_names(self, name: str) -> List[str]:
        return [name] + [f"{name}>{k:g}" for k in self.knots]


def spline_basis(x, spec: SplineSpec) -> np.ndarray:
    """Continuous piecewise-linear basis: columns x, (x - k1)+, (x - k2)+, ..."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    hinges = [np.maximum(x - k, 0.0) for k in spec.knots]
    return np.column_stack([x] + hinges)
