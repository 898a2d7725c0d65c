import json
import math
from abc import ABC, abstractmethod
from typing import Dict, List

from pydantic import BaseModel, Field, field_validator

STATISTICS = ("naive_cs", "design_cs", "naive_nag", "design_nag")
TSV_COLUMNS = ("design", "sampling_fraction") + STATISTICS \
    + tuple(f"mc_se_{s}" for s in STATISTICS) + ("failures",)


def format_value(value) -> str:
    """Shortest round-trip text for floats, shared by text, TSV and JSON output."""
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


class MomentAccumulator:
    """Running sum and sum of squares; merging is commutative."""

    def __init__(self):
        self.count = 0
        self.total = 0.0
        self.total_sq = 0.0

    def add(self, value: float):
        self.count += 1
        self.total += value
        self.total_sq += value * value

    def merge(self, other: "MomentAccumulator"):
        self.count += other.count
        self.total += other.total
        self.total_sq += other.total_sq

    @property
    def mean(self) -> float:
        return self.total / self.count if self.count else math.nan

    @property
    def se(self) -> float:
        """Monte-Carlo standard error of the mean."""
        if self.count < 2:
            return math.nan
        variance = max(self.total_sq - self.count * self.mean ** 2, 0.0) / (self.count - 1)
        return math.sqrt(variance / self.count)


class Report(BaseModel, ABC):
    title: str = Field("", title="Heading printed above the table")

    @abstractmethod
    def records(self) -> List[Dict]:  # pragma: no cover
        """Rows as ordered dicts"""

    @property
    @abstractmethod
    def columns(self) -> tuple:  # pragma: no cover
        pass

    def to_tsv(self) -> str:
        lines = ["\t".join(self.columns)]
        for record in self.records():
            lines.append("\t".join(format_value(record[c]) for c in self.columns))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        records = [{k: _json_value(v) for k, v in r.items()} for r in self.records()]
        return json.dumps({"title": self.title, "rows": records}, indent=2) + "\n"

    def to_text(self) -> str:
        cells = [list(self.columns)] + [[format_value(r[c]) for c in self.columns] for r in self.records()]
        widths = [max(len(row[j]) for row in cells) for j in range(len(self.columns))]
        lines = [self.title] if self.title else []
        for row in cells:
            lines.append("  ".join(v.rjust(w) if j else v.ljust(w) for j, (v, w) in enumerate(zip(row, widths))))
        return "\n".join(lines) + "\n"

    def __str__(self) -> str:
        return self.to_text()


class ComparisonRow(BaseModel):
    design: str = Field(..., title="Design label")
    sampling_fraction: float = Field(..., title="Control (or overall) sampling fraction")
    naive_cs: float = Field(math.nan, title="Cox-Snell from the unweighted fit")
    design_cs: float = Field(math.nan, title="Design-based Cox-Snell from the weighted fit")
    naive_nag: float = Field(math.nan, title="Nagelkerke from the unweighted fit")
    design_nag: float = Field(math.nan, title="Design-based Nagelkerke from the weighted fit")
    mc_se_naive_cs: float = math.nan
    mc_se_design_cs: float = math.nan
    mc_se_naive_nag: float = math.nan
    mc_se_design_nag: float = math.nan
    replicates: int = Field(1, ge=0, title="Replicates that produced values")
    failures: int = Field(0, ge=0, title="Replicates lost to fit failures")

    @field_validator(*STATISTICS)
    @classmethod
    def _in_unit_interval(cls, value):
        if not math.isnan(value) and not 0.0 <= value <= 1.0:
            raise ValueError(f"R2 value {value} outside [0, 1].")
        return value

    @classmethod
    def from_accumulators(cls, design: str, sampling_fraction: float,
                          moments: Dict[str, MomentAccumulator], failures: int) -> "ComparisonRow":
        values = {}
        for name in STATISTICS:
            acc = moments.get(name)
            values[name] = acc.mean if acc else math.nan
            values[f"mc_se_{name}"] = acc.se if acc else math.nan
        replicates = max((acc.count for acc in moments.values()), default=0)
        return cls(design=design, sampling_fraction=sampling_fraction, replicates=replicates,
                   failures=failures, **values)

    def value(self, statistic: str) -> float:
        return getattr(self, statistic)


class ComparisonTable(Report):
    rows: List[ComparisonRow] = Field([], title="Design rows, reference row last")

    @property
    def columns(self):
        return TSV_COLUMNS

    def records(self):
        return [{c: getattr(row, c) for c in self.columns} for row in self.rows]

    def to_json(self) -> str:
        records = [{k: _json_value(v) for k, v in row.model_dump().items()} for row in self.rows]
        return json.dumps({"title": self.title, "rows": records}, indent=2) + "\n"

    def row(self, design: str) -> ComparisonRow:
        for row in self.rows:
            if row.design == design:
                return row
        raise KeyError(design)

    def compare(self, published: Dict[str, Dict[str, float]]) -> str:
        """Side-by-side text of our values, published values and absolute differences."""
        lines = [f"{'design':<22}{'statistic':<12}{'ours':>24}{'published':>12}{'abs diff':>24}"]
        for design, values in published.items():
            try:
                row = self.row(design)
            except KeyError:
                continue
            for statistic, reference in values.items():
                ours = row.value(statistic)
                diff = abs(ours - reference) if not math.isnan(ours) else math.nan
                lines.append(f"{design:<22}{statistic:<12}{format_value(ours):>24}"
                             f"{format_value(reference):>12}{format_value(diff):>24}")
        return "\n".join(lines) + "\n"
