import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Tuple, Union

import numpy as np
import pandas as pd

from svyrsq.utils import Dataset, PreconditionError, InfeasibleDesignError
from .population import Population
from .rng import DEFAULT_SEED, substream

logger = logging.getLogger(__name__)


class DesignKind(str, Enum):
    srs = "srs"
    case_control = "case_control"
    two_phase = "two_phase"


@dataclass(eq=False)
class DesignSample:
    """A probability sample: the sampled rows as a weighted Dataset plus their design."""
    data: Dataset
    design: DesignKind
    inclusion_prob: np.ndarray
    indices: np.ndarray
    meta: dict = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    replicate: int = 0
    cells: Optional[np.ndarray] = None

    @property
    def weights(self) -> np.ndarray:
        return self.data.weights

    @property
    def n(self) -> int:
        return self.data.n

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.data.X, columns=list(self.data.names))
        frame.insert(0, "y", self.data.y.astype(np.int64))
        frame["weight"] = self.data.weights
        if self.cells is not None:
            frame["cell"] = self.cells
        return frame


class SamplingDesign(ABC):
    kind: DesignKind
    purpose: str

    @abstractmethod
    def select(self, pop: Population, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, np.ndarray, dict, Optional[np.ndarray]]:  # pragma: no cover
        """Return (indices, inclusion probabilities, weights, meta, cells) for one draw"""

    def draw(self, pop: Population, seed: int = DEFAULT_SEED, replicate: int = 0) -> DesignSample:
        pop.require_usable()
        rng = substream(seed, self.purpose, replicate)
        indices, probs, weights, meta, cells = self.select(pop, rng)

        order = np.argsort(indices, kind="stable")
        indices, probs, weights = indices[order], probs[order], weights[order]
        cells = None if cells is None else cells[order]

        data = Dataset(y=pop.y[indices], X=pop.X[indices], weights=weights, names=pop.names)
        logger.debug("%s draw (seed=%d, replicate=%d): n=%d, sum of weights=%.6g", self.kind.value,
                     seed, replicate, data.n, data.weight_sum)
        return DesignSample(data=data, design=self.kind, inclusion_prob=probs, indices=indices,
                            meta=meta, seed=seed, replicate=replicate, cells=cells)


def _srs(rng: np.random.Generator, members: np.ndarray, k: int) -> np.ndarray:
    return rng.choice(members, size=k, replace=False)


class SimpleRandomSampling(SamplingDesign):
    kind = DesignKind.srs
    purpose = "srs"

    def __init__(self, n: int):
        self.n = n

    def select(self, pop, rng):
        if not 1 <= self.n <= pop.N:
            raise InfeasibleDesignError(f"SRS size must be in [1, {pop.N}], got {self.n}.")
        indices = _srs(rng, np.arange(pop.N), self.n)
        probs = np.full(self.n, self.n / pop.N)
        weights = np.full(self.n, pop.N / self.n)
        return indices, probs, weights, {"n": self.n, "sampling_fraction": self.n / pop.N}, None


class CaseControlSampling(SamplingDesign):
    """All cases, plus ``ratio`` controls per case drawn by SRS from the controls."""
    kind = DesignKind.case_control
    purpose = "case_control"

    def __init__(self, ratio: int):
        if int(ratio) != ratio or ratio < 1:
            raise PreconditionError(f"Matching ratio must be a positive integer, got {ratio}.")
        self.ratio = int(ratio)

    def select(self, pop, rng):
        cases = np.flatnonzero(pop.y == 1)
        controls = np.flatnonzero(pop.y == 0)
        n_controls = self.ratio * len(cases)
        if n_controls > len(controls):
            raise InfeasibleDesignError(f"{self.ratio} controls per case needs {n_controls} controls, "
                                        f"but the population has {len(controls)}.")
        sampled = _srs(rng, controls, n_controls)
        indices = np.concatenate([cases, sampled])
        probs = np.concatenate([np.ones(len(cases)), np.full(n_controls, n_controls / len(controls))])
        weights = np.concatenate([np.ones(len(cases)), np.full(n_controls, len(controls) / n_controls)])
        meta = {
            "ratio": self.ratio,
            "cases": len(cases),
            "controls": n_controls,
            "control_stratum_size": len(controls),
            "sampling_fraction": n_controls / len(controls),
        }
        return indices, probs, weights, meta, None


# population -> integer cell id per row
Stratifier = Callable[[Population], np.ndarray]


def outcome_by_aux(name: str) -> Stratifier:
    """Cells of the (aux variable x outcome) table: cell = 2 * aux + y for a binary aux."""
    def stratify(pop: Population) -> np.ndarray:
        return 2 * np.asarray(pop.aux[name], dtype=np.int64) + pop.y.astype(np.int64)
    return stratify


class BalancedTwoPhaseSampling(SamplingDesign):
    """Equal-size SRS from every phase-one cell."""
    kind = DesignKind.two_phase
    purpose = "two_phase"

    def __init__(self, stratifier: Union[Stratifier, np.ndarray], per_cell: int):
        if per_cell < 1:
            raise PreconditionError(f"per_cell must be positive, got {per_cell}.")
        self.stratifier = stratifier
        self.per_cell = int(per_cell)

    def cell_ids(self, pop: Population) -> np.ndarray:
        cells = self.stratifier(pop) if callable(self.stratifier) else self.stratifier
        cells = np.asarray(cells).reshape(-1)
        if cells.shape[0] != pop.N:
            raise PreconditionError(f"Stratifier must assign a cell to each of {pop.N} rows.")
        return cells

    def select(self, pop, rng):
        cells = self.cell_ids(pop)
        labels, sizes = np.unique(cells, return_counts=True)
        if np.any(sizes < self.per_cell):
            small = {int(l): int(s) for l, s in zip(labels, sizes) if s < self.per_cell}
            raise InfeasibleDesignError(f"Cells {small} have fewer than per_cell={self.per_cell} members.")

        indices, probs, weights, cell_of = [], [], [], []
        for label, size in zip(labels, sizes):
            members = np.flatnonzero(cells == label)
            indices.append(_srs(rng, members, self.per_cell))
            probs.append(np.full(self.per_cell, self.per_cell / size))
            weights.append(np.full(self.per_cell, size / self.per_cell))
            cell_of.append(np.full(self.per_cell, label))
        meta = {
            "per_cell": self.per_cell,
            "cell_sizes": {int(l): int(s) for l, s in zip(labels, sizes)},
            "sampling_fraction": self.per_cell * len(labels) / pop.N,
        }
        return (np.concatenate(indices), np.concatenate(probs), np.concatenate(weights),
                meta, np.concatenate(cell_of))


def draw_srs(pop: Population, n: int, seed: int = DEFAULT_SEED, replicate: int = 0) -> DesignSample:
    return SimpleRandomSampling(n).draw(pop, seed, replicate)


def draw_case_control(pop: Population, ratio: int, seed: int = DEFAULT_SEED, replicate: int = 0) -> DesignSample:
    return CaseControlSampling(ratio).draw(pop, seed, replicate)


def draw_two_phase_balanced(pop: Population, stratifier: Union[Stratifier, np.ndarray], per_cell: int,
                            seed: int = DEFAULT_SEED, replicate: int = 0) -> DesignSample:
    return BalancedTwoPhaseSampling(stratifier, per_cell).draw(pop, seed, replicate)
