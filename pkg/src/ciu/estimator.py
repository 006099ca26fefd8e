"""Estimate Cmin/Cmax: the extreme outputs seen while varying a feature subset.

Every other feature stays pinned at the context. Two strategies:

* ``monte-carlo``: ``sample_count`` uniform draws over the varied features'
  ranges (prefix-stable: a larger count with the same seed extends the same
  sequence of draws).
* ``grid``: the full Cartesian grid of ``points_per_dim`` evenly spaced
  values per varied feature, endpoints included. Each axis also carries the
  context's own value, so the grid for a varied set contains the grid of
  every subset of it.

Both always evaluate the unmodified context, so ``cmin <= y <= cmax`` holds
for every output. All outputs are read from each model call.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import BudgetExceededError, ConsistencyError
from .model import Model

DEFAULT_SAMPLES = 150
DEFAULT_GRID_POINTS = 21
DEFAULT_BUDGET = 10**6
STRATEGIES = ("monte-carlo", "grid")


def varied_set(indices: int | Iterable[int], n_features: int) -> tuple[int, ...]:
    """Normalize a feature index or index collection into a sorted tuple."""
    if isinstance(indices, (int, np.integer)):
        indices = (int(indices),)
    out = tuple(sorted({int(i) for i in indices}))
    if not out:
        raise ValueError("varied set must be nonempty")
    bad = [i for i in out if not 0 <= i < n_features]
    if bad:
        raise IndexError(f"feature indices {bad} out of range for {n_features} features")
    return out


@dataclass(frozen=True)
class SamplePlan:
    strategy: str = "monte-carlo"
    sample_count: int = DEFAULT_SAMPLES
    points_per_dim: int = DEFAULT_GRID_POINTS
    seed: int = 0
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if self.points_per_dim < 2:
            raise ValueError("points_per_dim must be >= 2")

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "sample_count": self.sample_count,
            "points_per_dim": self.points_per_dim,
            "seed": self.seed,
            "budget": self.budget,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SamplePlan":
        return cls(**doc)


@dataclass(frozen=True)
class RangeEstimate:
    varied: tuple[int, ...]
    cmin: np.ndarray
    cmax: np.ndarray
    y: np.ndarray
    samples_used: int
    strategy: str = field(default="monte-carlo")

    def __post_init__(self):
        if np.any(self.cmin > self.y) or np.any(self.y > self.cmax):
            raise ConsistencyError(f"context output {self.y} outside [{self.cmin}, {self.cmax}]")

    def to_dict(self, output_names=None) -> dict:
        names = output_names or [str(j) for j in range(len(self.y))]
        return {
            "varied": list(self.varied),
            "strategy": self.strategy,
            "samples_used": self.samples_used,
            "outputs": [
                {"name": n, "cmin": float(lo), "cmax": float(hi), "y": float(v)}
                for n, lo, hi, v in zip(names, self.cmin, self.cmax, self.y)
            ],
        }


def _reduce(model: Model, context: np.ndarray, samples: np.ndarray, varied, strategy) -> RangeEstimate:
    # the context is evaluated on its own so y is bitwise equal to model.predict(context)
    y = model.predict_batch(context[None, :])[0]
    Y = model.predict_batch(samples)
    cmin = np.minimum(Y.min(axis=0), y)
    cmax = np.maximum(Y.max(axis=0), y)
    return RangeEstimate(varied, cmin, cmax, y, len(samples) + 1, strategy)


def mc_samples(model: Model, context, varied, sample_count: int, seed: int) -> np.ndarray:
    """The Monte-Carlo input vectors (without the context row)."""
    rng = np.random.default_rng(seed)
    lo = np.array([model.features[i].min for i in varied])
    hi = np.array([model.features[i].max for i in varied])
    # rng.random fills row-major, so the first rows do not depend on sample_count
    u = rng.random((sample_count, len(varied)))
    X = np.tile(np.asarray(context, dtype=float), (sample_count, 1))
    X[:, list(varied)] = np.minimum(lo + u * (hi - lo), hi)
    return X


def estimate_range_mc(model: Model, context, varied, plan: SamplePlan | None = None) -> RangeEstimate:
    plan = plan or SamplePlan()
    x = model.check_context(context)
    varied = varied_set(varied, model.n_features)
    samples = mc_samples(model, x, varied, plan.sample_count, plan.seed)
    return _reduce(model, x, samples, varied, "monte-carlo")


def grid_axis(model: Model, context, index: int, points: int) -> np.ndarray:
    f = model.features[index]
    axis = np.linspace(f.min, f.max, points)
    axis[-1] = f.max
    return np.unique(np.append(axis, context[index]))


def estimate_range_grid(model: Model, context, varied, plan: SamplePlan | None = None) -> RangeEstimate:
    plan = plan or SamplePlan(strategy="grid")
    x = model.check_context(context)
    varied = varied_set(varied, model.n_features)
    axes = [grid_axis(model, x, i, plan.points_per_dim) for i in varied]
    required = int(np.prod([len(a) for a in axes])) + 1
    if required > plan.budget:
        raise BudgetExceededError(required, plan.budget)
    mesh = np.array(list(itertools.product(*axes)), dtype=float)
    samples = np.tile(x, (len(mesh), 1))
    samples[:, list(varied)] = mesh
    return _reduce(model, x, samples, varied, "grid")


def estimate_range(model: Model, context, varied, plan: SamplePlan | None = None) -> RangeEstimate:
    plan = plan or SamplePlan()
    if plan.strategy == "grid":
        return estimate_range_grid(model, context, varied, plan)
    return estimate_range_mc(model, context, varied, plan)
