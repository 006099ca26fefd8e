"""Contextual importance (CI) and contextual utility (CU).

    CI = (cmax - cmin) / (absmax - absmin)
    CU = (y - cmin) / (cmax - cmin)

All values are kept as raw fractions; percentages are a display concern.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

import numpy as np

from .errors import ConsistencyError
from .estimator import RangeEstimate, SamplePlan, estimate_range, varied_set
from .model import Model, OutputSpec

DEGENERATE_CU = 0.5


def round_half_up(value: float, digits: int = 0) -> float:
    """Round half away from zero on the decimal representation (0.125 -> 0.13)."""
    q = Decimal(1).scaleb(-digits)
    return float(Decimal(repr(float(value))).quantize(q, rounding=ROUND_HALF_UP))


def percent(fraction: float) -> int:
    """Integer display percent, rounded half-up."""
    return int(round_half_up(100.0 * fraction))


def contextual_importance(cmin: float, cmax: float, output: OutputSpec) -> float:
    if cmax < cmin:
        raise ConsistencyError(f"corrupt range estimate: cmax {cmax} < cmin {cmin}")
    return (cmax - cmin) / (output.absmax - output.absmin)


def contextual_utility(y: float, cmin: float, cmax: float) -> tuple[float, bool]:
    """CU and a degenerate flag. A zero-width range gives CU 0.5, flagged."""
    if cmax < cmin:
        raise ConsistencyError(f"corrupt range estimate: cmax {cmax} < cmin {cmin}")
    if not cmin <= y <= cmax:
        raise ConsistencyError(f"y = {y} outside observed range [{cmin}, {cmax}]; context point was not sampled")
    if cmax == cmin:
        return DEGENERATE_CU, True
    return (y - cmin) / (cmax - cmin), False


@dataclass(frozen=True)
class CiuResult:
    varied: tuple[int, ...]
    output_index: int
    cmin: float
    cmax: float
    y: float
    ci: float
    cu: float
    degenerate: bool

    @classmethod
    def from_range(cls, estimate: RangeEstimate, output_index: int, output: OutputSpec) -> "CiuResult":
        cmin = float(estimate.cmin[output_index])
        cmax = float(estimate.cmax[output_index])
        y = float(estimate.y[output_index])
        ci = contextual_importance(cmin, cmax, output)
        cu, degenerate = contextual_utility(y, cmin, cmax)
        return cls(tuple(estimate.varied), output_index, cmin, cmax, y, ci, cu, degenerate)

    def to_dict(self) -> dict:
        return {
            "varied": list(self.varied),
            "output_index": self.output_index,
            "cmin": self.cmin,
            "cmax": self.cmax,
            "y": self.y,
            "ci": self.ci,
            "cu": self.cu,
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CiuResult":
        return cls(
            tuple(doc["varied"]),
            int(doc["output_index"]),
            float(doc["cmin"]),
            float(doc["cmax"]),
            float(doc["y"]),
            float(doc["ci"]),
            float(doc["cu"]),
            bool(doc["degenerate"]),
        )


def ciu_from_range(estimate: RangeEstimate, outputs: Sequence[OutputSpec]) -> list[CiuResult]:
    return [CiuResult.from_range(estimate, j, o) for j, o in enumerate(outputs)]


@dataclass
class InstanceCiu:
    """CI/CU of every feature (and any requested subsets) for one context.

    ``results[j][k]`` is the record for output ``j`` and feature ``k``;
    ``subsets[s][j]`` the record for requested subset ``s`` and output ``j``.
    """

    feature_names: list[str]
    outputs: list[OutputSpec]
    kind: str
    context: np.ndarray
    prediction: np.ndarray
    plan: SamplePlan
    results: list[list[CiuResult]]
    subsets: list[list[CiuResult]] = field(default_factory=list)

    @property
    def output_names(self) -> list[str]:
        return [o.name for o in self.outputs]

    @property
    def predicted(self) -> int:
        """Index of the largest output; ties resolve to the lowest index."""
        return int(np.argmax(self.prediction))

    def for_output(self, j: int) -> list[CiuResult]:
        return self.results[j]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "features": list(self.feature_names),
            "outputs": [{"name": o.name, "absmin": o.absmin, "absmax": o.absmax} for o in self.outputs],
            "context": [float(v) for v in self.context],
            "prediction": [float(v) for v in self.prediction],
            "plan": self.plan.to_dict(),
            "results": [[r.to_dict() for r in row] for row in self.results],
            "subsets": [[r.to_dict() for r in row] for row in self.subsets],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "InstanceCiu":
        return cls(
            feature_names=list(doc["features"]),
            outputs=[OutputSpec(o["name"], float(o["absmin"]), float(o["absmax"])) for o in doc["outputs"]],
            kind=doc["kind"],
            context=np.array(doc["context"], dtype=float),
            prediction=np.array(doc["prediction"], dtype=float),
            plan=SamplePlan.from_dict(doc["plan"]),
            results=[[CiuResult.from_dict(r) for r in row] for row in doc["results"]],
            subsets=[[CiuResult.from_dict(r) for r in row] for row in doc.get("subsets", [])],
        )

    @classmethod
    def from_json(cls, text: str) -> "InstanceCiu":
        return cls.from_dict(json.loads(text))


def explain_instance(
    model: Model,
    context,
    plan: SamplePlan | None = None,
    subsets: Iterable[Iterable[int]] | None = None,
) -> InstanceCiu:
    """Run the estimator for every single feature (and each subset) and compute CI/CU for every output."""
    plan = plan or SamplePlan()
    x = model.check_context(context)
    per_feature = [ciu_from_range(estimate_range(model, x, k, plan), model.outputs) for k in range(model.n_features)]
    # transpose to results[output][feature]
    results = [[per_feature[k][j] for k in range(model.n_features)] for j in range(model.n_outputs)]
    subset_results = [
        ciu_from_range(estimate_range(model, x, varied_set(s, model.n_features), plan), model.outputs)
        for s in (subsets or ())
    ]
    return InstanceCiu(
        feature_names=model.feature_names,
        outputs=list(model.outputs),
        kind=model.kind,
        context=x.copy(),
        prediction=model.predict(x),
        plan=plan,
        results=results,
        subsets=subset_results,
    )


def subset_ciu(model: Model, context, varied, plan: SamplePlan | None = None) -> list[CiuResult]:
    """Joint CI/CU of a feature subset, one record per output."""
    x = model.check_context(context)
    return ciu_from_range(estimate_range(model, x, varied_set(varied, model.n_features), plan), model.outputs)
