"""Hand-built CI/CU records used as arithmetic fixtures for the Iris and car examples."""

import numpy as np

from ciu.core import CiuResult, InstanceCiu
from ciu.estimator import SamplePlan
from ciu.model import OutputSpec

# (feature, cmin, cmax, y) on a 0-100 output scale, Virginica output
IRIS_TABLE = [
    ("petal length", 3, 92, 92),
    ("petal width", 1, 56, 39),
    ("sepal length", 0, 100, 100),
    ("sepal width", 0, 100, 91),
]

# (feature, cmin, cmax) on a 0-100 preference scale
CAR_TABLE = [("price", 13, 79), ("power", 14, 78), ("acceleration", 13, 68), ("speed", 10, 64)]
CAR_CI_PERCENT = [66, 64, 55, 54]
CAR_CU = [0.67, 0.15, 0.30, 0.25]


def record(k, j, cmin, cmax, y, width=1.0):
    ci = (cmax - cmin) / width
    degenerate = cmax == cmin
    cu = 0.5 if degenerate else (y - cmin) / (cmax - cmin)
    return CiuResult((k,), j, cmin, cmax, y, ci, cu, degenerate)


def table_instance(rows, output_names=("Iris Setosa", "Iris Versicolor", "Iris Virginica"), target=2,
                   prediction=(0.0, 0.02, 0.98), kind="mlp-classifier"):
    """InstanceCiu whose ``target`` output carries the given rows (scaled to [0, 1]).

    Other outputs get the same rows mirrored, so they differ from the target.
    """
    outputs = [OutputSpec(n, 0.0, 1.0) for n in output_names]
    results = []
    for j in range(len(outputs)):
        row = []
        for k, (_, cmin, cmax, y) in enumerate(rows):
            lo, hi, yy = cmin / 100, cmax / 100, y / 100
            if j != target:
                yy = lo + (hi - yy)
            row.append(record(k, j, lo, hi, yy))
        results.append(row)
    return InstanceCiu(
        feature_names=[r[0] for r in rows],
        outputs=outputs,
        kind=kind,
        context=np.zeros(len(rows)),
        prediction=np.array(prediction, dtype=float),
        plan=SamplePlan(),
        results=results,
    )
