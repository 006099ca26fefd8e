"""
How many samples does the Monte-Carlo estimate need?
====================================================

For the Iris network, compare Monte-Carlo estimates of the importance of each
feature with a dense grid, as the sample count grows.
"""

import numpy as np

from ciu.core import explain_instance
from ciu.datasets import load_iris
from ciu.estimator import SamplePlan
from ciu.model import train_mlp

data = load_iris()
names, labels = data.classes()
model, _ = train_mlp(data.X, labels, data.features(), names, seed=0)
flower = [6.1, 2.8, 4.7, 1.2]

reference = explain_instance(model, flower, SamplePlan(strategy="grid", points_per_dim=2001))
exact = np.array([[r.ci for r in row] for row in reference.results])

print("samples  worst |CI error| over 10 seeds")
for n in (5, 20, 50, 150, 500, 2000):
    worst = 0.0
    for seed in range(10):
        est = explain_instance(model, flower, SamplePlan(sample_count=n, seed=seed))
        ci = np.array([[r.ci for r in row] for row in est.results])
        worst = max(worst, float(np.abs(ci - exact).max()))
    print(f"{n:7d}  {worst:.4f}")
