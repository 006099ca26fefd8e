"""
Choosing a car with a weighted utility model
============================================

A preference model scores cars on thirteen criteria. Fit it to the bundled
car data, explain the score of one car and compare two candidates.
"""

from pathlib import Path

from ciu.core import explain_instance
from ciu.datasets import car_features, car_transforms, fit_linear_scorer, load_cars
from ciu.estimator import SamplePlan
from ciu.explain import compare_instances, complete_explanation
from ciu.render import bar_chart_ciu, bar_chart_contrast, write_svg

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)

data = load_cars()
model = fit_linear_scorer(data, car_transforms(), car_features())
print(f"fit on {model.training['n']} cars, rmse {model.training['rmse']:.4f}\n")

# every criterion is monotone, so the two range endpoints already give the extremes
plan = SamplePlan(strategy="grid", points_per_dim=2)
first = explain_instance(model, data.X[0], plan)
print(complete_explanation(first).to_text())
print()

second = explain_instance(model, data.X[1], plan)
comparison = compare_instances(first, second, names=("car 0", "car 1"))
print(comparison.to_text())

write_svg(bar_chart_ciu(first, sort=True), out / "car_0.svg")
write_svg(bar_chart_contrast(comparison), out / "car_0_vs_1.svg")
print(f"\ncharts written to {out}")
