"""
Explaining an Iris classifier
=============================

Train the small neural network on the bundled Iris data, then explain why it
calls one flower Iris Virginica and why it rejects the other two species.
Response curves and a bar chart are written next to this script.
"""

from pathlib import Path

from ciu.core import explain_instance
from ciu.datasets import load_iris
from ciu.explain import complete_explanation, contrastive_explanation
from ciu.model import train_mlp
from ciu.render import bar_chart_ciu, plot_response_curve, write_svg

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)

data = load_iris()
names, labels = data.classes()
model, accuracy = train_mlp(data.X, labels, data.features(), names, hidden_size=8, seed=0)
print(f"training accuracy: {accuracy:.3f}\n")

# sepal length, sepal width, petal length, petal width
flower = [7.0, 3.2, 6.0, 1.8]
instance = explain_instance(model, flower)

print(complete_explanation(instance).to_text())
print()
for block in contrastive_explanation(instance):
    print(block.to_text())
    print()

# one curve per feature, for the predicted class
for k, name in enumerate(model.feature_names):
    write_svg(plot_response_curve(model, flower, k, instance.predicted),
              out / f"iris_{name.replace(' ', '_')}.svg")
write_svg(bar_chart_ciu(instance, sort=True), out / "iris_bars.svg")
print(f"charts written to {out}")
