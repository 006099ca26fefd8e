import numpy as np
import pytest

from ciu.datasets import load_iris
from ciu.model import ExternalModel, FeatureSpec, LinearScorer, OutputSpec, train_mlp

IRIS_INSTANCE = [7.0, 3.2, 6.0, 1.8]  # sepal length, sepal width, petal length, petal width


@pytest.fixture(scope="session")
def iris_data():
    return load_iris()


@pytest.fixture(scope="session")
def iris_trained(iris_data):
    names, labels = iris_data.classes()
    return train_mlp(iris_data.X, labels, iris_data.features(), names, hidden_size=8, seed=0)


@pytest.fixture(scope="session")
def iris_model(iris_trained):
    return iris_trained[0]


@pytest.fixture
def unit_features():
    return (FeatureSpec("x1", 0.0, 1.0), FeatureSpec("x2", 0.0, 1.0))


@pytest.fixture
def identity_model():
    """y = x1 on [0, 1]."""
    return LinearScorer([FeatureSpec("x1", 0.0, 1.0)], [1.0], output=OutputSpec("y", 0.0, 1.0))


@pytest.fixture
def product_model(unit_features):
    """y = x1 * x2 on [0, 1]^2."""
    return ExternalModel(lambda X: (X[:, 0] * X[:, 1])[:, None], unit_features, [OutputSpec("y", 0.0, 1.0)])


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" in nodeid and getattr(rep, "when", "call") == "call":
                rows.append((nodeid.split("::")[-1], "PASS" if outcome == "passed" else "FAIL"))
    if rows:
        terminalreporter.section("acceptance criteria")
        for name, status in sorted(rows):
            terminalreporter.write_line(f"{status}  {name}")
