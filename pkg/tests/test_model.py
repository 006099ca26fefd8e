import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ciu.errors import DataError, DimensionError, ModelEvaluationError, RangeViolationError, TrainingError
from ciu.estimator import SamplePlan, estimate_range_grid
from ciu.model import (
    ExternalModel,
    FeatureSpec,
    LinearScorer,
    MlpClassifier,
    ModelDescriptor,
    OutputSpec,
    PiecewiseLinear,
    linear_closed_form_ci,
    load_model,
    model_from_dict,
    model_to_dict,
    predict,
    save_model,
    train_mlp,
)

from .conftest import IRIS_INSTANCE


def test_specs_reject_empty_ranges():
    with pytest.raises(ValueError):
        FeatureSpec("a", 1.0, 1.0)
    with pytest.raises(ValueError):
        OutputSpec("y", 2.0, 1.0)
    with pytest.raises(ValueError):
        FeatureSpec("", 0.0, 1.0)


def test_descriptor_rejects_duplicate_names():
    f = FeatureSpec("a", 0, 1)
    with pytest.raises(ValueError):
        ModelDescriptor((f, f), (OutputSpec("y", 0, 1),))
    with pytest.raises(ValueError):
        ModelDescriptor((), (OutputSpec("y", 0, 1),))


def test_zero_weights_predict_absmin(unit_features):
    model = LinearScorer(unit_features, [0.0, 0.0])
    assert model.outputs[0].absmin == 0.0
    assert predict(model, [0.2, 0.9]).tolist() == [0.0]


def test_identity_model(identity_model):
    assert identity_model.predict([0.3]).tolist() == [0.3]


def test_out_of_range_context_names_feature(identity_model):
    with pytest.raises(RangeViolationError) as err:
        identity_model.predict([1.5])
    assert err.value.name == "x1"
    assert "x1" in str(err.value)


def test_dimension_mismatch(identity_model):
    with pytest.raises(DimensionError):
        identity_model.predict([0.1, 0.2])


def test_declared_output_range_must_cover_scores(unit_features):
    with pytest.raises(RangeViolationError):
        LinearScorer(unit_features, [1.0, 1.0], output=OutputSpec("y", 0.0, 1.0))


def test_decreasing_transform():
    t = PiecewiseLinear((0, 5, 10), (1.0, 0.5, 0.0))
    model = LinearScorer([FeatureSpec("price", 0, 10)], [2.0], transforms=[t])
    assert model.outputs[0].absmin == 0.0 and model.outputs[0].absmax == 2.0
    assert model.predict([2.5]).tolist() == [1.5]
    with pytest.raises(ValueError):
        PiecewiseLinear((0, 1, 2), (0, 1, 0))


@pytest.mark.parametrize(
    "weights, absmax, expected",
    [
        ((0.5, 0.5), 1.0, (0.5, 0.5)),
        ((0.0, 1.0), 1.0, (0.0, 1.0)),
        ((3.0, 1.0), 4.0, (0.75, 0.25)),
    ],
)
def test_closed_form_ci(unit_features, weights, absmax, expected):
    model = LinearScorer(unit_features, weights, output=OutputSpec("y", 0.0, absmax))
    got = [linear_closed_form_ci(model, k) for k in range(2)]
    assert got == pytest.approx(expected, abs=1e-15)
    # independent route: exhaustive grid over each feature
    for k in range(2):
        est = estimate_range_grid(model, [0.4, 0.7], k, SamplePlan(strategy="grid", points_per_dim=11))
        assert (est.cmax[0] - est.cmin[0]) / absmax == pytest.approx(expected[k], abs=1e-12)


linear_models = st.integers(1, 5).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(-5, 5), min_size=n, max_size=n),
        st.lists(st.floats(0.1, 10), min_size=n, max_size=n),
        st.lists(st.floats(0, 3), min_size=n, max_size=n),
        st.lists(st.floats(0, 1), min_size=n, max_size=n),
        st.lists(st.floats(0, 1), min_size=n, max_size=n),
    )
)


@settings(max_examples=60, deadline=None)
@given(linear_models)
def test_linear_scorer_monotone_in_nonnegative_features(params):
    lows, widths, weights, u, v = params
    feats = [FeatureSpec(f"f{k}", lo, lo + w) for k, (lo, w) in enumerate(zip(lows, widths))]
    model = LinearScorer(feats, weights)
    a = np.array([f.min + min(p, q) * f.width for f, p, q in zip(feats, u, v)])
    b = np.array([f.min + max(p, q) * f.width for f, p, q in zip(feats, u, v)])
    assert model.predict(a)[0] <= model.predict(b)[0] + 1e-12


def test_mlp_outputs_sum_to_one(iris_model, iris_data):
    P = iris_model.predict_batch(iris_data.X)
    assert np.all((P >= 0) & (P <= 1))
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.lists(st.floats(0, 1), min_size=3, max_size=3))
def test_random_mlp_outputs_sum_to_one(seed, u):
    feats = [FeatureSpec(f"f{k}", -1.0, 2.0) for k in range(3)]
    model = MlpClassifier.random(feats, ["a", "b", "c", "d"], hidden_size=5, seed=seed, scale=4.0)
    p = model.predict([-1 + 3 * x for x in u])
    assert abs(p.sum() - 1.0) <= 1e-9


def test_iris_model_predicts_virginica(iris_trained, iris_model):
    _, accuracy = iris_trained
    assert accuracy >= 0.95
    assert iris_model.class_names[int(np.argmax(iris_model.predict(IRIS_INSTANCE)))] == "Iris Virginica"


def test_predict_is_bitwise_repeatable(iris_model):
    a = iris_model.predict(IRIS_INSTANCE)
    b = iris_model.predict(IRIS_INSTANCE)
    assert a.tobytes() == b.tobytes()


def test_train_same_seed_bitwise_identical(iris_data):
    names, labels = iris_data.classes()
    m1, _ = train_mlp(iris_data.X, labels, iris_data.features(), names, epochs=200, seed=7)
    m2, _ = train_mlp(iris_data.X, labels, iris_data.features(), names, epochs=200, seed=7)
    m3, _ = train_mlp(iris_data.X, labels, iris_data.features(), names, epochs=200, seed=8)
    assert m1.w1.tobytes() == m2.w1.tobytes() and m1.w2.tobytes() == m2.w2.tobytes()
    assert m1.w1.tobytes() != m3.w1.tobytes()


def test_single_instance_memorized():
    feats = [FeatureSpec("a", 0.0, 1.0), FeatureSpec("b", 0.0, 1.0)]
    _, acc = train_mlp([[0.2, 0.8]], [1], feats, ["no", "yes"], hidden_size=3, epochs=200)
    assert acc == 1.0


def test_divergent_training_aborts(iris_data):
    names, labels = iris_data.classes()
    with pytest.raises(TrainingError):
        train_mlp(iris_data.X, labels, iris_data.features(), names, epochs=50, learning_rate=1e308)


def test_external_model_failure_carries_sample(unit_features):
    def fn(X):
        if np.any(X[:, 0] > 0.5):
            raise ArithmeticError("boom")
        return X[:, :1]

    model = ExternalModel(fn, unit_features, [OutputSpec("y", 0, 1)])
    with pytest.raises(ModelEvaluationError) as err:
        model.predict_batch(np.array([[0.1, 0.1], [0.9, 0.2]]))
    assert err.value.sample.tolist() == [0.9, 0.2]


def test_external_model_output_out_of_range(unit_features):
    model = ExternalModel(lambda X: X[:, :1] * 3, unit_features, [OutputSpec("y", 0, 1)])
    with pytest.raises(ModelEvaluationError):
        model.predict([0.9, 0.0])


def test_persistence_round_trip(tmp_path, iris_model):
    path = tmp_path / "m.json"
    save_model(iris_model, path)
    loaded = load_model(path)
    assert loaded.predict(IRIS_INSTANCE).tobytes() == iris_model.predict(IRIS_INSTANCE).tobytes()
    doc = json.loads(path.read_text())
    assert doc["training"]["seed"] == 0 and doc["training"]["accuracy"] >= 0.95
    assert doc["descriptor"]["kind"] == "mlp-classifier"

    t = PiecewiseLinear((0, 1), (1, 0))
    lin = LinearScorer([FeatureSpec("a", 0, 1), FeatureSpec("b", 0, 2)], [0.3, 0.2], 0.1, [t, None])
    again = model_from_dict(json.loads(json.dumps(model_to_dict(lin))))
    assert again.predict([0.25, 1.5]).tolist() == lin.predict([0.25, 1.5]).tolist()


def test_malformed_model_document():
    with pytest.raises(DataError):
        model_from_dict({"format": "nope"})
    with pytest.raises(DataError):
        model_from_dict({"format": "ciu-model", "descriptor": {"kind": "mlp-classifier"}})
