import json
import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ciu.core import InstanceCiu, explain_instance, percent
from ciu.datasets import car_reference_scorer, load_cars
from ciu.errors import DataError, MismatchError, UnsupportedOperationError
from ciu.estimator import SamplePlan
from ciu.explain import (
    CLASSIFICATION_VOCABULARY,
    PREFERENCE_VOCABULARY,
    Vocabulary,
    biggest_contributor,
    compare_instances,
    complete_explanation,
    contrastive_explanation,
    explanations_to_json,
    format_cu,
    load_vocabulary,
    symbolize,
)
from ciu.model import ExternalModel, FeatureSpec, LinearScorer, OutputSpec

from .conftest import IRIS_INSTANCE
from .fixtures import IRIS_TABLE, record, table_instance

GRID = SamplePlan(strategy="grid", points_per_dim=11)


@pytest.mark.parametrize(
    "d, axis, expected",
    [
        (0.6, "importance", "Rather important"),
        (0.25, "utility", "Not typical"),
        (0.0, "importance", "Not important"),
        (0.0, "utility", "Not typical"),
        (0.26, "importance", "Important"),
        (0.5, "utility", "Unlikely"),
        (0.75, "utility", "Typical"),
        (0.76, "utility", "Very typical"),
        (1.0, "importance", "Highly important"),
    ],
)
def test_symbolize(d, axis, expected):
    assert symbolize(d, CLASSIFICATION_VOCABULARY, axis) == expected


def test_symbolize_rejects_out_of_range():
    for d in (-0.01, 1.01, float("nan")):
        with pytest.raises(ValueError):
            symbolize(d)


@given(st.floats(0, 1), st.floats(0, 1))
def test_symbolize_monotone(a, b):
    lo, hi = min(a, b), max(a, b)
    assert CLASSIFICATION_VOCABULARY.bucket(lo) <= CLASSIFICATION_VOCABULARY.bucket(hi)


def test_vocabulary_validation(tmp_path):
    with pytest.raises(ValueError):
        Vocabulary((0.5, 0.4, 1.0), ("a",) * 3, ("b",) * 3, ("a",) * 3, ("b",) * 3)
    with pytest.raises(ValueError):
        Vocabulary((0.5, 0.9), ("a",) * 2, ("b",) * 2, ("a",) * 2, ("b",) * 2)
    path = tmp_path / "v.json"
    path.write_text(json.dumps({"bounds": [0.5, 1.0], "importance": ["Minor", "Major"], "utility": ["Poor", "Fine"]}))
    v = load_vocabulary(path)
    assert symbolize(0.7, v, "utility") == "Fine"
    assert v.importance_inline == ("minor", "major")
    assert Vocabulary.from_dict(PREFERENCE_VOCABULARY.to_dict()) == PREFERENCE_VOCABULARY
    path.write_text("{}")
    with pytest.raises(DataError):
        load_vocabulary(path)


def test_format_cu():
    assert [format_cu(v) for v in (1.0, 0.0, 0.6909, 0.905, 0.125)] == ["1", "0", "0.69", "0.91", "0.13"]


def test_biggest_contributor_tie_break():
    # CI tie between sepal length and sepal width; higher CU wins
    inst = table_instance(IRIS_TABLE)
    assert biggest_contributor(inst.for_output(2)) == 2


def test_complete_explanation_from_table():
    inst = table_instance(IRIS_TABLE)
    exp = complete_explanation(inst, 2)
    assert exp.headline == "The model's prediction is 98% Iris Virginica. Because;"
    assert [p.text for p in exp.phrases] == [
        "The petal length which is a highly important (CI=89%) feature has a very typical (CU=1) size.",
        "The petal width which is rather an important (CI=55%) feature has a typical (CU=0.69) size.",
        "The sepal length which is a highly important (CI=100%) feature has a very typical (CU=1) size.",
        "The sepal width which is a highly important (CI=100%) feature has a very typical (CU=0.91) size.",
    ]
    assert exp.summary == "And the biggest contributing feature is the sepal length."
    assert exp.summary_feature == 2


def test_complete_defaults_to_predicted_output():
    inst = table_instance(IRIS_TABLE)
    assert complete_explanation(inst).output_name == "Iris Virginica"


def test_all_degenerate():
    inst = table_instance([("a", 40, 40, 40), ("b", 10, 10, 10)])
    exp = complete_explanation(inst, 2)
    assert all("has no effect" in p.text for p in exp.phrases)
    assert exp.summary_feature is None
    assert "no feature contributes more" in exp.summary


def test_single_feature_model(identity_model):
    exp = complete_explanation(explain_instance(identity_model, [0.3], GRID))
    assert len(exp.phrases) == 1 and exp.summary_feature == 0
    assert exp.headline == "The model's y is 0.3. Because;"
    assert "has an average (CU=0.3) value" in exp.phrases[0].text


def test_numbers_round_trip_through_json(iris_model):
    inst = explain_instance(iris_model, IRIS_INSTANCE)
    doc = json.loads(explanations_to_json(complete_explanation(inst)))
    again = InstanceCiu.from_json(inst.to_json())
    for phrase in doc["phrases"]:
        r = again.results[doc["output_index"]][phrase["feature_index"]]
        ci_txt, cu_txt = re.search(r"CI=(\d+)%.*CU=([\d.]+)", phrase["text"]).groups()
        assert int(ci_txt) == percent(r.ci) == phrase["ci_percent"]
        assert cu_txt == format_cu(r.cu) == phrase["cu"]
        assert phrase["importance"] == symbolize(r.ci, CLASSIFICATION_VOCABULARY, "importance")


@settings(max_examples=50)
@given(st.permutations(range(4)), st.lists(st.floats(0, 1), min_size=4, max_size=4, unique=True))
def test_summary_invariant_under_permutation(perm, cis):
    rows = [(f"f{k}", 0.0, 100.0 * c, 50.0 * c) for k, c in enumerate(cis)]
    base = complete_explanation(table_instance(rows), 2)
    shuffled = complete_explanation(table_instance([rows[i] for i in perm]), 2)
    if base.summary_feature is None:
        assert shuffled.summary_feature is None
    else:
        assert shuffled.phrases[shuffled.summary_feature].feature == base.phrases[base.summary_feature].feature


def test_contrastive_from_table():
    inst = table_instance(IRIS_TABLE)
    blocks = contrastive_explanation(inst)
    assert [b.headline for b in blocks] == [
        "It is not Iris Setosa(0%), because;",
        "It is not Iris Versicolor(2%), because;",
    ]
    assert all(len(b.phrases) == 4 and b.summary == "" for b in blocks)


def test_contrastive_uses_each_class_values():
    feats = [FeatureSpec("x1", 0.0, 1.0), FeatureSpec("x2", 0.0, 1.0)]
    # class 0 driven by x1 over its full range, class 1 by x2 over half of it
    model = ExternalModel(
        lambda X: np.column_stack([X[:, 0], 0.5 * X[:, 1]]), feats, [OutputSpec("c0", 0, 1), OutputSpec("c1", 0, 1)]
    )
    inst = explain_instance(model, [0.9, 0.2], GRID)
    assert inst.predicted == 0
    (block,) = contrastive_explanation(inst)
    assert block.output_index == 1
    assert [p.ci_percent for p in block.phrases] == [0, 50]
    assert block.phrases[0].degenerate and "has no effect" in block.phrases[0].text
    assert block.phrases[1].cu == "0.2"
    # the complete explanation for class 0 has the mirrored numbers
    assert [p.ci_percent for p in complete_explanation(inst).phrases] == [100, 0]


def test_contrastive_tie_resolves_to_lowest_index():
    inst = table_instance([("a", 0, 50, 20)], output_names=("yes", "no"), target=0, prediction=(0.5, 0.5))
    (block,) = contrastive_explanation(inst)
    assert block.output_name == "no"


def test_contrastive_errors(identity_model):
    with pytest.raises(UnsupportedOperationError):
        contrastive_explanation(explain_instance(identity_model, [0.3], GRID))
    with pytest.raises(ValueError):
        contrastive_explanation(table_instance(IRIS_TABLE), predicted=0)


def test_iris_contrastive_blocks(iris_model):
    inst = explain_instance(iris_model, IRIS_INSTANCE)
    blocks = contrastive_explanation(inst)
    assert [b.output_name for b in blocks] == ["Iris Setosa", "Iris Versicolor"]
    for b in blocks:
        for p, r in zip(b.phrases, inst.for_output(b.output_index)):
            assert p.ci_percent == percent(r.ci)


def test_compare_self_is_equal(iris_model):
    inst = explain_instance(iris_model, IRIS_INSTANCE)
    cmp = compare_instances(inst, inst, 2)
    assert all(r.verdict == "equal" for r in cmp.rows)
    assert cmp.preferred is None and cmp.reason_feature is None


def test_compare_linear_scorer(unit_features):
    model = LinearScorer(unit_features, [0.7, 0.3])
    a = explain_instance(model, [1.0, 0.5], GRID)
    b = explain_instance(model, [0.6, 0.5], GRID)
    cmp = compare_instances(a, b, names=("selected", "average"))
    # direct arithmetic: CI = weights, CU = feature value
    score_a = 0.7 * 1.0 + 0.3 * 0.5
    score_b = 0.7 * 0.6 + 0.3 * 0.5
    assert cmp.score_a == pytest.approx(score_a, abs=1e-12)
    assert cmp.score_b == pytest.approx(score_b, abs=1e-12)
    assert [r.verdict for r in cmp.rows] == ["a", "equal"]
    assert cmp.preferred == 0 and cmp.reason_feature == 0
    assert cmp.summary.startswith("selected is better because of the importance and utility value of the x1 criterion")


def test_compare_mismatch(identity_model, unit_features):
    a = explain_instance(identity_model, [0.3], GRID)
    b = explain_instance(LinearScorer(unit_features, [1, 1]), [0.3, 0.3], GRID)
    with pytest.raises(MismatchError):
        compare_instances(a, b)


def test_three_car_comparison():
    cars = load_cars()
    model = car_reference_scorer()
    prices = cars.X[:, 0]
    selected, average, expensive = (
        int(np.argmax(model.predict_batch(cars.X)[:, 0])),
        int(np.argsort(prices)[len(prices) // 2]),
        int(np.argmax(prices)),
    )
    explained = {i: explain_instance(model, cars.X[i], GRID) for i in (selected, average, expensive)}
    comparisons = [
        compare_instances(explained[selected], explained[rival], 0, ("selected", name))
        for rival, name in ((average, "average"), (expensive, "expensive"))
    ]
    assert len(comparisons) == 2
    for cmp in comparisons:
        assert len(cmp.rows) == 13
        assert cmp.preferred == 0
        text = cmp.to_text()
        assert text.count("\n") == 14


def test_preference_vocabulary_used_for_scorer():
    model = car_reference_scorer()
    exp = complete_explanation(explain_instance(model, load_cars().X[0], GRID))
    assert exp.headline.startswith("The model's preference is ")
    assert all(p.text.endswith("value.") for p in exp.phrases)


def test_phrase_bucket_follows_displayed_value():
    from ciu.explain import make_phrase

    # 0.7504 shows as 0.75, which belongs to the third bucket
    phrase = make_phrase("f", 0, record(0, 0, 0.0, 1.0, 0.7504), CLASSIFICATION_VOCABULARY)
    assert phrase.cu == "0.75"
    assert phrase.utility == "Typical"
    assert "a typical (CU=0.75)" in phrase.text
