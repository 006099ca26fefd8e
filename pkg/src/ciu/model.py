"""Black-box model abstraction and the two reference models.

A model is anything that maps a feature vector to an output vector, with a
declared ``[min, max]`` range per feature and ``[absmin, absmax]`` range per
output. The explanation machinery only ever calls :meth:`Model.predict_batch`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.special import expit

from .errors import (
    DataError,
    DimensionError,
    ModelEvaluationError,
    RangeViolationError,
    TrainingError,
    UnsupportedOperationError,
)

KINDS = ("linear-scorer", "mlp-classifier", "external")

# outputs this far outside [absmin, absmax] (relative to the width) are
# treated as float noise and clipped; anything beyond is an error
_OUTPUT_SLACK = 1e-9


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    min: float
    max: float

    def __post_init__(self):
        if not self.name:
            raise ValueError("feature name must be nonempty")
        if not (np.isfinite(self.min) and np.isfinite(self.max)) or not self.min < self.max:
            raise ValueError(f"feature {self.name!r}: need min < max, got [{self.min}, {self.max}]")

    @property
    def width(self) -> float:
        return self.max - self.min


@dataclass(frozen=True)
class OutputSpec:
    name: str
    absmin: float
    absmax: float

    def __post_init__(self):
        if not self.name:
            raise ValueError("output name must be nonempty")
        if not (np.isfinite(self.absmin) and np.isfinite(self.absmax)) or not self.absmin < self.absmax:
            raise ValueError(
                f"output {self.name!r}: need absmin < absmax, got [{self.absmin}, {self.absmax}]"
            )

    @property
    def width(self) -> float:
        return self.absmax - self.absmin


@dataclass(frozen=True)
class ModelDescriptor:
    features: tuple[FeatureSpec, ...]
    outputs: tuple[OutputSpec, ...]
    kind: str = "external"

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if not self.features or not self.outputs:
            raise ValueError("a model needs at least one feature and one output")
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        for label, specs in (("feature", self.features), ("output", self.outputs)):
            names = [s.name for s in specs]
            if len(set(names)) != len(names):
                raise ValueError(f"duplicate {label} names: {names}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "features": [{"name": f.name, "min": f.min, "max": f.max} for f in self.features],
            "outputs": [{"name": o.name, "absmin": o.absmin, "absmax": o.absmax} for o in self.outputs],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelDescriptor":
        return cls(
            features=tuple(FeatureSpec(f["name"], float(f["min"]), float(f["max"])) for f in doc["features"]),
            outputs=tuple(OutputSpec(o["name"], float(o["absmin"]), float(o["absmax"])) for o in doc["outputs"]),
            kind=doc["kind"],
        )


def features_from_data(names: Sequence[str], X) -> tuple[FeatureSpec, ...]:
    """Feature ranges taken as the observed column min/max of a dataset."""
    X = np.asarray(X, dtype=float)
    return tuple(FeatureSpec(n, float(lo), float(hi)) for n, lo, hi in zip(names, X.min(axis=0), X.max(axis=0)))


class Model:
    """Base class. Subclasses implement ``_evaluate`` on a validated batch."""

    kind = "external"

    def __init__(self, features: Sequence[FeatureSpec], outputs: Sequence[OutputSpec]):
        self.descriptor = ModelDescriptor(tuple(features), tuple(outputs), self.kind)
        self._lo = np.array([f.min for f in self.features])
        self._hi = np.array([f.max for f in self.features])
        self._absmin = np.array([o.absmin for o in self.outputs])
        self._absmax = np.array([o.absmax for o in self.outputs])

    @property
    def features(self) -> tuple[FeatureSpec, ...]:
        return self.descriptor.features

    @property
    def outputs(self) -> tuple[OutputSpec, ...]:
        return self.descriptor.outputs

    @property
    def n_features(self) -> int:
        return len(self.features)

    @property
    def n_outputs(self) -> int:
        return len(self.outputs)

    @property
    def feature_names(self) -> list[str]:
        return [f.name for f in self.features]

    @property
    def output_names(self) -> list[str]:
        return [o.name for o in self.outputs]

    def check_context(self, context) -> np.ndarray:
        x = np.asarray(context, dtype=float)
        if x.ndim != 1 or x.shape[0] != self.n_features:
            raise DimensionError(f"context has {x.size} values, model expects {self.n_features}")
        self._check_inputs(x[None, :])
        return x

    def _check_inputs(self, X: np.ndarray) -> None:
        bad = ~np.isfinite(X) | (X < self._lo) | (X > self._hi)
        if bad.any():
            row, col = np.argwhere(bad)[0]
            f = self.features[col]
            raise RangeViolationError(
                f"feature {f.name!r} = {float(X[row, col])!r} is outside [{f.min}, {f.max}]",
                name=f.name,
                value=float(X[row, col]),
            )

    def predict(self, context) -> np.ndarray:
        """Model outputs for a single context, one value per declared output."""
        return self.predict_batch(self.check_context(context)[None, :])[0]

    def predict_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionError(f"batch shape {X.shape} does not match {self.n_features} features")
        self._check_inputs(X)
        Y = self._evaluate(X)
        return self._check_outputs(X, Y)

    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check_outputs(self, X: np.ndarray, Y) -> np.ndarray:
        Y = np.asarray(Y, dtype=float)
        if Y.shape != (X.shape[0], self.n_outputs):
            raise ModelEvaluationError(
                f"model returned shape {Y.shape}, expected {(X.shape[0], self.n_outputs)}",
                sample=X[0].copy(),
            )
        slack = _OUTPUT_SLACK * (self._absmax - self._absmin)
        bad = ~np.isfinite(Y) | (Y < self._absmin - slack) | (Y > self._absmax + slack)
        if bad.any():
            row, col = np.argwhere(bad)[0]
            o = self.outputs[col]
            raise ModelEvaluationError(
                f"output {o.name!r} = {float(Y[row, col])!r} is outside [{o.absmin}, {o.absmax}]",
                sample=X[row].copy(),
            )
        return np.clip(Y, self._absmin, self._absmax)

    def to_dict(self) -> dict:
        raise UnsupportedOperationError(f"{type(self).__name__} cannot be persisted")


def predict(model: Model, context) -> np.ndarray:
    return model.predict(context)


class ExternalModel(Model):
    """Wraps an arbitrary vectorized callable ``fn(X) -> Y`` as a black box.

    ``fn`` receives an ``(n, n_features)`` array and must return
    ``(n, n_outputs)`` values inside the declared output ranges.
    """

    kind = "external"

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], features, outputs):
        super().__init__(features, outputs)
        self.fn = fn

    def _evaluate(self, X):
        try:
            return np.asarray(self.fn(X), dtype=float)
        except Exception as exc:
            # find the first sample that fails on its own
            for row in X:
                try:
                    self.fn(row[None, :])
                except Exception:
                    raise ModelEvaluationError(f"model failed: {exc}", sample=row.copy()) from exc
            raise ModelEvaluationError(f"model failed on batch: {exc}", sample=X[0].copy()) from exc


@dataclass(frozen=True)
class PiecewiseLinear:
    """Monotone piecewise-linear utility transform through ``(xs[i], ys[i])``."""

    xs: tuple[float, ...]
    ys: tuple[float, ...]

    def __post_init__(self):
        xs = tuple(float(v) for v in self.xs)
        ys = tuple(float(v) for v in self.ys)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        if len(xs) < 2 or len(xs) != len(ys):
            raise ValueError("need at least two knots with matching xs/ys")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("knot xs must be strictly increasing")
        dy = np.diff(ys)
        if not (np.all(dy >= 0) or np.all(dy <= 0)):
            raise ValueError("transform must be monotone")

    def __call__(self, v):
        return np.interp(v, self.xs, self.ys)


class LinearScorer(Model):
    """Weighted-sum MCDM scorer: ``intercept + sum_k w_k * t_k(x_k)``.

    ``t_k`` defaults to the identity. When ``output`` is omitted the declared
    output range is the exact attainable range of the score.
    """

    kind = "linear-scorer"

    def __init__(
        self,
        features: Sequence[FeatureSpec],
        weights: Sequence[float],
        intercept: float = 0.0,
        transforms: Sequence[PiecewiseLinear | None] | None = None,
        output: OutputSpec | None = None,
    ):
        features = tuple(features)
        self.weights = np.asarray(weights, dtype=float)
        if self.weights.shape != (len(features),):
            raise DimensionError(f"{self.weights.size} weights for {len(features)} features")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be finite")
        self.intercept = float(intercept)
        self.transforms = tuple(transforms) if transforms is not None else (None,) * len(features)
        if len(self.transforms) != len(features):
            raise DimensionError(f"{len(self.transforms)} transforms for {len(features)} features")

        lo, hi = self.attainable_range(features)
        if output is None:
            output = OutputSpec("score", lo, hi) if hi > lo else OutputSpec("score", lo, lo + 1.0)
        slack = _OUTPUT_SLACK * (output.absmax - output.absmin)
        if lo < output.absmin - slack or hi > output.absmax + slack:
            raise RangeViolationError(
                f"scores span [{lo}, {hi}], outside declared output range [{output.absmin}, {output.absmax}]",
                name=output.name,
            )
        super().__init__(features, (output,))

    def _transform_endpoints(self, features) -> np.ndarray:
        ends = np.empty((len(features), 2))
        for k, (f, t) in enumerate(zip(features, self.transforms)):
            ends[k] = (f.min, f.max) if t is None else (t(f.min), t(f.max))
        return ends

    def attainable_range(self, features=None) -> tuple[float, float]:
        contrib = self._transform_endpoints(features or self.features) * self.weights[:, None]
        return (
            self.intercept + float(contrib.min(axis=1).sum()),
            self.intercept + float(contrib.max(axis=1).sum()),
        )

    def transform_columns(self, X: np.ndarray) -> np.ndarray:
        T = np.array(X, dtype=float)
        for k, t in enumerate(self.transforms):
            if t is not None:
                T[:, k] = t(T[:, k])
        return T

    def _evaluate(self, X):
        return _dense(self.transform_columns(X), self.weights[:, None], np.array([self.intercept]))

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "intercept": self.intercept,
            "transforms": [None if t is None else {"xs": list(t.xs), "ys": list(t.ys)} for t in self.transforms],
        }


def linear_closed_form_ci(model: LinearScorer, feature_index: int) -> float:
    """Exact CI of one feature of a linear scorer: ``|w_k| |t(max) - t(min)| / (absmax - absmin)``.

    Context-independent; used as an oracle against the sampling estimators.
    """
    f = model.features[feature_index]
    t = model.transforms[feature_index]
    span = f.width if t is None else abs(float(t(f.max)) - float(t(f.min)))
    return abs(float(model.weights[feature_index])) * span / model.outputs[0].width


def _dense(A, W, b):
    """``A @ W + b`` accumulated term by term.

    Unlike BLAS, the result for a row does not depend on how many other rows
    share the batch, so a context evaluates bitwise-identically alone or
    inside a sample batch.
    """
    out = np.broadcast_to(b, (A.shape[0], W.shape[1])).copy()
    for k in range(W.shape[0]):
        out += A[:, k, None] * W[k]
    return out


def _softmax(z):
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


class MlpClassifier(Model):
    """One-hidden-layer classifier: min-max scaled inputs, sigmoid hidden, softmax out.

    Inputs are scaled to [0, 1] with the declared feature ranges before the
    first layer, so weights are comparable across features.
    """

    kind = "mlp-classifier"

    def __init__(self, features, class_names: Sequence[str], w1, b1, w2, b2, training: dict | None = None):
        outputs = tuple(OutputSpec(name, 0.0, 1.0) for name in class_names)
        super().__init__(features, outputs)
        self.w1 = np.asarray(w1, dtype=float)
        self.b1 = np.asarray(b1, dtype=float)
        self.w2 = np.asarray(w2, dtype=float)
        self.b2 = np.asarray(b2, dtype=float)
        d, h, c = self.n_features, self.b1.size, self.n_outputs
        if self.w1.shape != (d, h) or self.b1.shape != (h,) or self.w2.shape != (h, c) or self.b2.shape != (c,):
            raise DimensionError(
                f"layer shapes {self.w1.shape}, {self.b1.shape}, {self.w2.shape}, {self.b2.shape} "
                f"inconsistent with {d} inputs and {c} classes"
            )
        self.training = dict(training or {})

    @property
    def class_names(self) -> list[str]:
        return self.output_names

    @property
    def hidden_size(self) -> int:
        return self.b1.size

    @classmethod
    def random(cls, features, class_names, hidden_size: int = 8, seed: int = 0, scale: float = 0.5):
        """Untrained classifier with weights uniform in ``[-scale, scale]``."""
        rng = np.random.default_rng(seed)
        d, c = len(features), len(class_names)
        return cls(
            features,
            class_names,
            rng.uniform(-scale, scale, (d, hidden_size)),
            rng.uniform(-scale, scale, hidden_size),
            rng.uniform(-scale, scale, (hidden_size, c)),
            rng.uniform(-scale, scale, c),
        )

    def scale_inputs(self, X):
        return (X - self._lo) / (self._hi - self._lo)

    def _forward(self, Z):
        hidden = expit(_dense(Z, self.w1, self.b1))
        return hidden, _softmax(_dense(hidden, self.w2, self.b2))

    def _evaluate(self, X):
        return self._forward(self.scale_inputs(X))[1]

    def to_dict(self) -> dict:
        return {
            "w1": self.w1.tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.tolist(),
            "b2": self.b2.tolist(),
        }


def _descend(model: MlpClassifier, Z, labels, epochs: int, learning_rate: float) -> float:
    n = Z.shape[0]
    onehot = np.eye(model.n_outputs)[labels]
    loss = float("nan")
    for epoch in range(epochs):
        hidden, probs = model._forward(Z)
        loss = float(-np.mean(np.log(np.clip(probs[np.arange(n), labels], 1e-300, None))))
        if not np.isfinite(loss):
            raise TrainingError(f"non-finite loss at epoch {epoch} (learning_rate={learning_rate})")
        delta_out = (probs - onehot) / n
        delta_hidden = (delta_out @ model.w2.T) * hidden * (1.0 - hidden)
        model.w2 -= learning_rate * (hidden.T @ delta_out)
        model.b2 -= learning_rate * delta_out.sum(axis=0)
        model.w1 -= learning_rate * (Z.T @ delta_hidden)
        model.b1 -= learning_rate * delta_hidden.sum(axis=0)
        if not (np.all(np.isfinite(model.w1)) and np.all(np.isfinite(model.w2))):
            raise TrainingError(f"weights diverged at epoch {epoch} (learning_rate={learning_rate})")
    return loss


def train_mlp(
    X,
    labels,
    features: Sequence[FeatureSpec],
    class_names: Sequence[str],
    hidden_size: int = 8,
    epochs: int = 3000,
    learning_rate: float = 1.0,
    seed: int = 0,
) -> tuple[MlpClassifier, float]:
    """Full-batch gradient descent on mean cross-entropy.

    Returns the trained classifier and its final training accuracy. Weights
    are initialized uniform in [-0.5, 0.5] from ``seed``, so training is
    reproducible bit for bit on one platform.
    """
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError("training set is empty")
    if labels.shape != (X.shape[0],):
        raise DimensionError(f"{labels.size} labels for {X.shape[0]} instances")
    n_classes = len(class_names)
    if labels.min() < 0 or labels.max() >= n_classes:
        raise DataError(f"labels must lie in 0..{n_classes - 1}")

    model = MlpClassifier.random(features, class_names, hidden_size, seed)
    model._check_inputs(X)
    Z = model.scale_inputs(X)

    # divergence is checked explicitly inside _descend
    with np.errstate(over="ignore", invalid="ignore"):
        loss = _descend(model, Z, labels, epochs, learning_rate)

    accuracy = float(np.mean(model._forward(Z)[1].argmax(axis=1) == labels))
    model.training = {
        "seed": seed,
        "epochs": epochs,
        "learning_rate": learning_rate,
        "hidden_size": hidden_size,
        "final_loss": float(loss),
        "accuracy": accuracy,
    }
    return model, accuracy


FORMAT_TAG = "ciu-model"


def model_to_dict(model: Model) -> dict:
    doc = {
        "format": FORMAT_TAG,
        "version": 1,
        "descriptor": model.descriptor.to_dict(),
        "parameters": model.to_dict(),
    }
    if getattr(model, "training", None):
        doc["training"] = model.training
    return doc


def model_from_dict(doc: dict) -> Model:
    try:
        if doc.get("format") != FORMAT_TAG:
            raise DataError(f"not a {FORMAT_TAG} document")
        desc = ModelDescriptor.from_dict(doc["descriptor"])
        params = doc["parameters"]
        if desc.kind == "linear-scorer":
            transforms = [None if t is None else PiecewiseLinear(t["xs"], t["ys"]) for t in params["transforms"]]
            model = LinearScorer(desc.features, params["weights"], params["intercept"], transforms, desc.outputs[0])
            model.training = dict(doc.get("training", {}))
            return model
        if desc.kind == "mlp-classifier":
            return MlpClassifier(
                desc.features,
                [o.name for o in desc.outputs],
                params["w1"],
                params["b1"],
                params["w2"],
                params["b2"],
                training=doc.get("training"),
            )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DataError):
            raise
        raise DataError(f"malformed model document: {exc}") from exc
    raise DataError(f"model kind {desc.kind!r} cannot be loaded from JSON")


def save_model(model: Model, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n", encoding="utf-8")


def load_model(path) -> Model:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc.msg})", line=exc.lineno) from exc
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"{path}: cannot read ({exc})") from exc
    return model_from_dict(doc)
