"""CSV datasets and the bundled Iris / synthetic car data.

CSV layout: a header row of feature names followed by one label (or score)
column; UTF-8, comma-separated, ``.`` as decimal point.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.optimize import nnls

from .errors import DataError
from .model import FeatureSpec, LinearScorer, OutputSpec, PiecewiseLinear, features_from_data


@dataclass
class Dataset:
    feature_names: list[str]
    target_name: str
    X: np.ndarray
    target: list

    @property
    def numeric_target(self) -> bool:
        return all(isinstance(t, float) for t in self.target)

    def classes(self) -> tuple[list[str], np.ndarray]:
        """Class names in order of first appearance, and integer labels."""
        names: list[str] = []
        for t in self.target:
            if str(t) not in names:
                names.append(str(t))
        return names, np.array([names.index(str(t)) for t in self.target])

    def features(self) -> tuple[FeatureSpec, ...]:
        return features_from_data(self.feature_names, self.X)


def _parse_float(text: str):
    try:
        value = float(text)
    except ValueError:
        return None
    return value if np.isfinite(value) else None


def parse_csv(text: str, source: str = "<csv>") -> Dataset:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or not any(cell.strip() for cell in rows[0]):
        raise DataError(f"{source}: empty file, expected a header row", line=1)
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise DataError(f"{source}: need at least one feature column and one label column", line=1)
    if any(not h for h in header) or len(set(header)) != len(header):
        raise DataError(f"{source}: column names must be nonempty and unique", line=1)

    X, target = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or not any(cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise DataError(f"{source}: expected {len(header)} fields, got {len(row)}", line=lineno)
        values = []
        for name, cell in zip(header[:-1], row[:-1]):
            v = _parse_float(cell.strip())
            if v is None:
                raise DataError(f"{source}: feature {name!r} has non-numeric value {cell!r}", line=lineno)
            values.append(v)
        X.append(values)
        label = row[-1].strip()
        if not label:
            raise DataError(f"{source}: empty label", line=lineno)
        target.append(label)
    if not X:
        raise DataError(f"{source}: no data rows", line=2)

    numeric = [_parse_float(t) for t in target]
    if all(v is not None for v in numeric):
        target = numeric
    return Dataset(header[:-1], header[-1], np.array(X, dtype=float), target)


def load_csv(path) -> Dataset:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"{path}: cannot read ({exc})") from exc
    return parse_csv(text, str(path))


def _bundled(name: str) -> Dataset:
    text = resources.files("ciu").joinpath("data").joinpath(name).read_text(encoding="utf-8")
    return parse_csv(text, name)


def load_iris() -> Dataset:
    """Fisher's 150-flower Iris data, conventional column order."""
    return _bundled("iris.csv")


def load_cars() -> Dataset:
    """The bundled synthetic 113-car, 13-criterion preference dataset."""
    return _bundled("cars.csv")


def iris_path() -> Path:
    return Path(str(resources.files("ciu").joinpath("data").joinpath("iris.csv")))


def cars_path() -> Path:
    return Path(str(resources.files("ciu").joinpath("data").joinpath("cars.csv")))


# name, min, max, utility knots (xs, ys), weight
CAR_CRITERIA = (
    ("price", 10.0, 60.0, ((10, 25, 60), (1.0, 0.7, 0.0)), 0.22),
    ("power", 40.0, 200.0, ((40, 110, 200), (0.0, 0.7, 1.0)), 0.14),
    ("acceleration", 6.0, 18.0, ((6, 18), (1.0, 0.0)), 0.10),
    ("speed", 140.0, 250.0, ((140, 250), (0.0, 1.0)), 0.09),
    ("length", 3.5, 5.2, ((3.5, 4.5, 5.2), (0.0, 0.8, 1.0)), 0.04),
    ("width", 1.6, 1.95, ((1.6, 1.95), (0.0, 1.0)), 0.03),
    ("height", 1.35, 1.7, ((1.35, 1.7), (0.0, 1.0)), 0.02),
    ("chest", 200.0, 600.0, ((200, 600), (0.0, 1.0)), 0.06),
    ("weight", 800.0, 1800.0, ((800, 1800), (1.0, 0.0)), 0.04),
    ("consumption", 4.0, 14.0, ((4, 14), (1.0, 0.0)), 0.08),
    ("aesthetic", 1.0, 10.0, ((1, 10), (0.0, 1.0)), 0.07),
    ("comfort", 1.0, 10.0, ((1, 10), (0.0, 1.0)), 0.06),
    ("safety", 1.0, 10.0, ((1, 10), (0.0, 1.0)), 0.05),
)


def car_features() -> tuple[FeatureSpec, ...]:
    return tuple(FeatureSpec(name, lo, hi) for name, lo, hi, _, _ in CAR_CRITERIA)


def car_transforms() -> tuple[PiecewiseLinear, ...]:
    return tuple(PiecewiseLinear(*knots) for _, _, _, knots, _ in CAR_CRITERIA)


def car_reference_scorer() -> LinearScorer:
    """The preference model the synthetic car scores were generated from."""
    weights = [w for *_, w in CAR_CRITERIA]
    return LinearScorer(car_features(), weights, 0.0, car_transforms(), OutputSpec("preference", 0.0, 1.0))


def make_car_dataset(n: int = 113, seed: int = 1996) -> str:
    """CSV text of a synthetic car dataset with a latent 'class' driving correlated specs."""
    rng = np.random.default_rng(seed)
    feats = car_features()
    lo = np.array([f.min for f in feats])
    hi = np.array([f.max for f in feats])
    # better cars cost more and are bigger, faster and heavier
    segment = rng.uniform(0.0, 1.0, n)
    loading = np.array([1.0, 0.9, -0.8, 0.85, 0.7, 0.6, 0.2, 0.5, 0.7, 0.4, 0.3, 0.6, 0.5])
    noise = rng.uniform(-0.5, 0.5, (n, len(feats)))
    base = np.where(loading >= 0, segment[:, None] * loading, 1.0 + segment[:, None] * loading)
    unit = np.clip(base * 0.75 + noise * 0.4 + 0.125, 0.0, 1.0)
    X = lo + unit * (hi - lo)
    decimals = (1, 0, 1, 0, 2, 2, 2, 0, 0, 1, 1, 1, 1)
    X = np.column_stack([np.round(X[:, k], d) for k, d in enumerate(decimals)])
    X = np.clip(X, lo, hi)

    scores = car_reference_scorer().predict_batch(X)[:, 0]
    scores = np.clip(scores + rng.normal(0.0, 0.01, n), 0.0, 1.0)

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([f.name for f in feats] + ["score"])
    for row, s in zip(X, scores):
        writer.writerow([f"{v:g}" for v in row] + [f"{s:.4f}"])
    return out.getvalue()


def fit_linear_scorer(data: Dataset, transforms=None, features=None, output_name: str = "preference") -> LinearScorer:
    """Nonnegative least-squares fit of weights on utility-transformed criteria.

    The declared output range is the attainable range of the fitted score.
    """
    if not data.numeric_target:
        raise DataError("a linear scorer needs a numeric score column")
    features = tuple(features) if features is not None else data.features()
    transforms = tuple(transforms) if transforms is not None else (None,) * len(features)
    probe = LinearScorer(features, np.ones(len(features)), transforms=transforms)
    T = probe.transform_columns(data.X)
    weights, _ = nnls(T, np.asarray(data.target, dtype=float))
    fitted = LinearScorer(features, weights, 0.0, transforms)
    lo, hi = fitted.attainable_range()
    model = LinearScorer(features, weights, 0.0, transforms, OutputSpec(output_name, lo, hi if hi > lo else lo + 1.0))
    residual = np.asarray(data.target) - model.predict_batch(data.X)[:, 0]
    model.training = {"method": "nnls", "rmse": float(np.sqrt(np.mean(residual**2))), "n": int(len(residual))}
    return model
