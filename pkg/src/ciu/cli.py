"""Command-line interface: ``ciu {train,explain,contrast,compare,plot,estimate}``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 computation error,
5 range violation (an instance value outside its feature's range).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import datasets
from .core import explain_instance
from .errors import (
    BudgetExceededError,
    CiuError,
    ConsistencyError,
    DataError,
    DimensionError,
    MismatchError,
    ModelEvaluationError,
    RangeViolationError,
    TrainingError,
    UnsupportedOperationError,
)
from .estimator import DEFAULT_GRID_POINTS, DEFAULT_SAMPLES, SamplePlan, estimate_range, varied_set
from .explain import (
    compare_instances,
    complete_explanation,
    contrastive_explanation,
    default_vocabulary,
    explanations_to_json,
    load_vocabulary,
)
from .model import load_model, model_to_dict, train_mlp
from .render import PlotSpec, bar_chart_ciu, bar_chart_contrast, plot_response_curve

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_COMPUTE = 4
EXIT_RANGE = 5

BUNDLED = {"iris": datasets.iris_path, "cars": datasets.cars_path}

INSTANCE_HELP = (
    "comma-separated feature values in the model's feature order "
    "(bundled Iris model: sepal length, sepal width, petal length, petal width)"
)


class UsageError(CiuError):
    pass


def _dataset(path: str):
    if path in BUNDLED:
        return datasets.load_csv(BUNDLED[path]())
    return datasets.load_csv(path)


def _parse_values(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise DataError(f"{what}: {text!r} is not a comma-separated list of numbers") from None


def _instance(args, model, suffix=""):
    inline = getattr(args, f"instance{suffix}")
    row = getattr(args, f"row{suffix}")
    if (inline is None) == (row is None):
        raise UsageError(f"give exactly one of --instance{suffix.replace('_', '-')} or --row{suffix.replace('_', '-')}")
    if inline is not None:
        values = _parse_values(inline, "instance")
    else:
        if not args.dataset:
            raise UsageError("--row needs --dataset")
        data = _dataset(args.dataset)
        if not 0 <= row < len(data.X):
            raise DataError(f"row {row} out of range (dataset has {len(data.X)} rows)")
        values = data.X[row].tolist()
    if len(values) != model.n_features:
        raise DimensionError(
            f"instance has {len(values)} values, model expects {model.n_features}: {', '.join(model.feature_names)}"
        )
    return values


def _feature_index(model, token: str) -> int:
    if token in model.feature_names:
        return model.feature_names.index(token)
    try:
        idx = int(token)
    except ValueError:
        raise UsageError(f"unknown feature {token!r}; choose from {model.feature_names}") from None
    if not 0 <= idx < model.n_features:
        raise UsageError(f"feature index {idx} out of range")
    return idx


def _plan(args) -> SamplePlan:
    strategy = "grid" if args.strategy == "grid" else "monte-carlo"
    return SamplePlan(strategy=strategy, sample_count=args.samples, points_per_dim=args.points, seed=args.seed)


def _vocabulary(args, instance):
    return load_vocabulary(args.vocabulary) if args.vocabulary else default_vocabulary(instance)


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_train(args) -> int:
    data = _dataset(args.dataset)
    if args.kind == "mlp":
        if data.numeric_target:
            raise DataError(f"column {data.target_name!r} is numeric; use --kind linear for score data")
        names, labels = data.classes()
        model, accuracy = train_mlp(
            data.X, labels, data.features(), names, args.hidden, args.epochs, args.lr, args.seed
        )
        metrics = f"seed={args.seed} epochs={args.epochs} accuracy={accuracy:.4f}"
    else:
        if args.utilities == "car":
            model = datasets.fit_linear_scorer(data, datasets.car_transforms(), datasets.car_features())
        else:
            model = datasets.fit_linear_scorer(data)
        metrics = f"rmse={model.training['rmse']:.4f} n={model.training['n']}"
    doc = json.dumps(model_to_dict(model), indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(doc, encoding="utf-8")
        print(metrics)
    else:
        sys.stdout.write(doc)
        print(metrics, file=sys.stderr)
    return EXIT_OK


def cmd_explain(args) -> int:
    model = load_model(args.model)
    instance = explain_instance(model, _instance(args, model), _plan(args))
    if args.format == "svg":
        _emit(args, bar_chart_ciu(instance, args.target, sort=args.sort))
        return EXIT_OK
    explanation = complete_explanation(instance, args.target, _vocabulary(args, instance))
    if args.format == "json":
        doc = {"explanation": explanation.to_dict(), "ciu": instance.to_dict()}
        _emit(args, json.dumps(doc, indent=2))
    else:
        _emit(args, explanation.to_text())
    return EXIT_OK


def cmd_contrast(args) -> int:
    model = load_model(args.model)
    if model.n_outputs < 2:
        raise UnsupportedOperationError(
            "contrastive explanations need a classifier with at least two outputs; "
            "for a single-output model use 'ciu compare'"
        )
    instance = explain_instance(model, _instance(args, model), _plan(args))
    blocks = contrastive_explanation(instance, vocabulary=_vocabulary(args, instance))
    if args.format == "json":
        _emit(args, explanations_to_json(blocks))
    else:
        _emit(args, "\n".join(b.to_text() for b in blocks))
    return EXIT_OK


def cmd_compare(args) -> int:
    model = load_model(args.model)
    plan = _plan(args)
    a = explain_instance(model, _instance(args, model), plan)
    b = explain_instance(model, _instance(args, model, "_b"), plan)
    names = tuple(n.strip() for n in args.names.split(","))
    if len(names) != 2:
        raise UsageError("--names takes exactly two comma-separated names")
    comparison = compare_instances(a, b, args.target or 0, names)
    if args.format == "svg":
        _emit(args, bar_chart_contrast(comparison))
    elif args.format == "json":
        _emit(args, explanations_to_json(comparison))
    else:
        _emit(args, comparison.to_text())
    return EXIT_OK


def cmd_plot(args) -> int:
    model = load_model(args.model)
    context = _instance(args, model)
    output = args.target if args.target is not None else int(model.predict(context).argmax())
    spec = PlotSpec.for_vocabulary(load_vocabulary(args.vocabulary)) if args.vocabulary else PlotSpec()
    _emit(args, plot_response_curve(model, context, _feature_index(model, args.feature), output, spec))
    return EXIT_OK


def cmd_estimate(args) -> int:
    model = load_model(args.model)
    context = _instance(args, model)
    varied = varied_set([_feature_index(model, t.strip()) for t in args.vary.split(",")], model.n_features)
    estimate = estimate_range(model, context, varied, _plan(args))
    doc = estimate.to_dict(model.output_names)
    if args.format == "text":
        lines = [f"varied: {', '.join(model.feature_names[i] for i in varied)} ({estimate.samples_used} evaluations)"]
        lines += [f"{o['name']}: cmin={o['cmin']:.6g} cmax={o['cmax']:.6g} y={o['y']:.6g}" for o in doc["outputs"]]
        _emit(args, "\n".join(lines))
    else:
        _emit(args, json.dumps(doc, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ciu",
        description="Contextual importance and utility explanations for black-box models.",
        epilog="Exit codes: 0 ok, 2 usage error, 3 data error, 4 computation error, 5 range violation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train a model on a CSV dataset and save it as JSON")
    train.add_argument("--dataset", required=True, help="CSV path, or 'iris' / 'cars' for bundled data")
    train.add_argument("--kind", choices=("mlp", "linear"), default="mlp")
    train.add_argument("--hidden", type=int, default=8)
    train.add_argument("--epochs", type=int, default=3000)
    train.add_argument("--lr", type=float, default=1.0)
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--utilities", choices=("none", "car"), default="none",
                       help="utility transforms for --kind linear")
    train.add_argument("--output", help="model JSON path (default: standard output)")
    train.set_defaults(func=cmd_train)

    def common(p, formats, default_format):
        p.add_argument("--model", required=True, help="model JSON written by 'ciu train'")
        p.add_argument("--dataset", help="CSV path or 'iris' / 'cars', for --row")
        p.add_argument("--instance", help=INSTANCE_HELP)
        p.add_argument("--row", type=int, help="take the instance from this dataset row (0-based)")
        p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="Monte-Carlo samples per feature")
        p.add_argument("--points", type=int, default=DEFAULT_GRID_POINTS, help="grid points per varied feature")
        p.add_argument("--strategy", choices=("mc", "grid"), default="mc")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=formats, default=default_format)
        p.add_argument("--vocabulary", help="vocabulary JSON (bounds and phrases)")
        p.add_argument("--target", type=int, help="output index (default: predicted output)")
        p.add_argument("--output", help="write here instead of standard output")

    explain = sub.add_parser("explain", help="complete explanation of one prediction")
    common(explain, ("text", "json", "svg"), "text")
    explain.add_argument("--sort", action="store_true", help="svg: sort bars by CI")
    explain.set_defaults(func=cmd_explain)

    contrast = sub.add_parser("contrast", help="why not each other class")
    common(contrast, ("text", "json"), "text")
    contrast.set_defaults(func=cmd_contrast)

    compare = sub.add_parser("compare", help="compare two instances feature by feature")
    common(compare, ("text", "json", "svg"), "text")
    compare.add_argument("--instance-b", dest="instance_b", help="second instance; " + INSTANCE_HELP)
    compare.add_argument("--row-b", dest="row_b", type=int, help="second instance as a dataset row")
    compare.add_argument("--names", default="A,B", help="display names of the two instances")
    compare.set_defaults(func=cmd_compare)

    plot = sub.add_parser("plot", help="SVG response curve of one feature")
    common(plot, ("svg",), "svg")
    plot.add_argument("--feature", required=True, help="feature index or name")
    plot.set_defaults(func=cmd_plot)

    estimate = sub.add_parser("estimate", help="Cmin/Cmax estimate for a varied feature set")
    common(estimate, ("json", "text"), "json")
    estimate.add_argument("--vary", required=True, help="comma-separated feature indices or names")
    estimate.set_defaults(func=cmd_estimate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CiuError as exc:
        return _fail(exc)
    except (ValueError, IndexError) as exc:
        print(f"ciu: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _fail(exc) -> int:
    print(f"ciu: error: {exc}", file=sys.stderr)
    if isinstance(exc, RangeViolationError):
        return EXIT_RANGE
    if isinstance(exc, (DataError, DimensionError, MismatchError)):
        return EXIT_DATA
    if isinstance(exc, (ConsistencyError, TrainingError, ModelEvaluationError, BudgetExceededError)):
        return EXIT_COMPUTE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
