"""Turn CI/CU values into words: complete, contrastive and comparative explanations."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import CiuResult, InstanceCiu, percent, round_half_up
from .errors import DataError, MismatchError, UnsupportedOperationError

AXES = ("importance", "utility")


@dataclass(frozen=True)
class Vocabulary:
    """Threshold-to-phrase mapping for CI and CU degrees.

    A degree ``d`` maps to the first bucket with ``d <= bound``; ``d = 0``
    lands in the first bucket. ``*_inline`` are the forms used inside
    sentences ("a highly important", "a very typical").
    """

    bounds: tuple[float, ...]
    importance: tuple[str, ...]
    utility: tuple[str, ...]
    importance_inline: tuple[str, ...]
    utility_inline: tuple[str, ...]
    kind: str = "classification"
    noun: str = "size"

    def __post_init__(self):
        for name in ("bounds", "importance", "utility", "importance_inline", "utility_inline"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        n = len(self.bounds)
        if n == 0:
            raise ValueError("vocabulary needs at least one bucket")
        if any(len(getattr(self, a)) != n for a in ("importance", "utility", "importance_inline", "utility_inline")):
            raise ValueError("every phrase list must have one entry per bound")
        if any(b <= 0 for b in self.bounds) or any(b2 <= b1 for b1, b2 in zip(self.bounds, self.bounds[1:])):
            raise ValueError(f"bounds must be strictly increasing in (0, 1]: {self.bounds}")
        if self.bounds[-1] != 1.0:
            raise ValueError("last bound must be 1.0")
        if self.kind not in ("classification", "preference"):
            raise ValueError(f"unknown vocabulary kind {self.kind!r}")

    def bucket(self, d: float) -> int:
        if not 0.0 <= d <= 1.0:
            raise ValueError(f"degree {d} outside [0, 1]")
        for i, bound in enumerate(self.bounds):
            if d <= bound:
                return i
        return len(self.bounds) - 1

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "noun": self.noun,
            "bounds": list(self.bounds),
            "importance": list(self.importance),
            "utility": list(self.utility),
            "importance_inline": list(self.importance_inline),
            "utility_inline": list(self.utility_inline),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Vocabulary":
        try:
            return cls(
                bounds=tuple(float(b) for b in doc["bounds"]),
                importance=doc["importance"],
                utility=doc["utility"],
                importance_inline=doc.get("importance_inline") or [p.lower() for p in doc["importance"]],
                utility_inline=doc.get("utility_inline") or [p.lower() for p in doc["utility"]],
                kind=doc.get("kind", "classification"),
                noun=doc.get("noun", "size"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed vocabulary: {exc}") from exc


CLASSIFICATION_VOCABULARY = Vocabulary(
    bounds=(0.25, 0.5, 0.75, 1.0),
    importance=("Not important", "Important", "Rather important", "Highly important"),
    utility=("Not typical", "Unlikely", "Typical", "Very typical"),
    importance_inline=("not an important", "an important", "rather an important", "a highly important"),
    utility_inline=("not a typical", "an unlikely", "a typical", "a very typical"),
    kind="classification",
    noun="size",
)

PREFERENCE_VOCABULARY = Vocabulary(
    bounds=(0.25, 0.5, 0.75, 1.0),
    importance=("Not important", "Important", "Rather important", "Highly important"),
    utility=("Bad value", "Average value", "Good value", "Very good value"),
    importance_inline=("not an important", "an important", "rather an important", "a highly important"),
    utility_inline=("a bad", "an average", "a good", "a very good"),
    kind="preference",
    noun="value",
)


def load_vocabulary(path) -> Vocabulary:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: cannot read vocabulary ({exc})") from exc
    return Vocabulary.from_dict(doc)


def default_vocabulary(instance: InstanceCiu) -> Vocabulary:
    return CLASSIFICATION_VOCABULARY if is_classifier(instance) else PREFERENCE_VOCABULARY


def symbolize(d: float, vocabulary: Vocabulary = CLASSIFICATION_VOCABULARY, axis: str = "importance") -> str:
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}")
    return getattr(vocabulary, axis)[vocabulary.bucket(d)]


def format_cu(cu: float) -> str:
    """CU to two decimals, half-up, trailing zeros dropped ("1", "0.69", "0.9")."""
    text = f"{round_half_up(cu, 2):.2f}".rstrip("0").rstrip(".")
    return text or "0"


def is_classifier(instance: InstanceCiu) -> bool:
    if instance.kind == "mlp-classifier":
        return True
    return len(instance.outputs) > 1 and all(o.absmin == 0.0 and o.absmax == 1.0 for o in instance.outputs)


@dataclass(frozen=True)
class ExplanationPhrase:
    feature: str
    feature_index: int
    importance: str
    ci_percent: int
    utility: str
    cu: str
    degenerate: bool
    text: str

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "feature_index": self.feature_index,
            "importance": self.importance,
            "ci_percent": self.ci_percent,
            "utility": self.utility,
            "cu": self.cu,
            "degenerate": self.degenerate,
            "text": self.text,
        }


@dataclass(frozen=True)
class Explanation:
    kind: str
    output_index: int
    output_name: str
    value: float
    headline: str
    phrases: tuple[ExplanationPhrase, ...]
    summary: str = ""
    summary_feature: int | None = None

    def to_text(self) -> str:
        lines = [self.headline, *(p.text for p in self.phrases)]
        if self.summary:
            lines.append(self.summary)
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "output_index": self.output_index,
            "output": self.output_name,
            "value": self.value,
            "headline": self.headline,
            "phrases": [p.to_dict() for p in self.phrases],
            "summary": self.summary,
            "summary_feature": self.summary_feature,
        }


def make_phrase(name: str, index: int, result: CiuResult, vocabulary: Vocabulary) -> ExplanationPhrase:
    ci_pct = percent(result.ci)
    cu_txt = format_cu(result.cu)
    # bucket the displayed numbers so a sentence never says "CU=0.75" next to the next bucket's word
    ci_shown, cu_shown = ci_pct / 100, round_half_up(result.cu, 2)
    imp = symbolize(ci_shown, vocabulary, "importance")
    util = symbolize(cu_shown, vocabulary, "utility")
    if result.degenerate:
        text = f"The {name} has no effect (CI={ci_pct}%)."
    else:
        b_imp = vocabulary.importance_inline[vocabulary.bucket(ci_shown)]
        b_util = vocabulary.utility_inline[vocabulary.bucket(cu_shown)]
        text = f"The {name} which is {b_imp} (CI={ci_pct}%) feature has {b_util} (CU={cu_txt}) {vocabulary.noun}."
    return ExplanationPhrase(name, index, imp, ci_pct, util, cu_txt, result.degenerate, text)


def biggest_contributor(results: Sequence[CiuResult]) -> int | None:
    """Max CI, ties to higher CU, then lower index. Degenerate features never win."""
    candidates = [(r.ci, r.cu, -k) for k, r in enumerate(results) if not r.degenerate]
    if not candidates:
        return None
    return -max(candidates)[2]


def format_value(instance: InstanceCiu, j: int) -> str:
    if is_classifier(instance):
        return f"{percent(instance.prediction[j])}%"
    return format_cu(instance.prediction[j]) if instance.outputs[j].absmax <= 1 else f"{instance.prediction[j]:.4g}"


def complete_explanation(
    instance: InstanceCiu,
    target_output: int | None = None,
    vocabulary: Vocabulary | None = None,
) -> Explanation:
    """Why the model gives this output: one phrase per feature plus the biggest contributor."""
    j = instance.predicted if target_output is None else target_output
    if not 0 <= j < len(instance.outputs):
        raise IndexError(f"output index {j} out of range")
    vocabulary = vocabulary or default_vocabulary(instance)
    results = instance.for_output(j)
    name = instance.outputs[j].name
    if is_classifier(instance):
        headline = f"The model's prediction is {format_value(instance, j)} {name}. Because;"
    else:
        headline = f"The model's {name} is {format_value(instance, j)}. Because;"
    phrases = tuple(make_phrase(f, k, r, vocabulary) for k, (f, r) in enumerate(zip(instance.feature_names, results)))
    top = biggest_contributor(results)
    if top is None:
        summary = "And no feature contributes more than the others; none has any effect."
    else:
        summary = f"And the biggest contributing feature is the {instance.feature_names[top]}."
    return Explanation("complete", j, name, float(instance.prediction[j]), headline, phrases, summary, top)


def contrastive_explanation(
    instance: InstanceCiu,
    predicted: int | None = None,
    vocabulary: Vocabulary | None = None,
) -> list[Explanation]:
    """Why not each other class: one block per non-predicted output, using that output's own CI/CU."""
    if len(instance.outputs) < 2:
        raise UnsupportedOperationError(
            "contrastive explanations need at least two outputs; use compare_instances for single-output models"
        )
    argmax = instance.predicted
    if predicted is None:
        predicted = argmax
    elif predicted != argmax:
        raise ValueError(f"predicted={predicted} is not the model's top output ({argmax})")
    vocabulary = vocabulary or default_vocabulary(instance)
    blocks = []
    for c, out in enumerate(instance.outputs):
        if c == predicted:
            continue
        phrases = tuple(
            make_phrase(f, k, r, vocabulary)
            for k, (f, r) in enumerate(zip(instance.feature_names, instance.for_output(c)))
        )
        headline = f"It is not {out.name}({format_value(instance, c)}), because;"
        blocks.append(Explanation("contrastive", c, out.name, float(instance.prediction[c]), headline, phrases))
    return blocks


@dataclass(frozen=True)
class FeatureComparison:
    feature: str
    ci_a: float
    cu_a: float
    ci_b: float
    cu_b: float
    verdict: str  # "a", "b" or "equal"
    text: str

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "ci_a": self.ci_a,
            "cu_a": self.cu_a,
            "ci_b": self.ci_b,
            "cu_b": self.cu_b,
            "verdict": self.verdict,
            "text": self.text,
        }


@dataclass(frozen=True)
class Comparison:
    names: tuple[str, str]
    output_index: int
    output_name: str
    rows: tuple[FeatureComparison, ...]
    score_a: float
    score_b: float
    preferred: int | None
    reason_feature: int | None
    summary: str

    def to_text(self) -> str:
        head = f"Comparing {self.names[0]} with {self.names[1]} on {self.output_name}:"
        return "\n".join([head, *(r.text for r in self.rows), self.summary])

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "output_index": self.output_index,
            "output": self.output_name,
            "rows": [r.to_dict() for r in self.rows],
            "score_a": self.score_a,
            "score_b": self.score_b,
            "preferred": self.preferred,
            "reason_feature": self.reason_feature,
            "summary": self.summary,
        }


_EQUAL_TOL = 1e-12


def compare_instances(
    ciu_a: InstanceCiu,
    ciu_b: InstanceCiu,
    target_output: int = 0,
    names: tuple[str, str] = ("A", "B"),
) -> Comparison:
    """Feature-by-feature comparison of two explained instances.

    Per feature the instance with higher CU wins. Overall the instance with
    the larger sum of CI x CU is preferred, citing the feature where its
    CI x CU lead over the other is largest.
    """
    if ciu_a.feature_names != ciu_b.feature_names or ciu_a.outputs != ciu_b.outputs or ciu_a.kind != ciu_b.kind:
        raise MismatchError("instances were explained against different models")
    if not 0 <= target_output < len(ciu_a.outputs):
        raise IndexError(f"output index {target_output} out of range")
    ra, rb = ciu_a.for_output(target_output), ciu_b.for_output(target_output)
    name_a, name_b = names

    rows = []
    for f, a, b in zip(ciu_a.feature_names, ra, rb):
        if abs(a.cu - b.cu) <= _EQUAL_TOL:
            verdict, text = "equal", f"{f}: equal (CU={format_cu(a.cu)})."
        else:
            verdict = "a" if a.cu > b.cu else "b"
            win, lose = (name_a, name_b) if verdict == "a" else (name_b, name_a)
            hi, lo = (a, b) if verdict == "a" else (b, a)
            text = (
                f"{f}: {win} is better than {lose} (CU={format_cu(hi.cu)} vs {format_cu(lo.cu)}, "
                f"CI={percent(hi.ci)}% vs {percent(lo.ci)}%)."
            )
        rows.append(FeatureComparison(f, a.ci, a.cu, b.ci, b.cu, verdict, text))

    wa = np.array([r.ci * r.cu for r in ra])
    wb = np.array([r.ci * r.cu for r in rb])
    score_a, score_b = float(wa.sum()), float(wb.sum())
    out_name = ciu_a.outputs[target_output].name
    if abs(score_a - score_b) <= _EQUAL_TOL:
        preferred, reason = None, None
        summary = f"Neither {name_a} nor {name_b} is preferred: their importance-weighted utilities are equal."
    else:
        preferred = 0 if score_a > score_b else 1
        lead = wa - wb if preferred == 0 else wb - wa
        reason = int(np.argmax(lead))
        winner = names[preferred]
        summary = (
            f"{winner} is better because of the importance and utility value of the "
            f"{ciu_a.feature_names[reason]} criterion (sum of CI x CU: {name_a} {score_a:.2f}, {name_b} {score_b:.2f})."
        )
    return Comparison((name_a, name_b), target_output, out_name, tuple(rows), score_a, score_b, preferred, reason, summary)


def explanations_to_json(items) -> str:
    if isinstance(items, (Explanation, Comparison)):
        return json.dumps(items.to_dict(), indent=2)
    return json.dumps([e.to_dict() for e in items], indent=2)
