"""SVG charts for CI/CU explanations, written directly as text (no plotting library).

Every chart embeds its data-to-pixel mapping as a comment of the form::

    <!-- ciu-transform {"x_data": [a, b], "x_px": [p, q], "y_data": [c, d], "y_px": [r, s]} -->

so a data point ``(x, y)`` is drawn at
``px = p + (x - a) * (q - p) / (b - a)`` and
``py = r + (y - c) * (s - r) / (d - c)``. Bar charts carry only the x part
(bar length for a fraction in [0, 1]).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .core import CiuResult, InstanceCiu, percent
from .errors import UnsupportedOperationError
from .estimator import SamplePlan, estimate_range_grid
from .explain import CLASSIFICATION_VOCABULARY, Comparison, Vocabulary, format_cu
from .model import Model

# red -> green, one color per utility bucket
DEFAULT_BAND_COLORS = ("#d7301f", "#fc8d59", "#91cf60", "#1a9850")
CI_COLOR = "#4575b4"
CU_COLOR = "#fdae61"
CI_COLOR_B = "#91bfdb"
CU_COLOR_B = "#fee090"


@dataclass(frozen=True)
class PlotSpec:
    width: int = 520
    height: int = 340
    margin_left: int = 70
    margin_right: int = 60
    margin_top: int = 40
    margin_bottom: int = 50
    band_bounds: tuple[float, ...] = CLASSIFICATION_VOCABULARY.bounds
    band_colors: tuple[str, ...] = DEFAULT_BAND_COLORS
    curve_samples: int = 100

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("width and height must be positive")
        if self.width <= self.margin_left + self.margin_right or self.height <= self.margin_top + self.margin_bottom:
            raise ValueError("margins leave no room for the plot area")
        if len(self.band_bounds) != len(self.band_colors):
            raise ValueError("need one band color per bound")
        if self.curve_samples < 2:
            raise ValueError("curve_samples must be >= 2")

    @classmethod
    def for_vocabulary(cls, vocabulary: Vocabulary, colors=None, **kwargs) -> "PlotSpec":
        n = len(vocabulary.bounds)
        if colors is None:
            colors = DEFAULT_BAND_COLORS if n == len(DEFAULT_BAND_COLORS) else _ramp(n)
        return cls(band_bounds=vocabulary.bounds, band_colors=tuple(colors), **kwargs)

    @property
    def plot_box(self) -> tuple[float, float, float, float]:
        """(left, right, bottom, top) in pixels."""
        return (
            float(self.margin_left),
            float(self.width - self.margin_right),
            float(self.height - self.margin_bottom),
            float(self.margin_top),
        )


def _ramp(n: int) -> tuple[str, ...]:
    out = []
    for i in range(n):
        t = i / max(n - 1, 1)
        out.append(f"#{int(215 * (1 - t) + 26 * t):02x}{int(48 * (1 - t) + 152 * t):02x}{int(31 * (1 - t) + 80 * t):02x}")
    return tuple(out)


def _f(v: float) -> str:
    return f"{v:.2f}"


class _Svg:
    def __init__(self, spec: PlotSpec, title: str):
        self.spec = spec
        self.parts = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{spec.width}" height="{spec.height}" '
            f'viewBox="0 0 {spec.width} {spec.height}" font-family="sans-serif" font-size="11">',
            f"<title>{escape(title)}</title>",
            f'<rect class="background" x="0" y="0" width="{spec.width}" height="{spec.height}" fill="#ffffff"/>',
        ]

    def add(self, element: str) -> None:
        self.parts.append(element)

    def text(self, x, y, content, anchor="start", cls=None, size=None, weight=None) -> None:
        attrs = f' class="{cls}"' if cls else ""
        if size:
            attrs += f' font-size="{size}"'
        if weight:
            attrs += f' font-weight="{weight}"'
        self.add(f'<text x="{_f(x)}" y="{_f(y)}" text-anchor="{anchor}"{attrs}>{escape(str(content))}</text>')

    def line(self, x1, y1, x2, y2, stroke="#333333", cls=None, dash=None, width=1) -> None:
        attrs = f' class="{cls}"' if cls else ""
        if dash:
            attrs += f' stroke-dasharray="{dash}"'
        self.add(
            f'<line{attrs} x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" stroke="{stroke}" stroke-width="{width}"/>'
        )

    def rect(self, x, y, w, h, fill, cls=None, extra="") -> None:
        attrs = f' class="{cls}"' if cls else ""
        self.add(f'<rect{attrs} x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" fill="{fill}"{extra}/>')

    def transform_comment(self, x_data, x_px, y_data=None, y_px=None) -> None:
        doc = {"x_data": list(x_data), "x_px": list(x_px)}
        if y_data is not None:
            doc.update(y_data=list(y_data), y_px=list(y_px))
        self.add(f"<!-- ciu-transform {json.dumps(doc)} -->")

    def close(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def plot_response_curve(
    model: Model,
    context,
    feature: int,
    output: int = 0,
    spec: PlotSpec | None = None,
) -> str:
    """Output as a function of one feature, others pinned at the context.

    Draws the curve, a cross at (context value, y), dashed lines at Cmin and
    Cmax, and a color band splitting [Cmin, Cmax] at the utility bucket bounds.
    """
    spec = spec or PlotSpec()
    x = model.check_context(context)
    if not 0 <= feature < model.n_features:
        raise IndexError(f"feature index {feature} out of range")
    if not 0 <= output < model.n_outputs:
        raise IndexError(f"output index {output} out of range")
    fspec, ospec = model.features[feature], model.outputs[output]

    grid = np.linspace(fspec.min, fspec.max, spec.curve_samples)
    grid[-1] = fspec.max
    sweep = np.tile(x, (len(grid), 1))
    sweep[:, feature] = grid
    curve = model.predict_batch(sweep)[:, output]
    estimate = estimate_range_grid(model, x, feature, SamplePlan(strategy="grid", points_per_dim=spec.curve_samples))
    result = CiuResult.from_range(estimate, output, ospec)

    left, right, bottom, top = spec.plot_box

    def px(v):
        return left + (v - fspec.min) * (right - left) / fspec.width

    def py(v):
        return bottom + (v - ospec.absmin) * (top - bottom) / ospec.width

    svg = _Svg(spec, f"{ospec.name} vs {fspec.name}")
    svg.transform_comment((fspec.min, fspec.max), (left, right), (ospec.absmin, ospec.absmax), (bottom, top))

    # axes with end ticks
    svg.line(left, bottom, right, bottom, cls="axis")
    svg.line(left, bottom, left, top, cls="axis")
    for v in (fspec.min, fspec.max):
        svg.text(px(v), bottom + 15, f"{v:g}", anchor="middle", cls="tick")
    for v in (ospec.absmin, ospec.absmax):
        svg.text(left - 6, py(v) + 4, f"{v:g}", anchor="end", cls="tick")
    svg.text((left + right) / 2, spec.height - 12, fspec.name, anchor="middle", cls="xlabel")
    svg.add(
        f'<text class="ylabel" x="16" y="{_f((top + bottom) / 2)}" text-anchor="middle" '
        f'transform="rotate(-90 16 {_f((top + bottom) / 2)})">{escape(ospec.name)}</text>'
    )
    svg.text(
        left,
        22,
        f"{fspec.name}: CI={percent(result.ci)}% CU={format_cu(result.cu)}",
        cls="title",
        size=13,
        weight="bold",
    )

    for level, name in ((result.cmin, "cmin"), (result.cmax, "cmax")):
        svg.line(left, py(level), right, py(level), stroke="#888888", cls=name, dash="4 3")
        svg.text(right + 4, py(level) + 4, name.capitalize(), cls=f"{name}-label", size=9)

    points = " ".join(f"{_f(px(a))},{_f(py(b))}" for a, b in zip(grid, curve))
    svg.add(f'<polyline class="curve" fill="none" stroke="#2c7bb6" stroke-width="2" points="{points}"/>')

    if result.degenerate:
        svg.text((left + right) / 2, top + 16, "no effect", anchor="middle", cls="annotation")
    else:
        band_x = right + 30
        lo = result.cmin
        for bound, color in zip(spec.band_bounds, spec.band_colors):
            hi = result.cmin + bound * (result.cmax - result.cmin)
            svg.rect(band_x, py(hi), 14, py(lo) - py(hi), color, cls="band", extra=f' data-upper="{bound:g}"')
            lo = hi

    mx, my = px(x[feature]), py(result.y)
    s = 6
    svg.add(
        f'<path class="marker" data-x="{x[feature]!r}" data-y="{result.y!r}" '
        f'd="M {_f(mx - s)} {_f(my - s)} L {_f(mx + s)} {_f(my + s)} M {_f(mx - s)} {_f(my + s)} L {_f(mx + s)} {_f(my - s)}" '
        f'stroke="#e31a1c" stroke-width="2.5" fill="none"/>'
    )
    return svg.close()


def _bar_rows(svg, spec, labels, groups, legend, title):
    """Horizontal grouped bars. ``groups[i]`` is a list of (fraction, text, css class, color)."""
    left, right, bottom, top = spec.plot_box
    label_w = 110
    bar_left = left + label_w - spec.margin_left
    bar_w = right - bar_left - 50
    per_group = len(groups[0]) if groups else 1
    row_h = max((bottom - top) / max(len(labels), 1), 4.0 * per_group)
    bar_h = row_h * 0.8 / per_group

    svg.transform_comment((0.0, 1.0), (bar_left, bar_left + bar_w))
    svg.text(left - spec.margin_left + 10, 22, title, cls="title", size=13, weight="bold")
    for i, (label, bars) in enumerate(zip(labels, groups)):
        y = top + i * row_h
        svg.text(bar_left - 6, y + row_h * 0.45 + 4, label, anchor="end", cls="label")
        for b, (frac, text, cls, color) in enumerate(bars):
            by = y + b * bar_h
            svg.rect(bar_left, by, bar_w * frac, bar_h - 1, color, cls=f"bar {cls}")
            svg.text(bar_left + bar_w * frac + 4, by + bar_h - 3, text, cls="value", size=9)
    svg.line(bar_left, top, bar_left, top + row_h * len(labels), cls="axis")
    lx = bar_left
    for name, color in legend:
        svg.rect(lx, spec.height - 22, 10, 10, color, cls="legend-swatch")
        svg.text(lx + 14, spec.height - 13, name, cls="legend")
        lx += 16 + 7 * len(name) + 14


def bar_chart_ciu(
    instance: InstanceCiu,
    output: int | None = None,
    spec: PlotSpec | None = None,
    sort: bool = False,
) -> str:
    """One CI bar and one CU bar per feature, values shown as percents."""
    spec = spec or PlotSpec()
    j = instance.predicted if output is None else output
    results = instance.for_output(j)
    order = list(range(len(results)))
    if sort:
        order.sort(key=lambda k: (-results[k].ci, results[k].degenerate, -results[k].cu, k))
    labels = [instance.feature_names[k] for k in order]
    groups = [
        [
            (results[k].ci, f"CI {percent(results[k].ci)}%", "ci", CI_COLOR),
            (results[k].cu, f"CU {percent(results[k].cu)}%", "cu", CU_COLOR),
        ]
        for k in order
    ]
    svg = _Svg(spec, f"CI and CU for {instance.outputs[j].name}")
    _bar_rows(svg, spec, labels, groups, [("CI", CI_COLOR), ("CU", CU_COLOR)], f"{instance.outputs[j].name}")
    return svg.close()


def bar_chart_contrast(comparison, spec: PlotSpec | None = None) -> str:
    """Grouped CI/CU bars for the two instances of a pairwise comparison."""
    if isinstance(comparison, (list, tuple)):
        if len(comparison) != 1:
            raise UnsupportedOperationError(
                f"contrast charts are pairwise only; got {len(comparison)} comparisons"
            )
        comparison = comparison[0]
    if not isinstance(comparison, Comparison):
        raise TypeError("expected a Comparison from compare_instances")
    spec = spec or PlotSpec(height=max(340, 60 * len(comparison.rows) + 90))
    a, b = comparison.names
    labels = [r.feature for r in comparison.rows]
    groups = [
        [
            (r.ci_a, f"CI {percent(r.ci_a)}%", "ci a", CI_COLOR),
            (r.cu_a, f"CU {percent(r.cu_a)}%", "cu a", CU_COLOR),
            (r.ci_b, f"CI {percent(r.ci_b)}%", "ci b", CI_COLOR_B),
            (r.cu_b, f"CU {percent(r.cu_b)}%", "cu b", CU_COLOR_B),
        ]
        for r in comparison.rows
    ]
    legend = [(f"CI {a}", CI_COLOR), (f"CU {a}", CU_COLOR), (f"CI {b}", CI_COLOR_B), (f"CU {b}", CU_COLOR_B)]
    svg = _Svg(spec, f"{a} vs {b} on {comparison.output_name}")
    _bar_rows(svg, spec, labels, groups, legend, f"{a} vs {b}: {comparison.output_name}")
    return svg.close()


def write_svg(text: str, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)

