"""Plain-SVG line charts of seed-averaged metrics against depth."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Optional, Sequence, Union
from xml.sax.saxutils import escape

import numpy as np

from .errors import EmptySelectionError
from .harness import group_by_method, read_csv

METRICS = ("rod", "energy_unnorm", "energy_sym")
LOG_FLOOR = 1e-16

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
    "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939", "#8c6d31", "#843c39",
    "#7b4173",
)

WIDTH, HEIGHT = 960, 540
LEFT, RIGHT, TOP, BOTTOM = 70, 230, 30, 50


def mean_curves(traces, metric: str) -> dict[str, tuple[np.ndarray, np.ndarray, Optional[int]]]:
    """Per method: layers, seed-mean metric, and first truncation layer (or None)."""
    curves = {}
    for method, ts in group_by_method(traces).items():
        values: dict[int, list[float]] = {}
        truncated_at = None
        for t in ts:
            for r in t.ok_records():
                values.setdefault(r.layer, []).append(getattr(r, metric))
            if t.truncated:
                layer = t.records[-1].layer
                truncated_at = layer if truncated_at is None else min(truncated_at, layer)
        if not values:
            continue
        layers = np.array(sorted(values))
        means = np.array([np.mean(values[k]) for k in layers])
        curves[method] = (layers, means, truncated_at)
    return curves


def _log_y(v: float) -> float:
    return math.log10(max(v, LOG_FLOOR))


def render_svg(curves, metric: str, title: Optional[str] = None) -> str:
    plot_w, plot_h = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM
    max_layer = max(int(c[0].max()) for c in curves.values())
    logs = [_log_y(v) for c in curves.values() for v in c[1] if np.isfinite(v)]
    lo, hi = math.floor(min(logs)), math.ceil(max(logs))
    if hi == lo:
        hi = lo + 1

    def sx(layer):
        return LEFT + (layer - 1) / max(max_layer - 1, 1) * plot_w

    def sy(value):
        return TOP + (hi - _log_y(value)) / (hi - lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{LEFT + plot_w / 2}" y="18" text-anchor="middle" font-size="14">'
        f'{escape(title or metric)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>',
    ]
    step = max(1, (hi - lo) // 8)
    for e in range(lo, hi + 1, step):
        y = TOP + (hi - e) / (hi - lo) * plot_h
        out.append(f'<line x1="{LEFT}" y1="{y:.2f}" x2="{LEFT + plot_w}" y2="{y:.2f}" '
                   'stroke="#dddddd"/>')
        out.append(f'<text x="{LEFT - 6}" y="{y + 4:.2f}" text-anchor="end">1e{e}</text>')
    tick = max(1, max_layer // 12)
    for layer in [1, *range(tick, max_layer + 1, tick)]:
        x = sx(layer)
        out.append(f'<line x1="{x:.2f}" y1="{TOP + plot_h}" x2="{x:.2f}" y2="{TOP + plot_h + 5}" '
                   'stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{TOP + plot_h + 18}" text-anchor="middle">{layer}</text>')
    out.append(f'<text x="{LEFT + plot_w / 2}" y="{HEIGHT - 10}" text-anchor="middle">layer</text>')
    out.append(f'<text x="16" y="{TOP + plot_h / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {TOP + plot_h / 2})">{escape(metric)} (log10)</text>')

    for i, (method, (layers, means, truncated_at)) in enumerate(curves.items()):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{sx(k):.2f},{sy(v):.2f}" for k, v in zip(layers, means) if np.isfinite(v))
        out.append(f'<polyline class="curve" data-method="{escape(method)}" fill="none" '
                   f'stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        label = method
        if truncated_at is not None:
            label += f" (truncated at {truncated_at})"
        ly = TOP + 14 + 18 * i
        lx = LEFT + plot_w + 12
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}" '
                   'stroke-width="2"/>')
        out.append(f'<text class="legend" x="{lx + 26}" y="{ly}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(csv_path: Union[str, Path], metric: str, out_path: Union[str, Path],
              methods: Optional[Sequence[str]] = None) -> Path:
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
    traces = read_csv(csv_path)
    if methods is not None:
        traces = [t for t in traces if t.method in set(methods)]
    curves = mean_curves(traces, metric)
    curves = {m: c for m, c in curves.items() if np.isfinite(c[1]).any()}
    if not curves:
        raise EmptySelectionError(f"no data for metric {metric!r} in {csv_path}")
    out_path = Path(out_path)
    out_path.write_text(render_svg(curves, metric, f"mean {metric} over seeds"))
    return out_path
