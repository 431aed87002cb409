"""Minimal deterministic CSV -> SVG line chart."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

from .errors import MalformedInput

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#17becf", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2")


@dataclass(frozen=True)
class PlotSpec:
    x: str
    y: tuple[str, ...]
    group_by: tuple[str, ...] = ()
    title: str = ""
    width: int = 720
    height: int = 440
    xlabel: str | None = None
    ylabel: str | None = None


@dataclass
class Series:
    label: str
    points: list[tuple[float, float]]


def _num(row: dict, col: str, lineno: int) -> float:
    try:
        v = float(row[col])
    except (TypeError, ValueError):
        raise MalformedInput(f"line {lineno}: column {col!r} is not numeric: {row[col]!r}") from None
    if not math.isfinite(v):
        raise MalformedInput(f"line {lineno}: column {col!r} is not finite")
    return v


def collect_series(csv_text: str, spec: PlotSpec) -> list[Series]:
    reader = csv.DictReader(io.StringIO(csv_text))
    cols = reader.fieldnames or []
    missing = [c for c in (spec.x, *spec.y, *spec.group_by) if c not in cols]
    if missing:
        raise MalformedInput(f"CSV lacks declared columns {missing}")
    if not spec.y:
        raise MalformedInput("no y columns declared")
    groups: dict[tuple, list[dict]] = {}
    for lineno, row in enumerate(reader, start=2):
        if None in row or any(v is None for v in row.values()):
            raise MalformedInput(f"line {lineno}: wrong number of fields")
        groups.setdefault(tuple(row[g] for g in spec.group_by), []).append((lineno, row))
    if not groups:
        raise MalformedInput("CSV has no data rows")
    out = []
    for key, rows in groups.items():
        tag = ", ".join(f"{g}={v}" for g, v in zip(spec.group_by, key))
        for y in spec.y:
            pts = sorted((_num(r, spec.x, ln), _num(r, y, ln)) for ln, r in rows)
            out.append(Series(f"{y} ({tag})" if tag else y, pts))
    return out


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def render_svg(csv_text: str, spec: PlotSpec) -> str:
    """One polyline per series on linear axes; identical input gives identical bytes."""
    series = collect_series(csv_text, spec)
    if any(not s.points for s in series):
        raise MalformedInput("empty series")
    xs = [p[0] for s in series for p in s.points]
    ys = [p[1] for s in series for p in s.points]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(0.0, min(ys)), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y1 = y0 + 1.0
    w, h = spec.width, spec.height
    left, right, top, bottom = 70, 220, 40, 55
    pw, ph = w - left - right, h - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" '
        'font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>',
    ]
    if spec.title:
        out.append(f'<text x="{left + pw / 2:.2f}" y="22" text-anchor="middle" font-size="14">{escape(spec.title)}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for t in _ticks(x0, x1):
        X = px(t)
        out.append(f'<line x1="{X:.2f}" y1="{top + ph}" x2="{X:.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{top + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        Y = py(t)
        out.append(f'<line x1="{left - 5}" y1="{Y:.2f}" x2="{left}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{Y + 4:.2f}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{h - 12}" text-anchor="middle">{escape(spec.xlabel or spec.x)}</text>')
    ylabel = spec.ylabel or ", ".join(spec.y)
    out.append(f'<text x="16" y="{top + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2:.2f})">{escape(ylabel)}</text>')
    for k, s in enumerate(series):
        colour = PALETTE[k % len(PALETTE)]
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in s.points)
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{coords}"/>')
        ly = top + 10 + 18 * k
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 36}" y2="{ly}" stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 42}" y="{ly + 4}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
