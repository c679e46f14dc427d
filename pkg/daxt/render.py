"""SVG figures: percentile-binned pitch scatter and score-vs-value regression plot.

Documents are assembled as text with every coordinate printed at four
decimals, so identical inputs give identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np

from daxt.errors import ContractViolation
from daxt.events import PITCH_LENGTH, PITCH_WIDTH
from daxt.stats import pearson
from daxt.utils import ensure_directory

CANVAS_WIDTH = 1050
CANVAS_HEIGHT = 680
UNITS_PER_METER = CANVAS_WIDTH / PITCH_LENGTH


@dataclass(frozen=True)
class BinPalette:
    """Top-percent cutoffs (strictly increasing) and the colour of each bin, last one for the rest."""

    percents: Tuple[int, ...] = (10, 30, 50)
    colors: Tuple[str, ...] = ("blue", "green", "yellow", "red")

    def __post_init__(self) -> None:
        if len(self.colors) != len(self.percents) + 1:
            raise ContractViolation("A palette needs one more colour than cutoffs.")
        if any(b <= a for a, b in zip(self.percents, self.percents[1:])) or not all(0 < p < 100 for p in self.percents):
            raise ContractViolation("Palette percents must be strictly increasing within (0, 100).")


DEFAULT_PALETTE = BinPalette()


def bin_cutoffs(population: Sequence[float], palette: BinPalette = DEFAULT_PALETTE) -> List[float]:
    """Nearest-rank value at each top-percent cutoff of *population*."""

    values = sorted((float(value) for value in population), reverse=True)
    if not values:
        raise ContractViolation("Bin cutoffs need a non-empty population")
    n = len(values)
    return [values[max(1, -(-percent * n // 100)) - 1] for percent in palette.percents]


def assign_bins(
    population: Sequence[float],
    subjects: Sequence[float],
    palette: BinPalette = DEFAULT_PALETTE,
) -> List[str]:
    """Colour of each subject value: the first bin whose cutoff it meets."""

    cutoffs = bin_cutoffs(population, palette)
    labels = []
    for value in subjects:
        for cutoff, color in zip(cutoffs, palette.colors):
            if value >= cutoff:
                labels.append(color)
                break
        else:
            labels.append(palette.colors[-1])
    return labels


def _fmt(value: float) -> str:
    text = f"{value:.4f}"
    return "0.0000" if text == "-0.0000" else text


def pitch_point(x: float, y: float) -> Tuple[float, float]:
    """Canvas position of pitch point (x, y); attack runs left to right, y grows upward."""

    return x * UNITS_PER_METER, (PITCH_WIDTH - y) * UNITS_PER_METER


def _rect(x0: float, y0: float, x1: float, y1: float) -> str:
    (left, top), (right, bottom) = pitch_point(x0, y1), pitch_point(x1, y0)
    return (
        f'<rect x="{_fmt(left)}" y="{_fmt(top)}" width="{_fmt(right - left)}" '
        f'height="{_fmt(bottom - top)}" fill="none" stroke="black" stroke-width="2.0000"/>'
    )


def _pitch_markings() -> List[str]:
    mid_y = PITCH_WIDTH / 2.0
    cx, cy = pitch_point(PITCH_LENGTH / 2.0, mid_y)
    parts = [
        f'<rect x="0.0000" y="0.0000" width="{_fmt(CANVAS_WIDTH)}" height="{_fmt(CANVAS_HEIGHT)}" fill="white"/>',
        _rect(0.0, 0.0, PITCH_LENGTH, PITCH_WIDTH),
        f'<line x1="{_fmt(cx)}" y1="0.0000" x2="{_fmt(cx)}" y2="{_fmt(CANVAS_HEIGHT)}" stroke="black" stroke-width="2.0000"/>',
        f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(9.15 * UNITS_PER_METER)}" fill="none" stroke="black" stroke-width="2.0000"/>',
        f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="3.0000" fill="black"/>',
    ]
    for depth, half_width in ((16.5, 20.16), (5.5, 9.16)):
        parts.append(_rect(0.0, mid_y - half_width, depth, mid_y + half_width))
        parts.append(_rect(PITCH_LENGTH - depth, mid_y - half_width, PITCH_LENGTH, mid_y + half_width))
    for spot_x in (11.0, PITCH_LENGTH - 11.0):
        sx, sy = pitch_point(spot_x, mid_y)
        parts.append(f'<circle cx="{_fmt(sx)}" cy="{_fmt(sy)}" r="3.0000" fill="black"/>')
    return parts


def _document(body: Sequence[str], title: str) -> str:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{CANVAS_WIDTH}" '
        f'height="{CANVAS_HEIGHT}" viewBox="0 0 {CANVAS_WIDTH} {CANVAS_HEIGHT}">',
    ]
    if title:
        lines.append(f"<title>{escape(title)}</title>")
    lines.extend(body)
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _write(document: str, path: Optional[Path]) -> str:
    if path is not None:
        path = Path(path)
        ensure_directory(path.parent)
        path.write_text(document, encoding="utf-8")
    return document


def pitch_scatter_svg(
    points: Sequence[Tuple[float, float, str]],
    path: Optional[Path] = None,
    *,
    title: str = "",
) -> str:
    """Pitch outline with one marker per ``(x, y, colour)`` point."""

    body = _pitch_markings()
    for x, y, color in points:
        px, py = pitch_point(float(x), float(y))
        body.append(
            f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="6.0000" fill="{escape(color)}" '
            f'stroke="black" stroke-width="0.5000"/>'
        )
    return _write(_document(body, title), path)


def ols_fit(x: Sequence[float], y: Sequence[float]) -> Tuple[float, float]:
    """Least-squares (intercept, slope)."""

    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.size != ys.size or xs.size < 2:
        raise ContractViolation("Regression needs at least two paired points")
    dx = xs - xs.mean()
    variance = math.fsum(dx * dx)
    if variance == 0.0:
        raise ContractViolation("Regression is undefined for constant x")
    slope = math.fsum(dx * (ys - ys.mean())) / variance
    return float(ys.mean() - slope * xs.mean()), slope


_MARGIN_LEFT, _MARGIN_RIGHT, _MARGIN_TOP, _MARGIN_BOTTOM = 90.0, 40.0, 40.0, 80.0


def _padded(low: float, high: float) -> Tuple[float, float]:
    span = high - low
    pad = span * 0.05 if span > 0 else 1.0
    return low - pad, high + pad


def scatter_regression_svg(
    x: Sequence[float],
    y: Sequence[float],
    path: Optional[Path] = None,
    *,
    x_label: str = "Defender score",
    y_label: str = "Market value (millions)",
    title: str = "",
) -> str:
    """Scatter of (x, y) with its least-squares line and a Pearson r note."""

    intercept, slope = ols_fit(x, y)
    xs = [float(value) for value in x]
    ys = [float(value) for value in y]
    fitted = [intercept + slope * value for value in xs]
    x_low, x_high = _padded(min(xs), max(xs))
    y_low, y_high = _padded(min(ys + fitted), max(ys + fitted))
    plot_width = CANVAS_WIDTH - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_height = CANVAS_HEIGHT - _MARGIN_TOP - _MARGIN_BOTTOM

    def to_canvas(px: float, py: float) -> Tuple[float, float]:
        return (
            _MARGIN_LEFT + (px - x_low) / (x_high - x_low) * plot_width,
            _MARGIN_TOP + (y_high - py) / (y_high - y_low) * plot_height,
        )

    bottom = CANVAS_HEIGHT - _MARGIN_BOTTOM
    right = CANVAS_WIDTH - _MARGIN_RIGHT
    body = [
        f'<rect x="0.0000" y="0.0000" width="{_fmt(CANVAS_WIDTH)}" height="{_fmt(CANVAS_HEIGHT)}" fill="white"/>',
        f'<line x1="{_fmt(_MARGIN_LEFT)}" y1="{_fmt(bottom)}" x2="{_fmt(right)}" y2="{_fmt(bottom)}" stroke="black" stroke-width="1.5000"/>',
        f'<line x1="{_fmt(_MARGIN_LEFT)}" y1="{_fmt(_MARGIN_TOP)}" x2="{_fmt(_MARGIN_LEFT)}" y2="{_fmt(bottom)}" stroke="black" stroke-width="1.5000"/>',
    ]
    for step in range(5):
        fraction = step / 4.0
        tick_x = x_low + fraction * (x_high - x_low)
        tick_y = y_low + fraction * (y_high - y_low)
        cx, _ = to_canvas(tick_x, y_low)
        _, cy = to_canvas(x_low, tick_y)
        body.append(f'<text x="{_fmt(cx)}" y="{_fmt(bottom + 22.0)}" font-size="14" text-anchor="middle">{_fmt(tick_x)}</text>')
        body.append(f'<text x="{_fmt(_MARGIN_LEFT - 8.0)}" y="{_fmt(cy + 5.0)}" font-size="14" text-anchor="end">{_fmt(tick_y)}</text>')
    body.append(
        f'<text x="{_fmt(_MARGIN_LEFT + plot_width / 2.0)}" y="{_fmt(CANVAS_HEIGHT - 25.0)}" '
        f'font-size="16" text-anchor="middle">{escape(x_label)}</text>'
    )
    body.append(
        f'<text x="20.0000" y="{_fmt(_MARGIN_TOP + plot_height / 2.0)}" font-size="16" text-anchor="middle" '
        f'transform="rotate(-90 20.0000 {_fmt(_MARGIN_TOP + plot_height / 2.0)})">{escape(y_label)}</text>'
    )
    for px, py in zip(xs, ys):
        cx, cy = to_canvas(px, py)
        body.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="5.0000" fill="blue" fill-opacity="0.7000"/>')
    start = to_canvas(min(xs), intercept + slope * min(xs))
    end = to_canvas(max(xs), intercept + slope * max(xs))
    body.append(
        f'<line x1="{_fmt(start[0])}" y1="{_fmt(start[1])}" x2="{_fmt(end[0])}" y2="{_fmt(end[1])}" '
        f'stroke="red" stroke-width="2.0000"/>'
    )
    if len(xs) >= 3 and max(ys) > min(ys):
        r = pearson(xs, ys).statistic
        body.append(f'<text x="{_fmt(right - 10.0)}" y="{_fmt(_MARGIN_TOP + 20.0)}" font-size="16" text-anchor="end">r = {_fmt(r)}</text>')
    return _write(_document(body, title), path)
