################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Standalone SVG plots of partial effects.

Coordinates are rounded to two decimals before they reach svgwrite, so
identical inputs give identical bytes.
"""
from typing import List, Optional, Sequence, Tuple

import numpy as np
import svgwrite

from ..boosting import PartialEffect
from ..typing import DumpTarget
from ..utils import ensure_open

WIDTH, HEIGHT = 640, 420
MARGIN = {"top": 50, "right": 30, "bottom": 70, "left": 80}
N_TICKS = 5
BAND_COLOR = "#9ecae1"
LINE_COLOR = "#08519c"

Point = Tuple[float, float]


class _Frame:
    """Maps data coordinates to the plot area."""

    def __init__(self, x_limits: Tuple[float, float], y_limits: Tuple[float, float]):
        self.x_limits = _padded(*x_limits)
        self.y_limits = _padded(*y_limits)
        self.left = MARGIN["left"]
        self.right = WIDTH - MARGIN["right"]
        self.top = MARGIN["top"]
        self.bottom = HEIGHT - MARGIN["bottom"]

    def x(self, value: float) -> float:
        low, high = self.x_limits
        return round(
            self.left + (value - low) / (high - low) * (self.right - self.left), 2
        )

    def y(self, value: float) -> float:
        low, high = self.y_limits
        return round(
            self.bottom - (value - low) / (high - low) * (self.bottom - self.top), 2
        )


def _padded(low: float, high: float) -> Tuple[float, float]:
    if high - low < 1e-12:
        return low - 1.0, high + 1.0
    pad = 0.05 * (high - low)
    return low - pad, high + pad


def _tick_label(value: float) -> str:
    text = f"{value:.3g}"
    return "0" if text == "-0" else text


def _drawing(effect: PartialEffect, note: Optional[str]) -> svgwrite.Drawing:
    dwg = svgwrite.Drawing(size=(WIDTH, HEIGHT))
    dwg.viewbox(0, 0, WIDTH, HEIGHT)
    dwg.set_desc(title=f"Partial effect of {effect.label}", desc=note)
    dwg.add(dwg.rect(insert=(0, 0), size=(WIDTH, HEIGHT), fill="white"))
    dwg.add(
        dwg.text(
            effect.label, insert=(WIDTH / 2, 25), text_anchor="middle", font_size=16
        )
    )
    return dwg


def _y_axis(dwg: svgwrite.Drawing, frame: _Frame) -> None:
    dwg.add(
        dwg.line(
            start=(frame.left, frame.top), end=(frame.left, frame.bottom), stroke="black"
        )
    )
    for value in np.linspace(*frame.y_limits, N_TICKS):
        y = frame.y(value)
        dwg.add(dwg.line(start=(frame.left - 5, y), end=(frame.left, y), stroke="black"))
        dwg.add(
            dwg.text(
                _tick_label(value),
                insert=(frame.left - 8, round(y + 4, 2)),
                text_anchor="end",
                font_size=11,
            )
        )
    center = (frame.top + frame.bottom) / 2
    title = dwg.text(
        "Partial effect", insert=(20, center), text_anchor="middle", font_size=13
    )
    title.rotate(-90, center=(20, center))
    dwg.add(title)
    low, high = frame.y_limits
    if low < 0 < high:
        dwg.add(
            dwg.line(
                start=(frame.left, frame.y(0.0)),
                end=(frame.right, frame.y(0.0)),
                stroke="#999999",
                stroke_dasharray="4,4",
            )
        )


def _x_axis(
    dwg: svgwrite.Drawing,
    frame: _Frame,
    ticks: Sequence[Tuple[float, str]],
    title: str,
) -> None:
    dwg.add(
        dwg.line(
            start=(frame.left, frame.bottom),
            end=(frame.right, frame.bottom),
            stroke="black",
        )
    )
    for value, label in ticks:
        x = frame.x(value)
        dwg.add(
            dwg.line(start=(x, frame.bottom), end=(x, frame.bottom + 5), stroke="black")
        )
        dwg.add(
            dwg.text(
                label, insert=(x, frame.bottom + 20), text_anchor="middle", font_size=11
            )
        )
    dwg.add(
        dwg.text(
            title,
            insert=((frame.left + frame.right) / 2, HEIGHT - 20),
            text_anchor="middle",
            font_size=13,
        )
    )


def _value_range(effect: PartialEffect) -> Tuple[float, float]:
    values = [effect.estimate]
    if effect.has_band:
        values += [effect.lower, effect.upper]
    stacked = np.concatenate(values)
    return float(stacked.min()), float(stacked.max())


def _curve(dwg: svgwrite.Drawing, effect: PartialEffect) -> None:
    grid = np.asarray(effect.grid, dtype=float)
    frame = _Frame((float(grid.min()), float(grid.max())), _value_range(effect))
    xs = [frame.x(value) for value in grid]
    _y_axis(dwg, frame)
    if effect.has_band:
        outline: List[Point] = [
            (x, frame.y(value)) for x, value in zip(xs, effect.upper)
        ] + [(x, frame.y(value)) for x, value in zip(xs[::-1], effect.lower[::-1])]
        dwg.add(
            dwg.polygon(outline, fill=BAND_COLOR, fill_opacity=0.6, stroke="none")
        )
    estimate = [(x, frame.y(value)) for x, value in zip(xs, effect.estimate)]
    dwg.add(dwg.polyline(estimate, fill="none", stroke=LINE_COLOR, stroke_width=2))
    ticks = [
        (value, _tick_label(value)) for value in np.linspace(*frame.x_limits, N_TICKS)
    ]
    _x_axis(dwg, frame, ticks, effect.columns[0])


def _markers(dwg: svgwrite.Drawing, effect: PartialEffect) -> None:
    positions = np.arange(len(effect.grid), dtype=float)
    frame = _Frame((-0.5, len(effect.grid) - 0.5), _value_range(effect))
    _y_axis(dwg, frame)
    for index, position in enumerate(positions):
        x = frame.x(position)
        if effect.has_band:
            top, bottom = frame.y(effect.upper[index]), frame.y(effect.lower[index])
            bar = dwg.g(stroke=LINE_COLOR, stroke_width=1.5)
            bar.add(dwg.line(start=(x, top), end=(x, bottom)))
            for y in (top, bottom):
                bar.add(dwg.line(start=(round(x - 6, 2), y), end=(round(x + 6, 2), y)))
            dwg.add(bar)
        dwg.add(
            dwg.circle(
                center=(x, frame.y(effect.estimate[index])), r=5, fill=LINE_COLOR
            )
        )
    ticks = [(position, str(level)) for position, level in zip(positions, effect.grid)]
    _x_axis(dwg, frame, ticks, effect.columns[0])


def partial_effect_svg(effect: PartialEffect, note: Optional[str] = None) -> str:
    """SVG document plotting a partial effect.

    Continuous terms are drawn as a line with a shaded band, categorical and
    random-intercept terms as point markers with error bars. `note` becomes
    the document description.

    Raises:
        ValueError: empty grid or a surface term (two-column grid).
    """
    if len(effect.grid) == 0:
        raise ValueError(f"Partial effect of '{effect.term_id}' has an empty grid.")
    if effect.grid.ndim != 1:
        raise ValueError(f"Surface '{effect.term_id}' can't be drawn as a line plot.")
    dwg = _drawing(effect, note)
    if effect.is_categorical or len(effect.grid) == 1:
        _markers(dwg, effect)
    else:
        _curve(dwg, effect)
    return dwg.tostring() + "\n"


def render_partial_effect_svg(
    effect: PartialEffect, filename: DumpTarget, note: Optional[str] = None
) -> None:
    with ensure_open(filename, "w") as f:
        f.write(partial_effect_svg(effect, note))
