"""
Chart System for Fair Top-k
Self-contained SVG views of sweep results (trade-off curve, per-class rates, track summary)
"""

from __future__ import annotations

import math
from html import escape

# Canvas geometry (px)
WIDTH = 720
HEIGHT = 440
MARGIN_LEFT = 70
MARGIN_RIGHT = 150  # room for the legend
MARGIN_TOP = 40
MARGIN_BOTTOM = 60

# Axes
TICKS = 5  # tick marks per axis
LOG_FLOOR = 1e-4  # zero discrepancy is drawn here on log axes

# One colour per series, cycled past 12
PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939",
]


def _fmt(value):
    return f"{value:.2f}"


def _tick_label(value):
    if value == 0:
        return "0"
    if abs(value) >= 1e4 or abs(value) < 1e-2:
        return f"{value:.0e}"
    return f"{value:.3g}"


class SvgCanvas:
    """Accumulates SVG elements as text; get_svg() closes the document"""

    def __init__(self, width=WIDTH, height=HEIGHT):
        self.width = width
        self.height = height
        self.svg = (
            '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
            f'<svg version="1.1" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" xmlns="http://www.w3.org/2000/svg">\n'
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>\n'
        )

    def line(self, x1, y1, x2, y2, stroke="#000000", width=1.0, dashed=False):
        dash = ' stroke-dasharray="4 3"' if dashed else ""
        self.svg += (f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
                     f'stroke="{stroke}" stroke-width="{width}"{dash}/>\n')

    def polyline(self, points, stroke, width=1.5):
        if len(points) < 2:
            return
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
        self.svg += (f'<polyline points="{coords}" fill="none" stroke="{stroke}" '
                     f'stroke-width="{width}"/>\n')

    def circle(self, x, y, radius, fill, title=None):
        if title is None:
            self.svg += f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{radius}" fill="{fill}"/>\n'
        else:
            self.svg += (f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{radius}" fill="{fill}">'
                         f'<title>{escape(title)}</title></circle>\n')

    def text(self, x, y, string, size=12, anchor="start", extra=""):
        self.svg += (f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-family="sans-serif" '
                     f'font-size="{size}" text-anchor="{anchor}" {extra}>{escape(str(string))}</text>\n')

    def get_svg(self):
        return f"{self.svg}</svg>\n"


class Axes:
    """Maps data coordinates into the plotting area of a canvas"""

    def __init__(self, canvas, x_range, y_range, log_y=False):
        self.canvas = canvas
        self.log_y = log_y
        self.left = MARGIN_LEFT
        self.right = canvas.width - MARGIN_RIGHT
        self.top = MARGIN_TOP
        self.bottom = canvas.height - MARGIN_BOTTOM
        self.x_low, self.x_high = self._widen(*x_range)
        if log_y:
            low, high = (math.log10(max(v, LOG_FLOOR)) for v in y_range)
            self.y_low, self.y_high = math.floor(low), max(math.ceil(high), math.floor(low) + 1)
        else:
            self.y_low, self.y_high = self._widen(*y_range)

    @staticmethod
    def _widen(low, high):
        if high - low <= 1e-12:
            pad = abs(high) * 0.1 or 1.0
            return low - pad, high + pad
        return low, high

    def x(self, value):
        return self.left + (value - self.x_low) / (self.x_high - self.x_low) * (self.right - self.left)

    def y(self, value):
        if self.log_y:
            value = math.log10(max(value, LOG_FLOOR))
        return self.bottom - (value - self.y_low) / (self.y_high - self.y_low) * (self.bottom - self.top)

    def frame(self, title, x_label, y_label, x_ticks=None):
        c = self.canvas
        c.line(self.left, self.bottom, self.right, self.bottom)
        c.line(self.left, self.top, self.left, self.bottom)
        c.text(c.width / 2, MARGIN_TOP / 2 + 4, title, size=14, anchor="middle")
        c.text((self.left + self.right) / 2, c.height - 15, x_label, anchor="middle")
        c.text(18, (self.top + self.bottom) / 2, y_label, anchor="middle",
               extra=f'transform="rotate(-90 18 {_fmt((self.top + self.bottom) / 2)})"')

        if x_ticks is None:
            x_ticks = [(self.x_low + (self.x_high - self.x_low) * i / TICKS, None) for i in range(TICKS + 1)]
        for value, label in x_ticks:
            px = self.x(value)
            c.line(px, self.bottom, px, self.bottom + 5)
            c.text(px, self.bottom + 18, label if label is not None else _tick_label(value),
                   size=10, anchor="middle")

        if self.log_y:
            y_ticks = [(10.0 ** e, f"1e{e}") for e in range(self.y_low, self.y_high + 1)]
        else:
            y_ticks = [(self.y_low + (self.y_high - self.y_low) * i / TICKS, None) for i in range(TICKS + 1)]
        for value, label in y_ticks:
            py = self.y(value)
            c.line(self.left - 5, py, self.left, py)
            c.text(self.left - 8, py + 4, label if label is not None else _tick_label(value),
                   size=10, anchor="end")

    def legend(self, entries):
        c = self.canvas
        for i, (name, color) in enumerate(entries):
            y = self.top + 10 + i * 16
            c.line(self.right + 15, y, self.right + 35, y, stroke=color, width=2)
            c.text(self.right + 40, y + 4, name, size=11)


def tradeoff_chart(run) -> str:
    """Average utility decrease against mean discrepancy, one point per lambda"""
    canvas = SvgCanvas()
    xs = [r.mean_discrepancy for r in run.results]
    ys = [r.avg_utility_decrease for r in run.results]
    axes = Axes(canvas, (0.0, max(xs, default=1.0)), (0.0, max(ys, default=1.0)))
    axes.frame(f"Utility / parity trade-off (p = {run.rate:.2f})",
               "mean discrepancy D/|C|", "average utility decrease")
    points = [(axes.x(x), axes.y(y)) for x, y in zip(xs, ys)]
    canvas.polyline(points, PALETTE[0])
    for (px, py), result in zip(points, run.results):
        canvas.circle(px, py, 3, PALETTE[0], title=f"lambda={result.tradeoff:g}")
    return canvas.get_svg()


def class_rate_chart(run) -> str:
    """Selection rate of every class along the lambda grid, target rate dashed"""
    canvas = SvgCanvas()
    steps = list(range(len(run.results)))
    axes = Axes(canvas, (0.0, max(len(steps) - 1, 1)), (0.0, 1.0))
    every = max(1, math.ceil(len(steps) / 8))
    ticks = [(i, _tick_label(run.results[i].tradeoff)) for i in steps[::every]]
    axes.frame(f"Per-class selection rate (p = {run.rate:.2f})", "lambda", "selection rate",
               x_ticks=ticks)
    canvas.line(axes.left, axes.y(run.rate), axes.right, axes.y(run.rate), stroke="#555555", dashed=True)

    entries = []
    for i, label in enumerate(run.labels):
        color = PALETTE[i % len(PALETTE)]
        points = [(axes.x(step), axes.y(result.per_class_rate[i]))
                  for step, result in zip(steps, run.results)]
        canvas.polyline(points, color)
        if len(points) == 1:
            canvas.circle(*points[0], 3, color)
        entries.append((label, color))
    axes.legend(entries)
    return canvas.get_svg()


def tracks_summary_chart(runs) -> str:
    """Mean discrepancy (log scale) against average utility decrease, one series per program"""
    canvas = SvgCanvas()
    live = {pid: run for pid, run in runs.items() if run.results}
    xs = [r.avg_utility_decrease for run in live.values() for r in run.results]
    ys = [r.mean_discrepancy for run in live.values() for r in run.results]
    axes = Axes(canvas, (0.0, max(xs, default=1.0)),
                (min(ys, default=LOG_FLOOR), max(ys, default=1.0)), log_y=True)
    axes.frame("Separate tracks", "average utility decrease", "mean discrepancy (log)")

    entries = []
    for i, (program_id, run) in enumerate(live.items()):
        color = PALETTE[i % len(PALETTE)]
        points = [(axes.x(r.avg_utility_decrease), axes.y(r.mean_discrepancy)) for r in run.results]
        canvas.polyline(points, color)
        for px, py in points:
            canvas.circle(px, py, 2.5, color)
        entries.append((f"{program_id} (n={sum(run.sizes)})", color))
    axes.legend(entries)
    return canvas.get_svg()
