"""A very small SVG line-chart writer (no plotting dependency)."""
from __future__ import annotations

from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"]


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str
    color: str
    step: bool = False
    dashed: bool = False


@dataclass
class Chart:
    title: str
    xlabel: str
    ylabel: str
    xlim: tuple = (0.0, 1.0)
    ylim: tuple = (0.0, 1.0)
    width: int = 640
    height: int = 440
    series: list = field(default_factory=list)

    margin_l = 64
    margin_r = 20
    margin_t = 36
    margin_b = 52

    def add(self, x, y, label, step=False, dashed=False, color=None):
        color = color or PALETTE[len(self.series) % len(PALETTE)]
        self.series.append(Series(np.asarray(x, float), np.asarray(y, float), label, color, step, dashed))
        return self

    def _px(self, x):
        x0, x1 = self.xlim
        return self.margin_l + (np.asarray(x) - x0) / (x1 - x0) * (self.width - self.margin_l - self.margin_r)

    def _py(self, y):
        y0, y1 = self.ylim
        h = self.height - self.margin_t - self.margin_b
        return self.margin_t + (1.0 - (np.asarray(y) - y0) / (y1 - y0)) * h

    def _path(self, s: Series) -> str:
        x, y = s.x, s.y
        if s.step and x.size:
            # right-continuous staircase
            xs = np.repeat(x, 2)[1:]
            ys = np.repeat(y, 2)[:-1]
            x, y = xs, ys
        px = np.clip(self._px(x), 0, self.width)
        py = np.clip(self._py(y), 0, self.height)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        return (f'<polyline fill="none" stroke="{s.color}" stroke-width="1.6"{dash} '
                f'points="{pts}"/>')

    def to_svg(self) -> str:
        w, h = self.width, self.height
        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
            f'<rect width="{w}" height="{h}" fill="white"/>',
            f'<text x="{w / 2:.1f}" y="22" text-anchor="middle" font-family="sans-serif" '
            f'font-size="15">{escape(self.title)}</text>',
        ]
        x0p, x1p = self._px(self.xlim[0]), self._px(self.xlim[1])
        y0p, y1p = self._py(self.ylim[0]), self._py(self.ylim[1])
        out.append(f'<rect x="{x0p:.2f}" y="{y1p:.2f}" width="{x1p - x0p:.2f}" height="{y0p - y1p:.2f}" '
                   f'fill="none" stroke="black"/>')
        for t in np.linspace(*self.xlim, 6):
            px = float(self._px(t))
            out.append(f'<line x1="{px:.2f}" y1="{y0p:.2f}" x2="{px:.2f}" y2="{y0p + 5:.2f}" stroke="black"/>')
            out.append(f'<text x="{px:.2f}" y="{y0p + 19:.2f}" text-anchor="middle" font-family="sans-serif" '
                       f'font-size="11">{t:.2g}</text>')
        for t in np.linspace(*self.ylim, 6):
            py = float(self._py(t))
            out.append(f'<line x1="{x0p - 5:.2f}" y1="{py:.2f}" x2="{x0p:.2f}" y2="{py:.2f}" stroke="black"/>')
            out.append(f'<text x="{x0p - 8:.2f}" y="{py + 4:.2f}" text-anchor="end" font-family="sans-serif" '
                       f'font-size="11">{t:.2g}</text>')
        out.append(f'<text x="{(x0p + x1p) / 2:.1f}" y="{h - 12}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="13">{escape(self.xlabel)}</text>')
        out.append(f'<text x="16" y="{(y0p + y1p) / 2:.1f}" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="13" transform="rotate(-90 16 {(y0p + y1p) / 2:.1f})">{escape(self.ylabel)}</text>')
        for s in self.series:
            out.append(self._path(s))
        for i, s in enumerate(self.series):
            ly = y1p + 16 + 16 * i
            lx = x0p + 12
            dash = ' stroke-dasharray="6,4"' if s.dashed else ""
            out.append(f'<line x1="{lx:.1f}" y1="{ly:.1f}" x2="{lx + 22:.1f}" y2="{ly:.1f}" '
                       f'stroke="{s.color}" stroke-width="2"{dash}/>')
            out.append(f'<text x="{lx + 28:.1f}" y="{ly + 4:.1f}" font-family="sans-serif" '
                       f'font-size="11">{escape(s.label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"
