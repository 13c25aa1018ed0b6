"""Minimal deterministic SVG plotting for static figures."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#440154", "#482878", "#3e4989", "#31688e", "#26828e",
           "#1f9e89", "#35b779", "#6ece58", "#b5de2b", "#fde725")


def ramp(i: int, n: int) -> str:
    if n <= 1:
        return PALETTE[0]
    return PALETTE[round(i * (len(PALETTE) - 1) / (n - 1))]


def _f(v: float) -> str:
    return f"{v:.2f}"


class Figure:
    """A single panel with data coordinates ``xlim`` x ``ylim``.

    ``log`` axes take data already in log10 and only affect tick labels.
    """

    def __init__(self, xlim, ylim, width: int = 640, height: int | None = None,
                 title: str = "", xlabel: str = "Re", ylabel: str = "Im",
                 equal_aspect: bool = True, log_ticks: bool = False):
        self.x0, self.x1 = map(float, xlim)
        self.y0, self.y1 = map(float, ylim)
        self.margin = 56
        self.pw = width - 2 * self.margin
        if height is None:
            if equal_aspect:
                height = int(self.pw * (self.y1 - self.y0) / (self.x1 - self.x0)) + 2 * self.margin
            else:
                height = int(0.75 * width)
        self.width, self.height = width, height
        self.ph = height - 2 * self.margin
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.log_ticks = log_ticks
        self.layers: list[tuple[str, list[str]]] = []
        self.legend: list[tuple[str, str]] = []

    def sx(self, x: float) -> float:
        return self.margin + (x - self.x0) / (self.x1 - self.x0) * self.pw

    def sy(self, y: float) -> float:
        return self.margin + (self.y1 - y) / (self.y1 - self.y0) * self.ph

    def polyline(self, pts, color: str, width: float = 1.0) -> str:
        pts = np.asarray(pts)
        coords = " ".join(f"{_f(self.sx(x))},{_f(self.sy(y))}" for x, y in pts)
        return (f'<polyline points="{coords}" fill="none" stroke="{color}" '
                f'stroke-width="{width}"/>')

    def dot(self, z, r: float = 1.6, color: str = "#000000") -> str:
        return f'<circle cx="{_f(self.sx(z.real))}" cy="{_f(self.sy(z.imag))}" r="{r}" fill="{color}"/>'

    def circle(self, center: complex, radius: float, color: str = "#d62728") -> str:
        rx = radius / (self.x1 - self.x0) * self.pw
        ry = radius / (self.y1 - self.y0) * self.ph
        return (f'<ellipse cx="{_f(self.sx(center.real))}" cy="{_f(self.sy(center.imag))}" '
                f'rx="{_f(rx)}" ry="{_f(ry)}" fill="none" stroke="{color}" stroke-dasharray="4 3"/>')

    def layer(self, name: str, items: list[str]) -> None:
        self.layers.append((name, items))

    def legend_entry(self, label: str, color: str) -> None:
        self.legend.append((label, color))

    def _ticks(self, lo: float, hi: float, n: int = 5) -> list[float]:
        step = 10 ** math.floor(math.log10((hi - lo) / n))
        for mult in (1, 2, 5, 10):
            if (hi - lo) / (step * mult) <= n:
                step *= mult
                break
        start = math.ceil(lo / step) * step
        return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]

    def _tick_label(self, v: float) -> str:
        if self.log_ticks:
            return f"1e{v:g}"
        return f"{v:g}"

    def render(self) -> str:
        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
               f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">',
               '<rect width="100%" height="100%" fill="white"/>',
               f'<rect x="{self.margin}" y="{self.margin}" width="{self.pw}" height="{self.ph}" '
               'fill="none" stroke="#444"/>']
        axis = ['<g id="axes" font-family="sans-serif" font-size="11" fill="#222">']
        for v in self._ticks(self.x0, self.x1):
            x = _f(self.sx(v))
            axis.append(f'<line x1="{x}" y1="{self.margin + self.ph}" x2="{x}" '
                        f'y2="{self.margin + self.ph + 4}" stroke="#444"/>')
            axis.append(f'<text x="{x}" y="{self.margin + self.ph + 16}" '
                        f'text-anchor="middle">{self._tick_label(v)}</text>')
        for v in self._ticks(self.y0, self.y1):
            y = _f(self.sy(v))
            axis.append(f'<line x1="{self.margin - 4}" y1="{y}" x2="{self.margin}" y2="{y}" stroke="#444"/>')
            axis.append(f'<text x="{self.margin - 6}" y="{y}" text-anchor="end" '
                        f'dominant-baseline="middle">{self._tick_label(v)}</text>')
        axis.append(f'<text x="{self.margin + self.pw / 2}" y="{self.height - 12}" '
                    f'text-anchor="middle">{escape(self.xlabel)}</text>')
        axis.append(f'<text x="14" y="{self.margin + self.ph / 2}" text-anchor="middle" '
                    f'transform="rotate(-90 14 {self.margin + self.ph / 2})">{escape(self.ylabel)}</text>')
        if self.title:
            axis.append(f'<text x="{self.width / 2}" y="{self.margin / 2}" text-anchor="middle" '
                        f'font-size="13">{escape(self.title)}</text>')
        axis.append("</g>")
        out.extend(axis)
        out.append(f'<clipPath id="plot"><rect x="{self.margin}" y="{self.margin}" '
                   f'width="{self.pw}" height="{self.ph}"/></clipPath>')
        for name, items in self.layers:
            out.append(f'<g id="{escape(name)}" clip-path="url(#plot)">')
            out.extend(items)
            out.append("</g>")
        if self.legend:
            out.append('<g id="legend" font-family="sans-serif" font-size="10">')
            out.append(f'<rect x="{self.margin + 2}" y="{self.margin + 2}" width="112" '
                       f'height="{13 * len(self.legend) + 4}" fill="white" fill-opacity="0.85"/>')
            for i, (label, color) in enumerate(self.legend):
                y = self.margin + 10 + 13 * i
                x = self.margin + 6
                out.append(f'<rect x="{x}" y="{y - 6}" width="8" height="8" fill="{color}"/>')
                out.append(f'<text x="{x + 10}" y="{y + 2}">{escape(label)}</text>')
            out.append("</g>")
        out.append("</svg>")
        return "\n".join(out) + "\n"
