"""Stacked-area SVG of a schedule, written by hand so the bytes are reproducible.

Every coordinate is printed with two decimals and nothing depends on the
clock or on dict ordering, so identical inputs give identical files.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .profile import SolarProfile
from .sizing.types import ProblemSpec, Solution

WIDTH = 720
MAIN_H = 300
STORAGE_H = 180
MARGIN = (50, 20, 30, 40)  # left, right, top, bottom
PALETTE = ("#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2", "#edc948",
           "#ff9da7", "#9c755f", "#bab0ac")


def _f(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _steps(values: np.ndarray) -> list[tuple[float, float]]:
    """Corner points of a piecewise-constant series over unit-width steps."""
    pts = []
    for t, v in enumerate(values):
        pts += [(t, float(v)), (t + 1, float(v))]
    return pts


class _Panel:
    def __init__(self, top: float, height: float, T: int, lo: float, hi: float):
        self.x0 = MARGIN[0]
        self.x1 = WIDTH - MARGIN[1]
        self.top, self.height = top, height
        self.T = max(T, 1)
        self.lo, self.hi = lo, hi if hi > lo else lo + 1.0

    def x(self, t: float) -> float:
        return self.x0 + (self.x1 - self.x0) * t / self.T

    def y(self, v: float) -> float:
        return self.top + self.height * (1 - (v - self.lo) / (self.hi - self.lo))

    def pts(self, pairs) -> str:
        return " ".join(f"{_f(self.x(t))},{_f(self.y(v))}" for t, v in pairs)

    def axes(self, label: str) -> list[str]:
        out = [f'<rect x="{_f(self.x0)}" y="{_f(self.top)}" width="{_f(self.x1 - self.x0)}" '
               f'height="{_f(self.height)}" fill="none" stroke="#999"/>']
        for frac in (0.0, 0.5, 1.0):
            v = self.lo + frac * (self.hi - self.lo)
            out.append(f'<text x="{_f(self.x0 - 6)}" y="{_f(self.y(v) + 4)}" font-size="10" '
                       f'text-anchor="end">{_f(v)}</text>')
        step = max(1, self.T // 8)
        for t in range(0, self.T + 1, step):
            out.append(f'<text x="{_f(self.x(t))}" y="{_f(self.top + self.height + 14)}" '
                       f'font-size="10" text-anchor="middle">{t}</text>')
        out.append(f'<text x="{_f(self.x0)}" y="{_f(self.top - 6)}" font-size="12">'
                   f'{escape(label)}</text>')
        return out


def render_svg(sol: Solution, profile: SolarProfile, spec: ProblemSpec | None = None) -> str:
    S = profile.array
    T = profile.steps
    storage = spec.has_storage if spec is not None else bool(
        sol.battery_size > 0 or np.any(sol.Ps != 0))
    height = MAIN_H + MARGIN[2] + MARGIN[3] + (STORAGE_H + MARGIN[2] + MARGIN[3] if storage else 0)
    hi = max(float(S.max(initial=0.0)), float(sol.Y.sum(axis=0).max(initial=0.0)), 1e-9)
    main = _Panel(MARGIN[2], MAIN_H, T, 0.0, hi * 1.05)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
           f'viewBox="0 0 {WIDTH} {height}">']
    out.append('<g id="panel-load">')
    out += main.axes("scheduled load (stacked) and solar power, pu")
    base = np.zeros(T)
    for i in range(sol.n_units):
        top = base + sol.Y[i]
        upper = _steps(top)
        lower = _steps(base)[::-1]
        colour = PALETTE[i % len(PALETTE)]
        out.append(f'<polygon id="unit-{i + 1}" points="{main.pts(upper + lower)}" '
                   f'fill="{colour}" fill-opacity="0.8" stroke="none"/>')
        base = top
    out.append(f'<polyline id="solar" points="{main.pts(_steps(S))}" fill="none" '
               f'stroke="#222" stroke-width="1.5"/>')
    out.append("</g>")
    if storage:
        soc = sol.soc(spec, profile) if spec is not None else \
            sol.battery_size / 2 - profile.dt_hours * np.cumsum(sol.Ps)
        vals = np.concatenate([sol.Ps, soc, [0.0]])
        lo, hi2 = float(vals.min()), float(vals.max())
        pad = 0.05 * max(hi2 - lo, 1e-9)
        panel = _Panel(MAIN_H + MARGIN[2] + MARGIN[3] + MARGIN[2], STORAGE_H, T, lo - pad,
                       hi2 + pad)
        out.append('<g id="panel-storage">')
        out += panel.axes("battery net discharge Ps (pu) and stored energy (pu h)")
        out.append(f'<line x1="{_f(panel.x0)}" y1="{_f(panel.y(0))}" x2="{_f(panel.x1)}" '
                   f'y2="{_f(panel.y(0))}" stroke="#bbb"/>')
        out.append(f'<polyline id="ps" points="{panel.pts(_steps(sol.Ps))}" fill="none" '
                   f'stroke="#e15759" stroke-width="1.5"/>')
        soc_pts = [(t + 1, float(v)) for t, v in enumerate(soc)]
        e0 = float(soc[0] + profile.dt_hours * sol.Ps[0]) if T else 0.0
        out.append(f'<polyline id="soc" points="{panel.pts([(0, e0)] + soc_pts)}" fill="none" '
                   f'stroke="#4e79a7" stroke-width="1.5" stroke-dasharray="4 2"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path: str | Path, sol: Solution, profile: SolarProfile,
              spec: ProblemSpec | None = None) -> None:
    Path(path).write_text(render_svg(sol, profile, spec))
