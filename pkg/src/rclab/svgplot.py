"""Minimal deterministic SVG renderer for the standard plot kinds.

Hand-rolled on purpose: identical input must produce byte-identical SVG, so
no plotting library (with embedded timestamps or version metadata) is used.
Three kinds are supported: `profile` (species/resource levels versus
trait), `entropy` (diagnostics versus time), and `waterfall` (layered
species profiles over time).
"""

from __future__ import annotations

import numpy as np

from .csvio import CsvTable
from .errors import UnknownKind

_W, _H = 720.0, 460.0
_ML, _MR, _MT, _MB = 64.0, 16.0, 34.0, 44.0

_COLORS = ("#1f4e9c", "#c23b22", "#2e7d32", "#8e44ad")


def _fnum(x: float) -> str:
    return f"{x:.2f}"


class _Panel:
    """One plot area with linear axes mapped into a viewport rectangle."""

    def __init__(self, x0, y0, w, h, xmin, xmax, ymin, ymax):
        if xmax <= xmin:
            xmax = xmin + 1.0
        if ymax <= ymin:
            ymax = ymin + 1.0
        self.x0, self.y0, self.w, self.h = x0, y0, w, h
        self.xmin, self.xmax, self.ymin, self.ymax = xmin, xmax, ymin, ymax

    def px(self, x: float) -> float:
        return self.x0 + (x - self.xmin) / (self.xmax - self.xmin) * self.w

    def py(self, y: float) -> float:
        return self.y0 + self.h - (y - self.ymin) / (self.ymax - self.ymin) * self.h

    def frame(self, out: list[str], title: str, xlabel: str, ylabel: str) -> None:
        out.append(
            f'<rect x="{_fnum(self.x0)}" y="{_fnum(self.y0)}" '
            f'width="{_fnum(self.w)}" height="{_fnum(self.h)}" '
            'fill="none" stroke="#404040" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fnum(self.x0 + self.w / 2)}" y="{_fnum(self.y0 - 8)}" '
            'text-anchor="middle" font-family="monospace" font-size="13">'
            f"{title}</text>"
        )
        out.append(
            f'<text x="{_fnum(self.x0 + self.w / 2)}" '
            f'y="{_fnum(self.y0 + self.h + 32)}" '
            'text-anchor="middle" font-family="monospace" font-size="11">'
            f"{xlabel}</text>"
        )
        out.append(
            f'<text x="{_fnum(self.x0 - 52)}" y="{_fnum(self.y0 + self.h / 2)}" '
            'text-anchor="middle" font-family="monospace" font-size="11" '
            f'transform="rotate(-90 {_fnum(self.x0 - 52)} '
            f'{_fnum(self.y0 + self.h / 2)})">{ylabel}</text>'
        )
        for i in range(5):
            xv = self.xmin + (self.xmax - self.xmin) * i / 4
            yv = self.ymin + (self.ymax - self.ymin) * i / 4
            xp, yp = self.px(xv), self.py(yv)
            out.append(
                f'<line x1="{_fnum(xp)}" y1="{_fnum(self.y0 + self.h)}" '
                f'x2="{_fnum(xp)}" y2="{_fnum(self.y0 + self.h + 4)}" '
                'stroke="#404040" stroke-width="1"/>'
            )
            out.append(
                f'<text x="{_fnum(xp)}" y="{_fnum(self.y0 + self.h + 16)}" '
                'text-anchor="middle" font-family="monospace" font-size="10">'
                f"{xv:.3g}</text>"
            )
            out.append(
                f'<line x1="{_fnum(self.x0 - 4)}" y1="{_fnum(yp)}" '
                f'x2="{_fnum(self.x0)}" y2="{_fnum(yp)}" '
                'stroke="#404040" stroke-width="1"/>'
            )
            out.append(
                f'<text x="{_fnum(self.x0 - 6)}" y="{_fnum(yp + 3)}" '
                'text-anchor="end" font-family="monospace" font-size="10">'
                f"{yv:.3g}</text>"
            )

    def polyline(self, out: list[str], xs, ys, color: str, label: str | None = None,
                 slot: int = 0) -> None:
        pts = " ".join(f"{_fnum(self.px(x))},{_fnum(self.py(y))}" for x, y in zip(xs, ys))
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.3"/>'
        )
        if label is not None:
            out.append(
                f'<text x="{_fnum(self.x0 + self.w - 6)}" '
                f'y="{_fnum(self.y0 + 14 + 13 * slot)}" text-anchor="end" '
                f'font-family="monospace" font-size="11" fill="{color}">{label}</text>'
            )


def _document(body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fnum(_W)}" '
        f'height="{_fnum(_H)}" viewBox="0 0 {_fnum(_W)} {_fnum(_H)}">\n'
        f'<rect x="0" y="0" width="{_fnum(_W)}" height="{_fnum(_H)}" fill="#ffffff"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def _series_names(table: CsvTable, prefix: str) -> list[str]:
    names = [c for c in table.header if c.startswith(prefix)]
    return sorted(names, key=lambda c: int(c[len(prefix):]))


def _bounds(arrays) -> tuple[float, float]:
    lo = min(float(np.min(a)) for a in arrays)
    hi = max(float(np.max(a)) for a in arrays)
    if hi == lo:
        hi = lo + 1.0
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def render_profile(table: CsvTable) -> str:
    """Species and resource levels versus trait.

    Works on stable-distribution tables (trait, f_tilde, R_tilde) and on
    trajectory tables, where the first and last recorded rows are shown
    against the trait index.
    """
    body: list[str] = []
    half_w = (_W - _ML - _MR - 40) / 2
    if "trait" in table.header:
        x = table.numeric("trait")
        series_f = [("f", table.numeric("f_tilde"))]
        series_R = [("R", table.numeric("R_tilde"))]
        xlabel = "trait"
    else:
        names_f = _series_names(table, "f_")
        names_R = _series_names(table, "R_")
        x = np.arange(1, len(names_f) + 1, dtype=float)
        fmat = np.array([table.numeric(c) for c in names_f])
        rmat = np.array([table.numeric(c) for c in names_R])
        series_f = [("t=start", fmat[:, 0]), ("t=end", fmat[:, -1])]
        series_R = [("t=start", rmat[:, 0]), ("t=end", rmat[:, -1])]
        xlabel = "trait index"
    ymin_f, ymax_f = _bounds([s for _, s in series_f])
    ymin_R, ymax_R = _bounds([s for _, s in series_R])
    p1 = _Panel(_ML, _MT, half_w, _H - _MT - _MB, float(x[0]), float(x[-1]),
                min(ymin_f, 0.0), ymax_f)
    p2 = _Panel(_ML + half_w + 40, _MT, half_w, _H - _MT - _MB,
                float(x[0]), float(x[-1]), min(ymin_R, 0.0), ymax_R)
    p1.frame(body, "species", xlabel, "f")
    p2.frame(body, "resources", xlabel, "R")
    for idx, (label, s) in enumerate(series_f):
        p1.polyline(body, x, s, _COLORS[idx % len(_COLORS)], label, idx)
    for idx, (label, s) in enumerate(series_R):
        p2.polyline(body, x, s, _COLORS[idx % len(_COLORS)], label, idx)
    return _document(body)


def render_entropy(table: CsvTable, log_scale: bool = False) -> str:
    """Entropy S and resource deviation Q versus time."""
    t = table.numeric("t")
    series = []
    s_col = table.column("S") if "S" in table.header else []
    if "S" in table.header and not any(v is None for v in s_col):
        series.append(("S", np.array(s_col, dtype=float)))
    series.append(("Q", table.numeric("Q")))
    if log_scale:
        series = [
            (f"log10({name})", np.log10(np.maximum(vals, 1e-300)))
            for name, vals in series
        ]
    ymin, ymax = _bounds([vals for _, vals in series])
    body: list[str] = []
    panel = _Panel(_ML, _MT, _W - _ML - _MR, _H - _MT - _MB,
                   float(t[0]), float(t[-1]), ymin, ymax)
    panel.frame(body, "diagnostics", "t", "value")
    for idx, (name, vals) in enumerate(series):
        panel.polyline(body, t, vals, _COLORS[idx % len(_COLORS)], name, idx)
    return _document(body)


def render_waterfall(table: CsvTable, layers: int = 24) -> str:
    """Layered species profiles over time, early at the bottom."""
    names_f = _series_names(table, "f_")
    if not names_f:
        raise UnknownKind("waterfall needs a trajectory CSV with f_* columns")
    fmat = np.array([table.numeric(c) for c in names_f]).T  # rows = times
    n_rows = fmat.shape[0]
    picks = sorted({int(round(i)) for i in np.linspace(0, n_rows - 1, min(layers, n_rows))})
    fmax = float(np.max(fmat)) or 1.0
    body: list[str] = []
    panel = _Panel(_ML, _MT, _W - _ML - _MR, _H - _MT - _MB,
                   1.0, float(fmat.shape[1]), 0.0, float(len(picks)) + 1.5)
    panel.frame(body, "species over time", "trait index", "time (layers)")
    x = np.arange(1, fmat.shape[1] + 1, dtype=float)
    for layer, row in enumerate(picks):
        ys = layer + 1.5 * fmat[row] / fmax
        panel.polyline(body, x, ys, _COLORS[layer % len(_COLORS)])
    return _document(body)


def render(table: CsvTable, kind: str, log_scale: bool = False) -> str:
    """Dispatch on plot kind; raises UnknownKind for anything unrecognized."""
    if kind == "profile":
        return render_profile(table)
    if kind == "entropy":
        return render_entropy(table, log_scale=log_scale)
    if kind == "waterfall":
        return render_waterfall(table)
    raise UnknownKind(f"unknown plot kind '{kind}' (expected profile|entropy|waterfall)")
