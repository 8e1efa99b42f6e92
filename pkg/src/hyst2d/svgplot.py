"""Tiny dependency-free SVG line plots for the command line outputs."""

from __future__ import annotations

import numpy as np

from .io import atomic_write_text

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _nice_ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10.0 ** np.floor(np.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if mult * mag >= raw:
            step = mult * mag
            break
    else:
        step = raw
    start = np.ceil(lo / step) * step
    ticks = np.arange(start, hi + 0.5 * step, step)
    return ticks[(ticks >= lo - 1e-12) & (ticks <= hi + 1e-12)]


def _fmt(v: float) -> str:
    return f"{v:.6g}"


class _Canvas:
    def __init__(self, width: int, height: int, title: str):
        self.w = width
        self.h = height
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">',
            f'<rect width="{width}" height="{height}" fill="white"/>',
            f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>',
        ]

    def finish(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _frame(canvas: _Canvas, box, xlim, ylim, xlabel: str, ylabel: str):
    x0, y0, x1, y1 = box

    def sx(v):
        return x0 + (v - xlim[0]) / (xlim[1] - xlim[0]) * (x1 - x0)

    def sy(v):
        return y1 - (v - ylim[0]) / (ylim[1] - ylim[0]) * (y1 - y0)

    canvas.parts.append(
        f'<rect x="{x0}" y="{y0}" width="{x1 - x0}" height="{y1 - y0}" '
        f'fill="none" stroke="#333" stroke-width="1"/>'
    )
    for v in _nice_ticks(*xlim):
        px = sx(v)
        canvas.parts.append(
            f'<line x1="{px:.2f}" y1="{y1}" x2="{px:.2f}" y2="{y1 + 4}" stroke="#333"/>'
        )
        canvas.parts.append(
            f'<text x="{px:.2f}" y="{y1 + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{_fmt(v)}</text>'
        )
    for v in _nice_ticks(*ylim):
        py = sy(v)
        canvas.parts.append(
            f'<line x1="{x0 - 4}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}" stroke="#333"/>'
        )
        canvas.parts.append(
            f'<text x="{x0 - 6}" y="{py + 3:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{_fmt(v)}</text>'
        )
    canvas.parts.append(
        f'<text x="{(x0 + x1) / 2:.1f}" y="{y1 + 32}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{xlabel}</text>'
    )
    canvas.parts.append(
        f'<text x="14" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 14 {(y0 + y1) / 2:.1f})">{ylabel}</text>'
    )
    return sx, sy


def _poly(sx, sy, xs, ys, color: str, width: float = 1.5) -> str:
    # non-finite samples break the polyline into separate runs
    pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" if np.isfinite(x) and np.isfinite(y)
                   else "|" for x, y in zip(xs, ys))
    pieces = [run.strip() for run in pts.split("|") if run.strip()]
    return "\n".join(
        f'<polyline points="{run}" fill="none" stroke="{color}" '
        f'stroke-width="{width}"/>' for run in pieces
    )


def _limits(arrays) -> tuple[float, float]:
    finite = [a[np.isfinite(a)] for a in arrays]
    finite = [a for a in finite if a.size]
    if not finite:
        return -0.5, 0.5
    lo = min(float(np.min(a)) for a in finite)
    hi = max(float(np.max(a)) for a in finite)
    if hi - lo < 1e-12:
        lo -= 0.5
        hi += 0.5
    pad = 0.04 * (hi - lo)
    return lo - pad, hi + pad


def line_plot(path, series, title: str, xlabel: str, ylabel: str,
              size=(640, 420)) -> None:
    """``series``: iterable of (x, y, label) triples sharing the axes."""
    series = [(np.asarray(x, dtype=float), np.asarray(y, dtype=float), lab)
              for x, y, lab in series]
    canvas = _Canvas(*size, title)
    box = (64, 30, size[0] - 16, size[1] - 48)
    xlim = _limits([s[0] for s in series])
    ylim = _limits([s[1] for s in series])
    sx, sy = _frame(canvas, box, xlim, ylim, xlabel, ylabel)
    for k, (x, y, lab) in enumerate(series):
        color = _PALETTE[k % len(_PALETTE)]
        canvas.parts.append(_poly(sx, sy, x, y, color))
        if lab:
            canvas.parts.append(
                f'<text x="{box[2] - 8}" y="{box[1] + 14 + 14 * k}" '
                f'text-anchor="end" font-family="sans-serif" font-size="11" '
                f'fill="{color}">{lab}</text>'
            )
    atomic_write_text(path, canvas.finish())


def plane_plot(path, polylines, title: str, size=(520, 520)) -> None:
    """Planar curves with equal axis scaling; ``polylines``: (points, label)."""
    polylines = [(np.asarray(p, dtype=float), lab) for p, lab in polylines]
    canvas = _Canvas(*size, title)
    box = (64, 30, size[0] - 16, size[1] - 48)
    xlim = _limits([p[:, 0] for p, _ in polylines])
    ylim = _limits([p[:, 1] for p, _ in polylines])
    # equalize scales around the common center
    spanx = xlim[1] - xlim[0]
    spany = ylim[1] - ylim[0]
    span = max(spanx, spany)
    cx, cy = 0.5 * (xlim[0] + xlim[1]), 0.5 * (ylim[0] + ylim[1])
    xlim = (cx - span / 2, cx + span / 2)
    ylim = (cy - span / 2, cy + span / 2)
    sx, sy = _frame(canvas, box, xlim, ylim, "x1", "x2")
    for k, (p, lab) in enumerate(polylines):
        color = _PALETTE[k % len(_PALETTE)]
        canvas.parts.append(_poly(sx, sy, p[:, 0], p[:, 1], color))
        if lab:
            canvas.parts.append(
                f'<text x="{box[2] - 8}" y="{box[1] + 14 + 14 * k}" '
                f'text-anchor="end" font-family="sans-serif" font-size="11" '
                f'fill="{color}">{lab}</text>'
            )
    atomic_write_text(path, canvas.finish())
