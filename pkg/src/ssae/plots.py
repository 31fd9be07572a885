"""Dependency-free figure emitters.

SVG files are written with fixed numeric formatting and no timestamps so
identical inputs give byte-identical files. Heatmaps go to PNG (one pixel
block per matrix cell) because a d x h grid of rectangles is too large
for a vector file at d = 10^4.
"""
from __future__ import annotations

import struct
import zlib
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")

# viridis anchor colours, low -> high
_VIRIDIS = np.array([
    (68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37),
], dtype=np.float64)

WIDTH, HEIGHT = 480, 320
MARGIN = dict(left=56, right=16, top=32, bottom=44)


def _f(v: float) -> str:
    return f"{v:.2f}"


class _Axes:
    def __init__(self, xlim, ylim, top=0.0, width=WIDTH, height=HEIGHT):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        self.left = MARGIN["left"]
        self.right = width - MARGIN["right"]
        self.top = top + MARGIN["top"]
        self.bottom = top + height - MARGIN["bottom"]

    def px(self, x):
        span = (self.x1 - self.x0) or 1.0
        return self.left + (x - self.x0) / span * (self.right - self.left)

    def py(self, y):
        span = (self.y1 - self.y0) or 1.0
        return self.bottom - (y - self.y0) / span * (self.bottom - self.top)

    def frame(self, title, xlabel, ylabel, n_ticks=5):
        out = [f'<rect x="{self.left}" y="{_f(self.top)}" width="{self.right - self.left}" '
               f'height="{_f(self.bottom - self.top)}" class="frame"/>']
        for i in range(n_ticks + 1):
            xv = self.x0 + (self.x1 - self.x0) * i / n_ticks
            yv = self.y0 + (self.y1 - self.y0) * i / n_ticks
            out.append(f'<text x="{_f(self.px(xv))}" y="{_f(self.bottom + 16)}" '
                       f'class="tick" text-anchor="middle">{xv:.3g}</text>')
            out.append(f'<text x="{self.left - 6}" y="{_f(self.py(yv) + 4)}" '
                       f'class="tick" text-anchor="end">{yv:.3g}</text>')
        mid = (self.left + self.right) / 2
        out.append(f'<text x="{_f(mid)}" y="{_f(self.top - 10)}" class="title" '
                   f'text-anchor="middle">{escape(title)}</text>')
        out.append(f'<text x="{_f(mid)}" y="{_f(self.bottom + 34)}" class="label" '
                   f'text-anchor="middle">{escape(xlabel)}</text>')
        ymid = (self.top + self.bottom) / 2
        out.append(f'<text x="14" y="{_f(ymid)}" class="label" text-anchor="middle" '
                   f'transform="rotate(-90 14 {_f(ymid)})">{escape(ylabel)}</text>')
        return out


def _document(body: list[str], width=WIDTH, height=HEIGHT) -> str:
    style = ("<style>.frame{fill:none;stroke:#444;stroke-width:1}"
             ".tick{font:10px sans-serif;fill:#333}.label{font:12px sans-serif;fill:#111}"
             ".title{font:bold 13px sans-serif;fill:#111}.legend{font:11px sans-serif;fill:#111}"
             "</style>")
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n{style}\n'
            f'<rect width="{width}" height="{height}" fill="white"/>\n'
            + "\n".join(body) + "\n</svg>\n")


def _legend(axes: _Axes, names, colors):
    out = []
    for i, (name, col) in enumerate(zip(names, colors)):
        y = axes.top + 12 + 14 * i
        out.append(f'<rect x="{axes.right - 110}" y="{_f(y - 8)}" width="10" height="10" fill="{col}"/>')
        out.append(f'<text x="{axes.right - 96}" y="{_f(y + 1)}" class="legend">{escape(name)}</text>')
    return out


def _limits(values, pad=0.05):
    values = np.asarray(values, dtype=np.float64)
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo
    return lo - pad * span, hi + pad * span


def line_plot_svg(path, series: dict[str, tuple], title="", xlabel="", ylabel="",
                  ylim=None) -> None:
    """``series`` maps a legend name to ``(xs, ys)``."""
    xs_all = np.concatenate([np.asarray(x, float) for x, _ in series.values()])
    ys_all = np.concatenate([np.asarray(y, float) for _, y in series.values()])
    ax = _Axes(_limits(xs_all, 0.0), ylim or _limits(ys_all))
    body = ax.frame(title, xlabel, ylabel)
    colors = [PALETTE[i % len(PALETTE)] for i in range(len(series))]
    for (name, (xs, ys)), col in zip(series.items(), colors):
        pts = " ".join(f"{_f(ax.px(x))},{_f(ax.py(y))}" for x, y in zip(xs, ys))
        body.append(f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="2"/>')
        body.extend(f'<circle cx="{_f(ax.px(x))}" cy="{_f(ax.py(y))}" r="3" fill="{col}"/>'
                    for x, y in zip(xs, ys))
    body.extend(_legend(ax, list(series), colors))
    Path(path).write_text(_document(body), encoding="utf-8")


def scatter_svg(path, xy, labels, title="", xlabel="z1", ylabel="z2",
                class_names=None, xlim=None, ylim=None) -> int:
    """Scatter of 2-d points coloured by integer label; returns the point count."""
    xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
    labels = np.asarray(labels, dtype=np.int64)
    ax = _Axes(xlim or _limits(xy[:, 0] if len(xy) else [0, 1]),
               ylim or _limits(xy[:, 1] if len(xy) else [0, 1]))
    body = ax.frame(title, xlabel, ylabel)
    for (x, y), lab in zip(xy, labels):
        body.append(f'<circle cx="{_f(ax.px(x))}" cy="{_f(ax.py(y))}" r="2.5" '
                    f'fill="{PALETTE[lab % len(PALETTE)]}" fill-opacity="0.7" class="pt"/>')
    classes = sorted(set(labels.tolist()))
    names = [class_names[c] if class_names else f"class {c}" for c in classes]
    body.extend(_legend(ax, names, [PALETTE[c % len(PALETTE)] for c in classes]))
    Path(path).write_text(_document(body), encoding="utf-8")
    return len(xy)


def density_panels_svg(path, panels: list[tuple[str, np.ndarray, dict]], class_names=None) -> None:
    """Vertically stacked density plots; each panel is ``(title, grid, {class: curve})``."""
    height = HEIGHT * len(panels)
    body = []
    for i, (title, grid, curves) in enumerate(panels):
        ymax = max([float(np.max(c)) for c in curves.values()] + [1e-12])
        ax = _Axes((0.0, 1.0), (0.0, ymax * 1.05), top=i * HEIGHT)
        body.append(f'<g class="panel" id="panel-{i}">')
        body.extend(ax.frame(title, "prediction score", "density"))
        for c, curve in curves.items():
            pts = " ".join(f"{_f(ax.px(g))},{_f(ax.py(v))}" for g, v in zip(grid, curve))
            body.append(f'<polyline points="{pts}" fill="none" '
                        f'stroke="{PALETTE[c % len(PALETTE)]}" stroke-width="2"/>')
        names = [class_names[c] if class_names else f"class {c}" for c in curves]
        body.extend(_legend(ax, names, [PALETTE[c % len(PALETTE)] for c in curves]))
        body.append("</g>")
    Path(path).write_text(_document(body, height=height), encoding="utf-8")


def log_colormap(mag: np.ndarray) -> np.ndarray:
    """RGB image (uint8) of ``|w|`` on a log scale; exact zeros are white."""
    mag = np.abs(np.asarray(mag, dtype=np.float64))
    rgb = np.full(mag.shape + (3,), 255, dtype=np.uint8)
    nz = mag > 0
    if nz.any():
        logs = np.log10(mag[nz])
        lo, hi = logs.min(), logs.max()
        t = (logs - lo) / (hi - lo) if hi > lo else np.ones_like(logs)
        pos = t * (len(_VIRIDIS) - 1)
        i0 = np.minimum(pos.astype(int), len(_VIRIDIS) - 2)
        frac = (pos - i0)[:, None]
        cols = _VIRIDIS[i0] * (1 - frac) + _VIRIDIS[i0 + 1] * frac
        rgb[nz] = np.round(cols).astype(np.uint8)
    return rgb


def write_png(path, rgb: np.ndarray) -> None:
    """Minimal 8-bit RGB PNG writer (filter type 0 on every scanline)."""
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    raw = b"".join(b"\x00" + rgb[r].tobytes() for r in range(h))

    def chunk(tag, data):
        return (struct.pack(">I", len(data)) + tag + data
                + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF))

    png = (b"\x89PNG\r\n\x1a\n"
           + chunk(b"IHDR", struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0))
           + chunk(b"IDAT", zlib.compress(raw, 9))
           + chunk(b"IEND", b""))
    Path(path).write_bytes(png)


def read_png(path) -> np.ndarray:
    """Inverse of :func:`write_png` (only handles the files it writes)."""
    data = Path(path).read_bytes()
    pos, idat, w, h = 8, b"", 0, 0
    while pos < len(data):
        (length,) = struct.unpack(">I", data[pos:pos + 4])
        tag = data[pos + 4:pos + 8]
        body = data[pos + 8:pos + 8 + length]
        if tag == b"IHDR":
            w, h = struct.unpack(">II", body[:8])
        elif tag == b"IDAT":
            idat += body
        pos += 12 + length
    raw = zlib.decompress(idat)
    stride = 1 + 3 * w
    rows = [np.frombuffer(raw[r * stride + 1:(r + 1) * stride], dtype=np.uint8) for r in range(h)]
    return np.stack(rows).reshape(h, w, 3)
