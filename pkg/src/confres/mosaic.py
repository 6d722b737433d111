"""Proportional mosaic layout of a contingency table and SVG rendering.

Bands follow marginal fractions: column band j spans c_j/n of the canvas
width, row band i spans r_i/n of the height.  Cell (i, j) is anchored at
its band origin with width (N_ij / r_i) of the row's extent and height
(N_ij / c_j) of the column's extent, i.e. a square of side N_ij / n in
canvas units.  Cells with zero count are omitted.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import InputError, ParameterError
from .evaluation import ContingencyTable


@dataclass(frozen=True)
class MosaicCell:
    row: int
    col: int
    x: float
    y: float
    w: float
    h: float
    value: int


@dataclass(frozen=True)
class MosaicLayout:
    width: float
    height: float
    cells: tuple
    gap: float

    def total_area(self) -> float:
        return sum(c.w * c.h for c in self.cells)


def layout(table: ContingencyTable, gap: float = 0.01) -> MosaicLayout:
    """Unit-canvas mosaic layout; gap shrinks each band symmetrically."""
    counts = np.asarray(table.counts)
    if counts.size == 0 or counts.sum() == 0:
        raise InputError("empty contingency table")
    if not 0.0 <= gap <= 0.1:
        raise ParameterError("gap must lie in [0, 0.1]")
    n = float(counts.sum())
    r = counts.sum(axis=1).astype(np.float64)
    c = counts.sum(axis=0).astype(np.float64)
    x0 = np.concatenate([[0.0], np.cumsum(c / n)])
    y0 = np.concatenate([[0.0], np.cumsum(r / n)])
    scale = 1.0 - gap
    cells = []
    for i, j in zip(*np.nonzero(counts)):
        side = counts[i, j] / n
        x = x0[j] + 0.5 * gap * (c[j] / n)
        y = y0[i] + 0.5 * gap * (r[i] / n)
        cells.append(MosaicCell(row=int(i), col=int(j), x=float(x), y=float(y),
                                w=float(scale * side), h=float(scale * side),
                                value=int(counts[i, j])))
    return MosaicLayout(width=1.0, height=1.0, cells=tuple(cells), gap=gap)


def _hue(value: int, vmax: int) -> str:
    # single-hue linear ramp: white -> dark blue
    t = 0.0 if vmax == 0 else value / vmax
    r = int(round(255 - 205 * t))
    g = int(round(255 - 175 * t))
    b = int(round(255 - 80 * t))
    return f"#{r:02x}{g:02x}{b:02x}"


def render_svg(lay: MosaicLayout, colormap: str = "blues",
               show_grid: bool = False, row_labels=None, col_labels=None,
               pixels: int = 480) -> str:
    """Deterministic SVG 1.1 text for a mosaic layout."""
    if colormap != "blues":
        raise ParameterError(f"unknown colormap {colormap!r}")
    vmax = max((c.value for c in lay.cells), default=0)
    px = float(pixels)
    out = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{pixels}" height="{pixels}" viewBox="0 0 {pixels} {pixels}">')
    out.append(f'<rect x="0" y="0" width="{pixels}" height="{pixels}" fill="#ffffff"/>')
    for cell in lay.cells:
        out.append(
            f'<rect x="{cell.x * px:.3f}" y="{cell.y * px:.3f}" '
            f'width="{cell.w * px:.3f}" height="{cell.h * px:.3f}" '
            f'fill="{_hue(cell.value, vmax)}" stroke="#333333" stroke-width="0.5">'
            f'<title>N[{cell.row},{cell.col}]={cell.value}</title></rect>')
    if show_grid:
        xs = sorted({round(c.x, 9) for c in lay.cells})
        ys = sorted({round(c.y, 9) for c in lay.cells})
        for x in xs:
            out.append(f'<line x1="{x * px:.3f}" y1="0" x2="{x * px:.3f}" '
                       f'y2="{pixels}" stroke="#bbbbbb" stroke-width="0.5"/>')
        for y in ys:
            out.append(f'<line x1="0" y1="{y * px:.3f}" x2="{pixels}" '
                       f'y2="{y * px:.3f}" stroke="#bbbbbb" stroke-width="0.5"/>')
    if row_labels is not None:
        for i, name in enumerate(row_labels):
            cells_i = [c for c in lay.cells if c.row == i]
            if cells_i:
                y = min(c.y for c in cells_i) * px + 10
                out.append(f'<text x="2" y="{y:.3f}" font-size="10">{name}</text>')
    if col_labels is not None:
        for j, name in enumerate(col_labels):
            cells_j = [c for c in lay.cells if c.col == j]
            if cells_j:
                x = min(c.x for c in cells_j) * px
                out.append(f'<text x="{x:.3f}" y="12" font-size="10">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def geometry_csv(lay: MosaicLayout, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "x", "y", "w", "h", "value"])
        for cell in lay.cells:
            writer.writerow([cell.row, cell.col, cell.x, cell.y,
                             cell.w, cell.h, cell.value])


def diagonal_band_area(lay: MosaicLayout) -> float:
    """Summed area of cells whose rectangle touches the main diagonal."""
    area = 0.0
    for cell in lay.cells:
        # the line y = x crosses the rect iff the intervals overlap
        if cell.x <= cell.y + cell.h and cell.y <= cell.x + cell.w:
            area += cell.w * cell.h
    return area
