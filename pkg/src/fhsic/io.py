"""CSV reading and writing of curve samples.

Layout: one curve per row. An optional first line ``t,<t1>,<t2>,...``
gives the grid; without it the grid is equispaced on [0, 1].
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import CurveFormatError, DimensionError
from .kernels import CurveSet, Grid


def _parse_row(cells, line_no, offset=0):
    out = []
    for col, cell in enumerate(cells, start=1 + offset):
        try:
            out.append(float(cell))
        except ValueError:
            raise CurveFormatError(
                f"line {line_no}, column {col}: cannot parse {cell!r} as a number",
                line=line_no, column=col,
            ) from None
    return out


def ingest_curves(path) -> CurveSet:
    path = Path(path)
    grid = None
    rows = []
    width = None
    with path.open(newline="") as fh:
        for line_no, cells in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in cells]
            if not cells or all(c == "" for c in cells):
                continue
            if grid is None and not rows and cells[0].lower() == "t":
                grid = _parse_row(cells[1:], line_no, offset=1)
                width = len(grid)
                continue
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise CurveFormatError(
                    f"line {line_no}: expected {width} values, got {len(cells)}",
                    line=line_no,
                )
            rows.append(_parse_row(cells, line_no))
    if len(rows) < 2:
        raise DimensionError(f"{path}: need at least 2 curves, got {len(rows)}")
    if width < 2:
        raise DimensionError(f"{path}: need at least 2 grid points, got {width}")
    g = Grid(grid) if grid is not None else Grid.equispaced(width)
    return CurveSet(g, np.array(rows))


def write_curves(curves: CurveSet, path, header: bool = True) -> None:
    """Write curves with 17 significant digits so they round-trip exactly."""
    fmt = "{:.17g}".format
    with Path(path).open("w", newline="") as fh:
        if header:
            fh.write(",".join(["t", *map(fmt, curves.grid.points)]) + "\n")
        for row in curves.values:
            fh.write(",".join(map(fmt, row)) + "\n")
