"""Deterministic serialization: JSON with 17-significant-digit floats,
delimited CSV, and the plain-text mask format.

All writers are atomic (write to a sibling temp file, then rename), so a
crashed run never leaves a partially written artifact behind.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np


def format_float(x: float) -> str:
    """Fixed 17-significant-digit rendering; round-trips any double."""
    if isinstance(x, float) and not math.isfinite(x):
        raise ValueError(f"non-finite value in output: {x}")
    return format(float(x), ".17g")


def _emit(obj, indent: int) -> str:
    pad = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if bool(obj) else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = [f'{pad}  {json.dumps(str(k))}: {_emit(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(rows) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        rows = [f"{pad}  {_emit(v, indent + 1)}" for v in seq]
        return "[\n" + ",\n".join(rows) + f"\n{pad}]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def to_json_text(obj) -> str:
    return _emit(obj, 0) + "\n"


def write_text_atomic(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)
    return path


def write_json(path, obj) -> Path:
    return write_text_atomic(path, to_json_text(obj))


def write_csv(path, header, rows) -> Path:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, (float, np.floating)):
                cells.append(format_float(float(cell)))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    return write_text_atomic(path, "\n".join(lines) + "\n")


def field_rows(field):
    """Row-major (x, y, value) triples over interior cells of a field."""
    grid = field.grid
    rows = []
    ys, xs = np.nonzero(grid.mask)
    for i, j in zip(ys.tolist(), xs.tolist()):
        rows.append((float(grid.xs[j]), float(grid.ys[i]), float(field.values[i, j])))
    return rows


def write_field_csv(path, field) -> Path:
    return write_csv(path, ("x", "y", "value"), field_rows(field))


def write_profile_csv(path, profile) -> Path:
    return write_csv(path, ("r", "psi", "dpsi"), profile.rows())


def write_mask(path, grid, subset_mask) -> Path:
    """Plain-text mask: header line 'width height h', then one 0/1 per cell,
    row-major from the origin row."""
    ny, nx = grid.shape
    lines = [f"{nx} {ny} {format_float(grid.h)}"]
    m = (np.asarray(subset_mask, dtype=bool) & grid.mask).astype(int)
    for i in range(ny):
        lines.append(" ".join(str(x) for x in m[i].tolist()))
    return write_text_atomic(path, "\n".join(lines) + "\n")


def read_mask(path):
    """Inverse of :func:`write_mask`: returns (mask array, h)."""
    lines = Path(path).read_text().strip().splitlines()
    nx, ny, h = lines[0].split()
    rows = [[bool(int(tok)) for tok in line.split()] for line in lines[1:]]
    mask = np.array(rows, dtype=bool)
    if mask.shape != (int(ny), int(nx)):
        raise ValueError("mask body does not match its header dimensions")
    return mask, float(h)
