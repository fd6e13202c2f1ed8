"""CSV run tables: ``x1,...,xd,y`` with an optional ``run_id`` column."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .data import ReplicatedDataset
from .exceptions import IngestionError


def read_runs(path):
    """Parse a run table. Returns ``(X, y)``.

    Raises :class:`IngestionError` naming the row and column of the first bad
    cell. Data rows are numbered from 1 (the header is row 0).
    """
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from None
    rows = [r for r in rows if any(c.strip() for c in r)]
    if not rows:
        raise IngestionError(f"{path} is empty")
    header = [c.strip() for c in rows[0]]
    if "y" not in header:
        raise IngestionError(f"{path}: header must contain a 'y' column", row=0)
    x_cols = [j for j, h in enumerate(header) if h.startswith("x") and h[1:].isdigit()]
    x_cols.sort(key=lambda j: int(header[j][1:]))
    if not x_cols:
        raise IngestionError(f"{path}: header has no x1..xd columns", row=0)
    allowed = set(x_cols) | {header.index("y")} | ({header.index("run_id")} if "run_id" in header else set())
    extra = [header[j] for j in range(len(header)) if j not in allowed]
    if extra:
        raise IngestionError(f"{path}: unexpected columns {extra}", row=0)
    y_col = header.index("y")
    body = rows[1:]
    if not body:
        raise IngestionError(f"{path} has a header but no runs")
    X = np.empty((len(body), len(x_cols)))
    y = np.empty(len(body))
    for i, cells in enumerate(body, start=1):
        if len(cells) != len(header):
            raise IngestionError(f"{path}: row {i} has {len(cells)} cells, expected {len(header)}", row=i)
        for k, j in enumerate(x_cols + [y_col]):
            try:
                v = float(cells[j])
            except ValueError:
                v = math.nan
            if not math.isfinite(v):
                raise IngestionError(
                    f"{path}: row {i}, column {header[j]!r}: bad value {cells[j]!r}", row=i, column=header[j]
                )
            if k < len(x_cols):
                X[i - 1, k] = v
            else:
                y[i - 1] = v
    return X, y


def write_runs(path, X, y=None, run_ids=None):
    """Write a run table (or a design when ``y`` is None).

    Floats are written with ``repr`` so a read-back is exact.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    header = [f"x{j + 1}" for j in range(X.shape[1])]
    if y is not None:
        header.append("y")
    if run_ids is not None:
        header.append("run_id")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, row in enumerate(X):
            cells = [repr(float(v)) for v in row]
            if y is not None:
                cells.append(repr(float(y[i])))
            if run_ids is not None:
                cells.append(str(run_ids[i]))
            w.writerow(cells)


def ingest_runs(path, tol: float = 0.0) -> ReplicatedDataset:
    """Read a run table and pool replicate rows into locations."""
    X, y = read_runs(path)
    return ReplicatedDataset.from_runs(X, y, tol=tol)


def export_runs(path, data: ReplicatedDataset):
    X, y = data.runs()
    write_runs(path, X, y)
