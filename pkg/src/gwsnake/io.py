"""File formats.

* tree CSV: header ``degree`` then one depth-first degree per line;
* process CSV: header ``index,value``;
* binary process dump: little-endian int64 count, then that many
  little-endian int64 values;
* snake CSV: ``lex_index,depth,position`` or ``contour_index,depth,position``;
* reports: JSON objects with keys name, value, stderr, n_samples, seed, params.
"""
from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .snake_stats.report import StatReport
from .spatial_snake import SpatialSnake
from .tree_codec import PlaneTree

_I64 = np.dtype("<i8")


def _read_rows(path, header):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != header:
        raise ValueError(f"{path}: expected header {','.join(header)}")
    return rows[1:]


def write_tree_csv(path, tree: PlaneTree) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("degree\n")
        fh.write("".join(f"{d}\n" for d in tree.degrees.tolist()))


def read_tree_csv(path) -> PlaneTree:
    rows = _read_rows(path, ["degree"])
    return PlaneTree(np.array([int(r[0]) for r in rows if r], dtype=np.int64))


def write_process_csv(path, values) -> None:
    values = np.asarray(values)
    fmt = (lambda v: str(int(v))) if np.issubdtype(values.dtype, np.integer) else repr
    with open(path, "w", newline="") as fh:
        fh.write("index,value\n")
        fh.write("".join(f"{i},{fmt(v)}\n" for i, v in enumerate(values.tolist())))


def read_process_csv(path) -> np.ndarray:
    rows = [r for r in _read_rows(path, ["index", "value"]) if r]
    idx = [int(r[0]) for r in rows]
    if idx != list(range(len(rows))):
        raise ValueError(f"{path}: indices must run 0, 1, 2, ...")
    vals = [r[1] for r in rows]
    try:
        return np.array([int(v) for v in vals], dtype=np.int64)
    except ValueError:
        return np.array([float(v) for v in vals], dtype=np.float64)


def write_binary(path, values) -> None:
    values = np.asarray(values)
    if not np.issubdtype(values.dtype, np.integer):
        raise TypeError("binary dumps hold integer processes only")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<q", values.size))
        fh.write(values.astype(_I64).tobytes())


def read_binary(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 8:
        raise ValueError(f"{path}: truncated header")
    (count,) = struct.unpack_from("<q", data)
    if len(data) != 8 + 8 * count:
        raise ValueError(f"{path}: expected {count} values, file has {(len(data) - 8) / 8}")
    return np.frombuffer(data, dtype=_I64, offset=8).astype(np.int64)


def write_snake_csv(path, snake: SpatialSnake, contour: bool = False) -> None:
    tree = snake.tree
    if contour:
        verts = tree.contour_vertices
        head = "contour_index,depth,position\n"
    else:
        verts = np.arange(tree.degrees.size)
        head = "lex_index,depth,position\n"
    depth, pos = tree.depth[verts].tolist(), snake.S[verts].tolist()
    with open(path, "w", newline="") as fh:
        fh.write(head)
        fh.write("".join(f"{i},{d},{p!r}\n" for i, (d, p) in enumerate(zip(depth, pos))))


def read_snake_csv(path):
    """Returns (kind, depth, position) with kind ``lex`` or ``contour``."""
    with open(path, newline="") as fh:
        head = fh.readline().strip()
    kinds = {"lex_index,depth,position": "lex", "contour_index,depth,position": "contour"}
    if head not in kinds:
        raise ValueError(f"{path}: not a snake CSV")
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return kinds[head], arr[:, 1].astype(np.int64), arr[:, 2]


def write_report_json(path, report: StatReport) -> None:
    Path(path).write_text(report.to_json() + "\n")


def read_report_json(path) -> StatReport:
    return StatReport.from_dict(json.loads(Path(path).read_text()))
