"""File formats for the command-line pipeline.

Point CSVs hold one point per row, coordinates as decimal text, with a
single optional header row starting with '#'.  Every file written by
the CLI embeds its resolved run configuration in that header (JSON for
.json outputs), so a run is reconstructible from its artifacts alone.
Writes go through a temp file plus rename and are byte-deterministic
for a fixed configuration.
"""
from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .errors import DataFormatError
from .geometry import PointCloud


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".pmanifold-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_float(x: float) -> str:
    return repr(float(x))


def write_points_csv(path: str, points: np.ndarray, config: dict | None = None) -> None:
    """Write a point matrix as CSV with an optional '#' config-echo header."""
    pts = np.asarray(points, dtype=float)
    lines = []
    if config is not None:
        lines.append("# " + json.dumps(config, sort_keys=True))
    for row in pts:
        lines.append(",".join(format_float(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def read_points_csv(path: str) -> PointCloud:
    """Read a point CSV; raises DataFormatError on ragged or non-numeric rows."""
    rows = []
    width = None
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = stripped.split(",")
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise DataFormatError(f"{path}:{lineno}: expected {width} columns, got {len(fields)}")
            try:
                rows.append([float(f) for f in fields])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: non-numeric value") from exc
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return PointCloud(np.asarray(rows))


def write_table_csv(path: str, header_names: list[str], rows, config: dict | None = None) -> None:
    """Write labeled numeric rows; the config echo and column names share the header."""
    lines = []
    echo = json.dumps(config, sort_keys=True) if config is not None else ""
    lines.append("# " + ",".join(header_names) + (" " + echo if echo else ""))
    for row in rows:
        lines.append(",".join(format_float(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(path: str, payload: dict) -> None:
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path: str) -> dict:
    try:
        with open(path) as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON") from exc
