"""CSV output with a fixed number format and atomic replacement."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np


def format_value(v: float) -> str:
    return f"{float(v):.15g}"


def atomic_write_text(path: str | os.PathLike, text: str) -> Path:
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_columns(path, header: Sequence[str], columns: Sequence[np.ndarray]) -> Path:
    """One header row, then one row per sample, every value with 15 significant digits."""
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    if len({c.size for c in cols}) > 1:
        raise ValueError("columns differ in length")
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(format_value(v) for v in row))
    return atomic_write_text(path, "\n".join(lines) + "\n")


def read_columns(path) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data
