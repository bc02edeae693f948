"""CSV/JSON writers and field readers used by the CLI."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .graph_core import GraphBall


def fmt(x) -> str:
    """Round-trip float formatting; empty string for missing values."""
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return repr(x) if math.isfinite(x) else str(x)
    return str(x)


def csv_text(columns, rows) -> str:
    """Rows may be dicts keyed by column or plain sequences."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        values = [row[c] for c in columns] if isinstance(row, dict) else row
        w.writerow([fmt(v) for v in values])
    return buf.getvalue()


def field_rows(ball: GraphBall, values, which=None):
    values = np.asarray(values, dtype=float)
    idx = range(ball.n_vertices) if which is None else which
    return [(ball.vertex_label(i), values[i]) for i in idx]


def read_field_csv(path: str | Path, ball: GraphBall) -> np.ndarray:
    """Read ``vertex_id,value`` rows into a full-length field (missing vertices are 0)."""
    out = np.zeros(ball.n_vertices)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header[:2]] != ["vertex_id", "value"]:
            raise ValueError(f"{path}: expected header 'vertex_id,value', got {header}")
        for row in reader:
            if row:
                out[ball.parse_label(row[0].strip())] = float(row[1])
    return out


def field_arg(text: str, ball: GraphBall):
    """A constant or the path of a ``vertex_id,value`` CSV."""
    try:
        return float(text)
    except ValueError:
        return read_field_csv(text, ball)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default)


def _default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def emit(out_dir: str | None, name: str, text: str, stdout) -> None:
    """Write ``text`` to ``out_dir/name`` if an output directory is set, else to stdout."""
    if out_dir:
        path = Path(out_dir)
        path.mkdir(parents=True, exist_ok=True)
        (path / name).write_text(text)
    else:
        stdout.write(text if text.endswith("\n") else text + "\n")
