"""Artifact writers: fixed-precision CSV, JSON and the run manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

SIG_DIGITS = 6


def format_cell(v) -> str:
    """Render one CSV cell; reals use 6 significant digits."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v)
        if math.isnan(x):
            return "nan"
        if x == 0.0:
            return "0"  # folds -0.0
        return f"{x:.{SIG_DIGITS}g}"
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        if len(r) != len(header):
            raise ValueError(f"row has {len(r)} cells, header has {len(header)}")
        w.writerow([format_cell(v) for v in r])
    return buf.getvalue()


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(csv_text(header, rows))
    return path


def jsonable(obj):
    """Convert numpy scalars/arrays and tuples into plain JSON values; NaN becomes null."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return None if not math.isfinite(x) else x
    return obj


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def table_records(header: Sequence[str], rows: Iterable[Sequence]) -> list[dict]:
    return [dict(zip(header, (jsonable(v) for v in r))) for r in rows]


def config_hash(config: dict) -> str:
    blob = json.dumps(jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def load_schema(name: str) -> dict:
    """JSON schema shipped with the package, e.g. ``load_schema("manifest")``."""
    text = resources.files("dmlkit").joinpath("schemas", f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)
