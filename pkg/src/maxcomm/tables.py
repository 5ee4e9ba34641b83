"""CSV / JSON emission for profiles, norm estimates, reports and experiment tables.

JSON numbers are written as decimal strings with 17 significant digits so
that identical runs give byte-identical files.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from pathlib import Path

import numpy as np

from .grid import Cube, fmt_float
from .lipschitz import FunctionalProfile, LipNormResult

FORMATS = ("csv", "json")


def encode(obj):
    """Recursively convert to JSON-ready data with numbers as 17-digit strings."""
    if isinstance(obj, (bool, np.bool_)) or obj is None or isinstance(obj, str):
        return bool(obj) if isinstance(obj, np.bool_) else obj
    if isinstance(obj, (int, float, np.integer, np.floating)):
        return fmt_float(obj) if isinstance(obj, (float, np.floating)) else str(int(obj))
    if isinstance(obj, Cube):
        return encode(obj.to_dict())
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return encode(obj.to_dict())
    if dataclasses.is_dataclass(obj):
        return encode(dataclasses.asdict(obj))
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(encode(obj), indent=1, sort_keys=True) + "\n"


def _as_dict(obj) -> dict:
    if isinstance(obj, FunctionalProfile):
        return obj.summary()
    if isinstance(obj, LipNormResult):
        return {"value": obj.value, "witness": obj.witness, "beta": obj.beta, "p": obj.p}
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if isinstance(obj, dict):
        return obj
    raise TypeError(f"cannot tabulate {type(obj).__name__}")


def _csv_cell(v):
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(encode(v), sort_keys=True)
    return v


def _csv_rows(obj):
    if isinstance(obj, FunctionalProfile):
        dim = obj.cubes[0].dim if obj.cubes else int(obj.exponents.get("n", 1))
        header = [f"anchor_{i}" for i in range(dim)] + ["side", "value"]
        rows = [[*c.anchor, c.side, fmt_float(v)] for c, v in zip(obj.cubes, obj.values)]
        return header, rows
    data = _as_dict(obj)
    if "rows" in data:
        records = data["rows"]
    elif "failures" in data:
        records = data["failures"]
    else:
        return ["key", "value"], [[k, _csv_cell(v)] for k, v in sorted(data.items())]
    keys = []
    for rec in records:
        keys.extend(k for k in rec if k not in keys)
    if not keys and "failures" in data:
        keys = ["check", "lhs", "rhs", "index"]
    return keys, [[_csv_cell(rec.get(k, "")) for k in keys] for rec in records]


def render(obj, fmt: str = "json") -> str:
    if fmt == "json":
        return dumps(_as_dict(obj))
    if fmt == "csv":
        header, rows = _csv_rows(obj)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def emit_table(obj, fmt: str, path) -> None:
    """Write ``obj`` (profile, norm estimate, report, experiment) as CSV or JSON.

    Profiles give one CSV row per cube under the header (anchor..., side,
    value); reports list their stored failures; experiments their rows.
    """
    Path(path).write_text(render(obj, fmt))
