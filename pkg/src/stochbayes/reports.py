"""CSV/JSON encodings for structured result records."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path


def flatten(record: dict, prefix: str = "") -> dict:
    """Nested dicts become dotted column names; lists become JSON cells."""
    out = {}
    for k, v in record.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            out[key] = json.dumps(v)
        else:
            out[key] = v
    return out


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def to_json(records, **extra) -> str:
    body = {"records": _clean(list(records))}
    body.update(_clean(extra))
    return json.dumps(body, indent=2, sort_keys=False) + "\n"


def to_csv(records) -> str:
    rows = [flatten(r) for r in records]
    cols = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in cols})
    return buf.getvalue()


def render(records, fmt: str = "json", **extra) -> str:
    if fmt == "json":
        return to_json(records, **extra)
    if fmt == "csv":
        return to_csv(records)
    raise ValueError(f"unknown format {fmt!r}")


def write(records, path, fmt: str = "json", **extra) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render(records, fmt, **extra))
    return path
