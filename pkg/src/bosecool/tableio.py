"""Deterministic CSV/JSON emission of run data with a metadata header.

CSV files carry ``# key = value`` comment lines, then one header row, then
RFC-4180 rows; JSON files mirror the same records as
``{"metadata": {...}, "rows": [...]}``.  No timestamps: identical inputs
produce byte-identical files.  Floats are written with ``repr`` so every
file round-trips through :func:`read_table` losslessly.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import sys
from pathlib import Path


def config_hash(config: dict) -> str:
    """Stable short hash of an effective configuration."""
    canon = json.dumps(
        {str(k): str(v) for k, v in config.items()}, sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def _coerce_scalar(v):
    # numpy scalars repr as np.float64(...); strip them to plain Python.
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        try:
            return v.item()
        except (AttributeError, ValueError):
            return v
    return v


def _format_value(v) -> str:
    v = _coerce_scalar(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_value(s: str):
    if s == "":
        return None
    if s == "true":
        return True
    if s == "false":
        return False
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)  # handles inf/nan spellings
    except ValueError:
        return s


def render_csv(rows: list[dict], fieldnames: list[str], metadata: dict) -> str:
    buf = io.StringIO()
    for key in sorted(metadata):
        buf.write(f"# {key} = {_format_value(metadata[key])}\r\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(fieldnames)
    for row in rows:
        writer.writerow([_format_value(row.get(name, "")) if row.get(name) is not None else "" for name in fieldnames])
    return buf.getvalue()


def render_json(rows: list[dict], fieldnames: list[str], metadata: dict) -> str:
    def clean(v):
        v = _coerce_scalar(v)
        if isinstance(v, float) and (math.isinf(v) or math.isnan(v)):
            return repr(v)  # JSON has no inf/nan literals
        return v

    payload = {
        "metadata": {k: clean(v) for k, v in sorted(metadata.items())},
        "rows": [{name: clean(row.get(name)) for name in fieldnames} for row in rows],
    }
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def write_table(
    out, rows: list[dict], fieldnames: list[str], metadata: dict, fmt: str = "csv"
) -> None:
    """Write rows to a path or '-' (stdout) in the requested format."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    text = (
        render_csv(rows, fieldnames, metadata)
        if fmt == "csv"
        else render_json(rows, fieldnames, metadata)
    )
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def read_table(path) -> tuple[dict, list[dict]]:
    """Parse a file produced by write_table (format auto-detected)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        payload = json.loads(text)
        rows = [
            {k: _parse_value(v) if isinstance(v, str) else v for k, v in row.items()}
            for row in payload["rows"]
        ]
        meta = {
            k: _parse_value(v) if isinstance(v, str) else v
            for k, v in payload["metadata"].items()
        }
        return meta, rows
    metadata = {}
    lines = text.splitlines()
    body_start = 0
    for i, line in enumerate(lines):
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            metadata[key.strip()] = _parse_value(value.strip())
            body_start = i + 1
        else:
            break
    reader = csv.reader(lines[body_start:])
    table = [row for row in reader if row]
    header = table[0]
    rows = [dict(zip(header, map(_parse_value, row))) for row in table[1:]]
    return metadata, rows


def load_config(path) -> dict:
    """Flat ``key = value`` config file; '#' starts a comment."""
    config = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        config[key.strip()] = value.strip()
    return config
