"""
JSON and CSV artifacts.

Values are written in log-domain; a linear companion is added only when
the log lies inside (-LINEAR_LIMIT, LINEAR_LIMIT). Artifacts carry no
timestamps, so the same spec and seed give byte-identical files.
"""
import csv
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Iterable, List, Optional

import numpy as np

from maxlab.errors import InputError

logger = logging.getLogger(__name__)

LINEAR_LIMIT = 30.0
FORMATS = ("json", "jsonl", "csv")


def linear_value(log_value) -> Optional[float]:
    if log_value is None or not math.isfinite(log_value) or abs(log_value) >= LINEAR_LIMIT:
        return None
    return math.exp(log_value)


def to_plain(value):
    """Recursively turn numpy values, enums and tuples into JSON types; non-finite floats become None."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_plain(v) for v in value]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def add_linear_values(record: dict) -> dict:
    """Next to every log_value / *_log key put its linear value when it is representable."""
    out = dict(record)
    for key, value in record.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            continue
        if key == "log_value":
            out["value"] = linear_value(value)
        elif key.endswith("_log"):
            out[key[: -len("_log")] + "_value"] = linear_value(value)
        elif key.startswith("log_"):
            out[key[len("log_"):]] = linear_value(value)
    return out


def spec_sidecar(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".spec.json")


def _csv_cell(value):
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True)
    return "" if value is None else value


def write_artifact(records: Iterable[dict], path, fmt: str = "json", spec: dict = None) -> Path:
    """
    Write records with the resolved spec.

    Args:
        records: one dict per row, report or table entry
        path: output file; parent directories are created
        fmt: "json" (one object), "jsonl" (spec line, then one record per line) or "csv"
        spec: resolved command spec; JSON formats embed it, a CSV gets it in
            a sidecar <stem>.spec.json

    Returns:
        the written path
    """
    if fmt not in FORMATS:
        raise InputError(f"Unknown artifact format: {fmt}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows: List[dict] = [to_plain(add_linear_values(r)) for r in records]
    spec = to_plain(spec or {})

    if fmt == "json":
        text = json.dumps({"spec": spec, "records": rows}, sort_keys=True, indent=2, ensure_ascii=False)
        path.write_text(text + "\n", encoding="utf-8")
    elif fmt == "jsonl":
        lines = [json.dumps({"spec": spec}, sort_keys=True, ensure_ascii=False)]
        lines += [json.dumps(r, sort_keys=True, ensure_ascii=False) for r in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        columns = []
        for row in rows:
            columns.extend(k for k in row if k not in columns)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=columns)
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _csv_cell(row.get(k)) for k in columns})
        sidecar = spec_sidecar(path)
        sidecar.write_text(json.dumps(spec, sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")

    logger.info("wrote %d records to %s", len(rows), path)
    return path
