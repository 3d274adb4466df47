"""Report records and their CSV/JSON serialisation.

Output is a pure function of the inputs: no timestamps, host names or worker
counts, fixed key order, and floats written with ``repr`` precision.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any

from .errors import ValidationError

SCHEMA_VERSION = 1
CSV_COLUMNS = ("n", "stat", "point", "ci95", "samples", "seed", "fingerprint")


@dataclass(frozen=True)
class EstimateReport:
    name: str
    point: float
    half_width: float
    samples: int
    seed: int
    params_fingerprint: str
    n: int | None = None

    def __post_init__(self):
        if self.samples < 1:
            raise ValidationError("samples must be >= 1", key="samples")
        if not (self.half_width >= 0 or math.isnan(self.half_width)):
            raise ValidationError("half_width must be >= 0", key="half_width")

    @property
    def lower(self) -> float:
        return self.point - self.half_width

    @property
    def upper(self) -> float:
        return self.point + self.half_width

    def to_dict(self) -> dict:
        return _clean(asdict(self))


def fingerprint(params: dict) -> str:
    """Short SHA-256 of the canonical JSON of ``params``."""
    text = json.dumps(_clean(params), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def _clean(obj: Any) -> Any:
    """Convert numpy scalars/containers to JSON types; non-finite floats become strings."""
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def csv_text(reports: list[EstimateReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow(["" if r.n is None else r.n, r.name, repr(float(r.point)), repr(float(r.half_width)),
                    r.samples, r.seed, r.params_fingerprint])
    return buf.getvalue()


def json_text(command: str, config: dict, seed: int, reports: list[EstimateReport], extra: dict | None = None) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "seed": int(seed),
        "config": _clean(config),
        "fingerprint": fingerprint(config),
        "estimates": [r.to_dict() for r in reports],
    }
    if extra:
        doc["details"] = _clean(extra)
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def write_outputs(out: str | Path | None, command: str, config: dict, seed: int,
                  reports: list[EstimateReport], extra: dict | None = None) -> tuple[Path, Path] | None:
    """Write ``<out>.csv`` and ``<out>.json`` (``out`` may carry either suffix)."""
    if out is None:
        return None
    base = Path(out)
    if base.suffix in (".csv", ".json"):
        base = base.with_suffix("")
    base.parent.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = base.with_suffix(".csv"), base.with_suffix(".json")
    csv_path.write_text(csv_text(reports), encoding="utf-8")
    json_path.write_text(json_text(command, config, seed, reports, extra), encoding="utf-8")
    return csv_path, json_path
