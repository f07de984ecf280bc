"""CSV rows and JSON summaries for experiment runs.

Floats are written with ``repr`` so every value survives a text round trip
exactly. ``wall_ms`` stays empty unless timing was requested, which keeps
repeated runs byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Optional, Sequence

COLUMNS = ("experiment_id", "group", "parameter", "value", "stderr", "n_samples", "seed", "wall_ms")


@dataclass(frozen=True)
class ReportRow:
    experiment_id: str
    group: str
    parameter: Optional[float]  # r, delta or a chain length; None without a schedule
    value: float
    stderr: float
    n_samples: int
    seed: int
    wall_ms: Optional[float] = None

    def cells(self) -> list[str]:
        return [
            self.experiment_id,
            self.group,
            _num(self.parameter),
            _num(self.value),
            _num(self.stderr),
            str(self.n_samples),
            str(self.seed),
            "" if self.wall_ms is None else f"{self.wall_ms:.3f}",
        ]

    def as_dict(self) -> dict:
        return {c: getattr(self, c) for c in COLUMNS}


def _num(x: Optional[float]) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def to_csv(rows: Iterable[ReportRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow(row.cells())
    return buf.getvalue()


def read_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


def _clean(obj: Any) -> Any:
    # JSON has no nan or inf
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return _clean(obj.item())
    return obj


def to_json(rows: Sequence[ReportRow], summary: dict, checks: dict[str, bool]) -> str:
    doc = {"rows": [r.as_dict() for r in rows], "checks": checks, "summary": summary}
    return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"
