"""Run configurations and verification reports.

Reports serialize to JSON with sorted keys and ``repr`` floats, so two runs
from the same configuration produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .errors import ParameterError

THREADS_ENV = "INEQ_FORGE_THREADS"


def max_workers() -> int:
    """Worker cap from INEQ_FORGE_THREADS (default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ParameterError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    return max(1, n)


def parallel_map(fn, items) -> list:
    """Ordered map, threaded when INEQ_FORGE_THREADS > 1."""
    items = list(items)
    n = min(max_workers(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _clean(obj):
    """Convert numpy scalars/arrays and non-finite floats to JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


@dataclass
class RunConfig:
    """Everything needed to reproduce a run."""

    subcommand: str
    params: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    output: str | None = None
    fmt: str = "json"

    def to_dict(self) -> dict:
        return _clean(asdict(self))

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {"subcommand", "params", "grid", "tolerances", "seed", "output", "fmt"}
        extra = set(d) - known
        if extra:
            raise ParameterError(f"unknown config keys: {sorted(extra)}")
        if "subcommand" not in d:
            raise ParameterError("config needs a 'subcommand'")
        return cls(**d)


@dataclass
class VerificationReport:
    """Per-profile values and the verdict of one verification run."""

    theorem: str
    parameters: dict
    rows: list
    min_ratio: float | None
    passed: bool
    flags: list = field(default_factory=list)
    grid: dict = field(default_factory=dict)
    label: str = "family-relative"
    ratio_floor: float = 1e-3
    extra: dict = field(default_factory=dict)
    config: dict | None = None
    version: str = __version__

    def to_dict(self) -> dict:
        return _clean(asdict(self))

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @property
    def ratios(self) -> list:
        return [r["ratio"] for r in self.rows if r.get("ratio") is not None]


def write_report(report, path: str, fmt: str | None = None):
    """Write a report (anything with ``to_dict``) as JSON or CSV."""
    fmt = fmt or ("csv" if str(path).endswith(".csv") else "json")
    d = report.to_dict() if hasattr(report, "to_dict") else report
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if fmt == "json":
            fh.write(dumps(d))
        elif fmt == "csv":
            rows = d.get("rows") if isinstance(d, dict) else None
            if not rows:
                raise ParameterError("report has no tabular rows for CSV output")
            fh.write(rows_to_csv(rows, header_comment=d))
        else:
            raise ParameterError(f"unknown output format {fmt!r}")


def rows_to_csv(rows: list, columns=None, header_comment=None) -> str:
    """Plain CSV with a header row.  Nested values are JSON-encoded."""
    if columns is None:
        columns = []
        for r in rows:
            for k in r:
                if k not in columns:
                    columns.append(k)
    buf = io.StringIO()
    if header_comment is not None:
        meta = {k: header_comment[k] for k in ("config", "version") if k in header_comment}
        buf.write("# " + json.dumps(_clean(meta), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        out = []
        for c in columns:
            v = _clean(r.get(c))
            out.append(json.dumps(v, sort_keys=True) if isinstance(v, (list, dict)) else
                       ("" if v is None else repr(v) if isinstance(v, float) else v))
        w.writerow(out)
    return buf.getvalue()
