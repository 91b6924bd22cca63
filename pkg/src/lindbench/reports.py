"""Deterministic JSON and CSV output for analysis reports."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

SCHEMA_VERSION = 1


def to_jsonable(x: Any) -> Any:
    """Convert numpy values, tuples and non-finite floats into plain JSON data.

    Non-finite floats become the strings "inf", "-inf" and "nan" so the output
    stays valid JSON.
    """
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(x, (np.complexfloating, complex)):
        return {"re": to_jsonable(x.real), "im": to_jsonable(x.imag)}
    if hasattr(x, "to_dict"):
        return to_jsonable(x.to_dict())
    return x


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


@dataclass
class Curve:
    """A table destined for ``curves/<name>.csv``."""

    name: str
    header: Sequence[str]
    rows: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


@dataclass
class AnalysisReport:
    """Scalars, verdicts and curves of one run, written as a bundle."""

    config: dict
    analyses: dict = field(default_factory=dict)
    curves: list = field(default_factory=list)
    exit_status: int = 0

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "config": self.config, "analyses": self.analyses,
                "exit_status": self.exit_status,
                "curves": sorted(f"curves/{c.name}.csv" for c in self.curves)}

    def write(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        (out / "curves").mkdir(parents=True, exist_ok=True)
        path = out / "report.json"
        path.write_text(dumps(self.to_dict()))
        for c in sorted(self.curves, key=lambda c: c.name):
            (out / "curves" / f"{c.name}.csv").write_text(c.to_csv())
        return path
