"""Result rows and their CSV / JSON serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

COLUMNS = ("scenario", "theorem", "quantity", "lower", "upper", "oracle", "gap", "seed", "runtime_ms")
SCHEMA = "essnorm-results/v1"


@dataclass
class ResultRow:
    scenario: str
    theorem: str
    quantity: str
    lower: float
    upper: float
    oracle: Optional[float] = None
    gap: Optional[float] = None
    seed: Optional[int] = None
    runtime_ms: float = 0.0
    tol: Optional[float] = None
    passed: Optional[bool] = None
    witness: dict = field(default_factory=dict)

    def finalize(self) -> "ResultRow":
        """Fill ``gap`` (distance of the oracle from [lower, upper]) and ``passed``."""
        if self.oracle is not None and self.gap is None:
            self.gap = max(self.lower - self.oracle, self.oracle - self.upper, 0.0)
        if self.passed is None:
            ok = self.lower <= self.upper or math.isclose(self.lower, self.upper, rel_tol=1e-12)
            if self.gap is not None and self.tol is not None:
                ok = ok and self.gap <= self.tol
            self.passed = bool(ok)
        return self


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".17g")


def _num(text: str):
    if text == "":
        return None
    return float(text)


def to_csv(rows, include_runtime: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = COLUMNS if include_runtime else COLUMNS[:-1]
    w.writerow(cols)
    for r in rows:
        vals = [r.scenario, r.theorem, r.quantity, _fmt(r.lower), _fmt(r.upper), _fmt(r.oracle), _fmt(r.gap),
                _fmt(r.seed), _fmt(round(float(r.runtime_ms)))]
        w.writerow(vals[: len(cols)])
    return buf.getvalue()


def from_csv(text: str) -> list:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != COLUMNS:
        raise ValueError(f"unexpected CSV header {header}")
    rows = []
    for rec in reader:
        d = dict(zip(COLUMNS, rec))
        rows.append(
            ResultRow(
                d["scenario"], d["theorem"], d["quantity"], float(d["lower"]), float(d["upper"]),
                _num(d["oracle"]), _num(d["gap"]), None if d["seed"] == "" else int(d["seed"]),
                float(d["runtime_ms"]),
            )
        )
    return rows


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "tolist"):
        return _jsonable(v.tolist())
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    return repr(v)


def export_json(rows) -> dict:
    """Structured document: every CSV field plus tolerance, verdict and witness metadata."""
    out = []
    for r in rows:
        d = {c: getattr(r, c) for c in COLUMNS}
        d["runtime_ms"] = round(float(r.runtime_ms))
        d["tol"] = r.tol
        d["passed"] = r.passed
        d["witness"] = _jsonable(r.witness)
        out.append(d)
    return {"schema": SCHEMA, "rows": out}


def dumps_json(rows) -> str:
    return json.dumps(export_json(rows), indent=2, sort_keys=True)


def import_json(doc) -> list:
    if isinstance(doc, str):
        doc = json.loads(doc)
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"unsupported schema {doc.get('schema')!r}")
    rows = []
    for d in doc["rows"]:
        rows.append(
            ResultRow(
                d["scenario"], d["theorem"], d["quantity"], d["lower"], d["upper"], d["oracle"], d["gap"],
                d["seed"], d["runtime_ms"], d.get("tol"), d.get("passed"), d.get("witness") or {},
            )
        )
    return rows


def format_table(rows) -> str:
    head = f"{'scenario':<28} {'quantity':<34} {'lower':>14} {'upper':>14} {'oracle':>14} {'ok':>4}"
    lines = [head, "-" * len(head)]
    for r in rows:
        o = "" if r.oracle is None else f"{r.oracle:.8g}"
        ok = "" if r.passed is None else ("yes" if r.passed else "NO")
        lines.append(f"{r.scenario:<28} {r.quantity:<34} {r.lower:>14.8g} {r.upper:>14.8g} {o:>14} {ok:>4}")
    return "\n".join(lines)
