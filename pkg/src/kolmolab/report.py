"""Report rendering: structured text, CSV, and the run manifest.

Structured text layout (stable, diff-friendly)::

    == check: <name>
    status: PASS | FAIL
    params: {...}
    summary:
      <key>: <json value>
    failures:
      - <text>
    records:
      {<json object per record>}

CSV has one row per profiled pair with the columns in :data:`CSV_COLUMNS`.
"""
from __future__ import annotations

import csv
import io
import json
import time
from pathlib import Path

from .machine import machine_fingerprint

CSV_COLUMNS = ["x", "y", "t_x", "t_y", "t", "w", "i_xy", "i_yx", "delta",
               "bound_term", "pass"]


def _j(v) -> str:
    return json.dumps(v, sort_keys=True, separators=(", ", ": "))


def render_structured(reports) -> str:
    out = []
    for rep in reports:
        out.append(f"== check: {rep.name}")
        out.append(f"status: {'PASS' if rep.passed else 'FAIL'}")
        out.append(f"params: {_j(rep.params)}")
        out.append("summary:")
        for k, v in rep.summary.items():
            out.append(f"  {k}: {_j(v)}")
        out.append("failures:")
        for f in rep.failures:
            out.append(f"  - {f}")
        out.append("records:")
        for r in rep.records:
            out.append(f"  {_j(r)}")
        out.append("")
    return "\n".join(out)


def render_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, extrasaction="ignore",
                            lineterminator="\n")
    writer.writeheader()
    for rep in reports:
        for r in rep.records:
            # only per-pair profile records; other checks stay in the structured form
            if "x" in r and "y" in r and "t_x" in r:
                writer.writerow({k: r.get(k, "") for k in CSV_COLUMNS})
    return buf.getvalue()


def write_outputs(out_dir, stem: str, reports, fmt: str, manifest: dict) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        path = out_dir / f"{stem}.csv"
        path.write_text(render_csv(reports))
    else:
        path = out_dir / f"{stem}.txt"
        path.write_text(render_structured(reports))
    man = dict(manifest)
    man["report"] = path.name
    (out_dir / f"{stem}.manifest.json").write_text(json.dumps(man, indent=2, sort_keys=True) + "\n")
    return path


def make_manifest(command: str, params: dict, bounds: dict, reports, started: float) -> dict:
    return {
        "command": command,
        "params": params,
        "bounds": bounds,
        "machine_fingerprint": machine_fingerprint(),
        "wall_clock_s": round(time.time() - started, 3),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "summary": {r.name: ("PASS" if r.passed else "FAIL") for r in reports},
        "passed": all(r.passed for r in reports),
    }
