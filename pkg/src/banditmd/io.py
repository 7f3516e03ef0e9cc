"""Trace CSV and sidecar file writers.

The trace format is the library's wire contract with downstream tooling:
a fixed header, one row per logged iteration per replication, numeric fields
serialized with 17 significant digits so files round-trip exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .runner import RunResult

TRACE_HEADER = "run_id,iteration,rel_dist,potential_gap,ghat_norm,starved_players,wall_ms"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trace_csv(path, results: list[RunResult]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(TRACE_HEADER + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        for run_id, res in enumerate(results):
            for row in res.trace:
                writer.writerow([run_id, row.iteration, _fmt(row.rel_dist),
                                 _fmt(row.potential_gap), _fmt(row.ghat_norm),
                                 row.starved_players, _fmt(row.wall_ms)])


def read_trace_csv(path) -> dict[str, np.ndarray]:
    """Read a trace written by :func:`write_trace_csv` into column arrays."""
    path = Path(path)
    with open(path, newline="") as fh:
        header = fh.readline().rstrip("\n")
        if header != TRACE_HEADER:
            raise ValueError(f"unexpected trace header in {path}: {header!r}")
        rows = list(csv.reader(fh))
    cols = TRACE_HEADER.split(",")
    data = np.array(rows, dtype=float) if rows else np.zeros((0, len(cols)))
    return {name: data[:, j] for j, name in enumerate(cols)}


def write_stats_json(path, results: list[RunResult]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = [res.stats.summary() for res in results]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_oracle_json(path, x_star: np.ndarray, phi_star: float | None,
                      vi_residual: float) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "x_star": [_fmt(v) for v in np.asarray(x_star, dtype=float)],
        "phi_star": None if phi_star is None else _fmt(phi_star),
        "vi_residual": _fmt(vi_residual),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_oracle_json(path) -> tuple[np.ndarray, float | None]:
    with open(path) as fh:
        payload = json.load(fh)
    x_star = np.array([float(v) for v in payload["x_star"]])
    phi = payload.get("phi_star")
    return x_star, (None if phi is None else float(phi))
