"""Observability: coverage fraction, guard connectivity, CSV/JSON outputs.

The connectivity graph deliberately uses deterministic (zero-shadowing)
received power at the nodes' current transmit levels so the metric is
stable run to run; the stochastic per-frame LQI stays a protocol-runtime
signal only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import RadioConfig

CSV_HEADER = ("time_s,n_sleep,n_probe,n_active,n_dead,coverage,components,"
              "isolated,msgs_probe,msgs_probe_reply,msgs_conn,msgs_conn_reply,"
              "energy_total_j,energy_mean_j")

_GRID_CHUNK = 4096


@dataclass(frozen=True)
class NodeView:
    id: int
    x: float
    y: float
    status: str
    tx_dbm: float
    energy_j: float


@dataclass(frozen=True)
class Snapshot:
    time: float
    field_width: float
    field_height: float
    nodes: tuple[NodeView, ...]
    counters: dict


def _grid_centers(extent: float, step: float) -> np.ndarray:
    n = max(1, math.ceil(extent / step))
    return (np.arange(n, dtype=float) + 0.5) * step


def coverage_fraction(snapshot: Snapshot, sensing_range: float,
                      grid_step: float) -> float:
    """Fraction of grid cell centers within sensing range of a guard."""
    if grid_step <= 0.0:
        raise ValueError("grid_step must be positive")
    xs = _grid_centers(snapshot.field_width, grid_step)
    ys = _grid_centers(snapshot.field_height, grid_step)
    total = len(xs) * len(ys)
    actives = [(nv.x, nv.y) for nv in snapshot.nodes if nv.status == "ACTIVE"]
    if not actives:
        return 0.0
    ax = np.array([p[0] for p in actives])
    ay = np.array([p[1] for p in actives])
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    gx = gx.ravel()
    gy = gy.ravel()
    r2 = sensing_range * sensing_range
    covered = 0
    for lo in range(0, total, _GRID_CHUNK):
        hi = min(lo + _GRID_CHUNK, total)
        d2 = ((gx[lo:hi, None] - ax[None, :]) ** 2
              + (gy[lo:hi, None] - ay[None, :]) ** 2)
        covered += int((d2 <= r2).any(axis=1).sum())
    return covered / total


def _lqi_matrix(views, radio: RadioConfig) -> np.ndarray:
    """lqi[i, j]: quality of i's transmission measured at j (zero shadowing)."""
    x = np.array([nv.x for nv in views])
    y = np.array([nv.y for nv in views])
    tx = np.array([nv.tx_dbm for nv in views])
    d = np.hypot(x[:, None] - x[None, :], y[:, None] - y[None, :])
    d = np.maximum(d, 0.01)
    rx = tx[:, None] - (radio.reference_loss_db
                        + 10.0 * radio.path_loss_exponent * np.log10(d))
    snr = rx - radio.noise_floor_dbm
    span = radio.lqi_snr_max_db - radio.lqi_snr_min_db
    frac = np.clip((snr - radio.lqi_snr_min_db) / span, 0.0, 1.0)
    return np.floor(10.0 * frac + 0.5).astype(int)


def guard_adjacency(snapshot: Snapshot, radio: RadioConfig) -> tuple[list[int], np.ndarray]:
    """Guard ids and their symmetric link matrix (LQI >= threshold both ways)."""
    views = [nv for nv in snapshot.nodes if nv.status == "ACTIVE"]
    ids = [nv.id for nv in views]
    k = len(views)
    if k == 0:
        return ids, np.zeros((0, 0), dtype=bool)
    lqi = _lqi_matrix(views, radio)
    adj = (lqi >= radio.lqi_threshold) & (lqi.T >= radio.lqi_threshold)
    np.fill_diagonal(adj, False)
    return ids, adj


def components_from_adjacency(adj: np.ndarray) -> list[list[int]]:
    """Connected components (index lists) by breadth-first search."""
    n = adj.shape[0]
    seen = [False] * n
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        comp = [start]
        seen[start] = True
        frontier = [start]
        while frontier:
            nxt = []
            for i in frontier:
                for j in np.flatnonzero(adj[i]):
                    j = int(j)
                    if not seen[j]:
                        seen[j] = True
                        comp.append(j)
                        nxt.append(j)
            frontier = nxt
        comps.append(sorted(comp))
    return comps


def guard_components(snapshot: Snapshot, radio: RadioConfig) -> list[list[int]]:
    """Connected components of the guard graph, as lists of node ids."""
    ids, adj = guard_adjacency(snapshot, radio)
    return [[ids[i] for i in comp] for comp in components_from_adjacency(adj)]


def sentinel_components(snapshot: Snapshot, radio: RadioConfig) -> dict[str, int]:
    comps = guard_components(snapshot, radio)
    return {"component_count": len(comps),
            "isolated_count": sum(1 for c in comps if len(c) == 1)}


# -- output files -----------------------------------------------------------


def meta_line(seed: int, config_hash: str, rng_name: str) -> str:
    return f"# seed={seed} config={config_hash} rng={rng_name}"


def format_row(row: dict) -> str:
    return ",".join([
        _fmt(row["time_s"]), str(row["n_sleep"]), str(row["n_probe"]),
        str(row["n_active"]), str(row["n_dead"]), _fmt(row["coverage"]),
        str(row["components"]), str(row["isolated"]), str(row["msgs_probe"]),
        str(row["msgs_probe_reply"]), str(row["msgs_conn"]),
        str(row["msgs_conn_reply"]), _fmt(row["energy_total_j"]),
        _fmt(row["energy_mean_j"]),
    ])


def _fmt(x: float) -> str:
    return repr(float(x))


def write_metrics_csv(path, rows, meta: str) -> None:
    with open(path, "w") as fh:
        fh.write(meta + "\n")
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(format_row(row) + "\n")


def read_metrics_csv(path) -> list[dict]:
    """Parse a metrics file back into row dicts (meta/header skipped)."""
    rows = []
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln and not ln.startswith("#")]
    keys = lines[0].split(",")
    for line in lines[1:]:
        parts = line.split(",")
        row = {}
        for key, part in zip(keys, parts):
            row[key] = int(part) if part.lstrip("-").isdigit() else float(part)
        rows.append(row)
    return rows


def snapshot_document(snapshot: Snapshot, meta: dict) -> dict:
    return {
        "meta": meta,
        "time": snapshot.time,
        "nodes": [{"id": nv.id, "x": nv.x, "y": nv.y, "status": nv.status,
                   "tx_dbm": nv.tx_dbm, "energy_j": nv.energy_j}
                  for nv in snapshot.nodes],
    }


def write_json(path, document: dict) -> None:
    with open(path, "w") as fh:
        json.dump(document, fh, indent=1)
        fh.write("\n")


def write_config_echo(path, config, meta: str) -> None:
    with open(path, "w") as fh:
        fh.write(meta + "\n")
        for key, value in config.to_flat().items():
            fh.write(f"{key}={value}\n")
