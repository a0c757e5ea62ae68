"""Panel CSV files and their JSON truth sidecars."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .signal import SnapshotPanel

__all__ = ["write_panel", "read_panel", "truth_path", "write_json"]


def truth_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".truth.json")


def write_panel(panel: SnapshotPanel, path) -> Path:
    """Write ``t1..tN`` header then one row per snapshot; truth goes to ``<stem>.truth.json``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"t{t}" for t in range(1, panel.N + 1)])
        for row in panel.data:
            w.writerow([repr(float(v)) for v in row])
    if panel.omega is not None:
        truth = dict(panel.meta)
        truth.update(
            omega=panel.omega.tolist(),
            a=None if panel.a is None else panel.a.tolist(),
            b=None if panel.b is None else panel.b.tolist(),
        )
        write_json(truth, truth_path(path))
    return path


def read_panel(path) -> SnapshotPanel:
    path = Path(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    tp = truth_path(path)
    if tp.exists():
        truth = json.loads(tp.read_text())
        arrs = {k: None if truth.get(k) is None else np.asarray(truth[k]) for k in ("omega", "a", "b")}
        meta = {k: v for k, v in truth.items() if k not in ("omega", "a", "b")}
        return SnapshotPanel(data, meta=meta, **arrs)
    return SnapshotPanel(data)


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, allow_nan=True) + "\n")
    return path
