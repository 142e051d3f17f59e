"""Run directory layout.

    <out>/config.yaml        effective configuration (reloadable)
    <out>/ledger.csv         one EnergyReport per diagnostic sample
    <out>/events.jsonl       one SingularEvent per line
    <out>/snapshots/*.nfld   director (and velocity) fields
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .diagnostics import REPORT_COLUMNS
from .grid import Grid2, write_snapshot


class RunWriter:
    def __init__(self, directory: str | Path, grid: Grid2, snapshot_stride: int = 0):
        self.root = Path(directory)
        self.grid = grid
        self.snapshot_stride = int(snapshot_stride)
        self.snap_dir = self.root / "snapshots"
        self.snap_dir.mkdir(parents=True, exist_ok=True)
        self._last_snapshot = None

    def write_config(self, text: str) -> Path:
        path = self.root / "config.yaml"
        path.write_text(text)
        return path

    def write_ledger(self, reports) -> Path:
        path = self.root / "ledger.csv"
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS)
            w.writeheader()
            for rep in reports:
                w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in rep.to_row().items()})
        return path

    def write_events(self, events) -> Path:
        path = self.root / "events.jsonl"
        with open(path, "w") as fh:
            for ev in events:
                fh.write(json.dumps(ev.to_record()) + "\n")
        return path

    def write_table(self, name: str, rows: list[dict]) -> Path:
        path = self.root / name
        with open(path, "w", newline="") as fh:
            if rows:
                w = csv.DictWriter(fh, fieldnames=list(rows[0]))
                w.writeheader()
                for r in rows:
                    w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
        return path

    def write_json(self, name: str, obj) -> Path:
        path = self.root / name
        path.write_text(json.dumps(obj, indent=2, default=str) + "\n")
        return path

    # ------------------------------------------------------------------
    def snapshot(self, state, force: bool = False) -> None:
        """Write ``state`` when its step count hits the stride (0: first and final only)."""
        k = state.step_count
        if k == self._last_snapshot:
            return
        due = k == 0 or (self.snapshot_stride > 0 and k % self.snapshot_stride == 0)
        if not (due or force):
            return
        write_snapshot(self.snap_dir / f"u_{k:08d}.nfld", self.grid, state.u, state.t)
        v = getattr(state, "v", None)
        if v is not None:
            write_snapshot(self.snap_dir / f"v_{k:08d}.nfld", self.grid, v, state.t)
        self._last_snapshot = k


def read_ledger(path: str | Path) -> list[dict]:
    """Ledger rows as dicts of floats (``step`` as int)."""
    with open(path, newline="") as fh:
        rows = []
        for r in csv.DictReader(fh):
            rows.append({k: (int(v) if k == "step" else float(v)) for k, v in r.items()})
    return rows


def read_events(path: str | Path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]
