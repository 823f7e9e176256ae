"""On-disk formats shared by the CLI: sample CSV/blob, tables and provenance headers."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import subprocess
from pathlib import Path

import numpy as np


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def config_hash(doc) -> str:
    return hashlib.sha256(canonical_json(doc).encode("utf-8")).hexdigest()[:16]


def git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=10,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"


def provenance(cfg_hash: str, git: str | None = None) -> list[str]:
    return [f"config_hash={cfg_hash}", f"git={git or git_describe()}"]


def _write(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def write_sample_csv(path, X, header_lines=()):
    X = np.asarray(X, dtype=float)
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"x{j + 1}" for j in range(X.shape[1])])
    for row in X:
        writer.writerow([repr(float(v)) for v in row])
    return _write(path, buf.getvalue())


def read_sample_csv(path) -> np.ndarray:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines[1:]))
    return np.array(rows, dtype=float).reshape(len(rows), -1)


def write_sample_binary(path, X, seed: int, spec_hash: str):
    """``<path>`` holds little-endian float64 row-major data; ``<path>.json`` the shape."""
    X = np.ascontiguousarray(X, dtype="<f8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(X.tobytes())
    sidecar = {"n": X.shape[0], "d": X.shape[1], "dtype": "<f8", "spec_hash": spec_hash, "seed": seed}
    _write(path.with_name(path.name + ".json"), json.dumps(sidecar, sort_keys=True, indent=2))
    return path


def read_sample_binary(path) -> np.ndarray:
    path = Path(path)
    meta = json.loads(path.with_name(path.name + ".json").read_text())
    return np.frombuffer(path.read_bytes(), dtype=meta["dtype"]).reshape(meta["n"], meta["d"]).astype(float)


def write_table_csv(path, columns, rows, header_lines=()):
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([f"{v:.6g}" if isinstance(v, (float, np.floating)) else v for v in r])
    return _write(path, buf.getvalue())


def write_density_csv(path, grid, header_lines=()):
    """Columns ``x,density`` or ``x,y,density``; contour levels go in the header."""
    levels = ",".join(repr(c) for c in grid.contour_levels)
    lines = list(header_lines) + [f"dims={list(grid.dims)}", f"contour_levels={levels}"]
    if len(grid.axes) == 1:
        rows = zip(grid.axes[0], grid.density)
        cols = ("x", "density")
    else:
        gx, gy = np.meshgrid(grid.axes[0], grid.axes[1], indexing="ij")
        rows = zip(gx.ravel(), gy.ravel(), grid.density.ravel())
        cols = ("x", "y", "density")
    return write_table_csv(path, cols, ([float(v) for v in r] for r in rows), lines)


def write_json(path, doc):
    return _write(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")
