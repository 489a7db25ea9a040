"""Run artifacts: delimited series, text/JSON reports, binary snapshots.

CSV floats are written with 17 significant digits so identical runs emit
byte-identical files.

Snapshot layout (fixed width, little endian), extension ``.bin``:

    offset  size  field
    0       8     magic  b"CHTXSNAP"
    8       4     uint32 version (1)
    12      4     uint32 n (dimension)
    16      4     uint32 N (cell count)
    20      1     uint8  mode (0 = full, 1 = reduced)
    21      3     padding (zero)
    24      8     float64 R
    32      8     float64 t
    40      8N    float64 u (cell densities)
    ...     8(N+1)  float64 U (s-face accumulation; reduced mode only)
    ...     8N    float64 v, then 8N float64 w (full mode only; zeros if absent)
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import InvalidParameter
from .solver import RadialState

MAGIC = b"CHTXSNAP"
VERSION = 1

#: stable leading column order; remaining columns appended alphabetically
COLUMN_ORDER = ("mass", "linf", "phi_p", "moment_phi", "moment_psi", "in_S_phi")


def ordered_columns(series: dict) -> list:
    lead = [c for c in COLUMN_ORDER if c in series]
    lp = sorted((c for c in series if c.startswith("lp_")),
                key=lambda c: float(c[3:]))
    rest = sorted(c for c in series if c not in lead and not c.startswith("lp_"))
    # keep lp columns right after linf for readability
    out = []
    for col in lead:
        out.append(col)
        if col == "linf":
            out.extend(lp)
    if "linf" not in lead:
        out.extend(lp)
    return out + rest


def write_series_csv(path, times, series: dict) -> Path:
    path = Path(path)
    cols = ordered_columns(series)
    with open(path, "w", newline="") as handle:
        handle.write(",".join(["t"] + cols) + "\n")
        arrays = [np.asarray(series[c], dtype=float) for c in cols]
        for i, t in enumerate(np.asarray(times, dtype=float)):
            row = [f"{t:.17g}"] + [f"{a[i]:.17g}" for a in arrays]
            handle.write(",".join(row) + "\n")
    return path


def read_series_csv(path):
    path = Path(path)
    with open(path) as handle:
        header = handle.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(header):
        raise InvalidParameter(f"malformed series file {path}")
    times = data[:, 0]
    series = {name: data[:, i] for i, name in enumerate(header) if i > 0}
    return times, series


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.write_text(text if text.endswith("\n") else text + "\n")
    return path


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    return path


def write_snapshot(path, state: RadialState, n: int, R: float) -> Path:
    path = Path(path)
    N = len(state.u)
    mode = 1 if state.mode == "reduced" else 0
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<IIIB3x", VERSION, n, N, mode))
        handle.write(struct.pack("<dd", float(R), float(state.t)))
        np.asarray(state.u, dtype="<f8").tofile(handle)
        if mode == 1:
            np.asarray(state.U, dtype="<f8").tofile(handle)
        else:
            for arr in (state.v, state.w):
                data = np.zeros(N) if arr is None else np.asarray(arr)
                data.astype("<f8").tofile(handle)
    return path


def read_snapshot(path) -> dict:
    path = Path(path)
    with open(path, "rb") as handle:
        magic = handle.read(8)
        if magic != MAGIC:
            raise InvalidParameter(f"{path} is not a snapshot file")
        version, n, N, mode = struct.unpack("<IIIB3x", handle.read(16))
        if version != VERSION:
            raise InvalidParameter(f"unsupported snapshot version {version}")
        R, t = struct.unpack("<dd", handle.read(16))
        u = np.fromfile(handle, dtype="<f8", count=N)
        out = {"n": n, "N": N, "R": R, "t": t, "mode": "reduced" if mode else "full",
               "u": u}
        if mode == 1:
            out["U"] = np.fromfile(handle, dtype="<f8", count=N + 1)
        else:
            out["v"] = np.fromfile(handle, dtype="<f8", count=N)
            out["w"] = np.fromfile(handle, dtype="<f8", count=N)
    return out
