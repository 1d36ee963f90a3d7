"""Artifact writers: CSV maps and spectra, JSON records, raw cube dumps."""

import hashlib
import json
from pathlib import Path

import numpy as np

DB_FLOOR = -300.0


def to_db(magnitude):
    mag = np.abs(np.asarray(magnitude))
    with np.errstate(divide="ignore"):
        out = 20 * np.log10(mag)
    return np.maximum(out, DB_FLOOR)


def _write_grid_csv(path, corner, col_axis, row_axis, values_db):
    path = Path(path)
    with path.open("w", newline="\n") as fh:
        fh.write(corner + "," + ",".join(f"{v:.6g}" for v in col_axis) + "\n")
        for label, row in zip(row_axis, values_db):
            fh.write(f"{label:.6g}," + ",".join(f"{v:.3f}" for v in row) + "\n")
    return path


def write_rd_csv(path, magnitude, range_axis, doppler_axis, max_rows=None):
    """Range-Doppler magnitudes in dB; rows are range bins, columns Doppler bins."""
    rows = magnitude.shape[0] if max_rows is None else min(max_rows, magnitude.shape[0])
    return _write_grid_csv(path, "range_m/doppler_hz", doppler_axis, range_axis[:rows],
                           to_db(magnitude[:rows]))


def write_music_csv(path, grid):
    """MUSIC spectrum in dB (peak at 0 dB); rows azimuth, columns elevation."""
    return _write_grid_csv(path, "azimuth_deg/elevation_deg", grid.elevation_grid,
                           grid.azimuth_grid, grid.to_db())


def read_grid_csv(path):
    """Inverse of the CSV writers: (row_axis, col_axis, values)."""
    data = np.genfromtxt(path, delimiter=",", skip_header=0)
    return data[1:, 0], data[0, 1:], data[1:, 1:]


def write_json(path, obj):
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n")
    return path


def export_cube(cube, path, params_hash=None):
    """Little-endian complex64 samples in C order (N, P, Q) plus a JSON sidecar."""
    path = Path(path)
    data = np.ascontiguousarray(cube.samples, dtype="<c8")
    data.tofile(path)
    sidecar = {
        "dims": list(data.shape),
        "order": ["antenna", "fast_time", "slow_time"],
        "dtype": "complex64 little-endian",
        "polarization": cube.polarization,
        "params_hash": params_hash,
        "sha256": hashlib.sha256(data.tobytes()).hexdigest(),
    }
    side = path.with_suffix(path.suffix + ".json")
    write_json(side, sidecar)
    return path, side


def load_cube(path):
    path = Path(path)
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    data = np.fromfile(path, dtype="<c8").reshape(meta["dims"])
    return data, meta
