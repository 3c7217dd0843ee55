"""
Deterministic CSV/JSON writers for run outputs and debug dumps.

Floats are always written with 17 significant digits so that identical
runs produce byte-identical files.
"""

import csv
import json
import logging
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)


def fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(x) for x in row])
    logger.debug("wrote %s (%d rows)", path, len(rows))
    return path


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def dumps_json(obj):
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(obj))
    return path


def dump_vectors(path, field, index_name):
    """
    Flat dump of a per-point array of shape (*grid, A, D): columns
    point, <index_name>, mu, value with the point index in C order.
    """
    field = np.asarray(field)
    n_idx, n_mu = field.shape[-2], field.shape[-1]
    flat = field.reshape(-1, n_idx, n_mu)
    rows = [
        (p, i, mu, flat[p, i, mu])
        for p in range(flat.shape[0])
        for i in range(n_idx)
        for mu in range(n_mu)
    ]
    return write_csv(path, ["point", index_name, "mu", "value"], rows)


def dump_frames(directory, frames):
    """tangents.csv and normals.csv for a FrameField."""
    directory = Path(directory)
    return (
        dump_vectors(directory / "tangents.csv", frames.tangents, "a"),
        dump_vectors(directory / "normals.csv", frames.normals, "I"),
    )


def read_csv_rows(path):
    """(header, rows) of a CSV written by write_csv, values parsed as floats."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader]
    return header, rows
