"""File formats: grid bundles (JSON meta + CSV), flow-line CSV and report JSON.

Every write goes to a temporary file in the target directory and is renamed
into place, so readers never see a partial file.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .grid import Axis, SampledGrid

FORMAT_VERSION = 1
FLOW_COLUMNS = ("line_id", "t", "x", "xi", "C", "escaped")


def _file_mode():
    mask = os.umask(0)
    os.umask(mask)
    return 0o666 & ~mask


_FILE_MODE = _file_mode()


def atomic_write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, _FILE_MODE)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_number(v):
    """17 significant digits, locale independent; round-trips any double."""
    return format(float(v), ".17g")


def _matrix_csv(values):
    return "".join(",".join(format_number(v) for v in row) + "\n" for row in values)


def _read_matrix(path):
    rows = Path(path).read_text(encoding="utf-8").splitlines()
    return np.array([[float(v) for v in row.split(",")] for row in rows if row])


# ---------------------------------------------------------------------------
# Grid bundles
# ---------------------------------------------------------------------------

def write_bundle(grid, stem):
    """Write ``<stem>.json`` plus ``<stem>.csv`` (real data) or ``<stem>_re.csv``/``<stem>_im.csv``.

    Returns the list of paths written.
    """
    stem = Path(stem)
    values = np.asarray(grid.values)
    complex_data = np.iscomplexobj(values) and np.any(values.imag != 0)
    if complex_data:
        files = {"re": f"{stem.name}_re.csv", "im": f"{stem.name}_im.csv"}
    else:
        files = {"re": f"{stem.name}.csv"}
    meta = {
        "format_version": FORMAT_VERSION,
        "h": float(grid.h),
        "quantity": grid.quantity,
        "axes": {
            "x": {"min": grid.x_axis.lo, "max": grid.x_axis.hi, "count": grid.x_axis.count},
            "y": {"min": grid.y_axis.lo, "max": grid.y_axis.hi, "count": grid.y_axis.count},
        },
        "files": files,
    }
    if grid.time is not None:
        meta["time"] = float(grid.time)
    if grid.extra:
        meta["extra"] = grid.extra
    written = []
    for part, name in files.items():
        data = values.real if part == "re" else values.imag
        path = stem.parent / name
        atomic_write_text(path, _matrix_csv(np.asarray(data, dtype=float)))
        written.append(path)
    meta_path = stem.parent / f"{stem.name}.json"
    atomic_write_text(meta_path, json.dumps(meta, indent=2, sort_keys=True) + "\n")
    written.append(meta_path)
    return written


def read_bundle(meta_path):
    meta_path = Path(meta_path)
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    if meta.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported bundle format_version {meta.get('format_version')!r}")
    ax = meta["axes"]
    x_axis = Axis(ax["x"]["min"], ax["x"]["max"], ax["x"]["count"])
    y_axis = Axis(ax["y"]["min"], ax["y"]["max"], ax["y"]["count"])
    values = _read_matrix(meta_path.parent / meta["files"]["re"])
    if "im" in meta["files"]:
        values = values + 1j * _read_matrix(meta_path.parent / meta["files"]["im"])
    return SampledGrid(meta["h"], x_axis, y_axis, values, meta["quantity"], meta.get("time"),
                       meta.get("extra", {}))


# ---------------------------------------------------------------------------
# Flow lines
# ---------------------------------------------------------------------------

def flow_lines_csv(lines):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FLOW_COLUMNS)
    for line in lines:
        flag = int(bool(line.escaped))
        for t, x, xi, c in zip(line.t, line.x, line.xi, line.C):
            writer.writerow([line.line_id, format_number(t), format_number(x), format_number(xi),
                             format_number(c), flag])
    return buf.getvalue()


def write_flow_lines(lines, path):
    atomic_write_text(path, flow_lines_csv(lines))
    return Path(path)


def read_flow_lines(path):
    """Parse a flow-line CSV into ``{line_id: dict of arrays}`` keyed in file order."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != FLOW_COLUMNS:
            raise ValueError(f"unexpected flow-line header {reader.fieldnames}")
        out = {}
        for row in reader:
            rec = out.setdefault(int(row["line_id"]), {"t": [], "x": [], "xi": [], "C": [], "escaped": False})
            for key in ("t", "x", "xi", "C"):
                rec[key].append(float(row[key]))
            rec["escaped"] = bool(int(row["escaped"]))
    for rec in out.values():
        for key in ("t", "x", "xi", "C"):
            rec[key] = np.array(rec[key])
    return out


def read_seeds(path):
    """Seeds from a CSV with ``x,xi`` columns (header required)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or not {"x", "xi"} <= set(reader.fieldnames):
            raise ValueError("seed file needs x and xi columns")
        return [(float(r["x"]), float(r["xi"])) for r in reader]


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def write_json(data, path):
    atomic_write_text(path, json.dumps(data, indent=2, sort_keys=True, allow_nan=True) + "\n")
    return Path(path)


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
