"""Text file formats: invariant grids, reconstructed patches, csv4d samples, OBJ meshes, JSON reports.

Every CSV file starts with ``#``-prefixed header lines (format name and
version, then ``key value`` pairs), followed by one column-name line and the
data rows.  Reals are written with 17 significant digits, which round-trips
IEEE doubles exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import InputError
from .net import FIELD_NAMES, InvariantFieldGrid

FORMAT_VERSION = 1
GRID_FORMAT = "surfr4-grid"
PATCH_FORMAT = "surfr4-patch"
CSV4D_FORMAT = "surfr4-csv4d"
POSITION_COLUMNS = ("x1", "x2", "x3", "x4")
# frame entries: f + row name (x, y, b, l) + ambient index, e.g. fb3
FRAME_COLUMNS = tuple(f"f{row}{k}" for row in ("x", "y", "b", "l") for k in range(1, 5))

# in-memory attribute name -> file column name
_FILE_NAMES = {"lam": "lambda"}
_MEMORY_NAMES = {v: k for k, v in _FILE_NAMES.items()}


def fmt(x):
    return format(float(x), ".17g")


def _write_table(path, fmt_name, meta, columns, rows):
    lines = [f"# {fmt_name} version {FORMAT_VERSION}"]
    lines += [f"# {key} {value}" for key, value in meta.items()]
    lines.append(",".join(columns))
    lines += [",".join(row) for row in rows]
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


def _read_table(path, fmt_name=None):
    """Returns (format, meta dict, column names, float array of rows)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = [ln[1:].strip() for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    if not header or not body:
        raise InputError(f"{path}: missing header or column line")
    first = header[0].split()
    if len(first) != 3 or first[1] != "version":
        raise InputError(f"{path}: malformed format line {header[0]!r}")
    if fmt_name is not None and first[0] != fmt_name:
        raise InputError(f"{path}: expected {fmt_name}, found {first[0]}")
    if not first[2].isdigit() or int(first[2]) != FORMAT_VERSION:
        raise InputError(f"{path}: unsupported version {first[2]}")
    meta = {}
    for entry in header[1:]:
        key, _, value = entry.partition(" ")
        meta[key] = value.strip()
    reader = csv.reader(body)
    columns = [c.strip() for c in next(reader)]
    rows = []
    for n, row in enumerate(reader, start=1):
        if len(row) != len(columns):
            raise InputError(f"{path}: row {n} has {len(row)} values, expected {len(columns)}")
        try:
            rows.append([float(x) for x in row])
        except ValueError as exc:
            raise InputError(f"{path}: row {n}: {exc}") from None
    data = np.array(rows, dtype=float).reshape(-1, len(columns))
    if not np.all(np.isfinite(data)):
        bad = int(np.argwhere(~np.isfinite(data))[0, 0]) + 1
        raise InputError(f"{path}: non-finite value in row {bad}")
    return first[0], meta, columns, data


def _meta_int(meta, key, path):
    try:
        return int(meta[key])
    except (KeyError, ValueError):
        raise InputError(f"{path}: header lacks integer {key!r}") from None


def _meta_float(meta, key, path):
    try:
        return float(meta[key])
    except (KeyError, ValueError):
        raise InputError(f"{path}: header lacks real {key!r}") from None


def _indexed(data, columns, nu, nv, path):
    """Scatter rows onto an (nu, nv) grid by their u_index and v_index columns."""
    if data.shape[0] != nu * nv:
        raise InputError(f"{path}: {data.shape[0]} rows, expected nu*nv = {nu * nv}")
    try:
        iu, iv = columns.index("u_index"), columns.index("v_index")
    except ValueError:
        raise InputError(f"{path}: missing u_index/v_index columns") from None
    i = data[:, iu].astype(int)
    j = data[:, iv].astype(int)
    if np.any(i != data[:, iu]) or np.any(j != data[:, iv]) or np.any((i < 0) | (i >= nu)) \
            or np.any((j < 0) | (j >= nv)):
        raise InputError(f"{path}: index out of range")
    seen = np.zeros((nu, nv), dtype=int)
    np.add.at(seen, (i, j), 1)
    if np.any(seen != 1):
        node = tuple(int(k) for k in np.argwhere(seen != 1)[0])
        raise InputError(f"{path}: node {node} missing or repeated")
    out = np.empty((nu, nv, data.shape[1]))
    out[i, j] = data
    return out


def _index_rows(nu, nv):
    return [(str(i), str(j)) for i in range(nu) for j in range(nv)]


# invariant grids ----------------------------------------------------------------

def write_grid(path, grid):
    names = list(FIELD_NAMES)
    columns = ["u_index", "v_index"] + [_FILE_NAMES.get(n, n) for n in names]
    has_pos = grid.positions is not None
    if has_pos:
        columns += POSITION_COLUMNS
    meta = {"nu": grid.nu, "nv": grid.nv, "du": fmt(grid.du), "dv": fmt(grid.dv),
            "fields": ",".join(columns[2:]), "holonomy": fmt(grid.holonomy)}
    if grid.label:
        meta["label"] = grid.label
    stacks = [getattr(grid, n) for n in names]
    rows = []
    for (si, sj), (i, j) in zip(_index_rows(grid.nu, grid.nv), np.ndindex(grid.nu, grid.nv)):
        row = [si, sj] + [fmt(a[i, j]) for a in stacks]
        if has_pos:
            row += [fmt(x) for x in grid.positions[i, j]]
        rows.append(row)
    _write_table(path, GRID_FORMAT, meta, columns, rows)


def read_grid(path):
    _, meta, columns, data = _read_table(path, GRID_FORMAT)
    nu, nv = _meta_int(meta, "nu", path), _meta_int(meta, "nv", path)
    du, dv = _meta_float(meta, "du", path), _meta_float(meta, "dv", path)
    if "fields" in meta and meta["fields"].split(",") != columns[2:]:
        raise InputError(f"{path}: column set does not match the header field list")
    required = [_FILE_NAMES.get(n, n) for n in FIELD_NAMES]
    missing = [c for c in required if c not in columns]
    if missing:
        raise InputError(f"{path}: missing columns {', '.join(missing)}")
    table = _indexed(data, columns, nu, nv, path)
    fields = {_MEMORY_NAMES.get(c, c): table[..., columns.index(c)] for c in required}
    positions = None
    if all(c in columns for c in POSITION_COLUMNS):
        positions = np.stack([table[..., columns.index(c)] for c in POSITION_COLUMNS], axis=-1)
    holonomy = _meta_float(meta, "holonomy", path) if "holonomy" in meta else 0.0
    return InvariantFieldGrid(du=du, dv=dv, positions=positions, holonomy=holonomy,
                              label=meta.get("label", ""), **fields)


# reconstructed patches ----------------------------------------------------------

def write_patch(path, patch, extra_meta=None):
    nu, nv = patch.shape
    columns = ["u_index", "v_index", *POSITION_COLUMNS, *FRAME_COLUMNS]
    meta = {"nu": nu, "nv": nv, "du": fmt(patch.du), "dv": fmt(patch.dv), "path": patch.path,
            "compatibility_residual": fmt(patch.compatibility_residual),
            "integrability_residual": fmt(patch.integrability_residual)}
    meta.update(extra_meta or {})
    rows = []
    for (si, sj), (i, j) in zip(_index_rows(nu, nv), np.ndindex(nu, nv)):
        rows.append([si, sj] + [fmt(x) for x in patch.positions[i, j]]
                    + [fmt(x) for x in patch.frames[i, j].ravel()])
    _write_table(path, PATCH_FORMAT, meta, columns, rows)


def read_patch(path):
    """Returns ``(positions, frames, meta)``."""
    _, meta, columns, data = _read_table(path, PATCH_FORMAT)
    nu, nv = _meta_int(meta, "nu", path), _meta_int(meta, "nv", path)
    missing = [c for c in POSITION_COLUMNS + FRAME_COLUMNS if c not in columns]
    if missing:
        raise InputError(f"{path}: missing columns {', '.join(missing)}")
    table = _indexed(data, columns, nu, nv, path)
    pos = np.stack([table[..., columns.index(c)] for c in POSITION_COLUMNS], axis=-1)
    frames = np.stack([table[..., columns.index(c)] for c in FRAME_COLUMNS], axis=-1)
    return pos, frames.reshape(nu, nv, 4, 4), meta


# csv4d samples ------------------------------------------------------------------

def write_csv4d(path, u, v, positions, label=""):
    """Rectangular samples ``positions[i, j] = z(u[i], v[j])`` with columns u, v, x1..x4."""
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    positions = np.asarray(positions, dtype=float)
    meta = {"nu": u.size, "nv": v.size}
    if label:
        meta["label"] = label
    rows = [[fmt(u[i]), fmt(v[j])] + [fmt(x) for x in positions[i, j]]
            for i, j in np.ndindex(u.size, v.size)]
    _write_table(path, CSV4D_FORMAT, meta, ["u", "v", *POSITION_COLUMNS], rows)


def read_csv4d(path):
    """Returns ``(u, v, positions, label)`` for a rectangular sample file."""
    _, meta, columns, data = _read_table(path, CSV4D_FORMAT)
    nu, nv = _meta_int(meta, "nu", path), _meta_int(meta, "nv", path)
    if data.shape[0] != nu * nv:
        raise InputError(f"{path}: {data.shape[0]} rows, expected nu*nv = {nu * nv}")
    if columns[:2] != ["u", "v"] or any(c not in columns for c in POSITION_COLUMNS):
        raise InputError(f"{path}: expected columns u, v, x1..x4")
    uu = data[:, 0].reshape(nu, nv)
    vv = data[:, 1].reshape(nu, nv)
    u, v = uu[:, 0], vv[0, :]
    if not (np.all(uu == u[:, None]) and np.all(vv == v[None, :])):
        raise InputError(f"{path}: samples are not a rectangular u-major grid")
    pos = np.stack([data[:, columns.index(c)] for c in POSITION_COLUMNS], axis=-1)
    return u, v, pos.reshape(nu, nv, 4), meta.get("label", "sampled")


def read_positions(path):
    """Positions from any file format above that carries x1..x4."""
    kind, *_ = _read_table(path)
    if kind == GRID_FORMAT:
        grid = read_grid(path)
        if grid.positions is None:
            raise InputError(f"{path}: grid carries no positions")
        return grid.positions
    if kind == PATCH_FORMAT:
        return read_patch(path)[0]
    if kind == CSV4D_FORMAT:
        return read_csv4d(path)[2]
    raise InputError(f"{path}: unknown format {kind!r}")


# OBJ meshes -----------------------------------------------------------------------

def write_obj(path, positions, label=""):
    """Triangulated OBJ of a grid of points; x4 is carried as the texture u coordinate."""
    positions = np.asarray(positions, dtype=float)
    nu, nv = positions.shape[:2]
    lines = [f"# {label or 'surface'}: x1 x2 x3 as vertices, x4 as vt u"]
    flat = positions.reshape(-1, 4)
    lines += [f"v {fmt(p[0])} {fmt(p[1])} {fmt(p[2])}" for p in flat]
    lines += [f"vt {fmt(p[3])} 0" for p in flat]
    idx = np.arange(nu * nv).reshape(nu, nv) + 1
    for i in range(nu - 1):
        for j in range(nv - 1):
            a, b, c, d = idx[i, j], idx[i + 1, j], idx[i + 1, j + 1], idx[i, j + 1]
            lines.append(f"f {a}/{a} {b}/{b} {c}/{c}")
            lines.append(f"f {a}/{a} {c}/{c} {d}/{d}")
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


# JSON reports ---------------------------------------------------------------------

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def dumps_report(report):
    return json.dumps(_plain(report), indent=2, sort_keys=True)


def write_report(path, report):
    text = dumps_report(report) + "\n"
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc
