"""Bit-exact persistence: FNLS1 field dumps, 17-digit CSV reports, JSON
summaries with stable key order, and tagged region text.

All numeric formatting is fixed and locale-independent. Floats are written
with 17 significant digits (CSV) or shortest round-trip repr (JSON, FNLS1
header), both of which reparse to the identical double.
"""

from __future__ import annotations

import csv
import json
import re
import sys
from pathlib import Path

import numpy as np

from .grid import Field, GridSpec, Region, annulus, ball, empty_region, \
    whole_box

MAGIC = "FNLS1"

_INT_RE = re.compile(r"[+-]?\d+")


class IOFormatError(ValueError):
    """Raised for malformed dumps, headers, and tables."""


def write_field(path, u: Field) -> None:
    """Dump a field: text header "FNLS1 N M L s" then raw little-endian
    float64 in row-major order."""
    g = u.grid
    header = f"{MAGIC} {g.N} {g.M} {float(g.L)!r} {float(g.s)!r}\n"
    payload = np.ascontiguousarray(u.values, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(payload)


def read_field(path) -> Field:
    """Read an FNLS1 dump back into a Field, bit-exact."""
    with open(path, "rb") as fh:
        raw = fh.read()
    nl = raw.find(b"\n")
    if nl < 0 or nl > 128:
        raise IOFormatError(f"{path}: missing or oversized FNLS1 header")
    try:
        tokens = raw[:nl].decode("ascii").split()
    except UnicodeDecodeError as exc:
        raise IOFormatError(f"{path}: header is not ASCII") from exc
    if len(tokens) != 5 or tokens[0] != MAGIC:
        raise IOFormatError(
            f"{path}: corrupted header {raw[:nl]!r}; expected "
            f"'{MAGIC} N M L s'")
    try:
        N, M = int(tokens[1]), int(tokens[2])
        L, s = float(tokens[3]), float(tokens[4])
    except ValueError as exc:
        raise IOFormatError(f"{path}: non-numeric header fields") from exc
    grid = GridSpec(N=N, M=M, L=L, s=s)
    payload = raw[nl + 1:]
    expected = (M ** N) * 8
    if len(payload) != expected:
        raise IOFormatError(
            f"{path}: payload holds {len(payload)} bytes, header promises "
            f"{expected}")
    values = np.frombuffer(payload, dtype="<f8").reshape(grid.shape)
    return Field(grid, values.astype(np.float64))


def _format_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_report(path, rows, columns=None) -> None:
    """Write a table of rows (mappings) as CSV with %.17g floats.

    columns fixes the header order; it defaults to the first row's key
    order and is required for empty tables (which produce a header-only
    file). Duplicate column names and rows whose keys disagree with the
    header are errors.
    """
    rows = list(rows)
    if columns is None:
        if not rows:
            raise IOFormatError(
                "empty table needs an explicit column list for its header")
        columns = list(rows[0].keys())
    columns = [str(c) for c in columns]
    if len(set(columns)) != len(columns):
        raise IOFormatError(f"duplicate column names in {columns}")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            if set(row.keys()) != set(columns):
                raise IOFormatError(
                    f"row keys {sorted(row)} do not match header "
                    f"{sorted(columns)}")
            writer.writerow([_format_cell(row[c]) for c in columns])


def _parse_cell(text: str):
    if text == "true":
        return True
    if text == "false":
        return False
    if _INT_RE.fullmatch(text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def read_report(path):
    """Read a CSV report back as a list of dicts with typed cells."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IOFormatError(f"{path}: empty file, no header") from None
        if len(set(header)) != len(header):
            raise IOFormatError(f"{path}: duplicate column names {header}")
        out = []
        for line in reader:
            if len(line) != len(header):
                raise IOFormatError(
                    f"{path}: row width {len(line)} != header width "
                    f"{len(header)}")
            out.append({k: _parse_cell(v) for k, v in zip(header, line)})
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def write_json(path, obj) -> None:
    """Write a JSON summary; keys keep their insertion order."""
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=False,
                  allow_nan=True)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def write_region(path, region: Region) -> None:
    """Serialize a factory region as tagged text (kind plus parameters)."""
    kind = region.tag[0]
    if kind not in ("box", "empty", "ball", "annulus"):
        raise IOFormatError(
            f"region kind {kind!r} has no parameter form; only factory "
            "regions serialize")
    parts = [kind] + [repr(float(p)) for p in region.tag[1:]]
    Path(path).write_text(" ".join(parts) + "\n")


def read_region(path, grid: GridSpec) -> Region:
    tokens = Path(path).read_text().split()
    if not tokens:
        raise IOFormatError(f"{path}: empty region file")
    kind, params = tokens[0], [float(t) for t in tokens[1:]]
    if kind == "box" and not params:
        return whole_box(grid)
    if kind == "empty" and not params:
        return empty_region(grid)
    if kind == "ball" and len(params) == grid.N + 1:
        return ball(grid, params[:-1], params[-1])
    if kind == "annulus" and len(params) == grid.N + 2:
        return annulus(grid, params[:-2], params[-2], params[-1])
    raise IOFormatError(
        f"{path}: bad region record {tokens!r} for N={grid.N}")


def versions_manifest() -> dict:
    """Interpreter and dependency versions for run manifests."""
    import importlib.metadata as md
    import os
    out = {"python": sys.version.split()[0]}
    for pkg in ("fnlslab", "numpy", "scipy", "numba"):
        try:
            out[pkg] = md.version(pkg)
        except md.PackageNotFoundError:
            out[pkg] = "absent"
    out["numba_disabled"] = bool(os.environ.get("FNLSLAB_NO_NUMBA"))
    return out
