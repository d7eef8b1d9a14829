"""Strict readers for the toolkit's CSV/JSON output contracts.

Every parse failure raises :class:`FormatError` with a ``path:line`` prefix
so the CLI can point at the offending line.
"""

import csv
import json
from pathlib import Path

import numpy as np

__all__ = [
    "FormatError",
    "ENERGY_COLUMNS",
    "SPECTRUM_COLUMNS",
    "SWEEP_COLUMNS",
    "read_table",
    "sniff_kind",
    "read_json",
]

ENERGY_COLUMNS = (
    "t", "E", "E_wave", "E_delay",
    "flux_kv", "flux_bnd_ut", "flux_bnd_eta", "flux_cross",
)
SPECTRUM_COLUMNS = ("re", "im")
SWEEP_COLUMNS = ("lambda", "resolvent_norm")

_HEADERS = {
    ENERGY_COLUMNS: "energy",
    SPECTRUM_COLUMNS: "spectrum",
    SWEEP_COLUMNS: "sweep",
}


class FormatError(ValueError):
    """An input file does not match its contract."""


def read_table(path, columns) -> dict:
    """Parse a CSV file with the given header into a dict of float arrays."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}:1: empty file, expected header "
                              f"{','.join(columns)}") from None
        if tuple(header) != tuple(columns):
            raise FormatError(
                f"{path}:1: expected header {','.join(columns)}, "
                f"got {','.join(header)}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(columns):
                raise FormatError(
                    f"{path}:{lineno}: expected {len(columns)} fields, "
                    f"got {len(row)}"
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                bad = next(v for v in row if not _is_float(v))
                raise FormatError(
                    f"{path}:{lineno}: not a number: {bad!r}"
                ) from None
    if not rows:
        raise FormatError(f"{path}:2: no data rows")
    data = np.asarray(rows, dtype=float)
    return {name: data[:, j] for j, name in enumerate(columns)}


def _is_float(v: str) -> bool:
    try:
        float(v)
        return True
    except ValueError:
        return False


def sniff_kind(path) -> str:
    """Classify a CSV file as energy / spectrum / sweep by its header."""
    path = Path(path)
    with open(path, newline="") as fh:
        try:
            header = tuple(next(csv.reader(fh)))
        except StopIteration:
            raise FormatError(f"{path}:1: empty file") from None
    try:
        return _HEADERS[header]
    except KeyError:
        raise FormatError(
            f"{path}:1: unrecognized header {','.join(header)}"
        ) from None


def read_json(path) -> dict:
    path = Path(path)
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(payload, dict):
        raise FormatError(f"{path}:1: expected a JSON object")
    return payload
