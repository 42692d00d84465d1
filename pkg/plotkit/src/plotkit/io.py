"""Readers for the CLI's CSV/JSON output formats."""

from __future__ import annotations

import json
from dataclasses import dataclass


class InputError(ValueError):
    """Input file missing, malformed, or missing required columns."""


@dataclass
class Table:
    meta: dict
    header: list
    rows: list

    def column(self, name: str, cast=float) -> list:
        idx = self.header.index(name)
        return [cast(row[idx]) for row in self.rows]


def read_table(path: str, required: tuple = ()) -> Table:
    """Parse a CLI CSV: '#'-prefixed metadata lines, header, data rows."""
    meta, header, rows = {}, None, []
    try:
        with open(path) as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                if line.startswith("#"):
                    body = line[1:].strip()
                    if " = " in body:
                        key, _, value = body.partition(" = ")
                        meta[key.strip()] = value.strip()
                    continue
                cells = line.split(",")
                if header is None:
                    header = cells
                else:
                    if len(cells) != len(header):
                        raise InputError(
                            f"{path}: row width {len(cells)} != header width "
                            f"{len(header)}"
                        )
                    rows.append(cells)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if header is None:
        raise InputError(f"{path}: no header row")
    missing = [c for c in required if c not in header]
    if missing:
        raise InputError(f"{path}: missing required columns {missing}")
    return Table(meta=meta, header=header, rows=rows)


def read_json(path: str, required: tuple = ()) -> dict:
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from exc
    missing = [k for k in required if k not in payload]
    if missing:
        raise InputError(f"{path}: missing required keys {missing}")
    return payload
