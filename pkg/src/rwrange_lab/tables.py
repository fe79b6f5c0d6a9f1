"""Versioned CSV emission shared by every command that writes tables.

Each file starts with a comment line naming the artifact version and the
schema number, then a column-name row.  Values are written with repr-level
precision so identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__

SCHEMA_VERSION = 1


def schema_header() -> str:
    return f"# rwrange-lab v{__version__} schema={SCHEMA_VERSION}"


def format_cell(value: object) -> str:
    """Canonical text for one cell; floats keep full round-trip precision."""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(
    target: str | Path, columns: Sequence[str], rows: Iterable[Sequence[object]]
) -> Path:
    """Write a schema-stamped CSV; returns the path written."""
    path = Path(target)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(schema_header() + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(cell) for cell in row])
    return path


def read_csv(target: str | Path) -> tuple[list[str], list[list[str]]]:
    """Read back a schema-stamped CSV as (columns, string rows)."""
    with open(Path(target), newline="") as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError(f"missing schema header in {target}")
        reader = csv.reader(fh)
        columns = next(reader)
        return columns, [row for row in reader]
