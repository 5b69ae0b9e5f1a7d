"""Result tables and their CSV / JSON serialisation."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["ResultTable", "emit", "render", "read_csv"]


@dataclass
class ResultTable:
    columns: list[tuple[str, str]]
    rows: list[tuple] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, schema has {len(self.columns)}")
        self.rows.append(tuple(values))

    def column(self, name: str) -> list:
        i = [c for c, _ in self.columns].index(name)
        return [r[i] for r in self.rows]

    @property
    def header(self) -> list[str]:
        return [f"{name}[{unit}]" for name, unit in self.columns]


def _cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return "%.12g" % value
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def render(table: ResultTable, fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        writer.writerow(table.header)
        for row in table.rows:
            writer.writerow([_cell(v) for v in row])
        return buf.getvalue()
    if fmt == "json":
        doc = {
            "schema": [{"name": n, "unit": u} for n, u in table.columns],
            "rows": [[_json_value(v) for v in row] for row in table.rows],
            "metadata": {k: _json_value(v) for k, v in table.metadata.items()},
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit(table: ResultTable, fmt: str = "csv", path=None) -> str:
    """Serialise ``table``; write to ``path`` if given, return the text."""
    text = render(table, fmt)
    if path is not None:
        p = Path(path)
        try:
            with open(p, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(exc.errno, f"cannot write results to {p}: {exc.strerror}") from None
    return text


def read_csv(text: str) -> tuple[list[str], list[list[str]]]:
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]
