"""Tabular reports and their table, CSV and JSON renderings.

Floats are rounded to 12 decimal places here, so emitted bytes depend
only on the computed values and not on platform float formatting noise.
"""

from __future__ import annotations

import csv
import io
import json
import math

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from rich.console import Console
from rich.table import Table as RichTable

DECIMALS = 12
SECTION_PREFIX = '# table: '
SUMMARY_SECTION = 'summary'

Scalar = bool | int | float | str | None


def normalize(value: Any) -> Scalar:
    """Coerce a computed value into an output scalar."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, Fraction, np.floating)):
        number = float(value)
        if not math.isfinite(number):
            return None
        # adding 0.0 turns -0.0 into 0.0
        return round(number, DECIMALS) + 0.0
    return str(value)


@dataclass(frozen=True)
class Table:
    """Named table with ordered columns."""

    name: str
    columns: tuple[str, ...]
    rows: list[tuple[Scalar, ...]] = field(default_factory=list)

    @classmethod
    def build(
        cls, name: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]
    ) -> Table:
        """Normalise every cell of ``rows``."""
        cols = tuple(columns)
        out = []
        for row in rows:
            if len(row) != len(cols):
                raise ValueError(
                    f'table {name}: {len(row)} cells for {len(cols)} columns'
                )
            out.append(tuple(normalize(v) for v in row))
        return cls(name, cols, out)

    def records(self) -> list[dict[str, Scalar]]:
        """Return the rows as column-keyed mappings."""
        return [dict(zip(self.columns, row)) for row in self.rows]


@dataclass(frozen=True)
class Report:
    """Result of one command."""

    command: str
    title: str
    tables: list[Table]
    summary: dict[str, Scalar] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Reserve the summary section name of the CSV rendering."""
        for table in self.tables:
            if table.name == SUMMARY_SECTION:
                raise ValueError(
                    f'table name {SUMMARY_SECTION!r} is reserved'
                )

    def table(self, name: str) -> Table:
        """Look a table up by name."""
        for table in self.tables:
            if table.name == name:
                return table
        raise KeyError(name)


def render_json(report: Report) -> str:
    """Render with sorted keys, two-space indent and a final newline."""
    payload = {
        'command': report.command,
        'title': report.title,
        'summary': {k: normalize(v) for k, v in report.summary.items()},
        'tables': {t.name: t.records() for t in report.tables},
    }
    return json.dumps(payload, indent=2, sort_keys=True) + '\n'


def _csv_cell(value: Scalar) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    return str(value)


def render_csv(report: Report) -> str:
    """Render the tables as CSV.

    A single table is plain CSV. Several tables are each preceded by a
    ``# table: <name>`` line and separated by a blank line. A non-empty
    summary follows as a ``summary`` section of ``key,value`` rows.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    tables = list(report.tables)
    if report.summary:
        tables.append(
            Table.build(
                SUMMARY_SECTION, ('key', 'value'), report.summary.items()
            )
        )
    sections = len(tables) > 1
    for i, table in enumerate(tables):
        if sections:
            if i:
                buffer.write('\n')
            buffer.write(f'{SECTION_PREFIX}{table.name}\n')
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_csv_cell(v) for v in row])
    return buffer.getvalue()


def read_csv(text: str) -> dict[str, list[dict[str, str]]]:
    """Parse :func:`render_csv` output back into raw string records.

    A plain single-table CSV is returned under the key ``''``.
    """
    chunks: dict[str, list[str]] = {}
    name = ''
    for line in text.splitlines():
        if line.startswith(SECTION_PREFIX):
            name = line[len(SECTION_PREFIX) :]
            chunks[name] = []
        elif line:
            chunks.setdefault(name, []).append(line)
    return {
        key: list(csv.DictReader(io.StringIO('\n'.join(lines))))
        for key, lines in chunks.items()
    }


def print_report(report: Report, console: Console) -> None:
    """Render the report as rich tables on ``console``."""
    console.print(f'[bold cyan]{report.title}[/bold cyan]')
    for table in report.tables:
        rich_table = RichTable(title=table.name, title_justify='left')
        for column in table.columns:
            rich_table.add_column(column)
        for row in table.rows:
            rich_table.add_row(*(_csv_cell(v) for v in row))
        console.print(rich_table)
    for key, value in report.summary.items():
        console.print(f'{key}: [bold]{_csv_cell(normalize(value))}[/bold]')


def render(report: Report, fmt: str) -> str:
    """Render in ``fmt`` (``table``, ``csv`` or ``json``) to a string."""
    if fmt == 'json':
        return render_json(report)
    if fmt == 'csv':
        return render_csv(report)
    console = Console(
        file=io.StringIO(), record=True, width=120, color_system=None
    )
    print_report(report, console)
    return console.export_text()


def write_report(report: Report, fmt: str, path: Path) -> Path:
    """Write the rendered report to ``path``, creating parent folders."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render(report, fmt), encoding='utf-8')
    return path
