"""CSV ingestion and export for contingency tables.

Two layouts are read: one subject per row, or pre-aggregated cells with a
trailing ``count`` column.  State labels are arbitrary strings and keep
their order of first appearance.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Mapping, Sequence

from .tables import ContingencyTable, TableError, Variable, from_records

COUNT_COLUMN = "count"
_BOOLEAN_COMPLEMENT = {"true": "false", "false": "true"}


class CsvFormatError(TableError):
    """Malformed CSV input; the message names the offending row."""


def _read_rows(path: str | Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file, expected a header line") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header) or not all(header):
            raise CsvFormatError(f"{path}: header has blank or duplicate columns: {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CsvFormatError(
                    f"{path}: row {lineno - 1} (line {lineno}) has {len(row)} fields, "
                    f"header has {len(header)}"
                )
            rows.append([v.strip() for v in row])
    return header, rows


def _schema(header: Sequence[str], rows: Sequence[Sequence[str]], states: Mapping[str, Sequence[str]]):
    seen: dict[str, list[str]] = {name: list(states.get(name, ())) for name in header}
    for row in rows:
        for name, value in zip(header, row):
            if value not in seen[name]:
                seen[name].append(value)
    variables = []
    for name in header:
        labels = seen[name]
        if len(labels) == 1 and labels[0] in _BOOLEAN_COMPLEMENT:
            labels.append(_BOOLEAN_COMPLEMENT[labels[0]])
        if len(labels) < 2:
            raise CsvFormatError(f"column {name!r} has fewer than two distinct states: {labels}")
        variables.append(Variable(name, labels))
    return variables


def read_table_csv(
    path: str | Path,
    counts: bool = False,
    states: Mapping[str, Sequence[str]] | None = None,
) -> ContingencyTable:
    """Load a table from a CSV file.

    With ``counts=True`` the file must carry a ``count`` column holding
    non-negative integers; otherwise every row is one subject.  ``states``
    can declare labels (and their order) ahead of the observed ones.
    """
    header, rows = _read_rows(path)
    states = dict(states or {})
    if counts:
        if COUNT_COLUMN not in header:
            raise CsvFormatError(f"{path}: count mode needs a {COUNT_COLUMN!r} column")
        ci = header.index(COUNT_COLUMN)
        names = [h for i, h in enumerate(header) if i != ci]
        cells, tallies = [], []
        for i, row in enumerate(rows, start=1):
            try:
                n = int(row[ci])
            except ValueError:
                raise CsvFormatError(f"{path}: row {i} has non-integer count {row[ci]!r}") from None
            if n < 0:
                raise CsvFormatError(f"{path}: row {i} has negative count {n}")
            cells.append([v for j, v in enumerate(row) if j != ci])
            tallies.append(n)
        variables = _schema(names, cells, states)
        return ContingencyTable.from_rows(variables, (tuple(c) + (n,) for c, n in zip(cells, tallies)))
    variables = _schema(header, rows, states)
    return from_records(rows, variables)


def table_to_csv(table: ContingencyTable, include_zero: bool = True) -> str:
    """Render ``table`` in the count layout."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([*table.names, COUNT_COLUMN])
    for key, count in table.cells():
        if count or include_zero:
            writer.writerow([*key, count])
    return buf.getvalue()


def write_table_csv(table: ContingencyTable, path: str | Path, include_zero: bool = True) -> None:
    Path(path).write_text(table_to_csv(table, include_zero), encoding="utf-8")
