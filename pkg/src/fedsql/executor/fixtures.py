"""Table-fixture file format.

A fixture file holds one or more tables, separated by blank lines. Each
table section is:

    #table <name>
    <comma-separated column names>
    <comma-separated data types>
    <one line per row>

Empty fields are nulls, text fields are double-quoted with doubled-quote
escaping, timestamps are ISO-8601. Files are UTF-8 with LF line endings.
"""

from dataclasses import dataclass, field
from datetime import datetime
from typing import List, Optional, Tuple

from ..catalog import DataType
from ..errors import MalformedFixture

_VALID_TYPES = {t.value: t for t in DataType}


@dataclass
class FixtureTable:
    name: str
    columns: List[Tuple[str, DataType]]
    rows: List[list] = field(default_factory=list)


def _format_cell(value, data_type: DataType) -> str:
    if value is None:
        return ""
    if data_type is DataType.TEXT:
        if "\n" in value or "\r" in value:
            raise MalformedFixture("text cell contains a line break")
        return '"%s"' % value.replace('"', '""')
    if data_type is DataType.TIMESTAMP:
        return value.isoformat()
    if data_type is DataType.REAL and isinstance(value, int):
        return repr(float(value))
    return repr(value)


def _split_fields(line: str, lineno: int) -> List[str]:
    # comma split that honours double-quoted fields
    fields: List[str] = []
    buf: List[str] = []
    i = 0
    in_quotes = False
    while i < len(line):
        ch = line[i]
        if in_quotes:
            if ch == '"':
                if i + 1 < len(line) and line[i + 1] == '"':
                    buf.append('"')
                    i += 2
                    continue
                in_quotes = False
                i += 1
                continue
            buf.append(ch)
            i += 1
        elif ch == '"':
            in_quotes = True
            buf.append('\x00')  # marks the field as quoted
            i += 1
        elif ch == ",":
            fields.append("".join(buf))
            buf = []
            i += 1
        else:
            buf.append(ch)
            i += 1
    if in_quotes:
        raise MalformedFixture("line %d: unterminated quote" % lineno)
    fields.append("".join(buf))
    return fields


def _parse_cell(raw: str, data_type: DataType, lineno: int):
    quoted = raw.startswith("\x00")
    text = raw[1:] if quoted else raw
    if not quoted and text == "":
        return None
    try:
        if data_type is DataType.INTEGER:
            return int(text)
        if data_type is DataType.REAL:
            return float(text)
        if data_type is DataType.TIMESTAMP:
            return datetime.fromisoformat(text)
        return text
    except ValueError:
        raise MalformedFixture(
            "line %d: %r is not a valid %s" % (lineno, text, data_type.value)
        ) from None


def parse_fixture(data: str) -> List[FixtureTable]:
    lines = data.split("\n")
    tables: List[FixtureTable] = []
    seen = set()
    section: List[Tuple[int, str]] = []

    def flush() -> None:
        if not section:
            return
        tables.append(_parse_section(section))
        section.clear()

    for lineno, line in enumerate(lines, start=1):
        if line.strip() == "":
            flush()
        else:
            section.append((lineno, line))
    flush()
    if not tables:
        raise MalformedFixture("fixture contains no tables")
    for table in tables:
        if table.name in seen:
            raise MalformedFixture("duplicate table %r in fixture" % table.name)
        seen.add(table.name)
    return tables


def _parse_section(section: List[Tuple[int, str]]) -> FixtureTable:
    if len(section) < 3:
        raise MalformedFixture(
            "line %d: table section needs a header, names and types" % section[0][0]
        )
    (head_no, head), (names_no, names_line), (types_no, types_line) = section[:3]
    if not head.startswith("#table "):
        raise MalformedFixture("line %d: expected '#table <name>'" % head_no)
    name = head[len("#table ") :].strip()
    if not name or any(ch.isspace() for ch in name):
        raise MalformedFixture("line %d: bad table name %r" % (head_no, name))
    names = [n.strip() for n in names_line.split(",")]
    if any(not n or any(ch.isspace() for ch in n) for n in names):
        raise MalformedFixture("line %d: bad column name" % names_no)
    if len(set(names)) != len(names):
        raise MalformedFixture("line %d: duplicate column name" % names_no)
    type_names = [t.strip() for t in types_line.split(",")]
    if len(type_names) != len(names):
        raise MalformedFixture(
            "line %d: %d types for %d columns" % (types_no, len(type_names), len(names))
        )
    try:
        types = [_VALID_TYPES[t] for t in type_names]
    except KeyError as exc:
        raise MalformedFixture(
            "line %d: unknown data type %s" % (types_no, exc)
        ) from None
    columns = list(zip(names, types))
    rows: List[list] = []
    for lineno, line in section[3:]:
        fields = _split_fields(line, lineno)
        if len(fields) != len(columns):
            raise MalformedFixture(
                "line %d: %d fields for %d columns" % (lineno, len(fields), len(columns))
            )
        rows.append(
            [
                _parse_cell(raw, data_type, lineno)
                for raw, (_, data_type) in zip(fields, columns)
            ]
        )
    return FixtureTable(name, columns, rows)


def format_values_line(cells, types: List[DataType]) -> str:
    """One data line in the fixture value syntax, no trailing newline."""
    line = ",".join(
        _format_cell(cell, data_type) for cell, data_type in zip(cells, types)
    )
    if line == "":
        # a lone null formats to an empty line, which reads as a separator
        raise MalformedFixture("null in a one-column row has no representation")
    return line


def parse_values_line(line: str, types: List[DataType], lineno: int = 0) -> list:
    fields = _split_fields(line, lineno)
    if len(fields) != len(types):
        raise MalformedFixture(
            "line %d: %d fields for %d columns" % (lineno, len(fields), len(types))
        )
    return [
        _parse_cell(raw, data_type, lineno) for raw, data_type in zip(fields, types)
    ]


def format_fixture(tables: List[FixtureTable]) -> str:
    sections = []
    for table in tables:
        lines = [
            "#table %s" % table.name,
            ",".join(name for name, _ in table.columns),
            ",".join(data_type.value for _, data_type in table.columns),
        ]
        types = [data_type for _, data_type in table.columns]
        for row in table.rows:
            lines.append(format_values_line(row, types))
        sections.append("\n".join(lines))
    return "\n\n".join(sections) + "\n"


def read_fixture(path: str) -> List[FixtureTable]:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_fixture(fh.read())
    except OSError as exc:
        raise MalformedFixture("cannot read fixture %s: %s" % (path, exc)) from None


def write_fixture(path: str, tables: List[FixtureTable]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_fixture(tables))
