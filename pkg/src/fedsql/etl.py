"""Warehouse pipeline: extract rows from the federation, reorder them into
a denormalized star layout through a staged temporary file, load them into
the warehouse, then materialize warehouse views into data marts.

Mappings and views come from a plain-text job file:

    target fact_events
    query SELECT e.event_id, r.year FROM events e, runs r WHERE e.run = r.run
    map event_id=0:integer
    map year=1:integer

    view recent_events
    query SELECT event_id, year FROM fact_events WHERE year > 2003

Stanzas are separated by blank lines; `#` starts a comment line. A stage
file holds the extracted rows in the table-fixture value syntax, one line
per row, with the schema implied by the target table.
"""

import os
import time
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

from .catalog import DataType
from .errors import (
    DuplicateName,
    FederationError,
    MalformedFixture,
    MalformedJob,
    MalformedStage,
    StageWriteFailed,
    TypeMismatch,
)
from .executor import Database, ResultTable, evaluate_sql
from .executor.fixtures import format_values_line, parse_values_line
from .sqlfront import parse_sql

# a query runner: sql text in, ResultTable out
QueryRunner = Callable[[str], ResultTable]

_TYPES = {t.value: t for t in DataType}

CSV_HEADER = "phase,rows,bytes,duration_ms"


@dataclass(frozen=True)
class StarMapping:
    """Denormalization recipe: run source_query, reorder its select items
    per column_map, append to target_table."""

    target_table: str
    source_query: str
    column_map: Tuple[Tuple[str, int, DataType], ...]  # (target column, index, type)

    def target_columns(self) -> List[Tuple[str, DataType]]:
        return [(name, data_type) for name, _, data_type in self.column_map]


@dataclass(frozen=True)
class ViewDef:
    name: str
    query: str


@dataclass(frozen=True)
class JobSpec:
    mappings: Tuple[StarMapping, ...]
    views: Tuple[ViewDef, ...]


@dataclass(frozen=True)
class StageFile:
    path: str
    row_count: int
    byte_size: int


@dataclass(frozen=True)
class PhaseTiming:
    phase: str  # "extract" or "load"
    rows: int
    bytes: int
    duration_ms: float


def _elapsed_ms(started: float) -> float:
    return (time.perf_counter() - started) * 1000.0


# --- job files ---------------------------------------------------------------


def _directive(lineno: int, line: str, keyword: str) -> str:
    parts = line.split(None, 1)
    if parts[0] != keyword or len(parts) < 2 or not parts[1].strip():
        raise MalformedJob("line %d: expected '%s <...>'" % (lineno, keyword))
    return parts[1].strip()


def _check_name(lineno: int, name: str, what: str) -> str:
    if not name or any(ch.isspace() for ch in name):
        raise MalformedJob("line %d: bad %s name %r" % (lineno, what, name))
    return name


def _parse_mapping(stanza: List[Tuple[int, str]]) -> StarMapping:
    if len(stanza) < 3:
        raise MalformedJob(
            "line %d: a mapping stanza needs target, query and map lines"
            % stanza[0][0]
        )
    target = _check_name(stanza[0][0], _directive(*stanza[0], "target"), "table")
    query = _directive(*stanza[1], "query")
    column_map = []
    seen = set()
    for lineno, line in stanza[2:]:
        body = _directive(lineno, line, "map")
        name, eq, rest = body.partition("=")
        index_text, colon, type_name = rest.partition(":")
        if not eq or not colon:
            raise MalformedJob(
                "line %d: expected 'map <column>=<index>:<type>'" % lineno
            )
        name = _check_name(lineno, name.strip(), "column")
        if name in seen:
            raise MalformedJob("line %d: duplicate target column %r" % (lineno, name))
        seen.add(name)
        try:
            index = int(index_text.strip())
        except ValueError:
            raise MalformedJob(
                "line %d: %r is not an index" % (lineno, index_text.strip())
            ) from None
        if index < 0:
            raise MalformedJob("line %d: negative select index" % lineno)
        data_type = _TYPES.get(type_name.strip())
        if data_type is None:
            raise MalformedJob(
                "line %d: unknown data type %r" % (lineno, type_name.strip())
            )
        column_map.append((name, index, data_type))
    mapping = StarMapping(target, query, tuple(column_map))
    _check_mapping(mapping)
    return mapping


def _check_mapping(mapping: StarMapping) -> None:
    try:
        ast = parse_sql(mapping.source_query)
    except FederationError as exc:
        raise MalformedJob(
            "mapping %r: bad query: %s" % (mapping.target_table, exc)
        ) from None
    if ast.select_star:
        return  # width is only known once the query has run
    width = len(ast.select_items)
    for name, index, _ in mapping.column_map:
        if index >= width:
            raise MalformedJob(
                "mapping %r: column %r uses select index %d but the query has %d items"
                % (mapping.target_table, name, index, width)
            )


def _parse_view(stanza: List[Tuple[int, str]]) -> ViewDef:
    if len(stanza) != 2:
        raise MalformedJob(
            "line %d: a view stanza is 'view <name>' plus 'query <sql>'"
            % stanza[0][0]
        )
    name = _check_name(stanza[0][0], _directive(*stanza[0], "view"), "view")
    query = _directive(*stanza[1], "query")
    try:
        parse_sql(query)
    except FederationError as exc:
        raise MalformedJob("view %r: bad query: %s" % (name, exc)) from None
    return ViewDef(name, query)


def parse_job(text: str) -> JobSpec:
    mappings: List[StarMapping] = []
    views: List[ViewDef] = []
    stanza: List[Tuple[int, str]] = []

    def flush() -> None:
        if not stanza:
            return
        head = stanza[0][1].split(None, 1)[0]
        if head == "target":
            mappings.append(_parse_mapping(stanza))
        elif head == "view":
            views.append(_parse_view(stanza))
        else:
            raise MalformedJob(
                "line %d: a stanza starts with 'target' or 'view', not %r"
                % (stanza[0][0], head)
            )
        stanza.clear()

    for lineno, line in enumerate(text.split("\n"), start=1):
        stripped = line.strip()
        if stripped == "":
            flush()
        elif stripped.startswith("#"):
            continue
        else:
            stanza.append((lineno, stripped))
    flush()
    if not mappings and not views:
        raise MalformedJob("job file defines no mappings or views")
    return JobSpec(tuple(mappings), tuple(views))


def read_job(path: str) -> JobSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_job(fh.read())
    except OSError as exc:
        raise MalformedJob("cannot read job file %s: %s" % (path, exc)) from None


# --- stage files -------------------------------------------------------------


def write_stage(path: str, rows, types: List[DataType]) -> StageFile:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for row in rows:
                fh.write(format_values_line(row, types))
                fh.write("\n")
        byte_size = os.path.getsize(path)
    except OSError as exc:
        raise StageWriteFailed("cannot write stage %s: %s" % (path, exc)) from None
    return StageFile(path, len(rows), byte_size)


def read_stage(path: str, types: List[DataType]) -> List[list]:
    """Parses the whole stage before returning: a bad line loads nothing."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().split("\n")
    except OSError as exc:
        raise MalformedStage("cannot read stage %s: %s" % (path, exc)) from None
    rows = []
    for lineno, line in enumerate(lines, start=1):
        if line == "":
            continue
        try:
            rows.append(parse_values_line(line, types, lineno))
        except MalformedFixture as exc:
            raise MalformedStage(str(exc)) from None
    return rows


# --- the pipeline ------------------------------------------------------------


def _extract_rows(run_query: QueryRunner, mapping: StarMapping) -> List[list]:
    result = run_query(mapping.source_query)
    width = len(result.columns)
    for name, index, declared in mapping.column_map:
        if index >= width:
            raise MalformedJob(
                "mapping %r: column %r uses select index %d but the query returned %d"
                % (mapping.target_table, name, index, width)
            )
        actual = result.columns[index].data_type
        if actual is not declared and not (
            declared is DataType.REAL and actual is DataType.INTEGER
        ):
            raise TypeMismatch(
                "mapping %r: column %r declared %s but the query returns %s"
                % (mapping.target_table, name, declared.value, actual.value)
            )
    return [[row[index] for _, index, _ in mapping.column_map] for row in result.rows]


def extract_transform(
    run_query: QueryRunner, mapping: StarMapping, stage_dir: str
) -> Tuple[StageFile, PhaseTiming]:
    started = time.perf_counter()
    rows = _extract_rows(run_query, mapping)
    types = [data_type for _, _, data_type in mapping.column_map]
    path = os.path.join(stage_dir, "%s.stage" % mapping.target_table)
    stage = write_stage(path, rows, types)
    timing = PhaseTiming("extract", stage.row_count, stage.byte_size, _elapsed_ms(started))
    return stage, timing


def load(stage: StageFile, database: Database, target_table: str) -> Tuple[int, PhaseTiming]:
    started = time.perf_counter()
    table = database.table(target_table)
    types = [data_type for _, data_type in table.columns]
    rows = read_stage(stage.path, types)
    count = database.append_rows(target_table, rows)
    return count, PhaseTiming("load", count, stage.byte_size, _elapsed_ms(started))


def ensure_table(database: Database, name: str, columns) -> None:
    """Creates `name` if absent, otherwise insists the schema matches."""
    if name not in database.tables:
        database.create_table(name, list(columns))
        return
    if list(database.table(name).columns) != list(columns):
        raise TypeMismatch("table %r exists with a different schema" % name)


def run_mapping(
    run_query: QueryRunner,
    mapping: StarMapping,
    warehouse: Database,
    stage_dir: Optional[str] = None,
    direct: bool = False,
) -> Tuple[Optional[StageFile], List[PhaseTiming]]:
    """One extract+load cycle for a star mapping.

    `direct` skips the temporary file and hands rows over in memory; both
    paths must leave the warehouse in the same state.
    """
    ensure_table(warehouse, mapping.target_table, mapping.target_columns())
    if direct:
        started = time.perf_counter()
        rows = _extract_rows(run_query, mapping)
        extract = PhaseTiming("extract", len(rows), 0, _elapsed_ms(started))
        started = time.perf_counter()
        count = warehouse.append_rows(mapping.target_table, rows)
        return None, [extract, PhaseTiming("load", count, 0, _elapsed_ms(started))]
    if stage_dir is None:
        raise StageWriteFailed("staged run needs a stage directory")
    stage, extract = extract_transform(run_query, mapping, stage_dir)
    _, load_timing = load(stage, warehouse, mapping.target_table)
    return stage, [extract, load_timing]


def _mart_columns(result: ResultTable) -> List[Tuple[str, DataType]]:
    columns = []
    for column in result.columns:
        name = column.name.rsplit(".", 1)[-1]
        columns.append((name, column.data_type))
    if len({name for name, _ in columns}) != len(columns):
        raise DuplicateName("view result has duplicate column names")
    return columns


def materialize_view(
    run_query: QueryRunner,
    view: ViewDef,
    mart: Database,
    stage_dir: Optional[str] = None,
    direct: bool = False,
) -> Tuple[Optional[StageFile], List[PhaseTiming]]:
    """Evaluates the view over the warehouse and copies the rows into the
    mart through the same extract/stage/load path as a star mapping."""
    started = time.perf_counter()
    result = run_query(view.query)
    columns = _mart_columns(result)
    ensure_table(mart, view.name, columns)
    types = [data_type for _, data_type in columns]
    if direct:
        extract = PhaseTiming("extract", len(result.rows), 0, _elapsed_ms(started))
        started = time.perf_counter()
        count = mart.append_rows(view.name, [list(row) for row in result.rows])
        return None, [extract, PhaseTiming("load", count, 0, _elapsed_ms(started))]
    if stage_dir is None:
        raise StageWriteFailed("staged run needs a stage directory")
    path = os.path.join(stage_dir, "%s.stage" % view.name)
    stage = write_stage(path, result.rows, types)
    extract = PhaseTiming("extract", stage.row_count, stage.byte_size, _elapsed_ms(started))
    _, load_timing = load(stage, mart, view.name)
    return stage, [extract, load_timing]


def run_job(
    run_query: QueryRunner,
    job: JobSpec,
    warehouse: Database,
    mart: Database,
    stage_dir: Optional[str] = None,
    direct: bool = False,
) -> List[PhaseTiming]:
    """Full pipeline: every mapping into the warehouse, then every view
    into the mart. View queries run against the freshly loaded warehouse."""
    timings: List[PhaseTiming] = []
    for mapping in job.mappings:
        _, phase_timings = run_mapping(run_query, mapping, warehouse, stage_dir, direct)
        timings.extend(phase_timings)

    def run_on_warehouse(sql: str) -> ResultTable:
        return evaluate_sql(warehouse, sql)

    for view in job.views:
        _, phase_timings = materialize_view(
            run_on_warehouse, view, mart, stage_dir, direct
        )
        timings.extend(phase_timings)
    return timings


def timings_csv(timings: List[PhaseTiming]) -> str:
    lines = [CSV_HEADER]
    for timing in timings:
        lines.append(
            "%s,%d,%d,%.3f"
            % (timing.phase, timing.rows, timing.bytes, timing.duration_ms)
        )
    return "\n".join(lines) + "\n"
