"""Reference backend: an in-memory database behind the adapter contract.

Evaluation is deliberately simple: tables are combined one at a time with a
nested loop, applying each predicate as soon as every column it mentions is
in scope (with an equality index when a join key is available). This keeps
the backend independent from the distributed merge machinery, which makes it
a useful cross-check as well as the default local store.
"""

import os
from typing import List, Optional, Sequence, Tuple

from ..catalog import (
    ColumnSpec,
    DataType,
    LowerSpec,
    TableDescription,
    TableSpec,
    UpperSpec,
    UpperSpecEntry,
    build_dictionary,
)
from ..errors import (
    BackendUnavailable,
    DuplicateName,
    TypeMismatch,
    UnknownTable,
)
from ..sqlfront import (
    BoundColumn,
    BoundQuery,
    Literal,
    QueryAst,
    parse_sql,
    resolve_names,
)
from .adapters import BackendAdapter
from .fixtures import FixtureTable, read_fixture
from .table import Column, ResultTable, cell_matches_type, compare_cells, finalize_rows


class Database:
    """Mutable set of named in-memory tables."""

    def __init__(self, name: str = "db", tables: Sequence[FixtureTable] = ()):
        self.name = name
        self.tables: dict = {}
        for table in tables:
            if table.name in self.tables:
                raise DuplicateName("table %r already exists" % table.name)
            self.tables[table.name] = table

    def table(self, name: str) -> FixtureTable:
        try:
            return self.tables[name]
        except KeyError:
            raise UnknownTable("no such table %r" % name) from None

    def create_table(self, name: str, columns: List[Tuple[str, DataType]]) -> FixtureTable:
        if name in self.tables:
            raise DuplicateName("table %r already exists" % name)
        if not columns:
            raise ValueError("a table needs at least one column")
        table = FixtureTable(name, list(columns), [])
        self.tables[name] = table
        return table

    def drop_table(self, name: str) -> None:
        self.table(name)
        del self.tables[name]

    def rename_table(self, old: str, new: str) -> None:
        table = self.table(old)
        if new in self.tables:
            raise DuplicateName("table %r already exists" % new)
        # rebuild preserves table order for deterministic introspection
        table.name = new
        self.tables = {t.name: t for t in self.tables.values()}

    def rename_column(self, table_name: str, old: str, new: str) -> None:
        table = self.table(table_name)
        names = [name for name, _ in table.columns]
        if old not in names:
            raise UnknownTable("table %r has no column %r" % (table_name, old))
        if new in names:
            raise DuplicateName("column %r already exists" % new)
        table.columns = [
            (new if name == old else name, data_type) for name, data_type in table.columns
        ]

    def add_column(
        self, table_name: str, name: str, data_type: DataType, fill=None
    ) -> None:
        table = self.table(table_name)
        if name in [n for n, _ in table.columns]:
            raise DuplicateName("column %r already exists" % name)
        table.columns.append((name, data_type))
        for row in table.rows:
            row.append(fill)

    def append_rows(self, table_name: str, rows: Sequence[list]) -> int:
        table = self.table(table_name)
        checked = []
        for row in rows:
            if len(row) != len(table.columns):
                raise TypeMismatch(
                    "row of %d cells appended to %d-column table %r"
                    % (len(row), len(table.columns), table_name)
                )
            for cell, (col_name, data_type) in zip(row, table.columns):
                if cell is not None and not cell_matches_type(cell, data_type):
                    raise TypeMismatch(
                        "cell %r is not a %s (column %r of %r)"
                        % (cell, data_type.value, col_name, table_name)
                    )
            checked.append(list(row))
        table.rows.extend(checked)
        return len(checked)

    def row_count(self, table_name: str) -> int:
        return len(self.table(table_name).rows)

    def describe(self) -> List[TableDescription]:
        return [
            TableDescription(
                table.name,
                tuple((name, data_type, True) for name, data_type in table.columns),
            )
            for table in self.tables.values()
        ]

    def to_lower_spec(self) -> LowerSpec:
        tables = tuple(
            TableSpec(
                table.name,
                table.name,
                tuple(
                    ColumnSpec(name, name, data_type, True)
                    for name, data_type in table.columns
                ),
            )
            for table in self.tables.values()
        )
        return LowerSpec(self.name, tables)


def load_database(path: str) -> Database:
    name = os.path.splitext(os.path.basename(path))[0]
    return Database(name, read_fixture(path))


def load_reference_backend(path: str) -> "ReferenceBackend":
    """Backend pre-bound to the fixture file's contents."""
    return ReferenceBackend(load_database(path))


# --- local evaluation ---------------------------------------------------------------

def evaluate_sql(database: Database, sql_text: str) -> ResultTable:
    return evaluate_ast(database, parse_sql(sql_text))


def evaluate_ast(database: Database, ast: QueryAst) -> ResultTable:
    lower = database.to_lower_spec()
    upper = UpperSpec(
        (UpperSpecEntry("local", "memory:" + database.name, "reference", "-"),)
    )
    bound = resolve_names(ast, build_dictionary(upper, {"local": lower}))
    for tab in bound.tables:
        if not tab.is_local:
            raise UnknownTable("no such table %r" % tab.ref.table)
    return evaluate_bound(database, bound)


def _predicate_columns(pred) -> List[BoundColumn]:
    columns = [pred.left]
    if isinstance(pred.right, BoundColumn):
        columns.append(pred.right)
    return columns


def evaluate_bound(database: Database, bound: BoundQuery) -> ResultTable:
    """Nested-loop evaluation with greedy predicate application."""
    tabs = list(bound.tables)
    stores = [database.table(t.binding.physical_table) for t in tabs]

    positions: dict = {}  # (table key, column) -> index into the combined row
    acc: List[tuple] = [()]
    remaining = list(bound.predicates)

    for tab, store in zip(tabs, stores):
        width = len(positions)
        new_local = {
            (tab.key, name): j for j, (name, _) in enumerate(store.columns)
        }

        ready = []
        later = []
        for pred in remaining:
            in_scope = all(
                (c.table_key, c.physical) in positions
                or (c.table_key, c.physical) in new_local
                for c in _predicate_columns(pred)
            )
            (ready if in_scope else later).append(pred)
        remaining = later

        new_only = []
        join_eq = []
        cross_rest = []
        for pred in ready:
            cols = _predicate_columns(pred)
            if all((c.table_key, c.physical) in new_local for c in cols):
                new_only.append(pred)
            elif (
                pred.op == "="
                and len(cols) == 2
                and sum((c.table_key, c.physical) in new_local for c in cols) == 1
            ):
                join_eq.append(pred)
            else:
                cross_rest.append(pred)

        def value_of(side, acc_row, new_row):
            if isinstance(side, Literal):
                return side.value
            key = (side.table_key, side.physical)
            if key in new_local:
                return new_row[new_local[key]]
            return acc_row[positions[key]]

        def holds(pred, acc_row, new_row):
            return compare_cells(
                value_of(pred.left, acc_row, new_row),
                pred.op,
                value_of(pred.right, acc_row, new_row),
            )

        rows_new = store.rows
        if new_only:
            rows_new = [
                row for row in rows_new if all(holds(p, (), row) for p in new_only)
            ]

        combined: List[tuple] = []
        if join_eq and acc:
            sides = []
            for pred in join_eq:
                left, right = pred.left, pred.right
                if (left.table_key, left.physical) in new_local:
                    left, right = right, left
                sides.append((left, right))  # (accumulated side, new side)
            index: dict = {}
            for row in rows_new:
                key = tuple(
                    row[new_local[(c.table_key, c.physical)]] for _, c in sides
                )
                if any(cell is None for cell in key):
                    continue  # null keys never join
                index.setdefault(key, []).append(row)
            for acc_row in acc:
                probe = tuple(
                    acc_row[positions[(c.table_key, c.physical)]] for c, _ in sides
                )
                if any(cell is None for cell in probe):
                    continue
                for row in index.get(probe, ()):
                    if all(holds(p, acc_row, row) for p in cross_rest):
                        combined.append(acc_row + tuple(row))
        else:
            for acc_row in acc:
                for row in rows_new:
                    if all(holds(p, acc_row, row) for p in cross_rest):
                        combined.append(acc_row + tuple(row))
        acc = combined
        for key, j in new_local.items():
            positions[key] = width + j

    if bound.select_star:
        out_columns: List[Column] = []
        out_indices: List[int] = []
        for tab, store in zip(tabs, stores):
            for name, data_type in store.columns:
                out_columns.append(Column(name, data_type))
                out_indices.append(positions[(tab.key, name)])
    else:
        out_columns = [
            Column(item.column, item.data_type) for item in bound.select_items
        ]
        out_indices = [
            positions[(item.table_key, item.physical)] for item in bound.select_items
        ]

    projected = [[row[i] for i in out_indices] for row in acc]
    order_values = None
    descending: List[bool] = []
    if bound.order_by:
        order_idx = [
            positions[(col.table_key, col.physical)] for col, _ in bound.order_by
        ]
        descending = [desc for _, desc in bound.order_by]
        order_values = [tuple(row[i] for i in order_idx) for row in acc]
    rows = finalize_rows(projected, order_values, descending, bound.limit)
    return ResultTable(out_columns, rows)


# --- the adapter ---------------------------------------------------------------------

class ReferenceBackend(BackendAdapter):
    """Adapter over in-memory databases.

    Constructed around a live Database, every open() shares it; constructed
    bare, open(url) treats the url as a fixture file path and loads a private
    copy.
    """

    def __init__(self, database: Optional[Database] = None):
        super().__init__()
        self._database = database

    def database_for(self, handle: int) -> Database:
        """The live store behind a handle, for callers that need to write."""
        return self._state(handle)

    def _connect(self, url: str, username: str, password: str) -> Database:
        if self._database is not None:
            return self._database
        if not os.path.isfile(url):
            raise BackendUnavailable(url, "fixture file %s does not exist" % url)
        return load_database(url)

    def _execute(
        self,
        database: Database,
        select_fields: List[str],
        table_names: List[str],
        where_clause: str,
    ) -> ResultTable:
        fields = ", ".join(select_fields) if select_fields else "*"
        sql = "SELECT %s FROM %s" % (fields, ", ".join(table_names))
        if where_clause:
            sql += " WHERE %s" % where_clause
        return evaluate_sql(database, sql)

    def _describe(self, database: Database) -> List[TableDescription]:
        return database.describe()
