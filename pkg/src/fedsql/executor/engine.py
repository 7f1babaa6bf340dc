"""Plan execution: dispatch sub-queries (concurrently per target), then
merge the partial results with hash equi-joins, residual filters and a
final projection into one ordered ResultTable.

All-or-nothing: a failure at any target aborts the whole query. Every
materialized table is held against a configurable cap, counted in cells.
"""

import threading
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from ..errors import (
    BackendUnavailable,
    DecodeError,
    ResultTooLarge,
    TypeMismatch,
    UnknownColumn,
)
from ..planner import (
    ProjectColumn,
    QueryPlan,
    SubQuery,
    Target,
    qualified_name,
    render_subquery,
)
from ..sqlfront import Literal
from .adapters import BackendAdapter
from .table import (
    Column,
    ResultTable,
    compare_cells,
    finalize_rows,
    types_comparable,
)

DEFAULT_ROW_CAP = 1_000_000  # counted in cells


@dataclass
class LocalRoute:
    """An open backend connection serving one local source."""

    adapter: BackendAdapter
    handle: int


def hash_equi_join(
    left: ResultTable, right: ResultTable, keys: Sequence[Tuple[int, int]]
) -> ResultTable:
    """Inner equi-join; output columns are left's followed by right's.

    Rows whose key contains a null never match anything.
    """
    for li, ri in keys:
        left_type = left.columns[li].data_type
        right_type = right.columns[ri].data_type
        if not types_comparable(left_type, right_type):
            raise TypeMismatch(
                "cannot join %s column %r with %s column %r"
                % (
                    left_type.value,
                    left.columns[li].name,
                    right_type.value,
                    right.columns[ri].name,
                )
            )
    index: dict = {}
    for row in right.rows:
        key = tuple(row[ri] for _, ri in keys)
        if any(cell is None for cell in key):
            continue
        index.setdefault(key, []).append(row)
    out_rows = []
    for row in left.rows:
        probe = tuple(row[li] for li, _ in keys)
        if any(cell is None for cell in probe):
            continue
        for match in index.get(probe, ()):
            out_rows.append(list(row) + list(match))
    return ResultTable(list(left.columns) + list(right.columns), out_rows)


def apply_residual(table: ResultTable, predicates) -> ResultTable:
    """Keep the rows satisfying every predicate; comparisons on null are
    false. Predicate columns are located by their qualified names."""
    if not predicates:
        return table
    compiled = []
    for pred in predicates:
        left_index = table.index_of(qualified_name(pred.left))
        if isinstance(pred.right, Literal):
            compiled.append((left_index, pred.op, None, pred.right.value))
        else:
            compiled.append(
                (left_index, pred.op, table.index_of(qualified_name(pred.right)), None)
            )
    rows = []
    for row in table.rows:
        keep = True
        for left_index, op, right_index, literal in compiled:
            right_value = literal if right_index is None else row[right_index]
            if not compare_cells(row[left_index], op, right_value):
                keep = False
                break
        if keep:
            rows.append(row)
    return ResultTable(list(table.columns), rows)


def project(table: ResultTable, columns: Sequence[str]) -> ResultTable:
    try:
        indices = [table.index_of(name) for name in columns]
    except KeyError as exc:
        raise UnknownColumn("no column named %s" % exc) from None
    out_columns = [table.columns[i] for i in indices]
    rows = [[row[i] for i in indices] for row in table.rows]
    return ResultTable(out_columns, rows)


def _check_cap(table: ResultTable, row_cap: int, what: str) -> None:
    if table.cell_count > row_cap:
        raise ResultTooLarge(
            "%s holds %d cells, over the %d-cell cap" % (what, table.cell_count, row_cap)
        )


def _qualify(sq: SubQuery, result: ResultTable) -> ResultTable:
    """Rename a sub-result's columns into the merge namespace (key.column)."""
    if sq.output_schema is None:
        key = sq.table_keys[0]
        columns = [
            Column("%s.%s" % (key, col.name), col.data_type) for col in result.columns
        ]
    else:
        if len(result.columns) != len(sq.output_schema):
            raise DecodeError(
                "target %s returned %d columns where %d were requested"
                % (sq.target.describe(), len(result.columns), len(sq.output_schema))
            )
        columns = [
            Column(name, col.data_type)
            for (name, _), col in zip(sq.output_schema, result.columns)
        ]
    return ResultTable(columns, result.rows)


def _run_subquery(
    sq: SubQuery, routes: Dict[str, LocalRoute], remote_client, row_cap: int
) -> ResultTable:
    if sq.target.is_local:
        route = routes.get(sq.target.ident)
        if route is None:
            raise BackendUnavailable(
                sq.target.ident, "no adapter serves source %r" % sq.target.ident
            )
        raw = route.adapter.execute(
            route.handle, list(sq.select_fields), list(sq.tables), sq.where_clause
        )
    else:
        if remote_client is None:
            raise BackendUnavailable(
                sq.target.ident, "no remote client configured for %s" % sq.target.ident
            )
        raw = remote_client.query(sq.target.ident, render_subquery(sq), no_forward=True)
    result = _qualify(sq, raw)
    _check_cap(result, row_cap, "sub-query result from %s" % sq.target.describe())
    return result


def execute_plan(
    plan: QueryPlan,
    routes: Dict[str, LocalRoute],
    remote_client=None,
    row_cap: int = DEFAULT_ROW_CAP,
    concurrent: bool = True,
) -> ResultTable:
    subqueries = plan.subqueries
    results: List[Optional[ResultTable]] = [None] * len(subqueries)

    by_target: Dict[Target, List[int]] = {}
    for i, sq in enumerate(subqueries):
        by_target.setdefault(sq.target, []).append(i)

    def run_group(indices: List[int]) -> None:
        # one handle per target, so a target's sub-queries run sequentially
        for i in indices:
            results[i] = _run_subquery(subqueries[i], routes, remote_client, row_cap)

    groups = list(by_target.values())
    if concurrent and len(groups) > 1:
        failures: List[Tuple[int, BaseException]] = []
        failures_lock = threading.Lock()

        def worker(indices: List[int]) -> None:
            try:
                run_group(indices)
            except BaseException as exc:
                with failures_lock:
                    failures.append((indices[0], exc))

        threads = [
            threading.Thread(target=worker, args=(g,), daemon=True) for g in groups
        ]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
        if failures:
            failures.sort(key=lambda item: item[0])
            raise failures[0][1]
    else:
        for group in groups:
            run_group(group)

    acc = results[0]
    for step in plan.merge.join_steps:
        right = results[step.right]
        pairs = [
            (acc.index_of(left_name), right.index_of(right_name))
            for left_name, right_name in step.key_pairs
        ]
        acc = hash_equi_join(acc, right, pairs)
        _check_cap(acc, row_cap, "join intermediate")
    acc = apply_residual(acc, plan.merge.residual_predicates)

    out_indices: List[int] = []
    out_columns: List[Column] = []
    for item in plan.merge.projection:
        if isinstance(item, ProjectColumn):
            i = acc.index_of(item.qualified)
            out_indices.append(i)
            out_columns.append(Column(item.display, acc.columns[i].data_type))
        else:
            prefix = item.table_key + "."
            for i, col in enumerate(acc.columns):
                if col.name.startswith(prefix):
                    out_indices.append(i)
                    out_columns.append(Column(col.name[len(prefix):], col.data_type))

    projected_rows = [[row[i] for i in out_indices] for row in acc.rows]
    order_values = None
    descending: List[bool] = []
    if plan.order_by:
        order_idx = [acc.index_of(name) for name, _ in plan.order_by]
        descending = [desc for _, desc in plan.order_by]
        order_values = [tuple(row[i] for i in order_idx) for row in acc.rows]
    rows = finalize_rows(projected_rows, order_values, descending, plan.limit)
    result = ResultTable(out_columns, rows)
    _check_cap(result, row_cap, "final result")
    return result
