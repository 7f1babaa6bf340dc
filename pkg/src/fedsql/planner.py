"""Query planner: split a bound query into per-target sub-queries plus a
merge plan of equi-join steps, residual filters and a final projection.

Placement rule: a predicate whose columns all live in one sub-query is
pushed into its WHERE; a cross-target equality between two columns becomes
a join step; every other cross-target predicate is a residual filter
applied after the joins. Join order is left-deep over the canonically
ordered targets, no cost model.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .catalog import DataType
from .errors import CrossProductRejected, UnknownTable
from .sqlfront import BoundColumn, BoundPredicate, BoundQuery, BoundTable, Literal


@dataclass(frozen=True, order=True)
class Target:
    kind: str  # "local" or "remote"
    ident: str  # source id for local targets, server url for remote ones

    @property
    def is_local(self) -> bool:
        return self.kind == "local"

    def describe(self) -> str:
        return "%s:%s" % (self.kind, self.ident)


@dataclass(frozen=True)
class SubQuery:
    target: Target
    table_keys: Tuple[str, ...]
    select_fields: Tuple[str, ...]  # ("*",) when positions come from the response
    tables: Tuple[str, ...]
    where_clause: str
    # (qualified name, type) per select field; None when select is "*"
    output_schema: Optional[Tuple[Tuple[str, Optional[DataType]], ...]]


@dataclass(frozen=True)
class JoinStep:
    """Join the accumulated result with subqueries[right] on equi-key pairs."""

    right: int
    key_pairs: Tuple[Tuple[str, str], ...]  # (accumulated column, incoming column)


@dataclass(frozen=True)
class ProjectColumn:
    qualified: str
    display: str


@dataclass(frozen=True)
class ProjectTable:
    """Every column the sub-query for this table returned, in response order."""

    table_key: str


@dataclass(frozen=True)
class MergePlan:
    join_steps: Tuple[JoinStep, ...]
    residual_predicates: Tuple[BoundPredicate, ...]
    projection: Tuple[Union[ProjectColumn, ProjectTable], ...]


@dataclass(frozen=True)
class QueryPlan:
    subqueries: Tuple[SubQuery, ...]
    merge: MergePlan
    order_by: Tuple[Tuple[str, bool], ...]  # (qualified column, descending)
    limit: Optional[int]


def qualified_name(column: BoundColumn) -> str:
    return "%s.%s" % (column.table_key, column.column)


def partition_tables(
    bound: BoundQuery, lookup: Callable[[str], Sequence[str]]
) -> Dict[Target, Tuple[BoundTable, ...]]:
    """Group the query's tables by the target that will scan them.

    ``lookup`` maps a logical table name to the urls of the servers
    publishing it; the lexicographically smallest url is the replica used.
    """
    groups: Dict[Target, list] = {}
    for tab in bound.tables:
        if tab.is_local:
            target = Target("local", tab.binding.source_id)
        else:
            servers = list(lookup(tab.binding.logical_name))
            if not servers:
                raise UnknownTable(
                    "table %r is neither local nor published by any server"
                    % tab.binding.logical_name
                )
            target = Target("remote", min(servers))
        groups.setdefault(target, []).append(tab)
    return {target: tuple(tabs) for target, tabs in groups.items()}


def _render_side(side, use_physical: bool) -> str:
    if isinstance(side, Literal):
        return side.render()
    name = side.physical if use_physical else side.column
    return "%s.%s" % (side.table_key, name)


def _render_predicate(pred: BoundPredicate, use_physical: bool) -> str:
    return "%s %s %s" % (
        _render_side(pred.left, use_physical),
        pred.op,
        _render_side(pred.right, use_physical),
    )


def _predicate_columns(pred: BoundPredicate) -> List[BoundColumn]:
    columns = [pred.left]
    if isinstance(pred.right, BoundColumn):
        columns.append(pred.right)
    return columns


def plan(
    bound: BoundQuery, partition: Dict[Target, Tuple[BoundTable, ...]]
) -> QueryPlan:
    from_order = {tab.key: i for i, tab in enumerate(bound.tables)}

    # Planning units: one per target group, except that remote groups of a
    # SELECT * query are split per table (the originator cannot know where
    # one remote table's columns would end and the next one's begin).
    units: List[Tuple[Target, Tuple[BoundTable, ...]]] = []
    for target, tabs in partition.items():
        if bound.select_star and not target.is_local:
            units.extend((target, (tab,)) for tab in tabs)
        else:
            units.append((target, tabs))
    units.sort(key=lambda unit: (unit[0], from_order[unit[1][0].key]))
    star_split = [
        bound.select_star and not target.is_local for target, _ in units
    ]
    key_to_unit = {
        tab.key: i for i, (_, tabs) in enumerate(units) for tab in tabs
    }

    # predicate placement
    pushed: List[List[BoundPredicate]] = [[] for _ in units]
    edges: List[Tuple[int, int, BoundPredicate]] = []
    residuals: List[BoundPredicate] = []
    for pred in bound.predicates:
        owners = {key_to_unit[c.table_key] for c in _predicate_columns(pred)}
        if len(owners) == 1:
            pushed[owners.pop()].append(pred)
        elif pred.op == "=" and isinstance(pred.right, BoundColumn):
            a, b = sorted(owners)
            edges.append((a, b, pred))
        else:
            residuals.append(pred)

    # columns each sub-query must return: its part of the projection, plus
    # whatever the merge needs (order keys, join keys, residual columns)
    needed: List[List[BoundColumn]] = [[] for _ in units]
    seen: List[set] = [set() for _ in units]

    def want(column: BoundColumn) -> None:
        i = key_to_unit[column.table_key]
        if star_split[i]:
            return  # SELECT * already returns every column
        mark = (column.table_key, column.column)
        if mark not in seen[i]:
            seen[i].add(mark)
            needed[i].append(column)

    if bound.select_star:
        for tab in bound.tables:
            for column in tab.local_columns:
                want(column)
    else:
        for item in bound.select_items:
            want(item)
    for column, _ in bound.order_by:
        want(column)
    for _, _, pred in edges:
        for column in _predicate_columns(pred):
            want(column)
    for pred in residuals:
        for column in _predicate_columns(pred):
            want(column)

    subqueries: List[SubQuery] = []
    for i, (target, tabs) in enumerate(units):
        table_entries = []
        for tab in tabs:
            name = (
                tab.binding.physical_table if tab.is_local
                else tab.binding.logical_name
            )
            table_entries.append(name if name == tab.key else "%s %s" % (name, tab.key))
        if star_split[i]:
            select_fields: Tuple[str, ...] = ("*",)
            schema = None
        else:
            select_fields = tuple(
                _render_side(column, target.is_local) for column in needed[i]
            )
            schema = tuple(
                (qualified_name(column), column.data_type) for column in needed[i]
            )
        where = " AND ".join(
            _render_predicate(pred, target.is_local) for pred in pushed[i]
        )
        subqueries.append(
            SubQuery(
                target=target,
                table_keys=tuple(tab.key for tab in tabs),
                select_fields=select_fields,
                tables=tuple(table_entries),
                where_clause=where,
                output_schema=schema,
            )
        )

    # left-deep join order: start at the first unit, repeatedly take the
    # lowest-numbered unit an equi-edge connects to what is merged already
    steps: List[JoinStep] = []
    merged = {0}
    unmerged = set(range(1, len(units)))
    open_edges = list(edges)
    while unmerged:
        candidates = set()
        for a, b, _ in open_edges:
            if a in merged and b in unmerged:
                candidates.add(b)
            elif b in merged and a in unmerged:
                candidates.add(a)
        if not candidates:
            raise CrossProductRejected(
                "no equi-join connects %s to the rest of the query"
                % ", ".join(sorted(units[i][0].describe() for i in unmerged))
            )
        nxt = min(candidates)
        pairs: List[Tuple[str, str]] = []
        keep = []
        for edge in open_edges:
            a, b, pred = edge
            if (a in merged and b == nxt) or (b in merged and a == nxt):
                left, right = pred.left, pred.right
                if key_to_unit[left.table_key] == nxt:
                    left, right = right, left
                pairs.append((qualified_name(left), qualified_name(right)))
            else:
                keep.append(edge)
        open_edges = keep
        steps.append(JoinStep(nxt, tuple(pairs)))
        merged.add(nxt)
        unmerged.discard(nxt)

    projection: List[Union[ProjectColumn, ProjectTable]] = []
    if bound.select_star:
        for tab in bound.tables:
            if star_split[key_to_unit[tab.key]]:
                projection.append(ProjectTable(tab.key))
            else:
                projection.extend(
                    ProjectColumn(qualified_name(column), column.column)
                    for column in tab.local_columns
                )
    else:
        projection.extend(
            ProjectColumn(qualified_name(item), item.column)
            for item in bound.select_items
        )

    merge = MergePlan(tuple(steps), tuple(residuals), tuple(projection))
    order_by = tuple(
        (qualified_name(column), descending) for column, descending in bound.order_by
    )
    return QueryPlan(tuple(subqueries), merge, order_by, bound.limit)


def render_subquery(sq: SubQuery) -> str:
    text = "SELECT %s FROM %s" % (
        ", ".join(sq.select_fields),
        ", ".join(sq.tables),
    )
    if sq.where_clause:
        text += " WHERE %s" % sq.where_clause
    return text
