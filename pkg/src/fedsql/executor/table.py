"""Column-typed two-dimensional result grid and its cell-level semantics.

A ResultTable is the universal currency between backends, the merge engine,
the wire codecs and the ETL pipeline: an ordered list of (name, type) columns
plus a row grid whose cells are typed values or None.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Any, Iterable, Optional, Sequence

from ..catalog import DataType
from ..errors import TypeMismatch


_PY_KINDS = {
    DataType.INTEGER: (int,),
    DataType.REAL: (int, float),
    DataType.TEXT: (str,),
    DataType.TIMESTAMP: (datetime,),
}

# Comparable column-type pairs: numerics mix freely, everything else only
# with itself.
_NUMERIC = {DataType.INTEGER, DataType.REAL}


def types_comparable(a: DataType, b: DataType) -> bool:
    if a == b:
        return True
    return a in _NUMERIC and b in _NUMERIC


def cell_matches_type(value: Any, data_type: DataType) -> bool:
    if value is None:
        return True
    if isinstance(value, bool):  # bool is an int subclass; never a valid cell
        return False
    return isinstance(value, _PY_KINDS[data_type])


@dataclass(frozen=True)
class Column:
    name: str
    data_type: DataType


@dataclass
class ResultTable:
    columns: list[Column]
    rows: list[list]

    def __post_init__(self):
        width = len(self.columns)
        for row in self.rows:
            if len(row) != width:
                raise ValueError(
                    f"row width {len(row)} != column count {width}"
                )

    @property
    def width(self) -> int:
        return len(self.columns)

    @property
    def cell_count(self) -> int:
        return len(self.rows) * len(self.columns)

    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def index_of(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise KeyError(name)

    def renamed(self, names: Sequence[str]) -> "ResultTable":
        """Same grid under new column names (positional)."""
        if len(names) != len(self.columns):
            raise ValueError("rename width mismatch")
        cols = [Column(n, c.data_type) for n, c in zip(names, self.columns)]
        return ResultTable(cols, self.rows)

    def validate_cells(self) -> None:
        """Check every cell against its column type; raises TypeMismatch."""
        for row in self.rows:
            for cell, col in zip(row, self.columns):
                if not cell_matches_type(cell, col.data_type):
                    raise TypeMismatch(
                        f"cell {cell!r} does not fit column "
                        f"{col.name!r} of type {col.data_type.value}"
                    )


def empty_like(columns: Iterable[Column]) -> ResultTable:
    return ResultTable(list(columns), [])


# --- comparison semantics ------------------------------------------------------

def compare_cells(left: Any, op: str, right: Any) -> bool:
    """Evaluate one comparison; any comparison involving null is false.

    Text is coerced to timestamp when compared against a datetime so that
    predicates bound without type information behave like locally bound ones.
    """
    if left is None or right is None:
        return False
    if isinstance(left, datetime) and isinstance(right, str):
        right = _coerce_timestamp(right)
    elif isinstance(right, datetime) and isinstance(left, str):
        left = _coerce_timestamp(left)
    if not _kinds_comparable(left, right):
        raise TypeMismatch(
            f"cannot compare {type(left).__name__} with {type(right).__name__}"
        )
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    if op == ">=":
        return left >= right
    raise ValueError(f"unknown operator {op!r}")


def _coerce_timestamp(text: str) -> datetime:
    try:
        return datetime.fromisoformat(text)
    except ValueError:
        raise TypeMismatch(f"{text!r} is not an ISO-8601 timestamp") from None


def _kinds_comparable(a: Any, b: Any) -> bool:
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return True
    if isinstance(a, str) and isinstance(b, str):
        return True
    if isinstance(a, datetime) and isinstance(b, datetime):
        return True
    return False


# --- ordering ------------------------------------------------------------------

def _cell_key(cell: Any):
    # Nulls sort after every value in ascending order.
    if cell is None:
        return (True, 0)
    return (False, cell)


@dataclass(frozen=True)
class SortKey:
    column_index: int
    descending: bool = False


def finalize_rows(
    rows: list,
    order_values: Optional[list] = None,
    descending: Sequence[bool] = (),
    limit: Optional[int] = None,
) -> list:
    """Final ordering applied by every evaluation path.

    ``rows`` are the projected output rows; ``order_values`` optionally
    carries, per row, the tuple of explicit sort-key cells (which may include
    columns that were projected away). Rows are first sorted canonically
    (lexicographically by all output cells, nulls last) and the explicit keys
    are then applied as stable passes on top, so explicit keys are primary
    and the canonical order breaks ties. LIMIT cuts after ordering.
    """
    if order_values is None:
        order_values = [()] * len(rows)
    paired = sorted(
        zip(order_values, rows),
        key=lambda pair: tuple(_cell_key(c) for c in pair[1]),
    )
    n_keys = len(paired[0][0]) if paired else 0
    for key_index in reversed(range(n_keys)):
        reverse = bool(descending[key_index]) if key_index < len(descending) else False
        paired.sort(key=lambda pair: _cell_key(pair[0][key_index]), reverse=reverse)
    ordered = [row for _, row in paired]
    if limit is not None:
        ordered = ordered[:limit]
    return ordered


def order_rows(
    table: ResultTable,
    order_by: Optional[Sequence[SortKey]] = None,
    limit: Optional[int] = None,
) -> ResultTable:
    """Canonical final ordering over an existing table's own columns."""
    order_by = list(order_by or [])
    order_values = [
        tuple(row[key.column_index] for key in order_by) for row in table.rows
    ]
    rows = finalize_rows(
        list(table.rows),
        order_values,
        [key.descending for key in order_by],
        limit,
    )
    return ResultTable(list(table.columns), rows)


def canonical_sorted(table: ResultTable) -> ResultTable:
    return order_rows(table)
