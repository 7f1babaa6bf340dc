"""SQL front end: a hand-written lexer/parser for the supported subset,
an AST renderer, and name resolution against the data dictionary.

Supported shape:

    SELECT items FROM tables [WHERE pred AND pred ...]
                             [ORDER BY col [ASC|DESC], ...] [LIMIT n]

Select items are ``[table.]column`` or a bare ``*``; FROM entries are
``table [alias]``; predicates are binary comparisons between a column and
either another column or a literal. Keywords are case-insensitive,
identifiers case-sensitive. String literals use single quotes with
doubled-quote escaping; numbers are decimal with an optional sign and
fraction. Anything outside the subset (aggregates, OR, GROUP BY,
parentheses/subqueries, DML) is reported as UnsupportedFeature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional, Union

from .catalog import DataDictionary, DataType
from .errors import (
    AmbiguousColumn,
    SqlSyntaxError,
    TypeMismatch,
    UnknownColumn,
    UnsupportedFeature,
)

# --- tokens ---------------------------------------------------------------------

_KEYWORDS = {"SELECT", "FROM", "WHERE", "AND", "ORDER", "BY", "LIMIT", "ASC", "DESC"}

# Recognized so they produce a targeted error instead of a generic one.
_UNSUPPORTED_KEYWORDS = {
    "OR", "NOT", "GROUP", "HAVING", "UNION", "JOIN", "INNER", "OUTER", "LEFT",
    "RIGHT", "ON", "AS", "DISTINCT", "COUNT", "SUM", "AVG", "MIN", "MAX",
    "INSERT", "UPDATE", "DELETE", "CREATE", "DROP", "IN", "IS", "NULL", "LIKE",
    "BETWEEN", "EXISTS", "OFFSET",
}

_OPERATORS = ("<=", ">=", "!=", "=", "<", ">")


@dataclass(frozen=True)
class _Token:
    kind: str  # KEYWORD IDENT NUMBER STRING OP STAR COMMA DOT EOF
    text: str
    offset: int  # 1-based character offset
    value: object = None


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        offset = i + 1
        if ch == "(" or ch == ")":
            raise UnsupportedFeature(
                "parenthesized expressions, function calls and subqueries "
                "are not supported", offset)
        if ch == "*":
            tokens.append(_Token("STAR", "*", offset))
            i += 1
            continue
        if ch == ",":
            tokens.append(_Token("COMMA", ",", offset))
            i += 1
            continue
        if ch == ".":
            tokens.append(_Token("DOT", ".", offset))
            i += 1
            continue
        if ch == "'":
            value, i = _scan_string(text, i)
            tokens.append(_Token("STRING", text[offset - 1:i], offset, value))
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            literal, value, i = _scan_number(text, i)
            tokens.append(_Token("NUMBER", literal, offset, value))
            continue
        matched_op = None
        for op in _OPERATORS:
            if text.startswith(op, i):
                matched_op = op
                break
        if matched_op:
            tokens.append(_Token("OP", matched_op, offset))
            i += len(matched_op)
            continue
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            upper = word.upper()
            if upper in _UNSUPPORTED_KEYWORDS:
                raise UnsupportedFeature(f"{upper} is not supported", offset)
            if upper in _KEYWORDS:
                tokens.append(_Token("KEYWORD", upper, offset))
            else:
                tokens.append(_Token("IDENT", word, offset))
            i = j
            continue
        raise SqlSyntaxError(f"unexpected character {ch!r}", offset)
    tokens.append(_Token("EOF", "", n + 1))
    return tokens


def _scan_string(text: str, start: int) -> tuple[str, int]:
    i = start + 1
    parts: list[str] = []
    while i < len(text):
        ch = text[i]
        if ch == "'":
            if i + 1 < len(text) and text[i + 1] == "'":
                parts.append("'")
                i += 2
                continue
            return "".join(parts), i + 1
        parts.append(ch)
        i += 1
    raise SqlSyntaxError("unterminated string literal", start + 1)


def _scan_number(text: str, start: int):
    i = start
    if text[i] == "-":
        i += 1
    begin_digits = i
    while i < len(text) and text[i].isdigit():
        i += 1
    is_real = False
    if i < len(text) and text[i] == "." and i + 1 < len(text) and text[i + 1].isdigit():
        is_real = True
        i += 1
        while i < len(text) and text[i].isdigit():
            i += 1
    if i == begin_digits:
        raise SqlSyntaxError("malformed number", start + 1)
    literal = text[start:i]
    return literal, float(literal) if is_real else int(literal), i


# --- AST ------------------------------------------------------------------------

@dataclass(frozen=True)
class ColRef:
    table: Optional[str]  # alias or table name as written; None if unqualified
    column: str
    offset: int = field(default=0, compare=False)

    def render(self) -> str:
        return f"{self.table}.{self.column}" if self.table else self.column


@dataclass(frozen=True)
class Literal:
    kind: DataType
    value: object

    def render(self) -> str:
        if self.kind == DataType.TEXT:
            escaped = str(self.value).replace("'", "''")
            return f"'{escaped}'"
        if self.kind == DataType.TIMESTAMP:
            return f"'{self.value.isoformat()}'"
        return repr(self.value)


@dataclass(frozen=True)
class Predicate:
    left: ColRef
    op: str
    right: Union[ColRef, Literal]

    def render(self) -> str:
        return f"{self.left.render()} {self.op} {self.right.render()}"


@dataclass(frozen=True)
class TableRef:
    table: str
    alias: Optional[str] = None
    offset: int = field(default=0, compare=False)

    @property
    def key(self) -> str:
        """Name the rest of the query uses for this table."""
        return self.alias or self.table

    def render(self) -> str:
        return f"{self.table} {self.alias}" if self.alias else self.table


@dataclass(frozen=True)
class OrderItem:
    column: ColRef
    descending: bool = False

    def render(self) -> str:
        return self.column.render() + (" DESC" if self.descending else "")


@dataclass(frozen=True)
class QueryAst:
    select_star: bool
    select_items: tuple[ColRef, ...]
    from_tables: tuple[TableRef, ...]
    where_predicates: tuple[Predicate, ...] = ()
    order_by: tuple[OrderItem, ...] = ()
    limit: Optional[int] = None


def render_sql(ast: QueryAst) -> str:
    parts = ["SELECT "]
    if ast.select_star:
        parts.append("*")
    else:
        parts.append(", ".join(item.render() for item in ast.select_items))
    parts.append(" FROM ")
    parts.append(", ".join(t.render() for t in ast.from_tables))
    if ast.where_predicates:
        parts.append(" WHERE ")
        parts.append(" AND ".join(p.render() for p in ast.where_predicates))
    if ast.order_by:
        parts.append(" ORDER BY ")
        parts.append(", ".join(o.render() for o in ast.order_by))
    if ast.limit is not None:
        parts.append(f" LIMIT {ast.limit}")
    return "".join(parts)


# --- parser ---------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[_Token]):
        self._tokens = tokens
        self._pos = 0

    def _peek(self) -> _Token:
        return self._tokens[self._pos]

    def _advance(self) -> _Token:
        tok = self._tokens[self._pos]
        self._pos += 1
        return tok

    def _expect_keyword(self, word: str) -> _Token:
        tok = self._peek()
        if tok.kind == "KEYWORD" and tok.text == word:
            return self._advance()
        raise SqlSyntaxError(f"expected {word}", tok.offset)

    def _match_keyword(self, word: str) -> bool:
        tok = self._peek()
        if tok.kind == "KEYWORD" and tok.text == word:
            self._advance()
            return True
        return False

    def _expect_ident(self, what: str) -> _Token:
        tok = self._peek()
        if tok.kind == "IDENT":
            return self._advance()
        raise SqlSyntaxError(f"expected {what}", tok.offset)

    def parse_query(self) -> QueryAst:
        self._expect_keyword("SELECT")
        select_star = False
        items: list[ColRef] = []
        if self._peek().kind == "STAR":
            self._advance()
            select_star = True
        else:
            items.append(self._parse_colref())
            while self._peek().kind == "COMMA":
                self._advance()
                items.append(self._parse_colref())
        self._expect_keyword("FROM")
        tables = [self._parse_tableref()]
        while self._peek().kind == "COMMA":
            self._advance()
            tables.append(self._parse_tableref())

        predicates: list[Predicate] = []
        if self._match_keyword("WHERE"):
            predicates.append(self._parse_predicate())
            while self._match_keyword("AND"):
                predicates.append(self._parse_predicate())

        order: list[OrderItem] = []
        if self._peek().kind == "KEYWORD" and self._peek().text == "ORDER":
            self._advance()
            self._expect_keyword("BY")
            order.append(self._parse_order_item())
            while self._peek().kind == "COMMA":
                self._advance()
                order.append(self._parse_order_item())

        limit = None
        if self._match_keyword("LIMIT"):
            tok = self._peek()
            if tok.kind != "NUMBER" or not isinstance(tok.value, int) or tok.value < 1:
                raise SqlSyntaxError("LIMIT requires a positive integer", tok.offset)
            self._advance()
            limit = tok.value

        tail = self._peek()
        if tail.kind != "EOF":
            raise SqlSyntaxError(f"unexpected input {tail.text!r}", tail.offset)

        ast = QueryAst(
            select_star=select_star,
            select_items=tuple(items),
            from_tables=tuple(tables),
            where_predicates=tuple(predicates),
            order_by=tuple(order),
            limit=limit,
        )
        self._validate(ast)
        return ast

    def _parse_colref(self) -> ColRef:
        first = self._expect_ident("column name")
        if self._peek().kind == "DOT":
            self._advance()
            second = self._expect_ident("column name after '.'")
            return ColRef(first.text, second.text, offset=first.offset)
        return ColRef(None, first.text, offset=first.offset)

    def _parse_tableref(self) -> TableRef:
        name = self._expect_ident("table name")
        alias = None
        if self._peek().kind == "IDENT":
            alias = self._advance().text
        return TableRef(name.text, alias, offset=name.offset)

    def _parse_predicate(self) -> Predicate:
        left = self._parse_colref()
        op_tok = self._peek()
        if op_tok.kind != "OP":
            raise SqlSyntaxError("expected comparison operator", op_tok.offset)
        self._advance()
        right_tok = self._peek()
        right: Union[ColRef, Literal]
        if right_tok.kind == "NUMBER":
            self._advance()
            kind = DataType.REAL if isinstance(right_tok.value, float) else DataType.INTEGER
            right = Literal(kind, right_tok.value)
        elif right_tok.kind == "STRING":
            self._advance()
            right = Literal(DataType.TEXT, right_tok.value)
        elif right_tok.kind == "IDENT":
            right = self._parse_colref()
        else:
            raise SqlSyntaxError("expected column or literal", right_tok.offset)
        return Predicate(left, op_tok.text, right)

    def _parse_order_item(self) -> OrderItem:
        col = self._parse_colref()
        if self._match_keyword("DESC"):
            return OrderItem(col, descending=True)
        self._match_keyword("ASC")
        return OrderItem(col)

    def _validate(self, ast: QueryAst) -> None:
        keys = set()
        for tab in ast.from_tables:
            if tab.key in keys:
                raise SqlSyntaxError(f"duplicate table name or alias {tab.key!r}", tab.offset)
            keys.add(tab.key)
        for ref in _all_colrefs(ast):
            if ref.table is not None and ref.table not in keys:
                raise SqlSyntaxError(
                    f"{ref.table!r} does not name a table in FROM", ref.offset)


def _all_colrefs(ast: QueryAst):
    yield from ast.select_items
    for pred in ast.where_predicates:
        yield pred.left
        if isinstance(pred.right, ColRef):
            yield pred.right
    for item in ast.order_by:
        yield item.column


def parse_sql(text: str) -> QueryAst:
    return _Parser(_tokenize(text)).parse_query()


# --- bound query ------------------------------------------------------------------

@dataclass(frozen=True)
class LocalBinding:
    source_id: str
    physical_table: str


@dataclass(frozen=True)
class RemoteBinding:
    logical_name: str


@dataclass(frozen=True)
class BoundTable:
    ref: TableRef
    binding: Union[LocalBinding, RemoteBinding]
    # full column list for local tables, in spec order; empty for remote ones
    local_columns: tuple = ()

    @property
    def key(self) -> str:
        return self.ref.key

    @property
    def is_local(self) -> bool:
        return isinstance(self.binding, LocalBinding)


@dataclass(frozen=True)
class BoundColumn:
    table_key: str  # alias or table name within this query
    column: str  # logical column name
    physical: Optional[str]  # None for remote tables
    data_type: Optional[DataType]  # None for remote tables


@dataclass(frozen=True)
class BoundPredicate:
    left: BoundColumn
    op: str
    right: Union[BoundColumn, Literal]


@dataclass(frozen=True)
class BoundQuery:
    select_star: bool
    select_items: tuple[BoundColumn, ...]
    tables: tuple[BoundTable, ...]
    predicates: tuple[BoundPredicate, ...]
    order_by: tuple[tuple[BoundColumn, bool], ...]  # (column, descending)
    limit: Optional[int]

    def table(self, key: str) -> BoundTable:
        for tab in self.tables:
            if tab.key == key:
                return tab
        raise KeyError(key)


def resolve_names(ast: QueryAst, dictionary: DataDictionary) -> BoundQuery:
    """Attach physical bindings to every name in the AST.

    Tables present in the dictionary become Local with their source and
    physical names filled in; anything else is marked Remote for the replica
    lookup to place later. Literal comparisons against local columns are
    type-checked here.
    """
    tables = []
    for ref in ast.from_tables:
        if dictionary.has_table(ref.table):
            source_id, physical = dictionary.table_bindings[ref.table]
            local_columns = tuple(
                BoundColumn(ref.key, name, *dictionary.column_bindings[(ref.table, name)])
                for name in dictionary.columns_of(ref.table)
            )
            tables.append(
                BoundTable(ref, LocalBinding(source_id, physical), local_columns)
            )
        else:
            tables.append(BoundTable(ref, RemoteBinding(ref.table)))
    by_key = {tab.key: tab for tab in tables}
    has_remote = any(not tab.is_local for tab in tables)

    def bind_column(ref: ColRef) -> BoundColumn:
        if ref.table is not None:
            tab = by_key[ref.table]
        elif len(tables) == 1:
            tab = tables[0]
        else:
            candidates = [
                t for t in tables
                if t.is_local and (t.ref.table, ref.column) in dictionary.column_bindings
            ]
            if len(candidates) > 1:
                raise AmbiguousColumn(
                    f"column {ref.column!r} matches more than one table")
            if has_remote:
                raise AmbiguousColumn(
                    f"column {ref.column!r} must be qualified: remote tables' "
                    "columns are not known locally")
            if not candidates:
                raise UnknownColumn(f"column {ref.column!r} not found in any table")
            tab = candidates[0]
        if tab.is_local:
            binding = dictionary.column_bindings.get((tab.ref.table, ref.column))
            if binding is None:
                raise UnknownColumn(
                    f"table {tab.ref.table!r} has no column {ref.column!r}")
            physical, data_type = binding
            return BoundColumn(tab.key, ref.column, physical, data_type)
        return BoundColumn(tab.key, ref.column, None, None)

    def check_literal(column: BoundColumn, literal: Literal) -> Literal:
        if column.data_type is None:
            return literal
        target = column.data_type
        if literal.kind in (DataType.INTEGER, DataType.REAL):
            if target in (DataType.INTEGER, DataType.REAL):
                return literal
            raise TypeMismatch(
                f"numeric literal {literal.value!r} compared to "
                f"{target.value} column {column.column!r}")
        if literal.kind == DataType.TEXT:
            if target == DataType.TEXT:
                return literal
            if target == DataType.TIMESTAMP:
                try:
                    return Literal(DataType.TIMESTAMP, datetime.fromisoformat(str(literal.value)))
                except ValueError:
                    raise TypeMismatch(
                        f"literal {literal.value!r} is not a timestamp, column "
                        f"{column.column!r} is") from None
            raise TypeMismatch(
                f"text literal {literal.value!r} compared to "
                f"{target.value} column {column.column!r}")
        if literal.kind == DataType.TIMESTAMP and target == DataType.TIMESTAMP:
            return literal
        raise TypeMismatch(
            f"literal of kind {literal.kind.value} compared to "
            f"{target.value} column {column.column!r}")

    predicates = []
    for pred in ast.where_predicates:
        left = bind_column(pred.left)
        if isinstance(pred.right, Literal):
            right: Union[BoundColumn, Literal] = check_literal(left, pred.right)
        else:
            right = bind_column(pred.right)
            if (
                left.data_type is not None
                and right.data_type is not None
                and not _column_types_comparable(left.data_type, right.data_type)
            ):
                raise TypeMismatch(
                    f"cannot compare {left.data_type.value} column "
                    f"{left.column!r} with {right.data_type.value} column "
                    f"{right.column!r}")
        predicates.append(BoundPredicate(left, pred.op, right))

    select_items = tuple(bind_column(item) for item in ast.select_items)
    order_by = tuple((bind_column(o.column), o.descending) for o in ast.order_by)
    return BoundQuery(
        select_star=ast.select_star,
        select_items=select_items,
        tables=tuple(tables),
        predicates=tuple(predicates),
        order_by=order_by,
        limit=ast.limit,
    )


def _column_types_comparable(a: DataType, b: DataType) -> bool:
    if a == b:
        return True
    numeric = (DataType.INTEGER, DataType.REAL)
    return a in numeric and b in numeric
