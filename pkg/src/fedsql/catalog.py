"""Two-level schema catalog: parse, generate, merge and fingerprint.

The lower-level document describes one database (tables, columns,
relationships); the single upper-level document lists the sources of a
federation server. Merging all registered lower specs produces the data
dictionary that maps logical names to physical ones. Serialization is
byte-deterministic so that schema drift can be detected by size + md5.
"""

from __future__ import annotations

import hashlib
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional
from xml.sax.saxutils import quoteattr

from .errors import (
    DanglingRelationship,
    DuplicateName,
    DuplicateSourceId,
    LogicalNameCollision,
    MalformedSpec,
    UnresolvableRef,
)


class DataType(str, Enum):
    INTEGER = "integer"
    REAL = "real"
    TEXT = "text"
    TIMESTAMP = "timestamp"


_IDENT_RE = re.compile(r"^\S+$")


def _check_identifier(value: str, what: str) -> str:
    if not value or not _IDENT_RE.match(value):
        raise MalformedSpec(f"{what} must be non-empty without whitespace: {value!r}")
    return value


# --- domain types ----------------------------------------------------------------

@dataclass(frozen=True)
class ColumnSpec:
    physical_name: str
    logical_name: str
    data_type: DataType
    nullable: bool


@dataclass(frozen=True)
class TableSpec:
    physical_name: str
    logical_name: str
    columns: tuple[ColumnSpec, ...]
    key_columns: tuple[str, ...] = ()

    def column(self, logical_name: str) -> Optional[ColumnSpec]:
        for col in self.columns:
            if col.logical_name == logical_name:
                return col
        return None


@dataclass(frozen=True)
class RelationshipSpec:
    from_table: str
    from_columns: tuple[str, ...]
    to_table: str
    to_columns: tuple[str, ...]


@dataclass(frozen=True)
class LowerSpec:
    database_logical_name: str
    tables: tuple[TableSpec, ...]
    relationships: tuple[RelationshipSpec, ...] = ()

    def table(self, logical_name: str) -> Optional[TableSpec]:
        for tab in self.tables:
            if tab.logical_name == logical_name:
                return tab
        return None


@dataclass(frozen=True)
class UpperSpecEntry:
    source_id: str
    url: str
    driver_name: str
    lower_spec_ref: str


@dataclass(frozen=True)
class UpperSpec:
    entries: tuple[UpperSpecEntry, ...]


@dataclass(frozen=True)
class DataDictionary:
    """Merged logical namespace over every registered source.

    table_bindings: logical table -> (source_id, physical table name)
    column_bindings: (logical table, logical column) -> (physical column, type)
    """

    table_bindings: dict
    column_bindings: dict

    def has_table(self, logical_table: str) -> bool:
        return logical_table in self.table_bindings

    def columns_of(self, logical_table: str) -> list[str]:
        return [
            col for (tab, col) in self.column_bindings if tab == logical_table
        ]


@dataclass(frozen=True)
class Fingerprint:
    byte_size: int
    md5_hex: str


@dataclass(frozen=True)
class TableDescription:
    """What a backend reports about one of its tables."""

    name: str
    columns: tuple[tuple[str, DataType, bool], ...]  # (name, type, nullable)


# --- validation ------------------------------------------------------------------

def validate_lower_spec(spec: LowerSpec) -> LowerSpec:
    _check_identifier(spec.database_logical_name, "database name")
    seen_tables = set()
    for tab in spec.tables:
        _check_identifier(tab.physical_name, "table physical name")
        _check_identifier(tab.logical_name, "table logical name")
        if tab.logical_name in seen_tables:
            raise DuplicateName(f"duplicate logical table name {tab.logical_name!r}")
        seen_tables.add(tab.logical_name)
        if not tab.columns:
            raise MalformedSpec(f"table {tab.logical_name!r} has no columns")
        seen_cols = set()
        for col in tab.columns:
            _check_identifier(col.physical_name, "column physical name")
            _check_identifier(col.logical_name, "column logical name")
            if col.logical_name in seen_cols:
                raise DuplicateName(
                    f"duplicate column {col.logical_name!r} in table {tab.logical_name!r}"
                )
            seen_cols.add(col.logical_name)
        for key in tab.key_columns:
            if key not in seen_cols:
                raise MalformedSpec(
                    f"key column {key!r} not a column of table {tab.logical_name!r}"
                )
    for rel in spec.relationships:
        if rel.from_table not in seen_tables:
            raise DanglingRelationship(f"relationship references unknown table {rel.from_table!r}")
        if rel.to_table not in seen_tables:
            raise DanglingRelationship(f"relationship references unknown table {rel.to_table!r}")
        if not rel.from_columns or len(rel.from_columns) != len(rel.to_columns):
            raise MalformedSpec(
                f"relationship {rel.from_table!r}->{rel.to_table!r} column lists must "
                "be non-empty and equally long"
            )
    return spec


# --- lower-level document ----------------------------------------------------------

def parse_lower_spec(data: bytes) -> LowerSpec:
    root = _parse_xml(data)
    if root.tag != "xspec":
        raise MalformedSpec(f"expected root element 'xspec', got {root.tag!r}")
    if root.get("version") != "1":
        raise MalformedSpec("unsupported or missing xspec version")
    databases = list(root)
    if len(databases) != 1 or databases[0].tag != "database":
        raise MalformedSpec("xspec must contain exactly one 'database' element")
    db = databases[0]
    name = db.get("name") or ""

    tables: list[TableSpec] = []
    relationships: list[RelationshipSpec] = []
    for child in db:
        if child.tag == "table":
            tables.append(_parse_table(child))
        elif child.tag == "relationship":
            relationships.append(_parse_relationship(child))
        else:
            raise MalformedSpec(f"unexpected element {child.tag!r} in database")
    spec = LowerSpec(name, tuple(tables), tuple(relationships))
    return validate_lower_spec(spec)


def _parse_table(elem: ET.Element) -> TableSpec:
    physical = elem.get("name") or ""
    logical = elem.get("logical") or ""
    columns: list[ColumnSpec] = []
    keys: tuple[str, ...] = ()
    for child in elem:
        if child.tag == "column":
            columns.append(_parse_column(child))
        elif child.tag == "key":
            raw = child.get("columns") or ""
            keys = tuple(part for part in raw.split(",") if part)
        else:
            raise MalformedSpec(f"unexpected element {child.tag!r} in table {logical!r}")
    return TableSpec(physical, logical, tuple(columns), keys)


def _parse_column(elem: ET.Element) -> ColumnSpec:
    physical = elem.get("name") or ""
    logical = elem.get("logical") or ""
    type_text = elem.get("type") or ""
    try:
        data_type = DataType(type_text)
    except ValueError:
        raise MalformedSpec(f"unknown column type {type_text!r}") from None
    nullable_text = elem.get("nullable") or ""
    if nullable_text not in ("true", "false"):
        raise MalformedSpec(f"nullable must be 'true' or 'false', got {nullable_text!r}")
    return ColumnSpec(physical, logical, data_type, nullable_text == "true")


def _parse_relationship(elem: ET.Element) -> RelationshipSpec:
    return RelationshipSpec(
        from_table=elem.get("fromTable") or "",
        from_columns=tuple(p for p in (elem.get("fromColumns") or "").split(",") if p),
        to_table=elem.get("toTable") or "",
        to_columns=tuple(p for p in (elem.get("toColumns") or "").split(",") if p),
    )


def serialize_lower_spec(spec: LowerSpec) -> bytes:
    """Byte-deterministic canonical form: fixed attribute order, 2-space
    indent, LF line endings, UTF-8."""
    validate_lower_spec(spec)
    out = ['<xspec version="1">']
    out.append(f"  <database name={_q(spec.database_logical_name)}>")
    for tab in spec.tables:
        out.append(
            f"    <table name={_q(tab.physical_name)} logical={_q(tab.logical_name)}>"
        )
        for col in tab.columns:
            nullable = "true" if col.nullable else "false"
            out.append(
                f"      <column name={_q(col.physical_name)} logical={_q(col.logical_name)} "
                f"type=\"{col.data_type.value}\" nullable=\"{nullable}\"/>"
            )
        if tab.key_columns:
            out.append(f"      <key columns={_q(','.join(tab.key_columns))}/>")
        out.append("    </table>")
    for rel in spec.relationships:
        out.append(
            f"    <relationship fromTable={_q(rel.from_table)} "
            f"fromColumns={_q(','.join(rel.from_columns))} "
            f"toTable={_q(rel.to_table)} "
            f"toColumns={_q(','.join(rel.to_columns))}/>"
        )
    out.append("  </database>")
    out.append("</xspec>")
    return ("\n".join(out) + "\n").encode("utf-8")


# --- upper-level document -----------------------------------------------------------

def parse_upper_spec(
    data: bytes,
    resolver: Callable[[str], bytes],
) -> tuple[UpperSpec, dict]:
    """Parse the federation file and resolve every lower-spec reference.

    Returns the UpperSpec plus a map source_id -> LowerSpec.
    """
    root = _parse_xml(data)
    if root.tag != "xspec-federation":
        raise MalformedSpec(f"expected root element 'xspec-federation', got {root.tag!r}")
    if root.get("version") != "1":
        raise MalformedSpec("unsupported or missing xspec-federation version")
    entries: list[UpperSpecEntry] = []
    seen = set()
    for child in root:
        if child.tag != "source":
            raise MalformedSpec(f"unexpected element {child.tag!r} in federation spec")
        entry = UpperSpecEntry(
            source_id=child.get("id") or "",
            url=child.get("url") or "",
            driver_name=child.get("driver") or "",
            lower_spec_ref=child.get("spec") or "",
        )
        for field_name in ("source_id", "url", "driver_name", "lower_spec_ref"):
            if not getattr(entry, field_name):
                raise MalformedSpec(f"source entry missing {field_name}")
        if entry.source_id in seen:
            raise DuplicateSourceId(f"duplicate source id {entry.source_id!r}")
        seen.add(entry.source_id)
        entries.append(entry)

    lowers = {}
    for entry in entries:
        try:
            raw = resolver(entry.lower_spec_ref)
        except Exception as exc:
            raise UnresolvableRef(
                f"cannot resolve lower spec {entry.lower_spec_ref!r}: {exc}"
            ) from exc
        lowers[entry.source_id] = parse_lower_spec(raw)
    return UpperSpec(tuple(entries)), lowers


def serialize_upper_spec(spec: UpperSpec) -> bytes:
    out = ['<xspec-federation version="1">']
    for entry in spec.entries:
        out.append(
            f"  <source id={_q(entry.source_id)} url={_q(entry.url)} "
            f"driver={_q(entry.driver_name)} spec={_q(entry.lower_spec_ref)}/>"
        )
    out.append("</xspec-federation>")
    return ("\n".join(out) + "\n").encode("utf-8")


# --- fingerprinting -------------------------------------------------------------------

def fingerprint(data: bytes) -> Fingerprint:
    return Fingerprint(len(data), hashlib.md5(data).hexdigest())


def specs_changed(
    old: Fingerprint,
    new: Fingerprint,
    probe: Optional[Callable[[str], None]] = None,
) -> bool:
    """True iff the fingerprints differ. Size is compared first; the md5
    sums are only consulted for equal sizes. ``probe`` receives "size" and
    "md5" as each comparison actually runs."""
    if probe is not None:
        probe("size")
    if old.byte_size != new.byte_size:
        return True
    if probe is not None:
        probe("md5")
    return old.md5_hex != new.md5_hex


# --- data dictionary -----------------------------------------------------------------

def build_dictionary(upper: UpperSpec, lowers: dict) -> DataDictionary:
    table_bindings = {}
    column_bindings = {}
    for entry in upper.entries:
        lower = lowers[entry.source_id]
        for tab in lower.tables:
            if tab.logical_name in table_bindings:
                other = table_bindings[tab.logical_name][0]
                raise LogicalNameCollision(
                    f"table {tab.logical_name!r} registered by both "
                    f"{other!r} and {entry.source_id!r}"
                )
            table_bindings[tab.logical_name] = (entry.source_id, tab.physical_name)
            for col in tab.columns:
                column_bindings[(tab.logical_name, col.logical_name)] = (
                    col.physical_name,
                    col.data_type,
                )
    return DataDictionary(table_bindings, column_bindings)


# --- introspection --------------------------------------------------------------------

def introspect(adapter, handle, database_logical_name: str) -> LowerSpec:
    """Generate a lower spec from a live backend; logical names default to
    the physical ones. ``adapter.describe(handle)`` must list the backend's
    tables as TableDescription values."""
    descriptions = adapter.describe(handle)
    tables = []
    for desc in descriptions:
        columns = tuple(
            ColumnSpec(col_name, col_name, data_type, nullable)
            for (col_name, data_type, nullable) in desc.columns
        )
        tables.append(TableSpec(desc.name, desc.name, columns))
    spec = LowerSpec(database_logical_name, tuple(tables))
    return validate_lower_spec(spec)


# --- helpers --------------------------------------------------------------------------

def _parse_xml(data: bytes) -> ET.Element:
    try:
        return ET.fromstring(data.decode("utf-8"))
    except (ET.ParseError, UnicodeDecodeError) as exc:
        raise MalformedSpec(f"not a well-formed spec document: {exc}") from exc


def _q(value: str) -> str:
    return quoteattr(value)
