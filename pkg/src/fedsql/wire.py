"""Wire formats: request/response models for every HTTP endpoint and the
ResultTable codec.

Encoding is canonical: models serialize through `model_dump_json`, which is
byte-deterministic (compact separators, declaration field order), so
captured payloads can be compared exactly. Nulls travel as JSON null,
timestamps as ISO-8601 strings.
"""

from datetime import datetime
from typing import Dict, List, Optional, Type, TypeVar, Union

from pydantic import BaseModel, ConfigDict, ValidationError

from .catalog import DataType
from .errors import DecodeError
from .executor import Column, ResultTable, cell_matches_type

WireCell = Union[None, int, float, str]


class WireColumn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    type: str


class QueryRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sql: str
    no_forward: bool = False


class QueryResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    columns: List[WireColumn]
    rows: List[List[WireCell]]


class ErrorBody(BaseModel):
    code: str


class ErrorResponse(BaseModel):
    error: ErrorBody
    message: str


class RegisterRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    spec_url: Optional[str] = None
    spec_inline: Optional[str] = None
    driver: str
    url: str
    username: str = ""
    password: str = ""


class RegisterResponse(BaseModel):
    source_id: str


class RefreshResponse(BaseModel):
    changed: List[str]


class SchemaResponse(BaseModel):
    upper: str
    lowers: Dict[str, str]


class HealthResponse(BaseModel):
    ok: bool = True


class PublishRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    server: str
    tables: List[str]


class AckResponse(BaseModel):
    ack: int


class LookupResponse(BaseModel):
    servers: List[str]


M = TypeVar("M", bound=BaseModel)


def encode_model(model: BaseModel) -> bytes:
    return model.model_dump_json().encode("utf-8")


def decode_model(model_type: Type[M], data: bytes) -> M:
    try:
        return model_type.model_validate_json(data)
    except ValidationError as exc:
        raise DecodeError(
            "payload does not fit %s: %s" % (model_type.__name__, exc)
        ) from exc


def encode_result(table: ResultTable) -> QueryResponse:
    columns = [
        WireColumn(name=col.name, type=col.data_type.value) for col in table.columns
    ]
    rows: List[List[WireCell]] = []
    for row in table.rows:
        wire_row: List[WireCell] = []
        for cell, col in zip(row, table.columns):
            if cell is None:
                wire_row.append(None)
            elif col.data_type is DataType.TIMESTAMP:
                wire_row.append(cell.isoformat())
            else:
                wire_row.append(cell)
        rows.append(wire_row)
    return QueryResponse(columns=columns, rows=rows)


def decode_result(payload: QueryResponse) -> ResultTable:
    columns: List[Column] = []
    for wire_col in payload.columns:
        try:
            data_type = DataType(wire_col.type)
        except ValueError:
            raise DecodeError("unknown column type %r" % wire_col.type) from None
        columns.append(Column(wire_col.name, data_type))
    rows: List[list] = []
    for i, wire_row in enumerate(payload.rows):
        if len(wire_row) != len(columns):
            raise DecodeError(
                "row %d has %d cells for %d columns" % (i, len(wire_row), len(columns))
            )
        rows.append(
            [_decode_cell(cell, col, i) for cell, col in zip(wire_row, columns)]
        )
    return ResultTable(columns, rows)


def _decode_cell(cell: WireCell, col: Column, row_index: int):
    if cell is None:
        return None
    if col.data_type is DataType.TIMESTAMP:
        if not isinstance(cell, str):
            raise DecodeError(
                "row %d: timestamp column %r holds %r" % (row_index, col.name, cell)
            )
        try:
            return datetime.fromisoformat(cell)
        except ValueError:
            raise DecodeError(
                "row %d: %r is not an ISO-8601 timestamp" % (row_index, cell)
            ) from None
    if not cell_matches_type(cell, col.data_type):
        raise DecodeError(
            "row %d: cell %r does not fit %s column %r"
            % (row_index, cell, col.data_type.value, col.name)
        )
    return cell
