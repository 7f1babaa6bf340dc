"""Golden wire payloads, one file per endpoint message.

The .json files under golden/ are written by hand from the wire format
description; nothing here regenerates them. Encoding a model must
reproduce its file byte for byte, and decoding a file then re-encoding
it must be the identity.
"""

import pathlib
from datetime import datetime

import pytest

from fedsql.catalog import DataType
from fedsql.errors import DecodeError
from fedsql.executor import Column, ResultTable
from fedsql.wire import (
    AckResponse,
    ErrorBody,
    ErrorResponse,
    HealthResponse,
    LookupResponse,
    PublishRequest,
    QueryRequest,
    QueryResponse,
    RefreshResponse,
    RegisterRequest,
    RegisterResponse,
    SchemaResponse,
    WireColumn,
    decode_model,
    decode_result,
    encode_model,
    encode_result,
)

GOLDEN_DIR = pathlib.Path(__file__).parent / "golden"

LOWER_XML = (
    '<xspec version="1">\n'
    '  <database name="demo">\n'
    '    <table name="runs" logical="runs">\n'
    '      <column name="run" logical="run" type="integer" nullable="true"/>\n'
    "    </table>\n"
    "  </database>\n"
    "</xspec>\n"
)

UPPER_XML = (
    '<xspec-federation version="1">\n'
    '  <source id="demo" url="memory:demo" driver="reference" spec="inline:demo"/>\n'
    "</xspec-federation>\n"
)

CASES = [
    (
        "query_request.json",
        QueryRequest,
        QueryRequest(
            sql="SELECT runs.run, events.v0 FROM runs, events "
            "WHERE runs.run = events.run ORDER BY events.v0 LIMIT 10",
            no_forward=True,
        ),
    ),
    (
        "query_response.json",
        QueryResponse,
        QueryResponse(
            columns=[
                WireColumn(name="run", type="integer"),
                WireColumn(name="v0", type="real"),
                WireColumn(name="tag", type="text"),
                WireColumn(name="seen", type="timestamp"),
            ],
            rows=[
                [1, 0.5, "plain", "2003-07-14T12:30:00"],
                [2, 0.25, 'say "hi"', None],
                [None, None, "", None],
            ],
        ),
    ),
    (
        "register_request.json",
        RegisterRequest,
        RegisterRequest(
            spec_url=None,
            spec_inline=LOWER_XML,
            driver="reference",
            url="memory:demo",
            username="operator",
            password="secret",
        ),
    ),
    ("register_response.json", RegisterResponse, RegisterResponse(source_id="demo")),
    (
        "refresh_response.json",
        RefreshResponse,
        RefreshResponse(changed=["demo", "telescope_2"]),
    ),
    (
        "schema_response.json",
        SchemaResponse,
        SchemaResponse(upper=UPPER_XML, lowers={"demo": LOWER_XML}),
    ),
    ("health_response.json", HealthResponse, HealthResponse()),
    (
        "publish_request.json",
        PublishRequest,
        PublishRequest(server="http://near.example:8040", tables=["events", "runs"]),
    ),
    ("ack_response.json", AckResponse, AckResponse(ack=2)),
    (
        "lookup_response.json",
        LookupResponse,
        LookupResponse(
            servers=["http://far.example:8040", "http://near.example:8040"]
        ),
    ),
    (
        "error_response.json",
        ErrorResponse,
        ErrorResponse(
            error=ErrorBody(code="UnknownTable"),
            message="no table named 'ghost' is registered",
        ),
    ),
]

IDS = [name for name, _, _ in CASES]


def golden(name: str) -> bytes:
    return (GOLDEN_DIR / name).read_bytes()


class TestGoldenFiles:
    @pytest.mark.parametrize("name,model_type,model", CASES, ids=IDS)
    def test_encoding_reproduces_the_file(self, name, model_type, model):
        assert encode_model(model) == golden(name)

    @pytest.mark.parametrize("name,model_type,model", CASES, ids=IDS)
    def test_decoding_recovers_the_model(self, name, model_type, model):
        assert decode_model(model_type, golden(name)) == model

    @pytest.mark.parametrize("name,model_type,model", CASES, ids=IDS)
    def test_decode_then_encode_is_the_identity(self, name, model_type, model):
        data = golden(name)
        assert encode_model(decode_model(model_type, data)) == data


# the table whose wire form is query_response.json
RESULT = ResultTable(
    [
        Column("run", DataType.INTEGER),
        Column("v0", DataType.REAL),
        Column("tag", DataType.TEXT),
        Column("seen", DataType.TIMESTAMP),
    ],
    [
        [1, 0.5, "plain", datetime(2003, 7, 14, 12, 30)],
        [2, 0.25, 'say "hi"', None],
        [None, None, "", None],
    ],
)


class TestResultCodec:
    def test_encode_result_reproduces_the_file(self):
        assert encode_model(encode_result(RESULT)) == golden("query_response.json")

    def test_decode_result_recovers_the_table(self):
        payload = decode_model(QueryResponse, golden("query_response.json"))
        table = decode_result(payload)
        assert table.columns == RESULT.columns
        assert table.rows == RESULT.rows


class TestCanonicalization:
    def test_omitted_defaults_are_filled_in(self):
        minimal = b'{"sql":"SELECT t.a FROM t"}'
        model = decode_model(QueryRequest, minimal)
        assert model.no_forward is False
        assert encode_model(model) == b'{"sql":"SELECT t.a FROM t","no_forward":false}'

    @pytest.mark.parametrize(
        "model_type,payload",
        [
            (QueryRequest, b'{"sql":"x","typo":1}'),
            (PublishRequest, b'{"server":"http://a","tables":[],"extra":true}'),
            (RegisterRequest, b'{"driver":"d","url":"u","id":"nope"}'),
        ],
    )
    def test_unknown_fields_are_rejected(self, model_type, payload):
        with pytest.raises(DecodeError, match="does not fit"):
            decode_model(model_type, payload)
