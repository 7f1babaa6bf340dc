"""Peer HTTP clients: decoding, error mapping and the timeout guarantee."""

import http.server
import socket
import threading
import time
from datetime import datetime

import pytest

from fedsql.catalog import DataType
from fedsql.errors import DecodeError, RemoteError, RemoteTimeout
from fedsql.fedserver import create_app
from fedsql.remoteclient import (
    HttpRemoteClient,
    PeerEndpoint,
    remote_health,
    remote_query,
    remote_schema,
)
from fedsql.serving import start_server

from conftest import demo_database, make_core


class TestPeerEndpoint:
    def test_defaults(self):
        endpoint = PeerEndpoint("http://peer.example")
        assert endpoint.request_timeout == 30.0
        assert endpoint.connect_timeout == 5.0

    @pytest.mark.parametrize("kwargs", [
        {"request_timeout": 0},
        {"request_timeout": -1},
        {"connect_timeout": 0},
    ])
    def test_timeouts_must_be_positive(self, kwargs):
        with pytest.raises(ValueError):
            PeerEndpoint("http://peer.example", **kwargs)

    def test_join_handles_trailing_slash(self):
        assert PeerEndpoint("http://h:1/").join("/query") == "http://h:1/query"
        assert PeerEndpoint("http://h:1").join("/query") == "http://h:1/query"


@pytest.fixture(scope="module")
def live_server():
    core = make_core([demo_database()])
    server = start_server(create_app(core))
    yield server
    server.shutdown()
    core.close()


class TestRemoteQuery:
    def test_rows_and_types_decoded(self, live_server):
        endpoint = PeerEndpoint(live_server.url)
        result = remote_query(endpoint, "SELECT event_id, v0 FROM events LIMIT 2")
        assert [c.name for c in result.columns] == ["event_id", "v0"]
        assert [c.data_type for c in result.columns] == [
            DataType.INTEGER,
            DataType.REAL,
        ]
        assert result.rows == [[10, 0.5], [11, 0.25]]

    def test_error_body_becomes_remote_error(self, live_server):
        endpoint = PeerEndpoint(live_server.url)
        with pytest.raises(RemoteError) as err:
            remote_query(endpoint, "SELECT x FROM not_a_table", no_forward=True)
        assert err.value.remote_code == "UnknownTable"
        assert err.value.url == live_server.url

    def test_syntax_error_code_travels(self, live_server):
        with pytest.raises(RemoteError) as err:
            remote_query(PeerEndpoint(live_server.url), "SELEC run FROM runs")
        assert err.value.remote_code == "SyntaxError"
        assert "offset 1" in str(err.value)

    def test_client_facade_queries(self, live_server):
        client = HttpRemoteClient()
        result = client.query(live_server.url, "SELECT run FROM runs WHERE run = 2")
        assert result.rows == [[2]]

    def test_schema_document_fetch(self, live_server):
        schema = remote_schema(PeerEndpoint(live_server.url))
        assert "demo" in schema.lowers
        assert schema.upper.startswith("<xspec-federation")
        assert schema.lowers["demo"].startswith("<xspec")

    def test_health_true_for_live_server(self, live_server):
        assert remote_health(PeerEndpoint(live_server.url)) is True


def _free_port() -> int:
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        return probe.getsockname()[1]


class TestTransportFailures:
    def test_connection_refused_is_remote_timeout(self):
        url = "http://127.0.0.1:%d" % _free_port()
        with pytest.raises(RemoteTimeout):
            remote_query(PeerEndpoint(url, connect_timeout=1.0), "SELECT a FROM t")

    def test_health_false_when_down(self):
        url = "http://127.0.0.1:%d" % _free_port()
        assert remote_health(PeerEndpoint(url, connect_timeout=1.0)) is False

    def test_stalled_server_times_out_within_bound(self):
        # a socket that accepts and then never answers
        listener = socket.socket()
        listener.bind(("127.0.0.1", 0))
        listener.listen(1)
        port = listener.getsockname()[1]
        try:
            endpoint = PeerEndpoint(
                "http://127.0.0.1:%d" % port,
                request_timeout=0.5,
                connect_timeout=0.5,
            )
            started = time.monotonic()
            with pytest.raises(RemoteTimeout):
                remote_query(endpoint, "SELECT a FROM t")
            elapsed = time.monotonic() - started
            assert elapsed < 0.5 + 1.0
        finally:
            listener.close()


class _Scripted(http.server.BaseHTTPRequestHandler):
    """Answers every request with a canned status and body."""

    status = 200
    body = b""

    def do_POST(self):
        self.send_response(self.status)
        self.send_header("content-type", "text/plain")
        self.send_header("content-length", str(len(self.body)))
        self.end_headers()
        self.wfile.write(self.body)

    do_GET = do_POST

    def log_message(self, *args):
        pass


@pytest.fixture
def scripted_server():
    server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), _Scripted)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield "http://127.0.0.1:%d" % server.server_address[1], _Scripted
    server.shutdown()
    thread.join(5)


class TestDecodeFailures:
    def test_garbage_error_body(self, scripted_server):
        url, handler = scripted_server
        handler.status, handler.body = 500, b"<html>boom</html>"
        with pytest.raises(DecodeError, match="HTTP 500"):
            remote_query(PeerEndpoint(url), "SELECT a FROM t")

    def test_garbage_success_body(self, scripted_server):
        url, handler = scripted_server
        handler.status, handler.body = 200, b"not json at all"
        with pytest.raises(DecodeError):
            remote_query(PeerEndpoint(url), "SELECT a FROM t")

    def test_wrong_shape_success_body(self, scripted_server):
        url, handler = scripted_server
        handler.status, handler.body = 200, b'{"rows": "nope"}'
        with pytest.raises(DecodeError):
            remote_query(PeerEndpoint(url), "SELECT a FROM t")

    def test_health_false_on_garbage(self, scripted_server):
        url, handler = scripted_server
        handler.status, handler.body = 200, b"ok"
        assert remote_health(PeerEndpoint(url)) is False

    def test_unknown_column_type_rejected(self, scripted_server):
        url, handler = scripted_server
        handler.status = 200
        handler.body = (
            b'{"columns":[{"name":"a","type":"decimal"}],"rows":[[1]]}'
        )
        with pytest.raises(DecodeError, match="decimal"):
            remote_query(PeerEndpoint(url), "SELECT a FROM t")
