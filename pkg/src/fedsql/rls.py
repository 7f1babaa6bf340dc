"""Replica Location Service: the central mapping from logical table names
to the federation-server urls hosting them, plus its HTTP app.

Publishing is idempotent (a re-publish only refreshes the timestamp) and
lookups return the urls sorted, so downstream replica choice (take the
first) is deterministic no matter the publish order.
"""

import threading
import time
from typing import Callable, Dict, List, Sequence
from urllib.parse import urlsplit

from fastapi import FastAPI, Query

from .errors import MalformedRequest, MalformedUrl
from .serving import install_error_handlers, json_response
from .wire import AckResponse, HealthResponse, LookupResponse, PublishRequest


def check_server_url(url: str) -> str:
    parts = urlsplit(url)
    if parts.scheme not in ("http", "https") or not parts.netloc:
        raise MalformedUrl("not an http(s) server url: %r" % url)
    return url


def _check_tables(tables: Sequence[str]) -> None:
    for name in tables:
        if not name or any(ch.isspace() for ch in name):
            raise MalformedRequest("bad table name %r" % name)


class ReplicaIndex:
    """table name -> {server url: published_at}."""

    def __init__(self, clock: Callable[[], float] = time.time):
        self._entries: Dict[str, Dict[str, float]] = {}
        self._lock = threading.Lock()
        self._clock = clock

    def publish(self, server_url: str, tables: Sequence[str]) -> int:
        check_server_url(server_url)
        _check_tables(tables)
        now = self._clock()
        with self._lock:
            for table in tables:
                self._entries.setdefault(table, {})[server_url] = now
        return len(tables)

    def unpublish(self, server_url: str, tables: Sequence[str]) -> int:
        check_server_url(server_url)
        _check_tables(tables)
        removed = 0
        with self._lock:
            for table in tables:
                servers = self._entries.get(table)
                if servers is not None and server_url in servers:
                    del servers[server_url]
                    removed += 1
                    if not servers:
                        del self._entries[table]
        return removed

    def lookup(self, table: str) -> List[str]:
        with self._lock:
            return sorted(self._entries.get(table, {}))

    def published_at(self, table: str, server_url: str) -> float:
        with self._lock:
            return self._entries[table][server_url]

    def snapshot(self) -> Dict[str, List[str]]:
        with self._lock:
            return {table: sorted(servers) for table, servers in self._entries.items()}


def create_app(index: ReplicaIndex = None) -> FastAPI:
    index = index if index is not None else ReplicaIndex()
    app = FastAPI(title="rls")
    install_error_handlers(app)
    app.state.index = index

    @app.post("/rls/publish")
    def publish(req: PublishRequest):
        return json_response(AckResponse(ack=index.publish(req.server, req.tables)))

    @app.post("/rls/unpublish")
    def unpublish(req: PublishRequest):
        return json_response(AckResponse(ack=index.unpublish(req.server, req.tables)))

    @app.get("/rls/lookup")
    def lookup(table: str = Query(...)):
        return json_response(LookupResponse(servers=index.lookup(table)))

    @app.get("/health")
    def health():
        return json_response(HealthResponse())

    return app
