"""Federation server core: registered-source state, the query pipeline
(parse, resolve, route, plan, execute), runtime plug-in registration and
the schema drift tracker.

State lives in an immutable snapshot swapped atomically, so concurrent
queries always see either the old or the new catalog, never a mix;
mutations (register, refresh) are serialized by one lock.
"""

import logging
import threading
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import httpx

from ..catalog import (
    DataDictionary,
    Fingerprint,
    LowerSpec,
    UpperSpec,
    UpperSpecEntry,
    build_dictionary,
    fingerprint,
    introspect,
    parse_lower_spec,
    serialize_lower_spec,
    serialize_upper_spec,
    specs_changed,
)
from ..errors import (
    BackendUnavailable,
    FederationError,
    MalformedRequest,
    MalformedUrl,
    UnknownTable,
    UnresolvableRef,
)
from ..executor import (
    DEFAULT_ROW_CAP,
    BackendAdapter,
    LocalRoute,
    ResultTable,
    execute_plan,
)
from ..planner import partition_tables, plan
from ..sqlfront import parse_sql, resolve_names
from ..wire import SchemaResponse

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ServerConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 0
    rls_url: str = ""
    refresh_interval_seconds: float = 30.0
    row_cap: int = DEFAULT_ROW_CAP
    server_public_url: str = ""

    def __post_init__(self):
        if self.refresh_interval_seconds <= 0:
            raise ValueError("refresh_interval_seconds must be positive")


@dataclass
class SourceRuntime:
    """One registered source: its catalog entry plus the open connection."""

    entry: UpperSpecEntry
    adapter: BackendAdapter
    handle: int
    lower: LowerSpec
    spec_fingerprint: Fingerprint
    # one query at a time per shared handle
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


@dataclass(frozen=True)
class ServerState:
    upper: UpperSpec
    lowers: dict  # source_id -> LowerSpec
    dictionary: DataDictionary
    runtimes: dict  # source_id -> SourceRuntime


@dataclass(frozen=True)
class RequestLogEntry:
    timestamp: float
    sql: str
    no_forward: bool
    forwards: Tuple[str, ...]  # peer urls sub-queries were sent to


class _SerialAdapter:
    """Serializes execute() calls that share one handle."""

    def __init__(self, inner: BackendAdapter, lock: threading.Lock):
        self._inner = inner
        self._lock = lock

    def execute(self, handle, select_fields, table_names, where_clause):
        with self._lock:
            return self._inner.execute(handle, select_fields, table_names, where_clause)


def _fetch_spec(ref: str) -> bytes:
    try:
        if ref.startswith("http://") or ref.startswith("https://"):
            response = httpx.get(ref, timeout=10.0)
            if response.status_code >= 400:
                raise UnresolvableRef(
                    "GET %s answered HTTP %d" % (ref, response.status_code)
                )
            return response.content
        with open(ref, "rb") as fh:
            return fh.read()
    except UnresolvableRef:
        raise
    except (OSError, httpx.HTTPError) as exc:
        raise UnresolvableRef("cannot fetch spec %r: %s" % (ref, exc)) from exc


class FederationCore:
    def __init__(
        self,
        config: ServerConfig,
        drivers: Dict[str, BackendAdapter],
        rls=None,
        remote_client=None,
    ):
        self._config = config
        self._drivers = dict(drivers)
        self._rls = rls
        self._remote = remote_client
        self._state = ServerState(UpperSpec(()), {}, DataDictionary({}, {}), {})
        self._mutate = threading.Lock()
        self._log: List[RequestLogEntry] = []
        self._log_lock = threading.Lock()
        self._public_url = config.server_public_url

    @property
    def config(self) -> ServerConfig:
        return self._config

    @property
    def state(self) -> ServerState:
        return self._state

    def set_public_url(self, url: str) -> None:
        self._public_url = url

    def public_url(self) -> str:
        return self._public_url

    # --- queries ---------------------------------------------------------------

    def handle_query(self, sql: str, no_forward: bool = False) -> ResultTable:
        state = self._state  # one snapshot for the whole query

        def lookup(table: str):
            if no_forward:
                raise UnknownTable(
                    "table %r is not registered here and forwarding is disabled"
                    % table
                )
            if self._rls is None:
                raise UnknownTable(
                    "table %r is not registered here and no RLS is configured" % table
                )
            return self._rls.lookup(table)

        bound = resolve_names(parse_sql(sql), state.dictionary)
        query_plan = plan(bound, partition_tables(bound, lookup))
        routes = {
            source_id: LocalRoute(
                _SerialAdapter(runtime.adapter, runtime.lock), runtime.handle
            )
            for source_id, runtime in state.runtimes.items()
        }
        forwards = tuple(
            sq.target.ident for sq in query_plan.subqueries if not sq.target.is_local
        )
        with self._log_lock:
            self._log.append(RequestLogEntry(time.time(), sql, no_forward, forwards))
        return execute_plan(
            query_plan, routes, self._remote, row_cap=self._config.row_cap
        )

    def request_log(self) -> List[RequestLogEntry]:
        with self._log_lock:
            return list(self._log)

    # --- registration ----------------------------------------------------------

    def register_database(
        self,
        driver: str,
        url: str,
        spec_inline: Optional[str] = None,
        spec_url: Optional[str] = None,
        username: str = "",
        password: str = "",
    ) -> str:
        if (spec_inline is None) == (spec_url is None):
            raise MalformedRequest("exactly one of spec_inline/spec_url is required")
        with self._mutate:
            state = self._state
            raw = (
                spec_inline.encode("utf-8")
                if spec_inline is not None
                else _fetch_spec(spec_url)
            )
            lower = parse_lower_spec(raw)
            adapter = self._drivers.get(driver)
            if adapter is None:
                raise BackendUnavailable(
                    driver, "no driver named %r is installed" % driver
                )
            source_id = self._fresh_source_id(lower.database_logical_name, state)
            entry = UpperSpecEntry(
                source_id, url, driver, spec_url or "inline:%s" % source_id
            )
            new_upper = UpperSpec(state.upper.entries + (entry,))
            new_lowers = dict(state.lowers)
            new_lowers[source_id] = lower
            # collisions abort here, before any side effect
            dictionary = build_dictionary(new_upper, new_lowers)
            handle = adapter.open(url, username, password)
            try:
                self._publish([table.logical_name for table in lower.tables])
            except Exception:
                adapter.close(handle)
                raise
            runtime = SourceRuntime(
                entry, adapter, handle, lower, fingerprint(serialize_lower_spec(lower))
            )
            new_runtimes = dict(state.runtimes)
            new_runtimes[source_id] = runtime
            self._state = ServerState(new_upper, new_lowers, dictionary, new_runtimes)
        return source_id

    @staticmethod
    def _fresh_source_id(base: str, state: ServerState) -> str:
        if base not in state.lowers:
            return base
        n = 2
        while "%s_%d" % (base, n) in state.lowers:
            n += 1
        return "%s_%d" % (base, n)

    def _publish(self, tables: List[str]) -> None:
        if self._rls is None or not tables:
            return
        if not self._public_url:
            raise MalformedUrl(
                "server_public_url must be set before publishing to the RLS"
            )
        self._rls.publish(self._public_url, tables)

    def _unpublish(self, tables: List[str]) -> None:
        if self._rls is None or not tables or not self._public_url:
            return
        self._rls.unpublish(self._public_url, tables)

    # --- schema tracking ---------------------------------------------------------

    def refresh_schemas(self) -> List[str]:
        changed: List[str] = []
        with self._mutate:
            state = self._state
            new_lowers = dict(state.lowers)
            new_runtimes = dict(state.runtimes)
            for source_id, runtime in state.runtimes.items():
                try:
                    with runtime.lock:
                        fresh = introspect(
                            runtime.adapter,
                            runtime.handle,
                            runtime.lower.database_logical_name,
                        )
                except BackendUnavailable as exc:
                    log.warning("refresh: source %s unavailable: %s", source_id, exc)
                    continue
                new_fingerprint = fingerprint(serialize_lower_spec(fresh))
                if not specs_changed(runtime.spec_fingerprint, new_fingerprint):
                    continue
                changed.append(source_id)
                old_tables = {table.logical_name for table in runtime.lower.tables}
                fresh_tables = {table.logical_name for table in fresh.tables}
                self._publish(sorted(fresh_tables - old_tables))
                self._unpublish(sorted(old_tables - fresh_tables))
                new_lowers[source_id] = fresh
                new_runtimes[source_id] = SourceRuntime(
                    runtime.entry,
                    runtime.adapter,
                    runtime.handle,
                    fresh,
                    new_fingerprint,
                    lock=runtime.lock,
                )
            if changed:
                dictionary = build_dictionary(state.upper, new_lowers)
                self._state = ServerState(
                    state.upper, new_lowers, dictionary, new_runtimes
                )
        return changed

    # --- misc ---------------------------------------------------------------------

    def schema_documents(self) -> SchemaResponse:
        state = self._state
        lowers = {
            source_id: serialize_lower_spec(state.lowers[source_id]).decode("utf-8")
            for source_id in sorted(state.lowers)
        }
        return SchemaResponse(
            upper=serialize_upper_spec(state.upper).decode("utf-8"), lowers=lowers
        )

    def close(self) -> None:
        for runtime in self._state.runtimes.values():
            runtime.adapter.close(runtime.handle)


class RefreshLoop:
    """Periodic schema tracker thread."""

    def __init__(self, core: FederationCore, interval_seconds: float):
        self._core = core
        self._interval = interval_seconds
        self._stop = threading.Event()
        self._thread = threading.Thread(
            target=self._run, daemon=True, name="fedsql-refresh"
        )

    def start(self) -> "RefreshLoop":
        self._thread.start()
        return self

    def _run(self) -> None:
        while not self._stop.wait(self._interval):
            try:
                self._core.refresh_schemas()
            except FederationError as exc:
                log.warning("scheduled refresh failed: %s", exc)

    def stop(self) -> None:
        self._stop.set()
