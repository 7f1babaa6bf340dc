"""Benchmark harness: query response time over three federation shapes
(one local table; a two-source join on one server; a four-table join
spanning two servers) and response-time scaling with the number of rows
requested.

The harness launches its own servers on loopback and measures end-to-end
over HTTP, wire codec included. Every query gets one unmeasured warm-up
run so connection setup and import costs do not land in the first sample.
"""

import logging
import os
import random
import statistics
import time
from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple

from ..catalog import DataType, serialize_lower_spec
from ..errors import ScenarioUnavailable
from ..executor import Database, FixtureTable, ReferenceBackend, write_fixture
from ..fedserver import FederationCore, ServerConfig, start_federation_server
from ..remoteclient import (
    HttpRemoteClient,
    PeerEndpoint,
    RlsClient,
    remote_health,
    remote_query,
)
from ..rls import create_app as create_rls_app
from ..serving import start_server
from .ntuple import NtupleSpec, generate_ntuple

log = logging.getLogger(__name__)

LATENCY_HEADER = "label,servers,distributed,tables,rows_returned,mean_ms,stddev_ms"
SCALING_HEADER = "rows_returned,response_ms"


@dataclass(frozen=True)
class ScenarioQuery:
    label: str
    sql: str
    servers: int
    distributed: bool
    tables: int


@dataclass(frozen=True)
class BenchRow:
    label: str
    servers: int
    distributed: bool
    tables: int
    rows_returned: int
    mean_ms: float
    stddev_ms: float
    samples_ms: Tuple[float, ...]


@dataclass(frozen=True)
class BenchReport:
    rows: Tuple[BenchRow, ...]
    repetitions: int


@dataclass(frozen=True)
class ScalingPoint:
    requested: int
    rows_returned: int
    response_ms: float


@dataclass
class RunningScenario:
    """Servers launched for a benchmark, plus how to query and stop them."""

    server_url: str  # the originator every benchmark query goes to
    health_urls: Tuple[str, ...]
    queries: Tuple[ScenarioQuery, ...]
    cleanups: List[Callable[[], None]] = field(default_factory=list)

    def shutdown(self) -> None:
        _teardown(self.cleanups)


def _teardown(cleanups: List[Callable[[], None]]) -> None:
    for fn in reversed(cleanups):
        try:
            fn()
        except Exception as exc:
            log.debug("scenario teardown step failed: %s", exc)


def _start_federation(rls_url: str, remote: HttpRemoteClient):
    core = FederationCore(
        ServerConfig(refresh_interval_seconds=3600.0),
        {"reference": ReferenceBackend()},
        rls=RlsClient(rls_url),
        remote_client=remote,
    )
    return start_federation_server(core)


def _register(core: FederationCore, database: Database, work_dir: str) -> str:
    path = os.path.join(work_dir, "%s.fixture" % database.name)
    write_fixture(path, list(database.tables.values()))
    spec_xml = serialize_lower_spec(database.to_lower_spec()).decode("utf-8")
    return core.register_database("reference", path, spec_inline=spec_xml)


def launch_latency_scenario(
    work_dir: str, small: int = 300, large: int = 6000, seed: int = 1
) -> RunningScenario:
    """Two federation servers and an RLS. The near server holds t1 and t2
    in separate sources; the far one holds t3 and t4. Key columns line up
    so each query returns `small` rows."""
    rng = random.Random(seed)

    def table(name: str, count: int) -> FixtureTable:
        return FixtureTable(
            name,
            [("k", DataType.INTEGER), ("val", DataType.REAL)],
            [[i, rng.random()] for i in range(count)],
        )

    cleanups: List[Callable[[], None]] = []
    try:
        rls_http = start_server(create_rls_app())
        cleanups.append(rls_http.shutdown)
        remote = HttpRemoteClient()
        near = _start_federation(rls_http.url, remote)
        cleanups.append(near.shutdown)
        far = _start_federation(rls_http.url, remote)
        cleanups.append(far.shutdown)
        _register(near.core, Database("s1", [table("t1", small)]), work_dir)
        _register(near.core, Database("s2", [table("t2", large)]), work_dir)
        _register(far.core, Database("s3", [table("t3", large), table("t4", large)]), work_dir)
    except BaseException:
        _teardown(cleanups)
        raise
    queries = (
        ScenarioQuery(
            "local-1-table",
            "SELECT k, val FROM t1",
            servers=1,
            distributed=False,
            tables=1,
        ),
        ScenarioQuery(
            "one-server-2-tables",
            "SELECT t1.k, t2.val FROM t1, t2 WHERE t1.k = t2.k",
            servers=1,
            distributed=True,
            tables=2,
        ),
        ScenarioQuery(
            "two-servers-4-tables",
            "SELECT t1.k, t2.val, t3.val, t4.val FROM t1, t2, t3, t4"
            " WHERE t1.k = t2.k AND t2.k = t3.k AND t3.k = t4.k",
            servers=2,
            distributed=True,
            tables=4,
        ),
    )
    return RunningScenario(
        near.url, (near.url, far.url, rls_http.url), queries, cleanups
    )


def launch_scaling_scenario(
    work_dir: str, n_events: int = 2600, n_vars: int = 24, seed: int = 3
) -> RunningScenario:
    """One server holding a generated ntuple table to slice rows from."""
    cleanups: List[Callable[[], None]] = []
    try:
        rls_http = start_server(create_rls_app())
        cleanups.append(rls_http.shutdown)
        server = _start_federation(rls_http.url, HttpRemoteClient())
        cleanups.append(server.shutdown)
        events = generate_ntuple(NtupleSpec(n_events, n_vars, seed))
        _register(server.core, Database("ntuples", [events]), work_dir)
    except BaseException:
        _teardown(cleanups)
        raise
    return RunningScenario(server.url, (server.url, rls_http.url), (), cleanups)


def check_scenario(scenario: RunningScenario) -> None:
    for url in scenario.health_urls:
        endpoint = PeerEndpoint(url, request_timeout=5.0, connect_timeout=2.0)
        if not remote_health(endpoint):
            raise ScenarioUnavailable("server %s did not answer its health check" % url)


def _timed_query(endpoint: PeerEndpoint, sql: str) -> Tuple[int, float]:
    started = time.perf_counter()
    result = remote_query(endpoint, sql)
    return len(result.rows), (time.perf_counter() - started) * 1000.0


def bench_latency(scenario: RunningScenario, repetitions: int = 5) -> BenchReport:
    if repetitions < 5:
        raise ValueError("a latency report needs at least 5 repetitions")
    check_scenario(scenario)
    endpoint = PeerEndpoint(scenario.server_url)
    rows = []
    for query in scenario.queries:
        remote_query(endpoint, query.sql)  # warm-up, not measured
        samples: List[float] = []
        returned = 0
        for _ in range(repetitions):
            returned, elapsed = _timed_query(endpoint, query.sql)
            samples.append(elapsed)
        rows.append(
            BenchRow(
                query.label,
                query.servers,
                query.distributed,
                query.tables,
                returned,
                statistics.mean(samples),
                statistics.stdev(samples),
                tuple(samples),
            )
        )
    return BenchReport(tuple(rows), repetitions)


def bench_scaling(
    scenario: RunningScenario, counts: Sequence[int], repetitions: int = 5
) -> List[ScalingPoint]:
    if repetitions < 1:
        raise ValueError("repetitions must be positive")
    check_scenario(scenario)
    endpoint = PeerEndpoint(scenario.server_url)
    points = []
    for count in counts:
        sql = "SELECT * FROM events ORDER BY event_id LIMIT %d" % count
        remote_query(endpoint, sql)  # warm-up, not measured
        samples: List[float] = []
        returned = 0
        for _ in range(repetitions):
            returned, elapsed = _timed_query(endpoint, sql)
            samples.append(elapsed)
        points.append(ScalingPoint(count, returned, statistics.mean(samples)))
    return points


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> Tuple[float, float, float]:
    """Least squares slope, intercept and coefficient of determination."""
    try:
        fit = statistics.linear_regression(xs, ys)
        r2 = statistics.correlation(xs, ys) ** 2
    except statistics.StatisticsError as exc:
        raise ValueError(str(exc)) from None
    return fit.slope, fit.intercept, r2


def latency_csv(report: BenchReport) -> str:
    lines = [LATENCY_HEADER]
    for row in report.rows:
        lines.append(
            "%s,%d,%s,%d,%d,%.3f,%.3f"
            % (
                row.label,
                row.servers,
                "true" if row.distributed else "false",
                row.tables,
                row.rows_returned,
                row.mean_ms,
                row.stddev_ms,
            )
        )
    return "\n".join(lines) + "\n"


def scaling_csv(points: Sequence[ScalingPoint]) -> str:
    lines = [SCALING_HEADER]
    for point in points:
        lines.append("%d,%.3f" % (point.rows_returned, point.response_ms))
    return "\n".join(lines) + "\n"
