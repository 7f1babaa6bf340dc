"""Shared builders for the test suite."""

from fedsql.catalog import DataType, serialize_lower_spec
from fedsql.executor import DEFAULT_ROW_CAP, Database, FixtureTable, ReferenceBackend
from fedsql.fedserver import FederationCore, ServerConfig


def demo_database(name: str = "demo") -> Database:
    """Two small joined tables used all over the suite."""
    return Database(
        name,
        [
            FixtureTable(
                "runs",
                [("run", DataType.INTEGER), ("year", DataType.INTEGER)],
                [[1, 2003], [2, 2004], [3, 2004]],
            ),
            FixtureTable(
                "events",
                [
                    ("event_id", DataType.INTEGER),
                    ("run", DataType.INTEGER),
                    ("v0", DataType.REAL),
                ],
                [[10, 1, 0.5], [11, 2, 0.25], [12, 2, 0.75], [13, 3, 0.1]],
            ),
        ],
    )


class LoopbackClient:
    """In-process stand-in for the HTTP peer-query client."""

    def __init__(self, cores=None):
        self.cores = dict(cores or {})

    def add(self, url: str, core: FederationCore) -> None:
        self.cores[url] = core

    def query(self, url: str, sql: str, no_forward: bool = False):
        return self.cores[url].handle_query(sql, no_forward=no_forward)


def make_core(
    databases,
    rls=None,
    remote_client=None,
    public_url: str = "",
    row_cap: int = DEFAULT_ROW_CAP,
) -> FederationCore:
    """A federation core with one registered source per database, all
    backed by shared in-memory stores."""
    drivers = {"ref-%s" % database.name: ReferenceBackend(database) for database in databases}
    config = ServerConfig(
        refresh_interval_seconds=3600.0,
        row_cap=row_cap,
        server_public_url=public_url,
    )
    core = FederationCore(config, drivers, rls=rls, remote_client=remote_client)
    for database in databases:
        spec = serialize_lower_spec(database.to_lower_spec()).decode("utf-8")
        core.register_database(
            "ref-%s" % database.name, "memory:%s" % database.name, spec_inline=spec
        )
    return core


def assert_same_result(actual, expected) -> None:
    assert [c.name for c in actual.columns] == [c.name for c in expected.columns]
    assert actual.rows == expected.rows
