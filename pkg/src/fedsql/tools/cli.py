"""Operator command line: query a federation, register databases, run the
warehouse pipeline, serve, and benchmark.

Machine-readable output goes to stdout, diagnostics to stderr. Exit codes:
0 success, 2 usage, and one code per error family otherwise.
"""

import csv
import os
import sys
import tempfile
import time
from datetime import datetime

import click

from ..catalog import introspect as introspect_schema
from ..catalog import serialize_lower_spec
from ..errors import BackendUnavailable, FederationError, exit_code_for
from ..etl import read_job, run_job, timings_csv
from ..executor import (
    DEFAULT_ROW_CAP,
    Database,
    ReferenceBackend,
    evaluate_sql,
    load_database,
    write_fixture,
)
from ..fedserver import FederationCore, ServerConfig, start_federation_server
from ..remoteclient import (
    HttpRemoteClient,
    PeerEndpoint,
    RlsClient,
    remote_query,
    remote_register,
)
from ..rls import create_app as create_rls_app
from ..serving import start_server
from .bench import (
    bench_latency as measure_latency,
    bench_scaling as measure_scaling,
    latency_csv,
    launch_latency_scenario,
    launch_scaling_scenario,
    scaling_csv,
)
from .ntuple import NtupleSpec, generate_ntuple


def _default_drivers():
    return {"reference": ReferenceBackend()}


def _make_driver(name: str):
    drivers = _default_drivers()
    if name not in drivers:
        raise BackendUnavailable(name, "no driver named %r is installed" % name)
    return drivers[name]


def _db_name(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def _cell_text(cell) -> str:
    if cell is None:
        return ""
    if isinstance(cell, datetime):
        return cell.isoformat()
    if isinstance(cell, float):
        return repr(cell)
    return str(cell)


def _block(stop) -> None:
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        pass
    finally:
        stop()


@click.group()
def cli():
    """Federated SQL middleware tools."""


@cli.command()
@click.option("--server", required=True, help="Federation server url.")
@click.option("--no-forward", is_flag=True, help="Answer from local sources only.")
@click.argument("sql")
def query(server, no_forward, sql):
    """Runs SQL against a federation server and prints the result as CSV."""
    result = remote_query(PeerEndpoint(server), sql, no_forward=no_forward)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow([column.name for column in result.columns])
    for row in result.rows:
        writer.writerow([_cell_text(cell) for cell in row])


@cli.command()
@click.option("--server", required=True, help="Federation server url.")
@click.option("--driver", required=True, help="Backend driver name.")
@click.option("--url", "db_url", required=True, help="Database url for the driver.")
@click.option(
    "--spec-file",
    type=click.Path(exists=True, dir_okay=False),
    help="Schema spec document to send inline.",
)
@click.option("--spec-url", help="Schema spec reference the server fetches itself.")
@click.option("--username", default="")
@click.option("--password", default="")
def register(server, driver, db_url, spec_file, spec_url, username, password):
    """Registers a database with a federation server, prints the source id."""
    if (spec_file is None) == (spec_url is None):
        raise click.UsageError("pass exactly one of --spec-file / --spec-url")
    spec_inline = None
    if spec_file is not None:
        with open(spec_file, encoding="utf-8") as fh:
            spec_inline = fh.read()
    source_id = remote_register(
        PeerEndpoint(server),
        driver,
        db_url,
        spec_inline=spec_inline,
        spec_url=spec_url,
        username=username,
        password=password,
    )
    click.echo(source_id)


@cli.command()
@click.option("--driver", default="reference", show_default=True)
@click.option("--url", "db_url", required=True, help="Database url for the driver.")
@click.option("--username", default="")
@click.option("--password", default="")
@click.option(
    "--database-name",
    default=None,
    help="Logical database name (defaults to the url's basename).",
)
def introspect(driver, db_url, username, password, database_name):
    """Prints a database's live schema as a spec document."""
    adapter = _make_driver(driver)
    handle = adapter.open(db_url, username, password)
    try:
        name = database_name or _db_name(db_url)
        lower = introspect_schema(adapter, handle, name)
    finally:
        adapter.close(handle)
    sys.stdout.write(serialize_lower_spec(lower).decode("utf-8"))


@cli.group()
def etl():
    """Warehouse pipeline commands."""


@etl.command("run")
@click.option(
    "--job",
    "job_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="Job file of mapping and view stanzas.",
)
@click.option(
    "--warehouse",
    required=True,
    type=click.Path(dir_okay=False),
    help="Warehouse fixture file, created when missing.",
)
@click.option(
    "--mart",
    required=True,
    type=click.Path(dir_okay=False),
    help="Data-mart fixture file, created when missing.",
)
@click.option("--server", default=None, help="Extract through this federation server.")
@click.option(
    "--source",
    default=None,
    type=click.Path(exists=True, dir_okay=False),
    help="Extract from a local fixture file instead of a server.",
)
@click.option(
    "--stage-dir",
    default=None,
    type=click.Path(file_okay=False),
    help="Where stage files go (default: a temporary directory).",
)
@click.option("--direct", is_flag=True, help="Skip the temporary stage file.")
def etl_run(job_path, warehouse, mart, server, source, stage_dir, direct):
    """Runs a job: mappings into the warehouse, then views into the mart.

    Phase timings are printed as CSV on stdout."""
    if (server is None) == (source is None):
        raise click.UsageError("pass exactly one of --server / --source")
    job = read_job(job_path)
    if server is not None:
        endpoint = PeerEndpoint(server)

        def run_query(sql):
            return remote_query(endpoint, sql)

    else:
        source_db = load_database(source)

        def run_query(sql):
            return evaluate_sql(source_db, sql)

    warehouse_db = (
        load_database(warehouse) if os.path.exists(warehouse) else Database(_db_name(warehouse))
    )
    mart_db = load_database(mart) if os.path.exists(mart) else Database(_db_name(mart))
    if stage_dir is not None:
        os.makedirs(stage_dir, exist_ok=True)
        timings = run_job(run_query, job, warehouse_db, mart_db, stage_dir, direct)
    else:
        with tempfile.TemporaryDirectory(prefix="fedsql-stage-") as tmp:
            timings = run_job(run_query, job, warehouse_db, mart_db, tmp, direct)
    for path, database in ((warehouse, warehouse_db), (mart, mart_db)):
        if database.tables:
            write_fixture(path, list(database.tables.values()))
    sys.stdout.write(timings_csv(timings))


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8040, show_default=True, type=int)
@click.option("--rls", "rls_url", default=None, help="RLS base url for publish and lookup.")
@click.option("--public-url", default=None, help="Url peers use to reach this server.")
@click.option(
    "--refresh-interval",
    default=30.0,
    show_default=True,
    type=float,
    help="Seconds between schema refreshes.",
)
@click.option("--row-cap", default=DEFAULT_ROW_CAP, show_default=True, type=int)
def serve(host, port, rls_url, public_url, refresh_interval, row_cap):
    """Starts a federation server and blocks until interrupted."""
    try:
        config = ServerConfig(
            listen_host=host,
            listen_port=port,
            rls_url=rls_url or "",
            refresh_interval_seconds=refresh_interval,
            row_cap=row_cap,
            server_public_url=public_url or "",
        )
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None
    rls = RlsClient(rls_url) if rls_url else None
    core = FederationCore(
        config, _default_drivers(), rls=rls, remote_client=HttpRemoteClient()
    )
    server = start_federation_server(core)
    click.echo("federation server listening on %s" % server.url, err=True)
    _block(server.shutdown)


@cli.command("rls-serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8030, show_default=True, type=int)
def rls_serve(host, port):
    """Starts a replica location service and blocks until interrupted."""
    handle = start_server(create_rls_app(), host, port)
    click.echo("rls listening on %s" % handle.url, err=True)
    _block(handle.shutdown)


@cli.group(name="bench")
def bench_group():
    """Response-time benchmarks, self-hosted on loopback."""


@bench_group.command("latency")
@click.option("--repetitions", default=5, show_default=True, type=int)
def bench_latency_command(repetitions):
    """Mean response time over the three reference query shapes."""
    with tempfile.TemporaryDirectory(prefix="fedsql-bench-") as work_dir:
        scenario = launch_latency_scenario(work_dir)
        try:
            report = measure_latency(scenario, repetitions)
        finally:
            scenario.shutdown()
    sys.stdout.write(latency_csv(report))


@bench_group.command("scaling")
@click.option(
    "--counts",
    default="21,527,1033,1539,2045,2551",
    show_default=True,
    help="Comma-separated LIMIT values.",
)
@click.option("--repetitions", default=5, show_default=True, type=int)
def bench_scaling_command(counts, repetitions):
    """Response time versus number of rows requested."""
    try:
        parsed = [int(part) for part in counts.split(",") if part.strip() != ""]
    except ValueError:
        raise click.UsageError("--counts wants comma-separated integers") from None
    with tempfile.TemporaryDirectory(prefix="fedsql-bench-") as work_dir:
        scenario = launch_scaling_scenario(work_dir)
        try:
            points = measure_scaling(scenario, parsed, repetitions)
        finally:
            scenario.shutdown()
    sys.stdout.write(scaling_csv(points))


@cli.command("gen-ntuple")
@click.option("--events", required=True, type=int, help="Number of rows.")
@click.option("--vars", "n_vars", required=True, type=int, help="Number of real-valued columns.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--table-name", default="events", show_default=True)
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
def gen_ntuple(events, n_vars, seed, table_name, output):
    """Writes a generated ntuple fixture file."""
    try:
        spec = NtupleSpec(events, n_vars, seed)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None
    write_fixture(output, [generate_ntuple(spec, table_name)])
    click.echo("%s: %d events, %d variables" % (output, events, n_vars), err=True)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        return 130
    except click.UsageError as exc:
        exc.show()
        return 2
    except click.ClickException as exc:
        exc.show()
        return 1
    except FederationError as exc:
        click.echo("error: %s" % exc, err=True)
        return exit_code_for(exc)
    except KeyboardInterrupt:
        return 130
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
