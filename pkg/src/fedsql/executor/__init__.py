from .adapters import BackendAdapter
from .engine import (
    DEFAULT_ROW_CAP,
    LocalRoute,
    apply_residual,
    execute_plan,
    hash_equi_join,
    project,
)
from .fixtures import (
    FixtureTable,
    format_fixture,
    format_values_line,
    parse_fixture,
    parse_values_line,
    read_fixture,
    write_fixture,
)
from .reference import (
    Database,
    ReferenceBackend,
    evaluate_ast,
    evaluate_bound,
    evaluate_sql,
    load_database,
    load_reference_backend,
)
from .table import (
    Column,
    ResultTable,
    SortKey,
    canonical_sorted,
    cell_matches_type,
    compare_cells,
    finalize_rows,
    order_rows,
    types_comparable,
)

__all__ = [
    "BackendAdapter",
    "Column",
    "Database",
    "DEFAULT_ROW_CAP",
    "FixtureTable",
    "LocalRoute",
    "ReferenceBackend",
    "ResultTable",
    "SortKey",
    "apply_residual",
    "canonical_sorted",
    "cell_matches_type",
    "compare_cells",
    "evaluate_ast",
    "evaluate_bound",
    "evaluate_sql",
    "execute_plan",
    "finalize_rows",
    "format_fixture",
    "format_values_line",
    "hash_equi_join",
    "load_database",
    "load_reference_backend",
    "order_rows",
    "parse_fixture",
    "parse_values_line",
    "project",
    "read_fixture",
    "write_fixture",
]
