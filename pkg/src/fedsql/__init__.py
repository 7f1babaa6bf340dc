"""fedsql: a federated relational query middleware.

Many heterogeneous table stores, one virtual database: a catalog maps
logical names onto physical schemas, a planner splits each query into
per-source sub-queries plus a merge plan, the executor joins the partial
results, and a replica location service routes names no local source
holds to peer servers.
"""

from .catalog import (
    DataDictionary,
    DataType,
    LowerSpec,
    UpperSpec,
    build_dictionary,
    parse_lower_spec,
    parse_upper_spec,
    serialize_lower_spec,
    serialize_upper_spec,
)
from .errors import FederationError
from .executor import Database, ReferenceBackend, ResultTable, evaluate_sql
from .fedserver import FederationCore, ServerConfig, start_federation_server
from .planner import QueryPlan, partition_tables, plan
from .rls import ReplicaIndex
from .sqlfront import parse_sql, resolve_names

__version__ = "0.1.0"

__all__ = [
    "DataDictionary",
    "DataType",
    "Database",
    "FederationCore",
    "FederationError",
    "LowerSpec",
    "QueryPlan",
    "ReferenceBackend",
    "ReplicaIndex",
    "ResultTable",
    "ServerConfig",
    "UpperSpec",
    "__version__",
    "build_dictionary",
    "evaluate_sql",
    "parse_lower_spec",
    "parse_sql",
    "parse_upper_spec",
    "plan",
    "partition_tables",
    "resolve_names",
    "serialize_lower_spec",
    "serialize_upper_spec",
    "start_federation_server",
]
