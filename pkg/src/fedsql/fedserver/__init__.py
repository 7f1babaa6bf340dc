"""Federation server: core state machine plus its HTTP face."""

from .app import FederationServer, create_app, start_federation_server
from .core import (
    FederationCore,
    RefreshLoop,
    RequestLogEntry,
    ServerConfig,
    ServerState,
    SourceRuntime,
)

__all__ = [
    "FederationCore",
    "FederationServer",
    "RefreshLoop",
    "RequestLogEntry",
    "ServerConfig",
    "ServerState",
    "SourceRuntime",
    "create_app",
    "start_federation_server",
]
