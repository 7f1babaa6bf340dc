"""HTTP face of the federation server."""

from dataclasses import dataclass

from fastapi import FastAPI

from ..serving import ServerHandle, install_error_handlers, json_response, start_server
from ..wire import (
    HealthResponse,
    QueryRequest,
    RefreshResponse,
    RegisterRequest,
    RegisterResponse,
    encode_result,
)
from .core import FederationCore, RefreshLoop


def create_app(core: FederationCore) -> FastAPI:
    app = FastAPI(title="fedsql server", docs_url=None, redoc_url=None)
    install_error_handlers(app)
    app.state.core = core

    @app.post("/query")
    def query(request: QueryRequest):
        result = core.handle_query(request.sql, no_forward=request.no_forward)
        return json_response(encode_result(result))

    @app.post("/register")
    def register(request: RegisterRequest):
        source_id = core.register_database(
            driver=request.driver,
            url=request.url,
            spec_inline=request.spec_inline,
            spec_url=request.spec_url,
            username=request.username,
            password=request.password,
        )
        return json_response(RegisterResponse(source_id=source_id))

    @app.post("/refresh")
    def refresh():
        return json_response(RefreshResponse(changed=core.refresh_schemas()))

    @app.get("/schema")
    def schema():
        return json_response(core.schema_documents())

    @app.get("/health")
    def health():
        return json_response(HealthResponse())

    return app


@dataclass
class FederationServer:
    """A running server: core, http listener and the refresh loop."""

    core: FederationCore
    http: ServerHandle
    refresh_loop: RefreshLoop

    @property
    def url(self) -> str:
        return self.http.url

    def shutdown(self) -> None:
        self.refresh_loop.stop()
        self.http.shutdown()
        self.core.close()


def start_federation_server(core: FederationCore, host=None, port=None) -> FederationServer:
    """Binds, starts serving and arms the refresh loop.

    The advertised url defaults to the bound address so that RLS entries
    published later point back at this listener.
    """
    host = core.config.listen_host if host is None else host
    port = core.config.listen_port if port is None else port
    http = start_server(create_app(core), host, port)
    if not core.public_url():
        core.set_public_url(http.url)
    loop = RefreshLoop(core, core.config.refresh_interval_seconds).start()
    return FederationServer(core, http, loop)
