"""HTTP hosting harness: run a FastAPI app on a background uvicorn server
with the socket bound up front (so the ephemeral port is known before any
request) and shared error handling that maps FederationError onto the wire
error format.
"""

import logging
import socket
import threading
import time

import uvicorn
from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError

from .errors import AddressInUse, FederationError, http_status_for
from .wire import ErrorBody, ErrorResponse, encode_model

log = logging.getLogger(__name__)


def json_response(model, status_code: int = 200) -> Response:
    return Response(
        encode_model(model), status_code=status_code, media_type="application/json"
    )


def error_response(code: str, message: str) -> Response:
    body = ErrorResponse(error=ErrorBody(code=code), message=message)
    return json_response(body, http_status_for(code))


def install_error_handlers(app: FastAPI) -> None:
    @app.exception_handler(FederationError)
    async def _federation_error(request: Request, exc: FederationError):
        return error_response(exc.code, str(exc))

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        body = ErrorResponse(error=ErrorBody(code="MalformedRequest"), message=str(exc))
        return json_response(body, 400)


class ServerHandle:
    """A running background server."""

    def __init__(self, server: uvicorn.Server, thread: threading.Thread,
                 host: str, port: int):
        self._server = server
        self._thread = thread
        self.host = host
        self.port = port

    @property
    def url(self) -> str:
        return "http://%s:%d" % (self.host, self.port)

    def shutdown(self, timeout: float = 10.0) -> None:
        self._server.should_exit = True
        self._thread.join(timeout)


def start_server(app: FastAPI, host: str = "127.0.0.1", port: int = 0) -> ServerHandle:
    """Serve the app in a daemon thread; port 0 picks a free port.

    The listening socket is bound here, not by uvicorn, so a taken port
    fails fast instead of surfacing inside the server thread.
    """
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((host, port))
    except OSError as exc:
        sock.close()
        raise AddressInUse("cannot bind %s:%d: %s" % (host, port, exc)) from exc
    sock.listen(128)
    bound_port = sock.getsockname()[1]

    config = uvicorn.Config(
        app,
        log_level="warning",
        access_log=False,
        timeout_graceful_shutdown=5,
    )
    server = uvicorn.Server(config)
    thread = threading.Thread(
        target=server.run, kwargs={"sockets": [sock]}, daemon=True,
        name="fedsql-http-%d" % bound_port,
    )
    thread.start()
    deadline = time.monotonic() + 15.0
    while not server.started:
        if not thread.is_alive():
            raise FederationError("server thread died during startup")
        if time.monotonic() > deadline:
            server.should_exit = True
            raise FederationError("server did not start within 15s")
        time.sleep(0.01)
    return ServerHandle(server, thread, host, bound_port)
