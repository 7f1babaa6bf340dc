"""HTTP clients for peer federation servers and the RLS.

Transport problems (refused connections, DNS, timeouts) surface as
RemoteTimeout; a decodable error body becomes RemoteError carrying the
peer's wire code; anything undecodable is a DecodeError.
"""

from dataclasses import dataclass
from typing import List, Sequence

import httpx
from pydantic import BaseModel

from .errors import DecodeError, RemoteError, RemoteTimeout
from .executor import ResultTable
from .wire import (
    AckResponse,
    ErrorResponse,
    HealthResponse,
    LookupResponse,
    PublishRequest,
    QueryRequest,
    QueryResponse,
    RefreshResponse,
    RegisterRequest,
    RegisterResponse,
    SchemaResponse,
    decode_model,
    decode_result,
    encode_model,
)

DEFAULT_CONNECT_TIMEOUT = 5.0
DEFAULT_REQUEST_TIMEOUT = 30.0


@dataclass(frozen=True)
class PeerEndpoint:
    base_url: str
    request_timeout: float = DEFAULT_REQUEST_TIMEOUT
    connect_timeout: float = DEFAULT_CONNECT_TIMEOUT

    def __post_init__(self):
        if self.request_timeout <= 0 or self.connect_timeout <= 0:
            raise ValueError("timeouts must be positive")

    def join(self, path: str) -> str:
        return self.base_url.rstrip("/") + path

    def timeout(self) -> httpx.Timeout:
        return httpx.Timeout(self.request_timeout, connect=self.connect_timeout)


def _request(endpoint: PeerEndpoint, method: str, path: str,
             payload: BaseModel = None, params: dict = None) -> httpx.Response:
    url = endpoint.join(path)
    kwargs: dict = {"timeout": endpoint.timeout()}
    if payload is not None:
        kwargs["content"] = encode_model(payload)
        kwargs["headers"] = {"content-type": "application/json"}
    if params is not None:
        kwargs["params"] = params
    try:
        return httpx.request(method, url, **kwargs)
    except httpx.TimeoutException as exc:
        raise RemoteTimeout("%s timed out: %s" % (url, exc)) from exc
    except httpx.HTTPError as exc:
        raise RemoteTimeout("%s unreachable: %s" % (url, exc)) from exc


def _raise_remote_error(endpoint: PeerEndpoint, response: httpx.Response) -> None:
    try:
        body = decode_model(ErrorResponse, response.content)
    except DecodeError:
        raise DecodeError(
            "%s answered HTTP %d without a decodable error body"
            % (endpoint.base_url, response.status_code)
        ) from None
    raise RemoteError(body.error.code, endpoint.base_url, body.message)


def remote_query(endpoint: PeerEndpoint, sql: str, no_forward: bool = False) -> ResultTable:
    response = _request(
        endpoint, "POST", "/query", QueryRequest(sql=sql, no_forward=no_forward)
    )
    if response.status_code >= 400:
        _raise_remote_error(endpoint, response)
    return decode_result(decode_model(QueryResponse, response.content))


def remote_register(
    endpoint: PeerEndpoint,
    driver: str,
    url: str,
    spec_inline: str = None,
    spec_url: str = None,
    username: str = "",
    password: str = "",
) -> str:
    response = _request(
        endpoint,
        "POST",
        "/register",
        RegisterRequest(
            spec_url=spec_url,
            spec_inline=spec_inline,
            driver=driver,
            url=url,
            username=username,
            password=password,
        ),
    )
    if response.status_code >= 400:
        _raise_remote_error(endpoint, response)
    return decode_model(RegisterResponse, response.content).source_id


def remote_refresh(endpoint: PeerEndpoint) -> List[str]:
    response = _request(endpoint, "POST", "/refresh")
    if response.status_code >= 400:
        _raise_remote_error(endpoint, response)
    return decode_model(RefreshResponse, response.content).changed


def remote_schema(endpoint: PeerEndpoint) -> SchemaResponse:
    response = _request(endpoint, "GET", "/schema")
    if response.status_code >= 400:
        _raise_remote_error(endpoint, response)
    return decode_model(SchemaResponse, response.content)


def remote_health(endpoint: PeerEndpoint) -> bool:
    try:
        response = _request(endpoint, "GET", "/health")
    except (RemoteTimeout, DecodeError):
        return False
    if response.status_code >= 400:
        return False
    try:
        return decode_model(HealthResponse, response.content).ok
    except DecodeError:
        return False


def rls_publish(endpoint: PeerEndpoint, server_url: str, tables: Sequence[str]) -> int:
    response = _request(
        endpoint, "POST", "/rls/publish",
        PublishRequest(server=server_url, tables=list(tables)),
    )
    if response.status_code >= 400:
        _raise_remote_error(endpoint, response)
    return decode_model(AckResponse, response.content).ack


def rls_unpublish(endpoint: PeerEndpoint, server_url: str, tables: Sequence[str]) -> int:
    response = _request(
        endpoint, "POST", "/rls/unpublish",
        PublishRequest(server=server_url, tables=list(tables)),
    )
    if response.status_code >= 400:
        _raise_remote_error(endpoint, response)
    return decode_model(AckResponse, response.content).ack


def rls_lookup(endpoint: PeerEndpoint, table: str) -> List[str]:
    response = _request(endpoint, "GET", "/rls/lookup", params={"table": table})
    if response.status_code >= 400:
        _raise_remote_error(endpoint, response)
    return decode_model(LookupResponse, response.content).servers


class HttpRemoteClient:
    """Peer-query facade handed to the executor."""

    def __init__(self, connect_timeout: float = DEFAULT_CONNECT_TIMEOUT,
                 request_timeout: float = DEFAULT_REQUEST_TIMEOUT):
        self.connect_timeout = connect_timeout
        self.request_timeout = request_timeout

    def _endpoint(self, url: str) -> PeerEndpoint:
        return PeerEndpoint(url, self.request_timeout, self.connect_timeout)

    def query(self, url: str, sql: str, no_forward: bool = False) -> ResultTable:
        return remote_query(self._endpoint(url), sql, no_forward=no_forward)


class RlsClient:
    """RLS access with the same publish/unpublish/lookup surface as the
    in-process ReplicaIndex."""

    def __init__(self, base_url: str,
                 connect_timeout: float = DEFAULT_CONNECT_TIMEOUT,
                 request_timeout: float = DEFAULT_REQUEST_TIMEOUT):
        self._endpoint = PeerEndpoint(base_url, request_timeout, connect_timeout)

    def publish(self, server_url: str, tables: Sequence[str]) -> int:
        return rls_publish(self._endpoint, server_url, tables)

    def unpublish(self, server_url: str, tables: Sequence[str]) -> int:
        return rls_unpublish(self._endpoint, server_url, tables)

    def lookup(self, table: str) -> List[str]:
        return rls_lookup(self._endpoint, table)
