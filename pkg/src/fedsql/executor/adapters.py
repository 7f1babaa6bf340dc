"""Backend adapter contract.

A backend is reached through exactly two operations: ``open`` establishes a
connection and registers it in a handle registry, ``execute`` runs a
read-only select against an open handle. ``describe`` is a small extension
used for schema introspection; ``close`` releases a handle.
"""

import abc
import itertools
import threading
from typing import Any, List, Sequence

from ..catalog import TableDescription
from ..errors import BackendUnavailable
from .table import ResultTable


class BackendAdapter(abc.ABC):
    """Uniform access to one kind of backing store."""

    def __init__(self) -> None:
        self._registry: dict = {}
        self._ids = itertools.count(1)
        self._lock = threading.Lock()

    def open(self, url: str, username: str = "", password: str = "") -> int:
        """Connect and return an opaque handle registered with this adapter."""
        state = self._connect(url, username, password)
        with self._lock:
            handle = next(self._ids)
            self._registry[handle] = state
        return handle

    def execute(
        self,
        handle: int,
        select_fields: Sequence[str],
        table_names: Sequence[str],
        where_clause: str,
    ) -> ResultTable:
        """Run one read-only select and return the full result."""
        return self._execute(
            self._state(handle), list(select_fields), list(table_names), where_clause
        )

    def describe(self, handle: int) -> List[TableDescription]:
        """List the tables and columns visible through the handle."""
        return self._describe(self._state(handle))

    def close(self, handle: int) -> None:
        with self._lock:
            self._registry.pop(handle, None)

    def _state(self, handle: int) -> Any:
        with self._lock:
            try:
                return self._registry[handle]
            except KeyError:
                raise BackendUnavailable(
                    str(handle), "handle %d is not open" % handle
                ) from None

    @abc.abstractmethod
    def _connect(self, url: str, username: str, password: str) -> Any:
        """Produce the per-connection state stored in the registry."""

    @abc.abstractmethod
    def _execute(
        self,
        state: Any,
        select_fields: List[str],
        table_names: List[str],
        where_clause: str,
    ) -> ResultTable:
        """Evaluate one select against the connection state."""

    @abc.abstractmethod
    def _describe(self, state: Any) -> List[TableDescription]:
        """Introspect the connection state."""
