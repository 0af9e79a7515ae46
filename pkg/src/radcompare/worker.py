"""Client for external entity-extraction workers.

Wire protocol, newline-delimited JSON over stdio or TCP:

    handshake (worker -> engine):  {"ready": true, "protocol": 1}
    request   (engine -> worker):  {"id": <string>, "text": <string>}
    response  (worker -> engine):  {"id": <string>, "entities": [
        {"text": <string>, "start": <int>, "end": <int>,
         "label": <string-or-null>}]}
    error     (worker -> engine):  {"id": <string>, "error": <message>}

Responses must echo the request id. This client keeps one request in
flight per connection; run several extractors for parallelism.
"""

from __future__ import annotations

import json
import select
import socket
import subprocess
import threading
from typing import Protocol, Sequence

from .extraction import Entity, EntitySet, normalize_entity

PROTOCOL_VERSION = 1


class WorkerError(RuntimeError):
    """The worker reported an error, timed out, or went away."""


class ProtocolError(WorkerError):
    """The worker violated the wire protocol."""


class Transport(Protocol):
    def send_line(self, line: str) -> None: ...

    def recv_line(self, timeout: float) -> str: ...

    def close(self) -> None: ...


class StdioTransport:
    """Talks to a worker subprocess over its standard streams."""

    def __init__(self, command: Sequence[str]):
        self._proc = subprocess.Popen(
            list(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=False,
        )
        self._buffer = bytearray()

    def send_line(self, line: str) -> None:
        assert self._proc.stdin is not None
        try:
            self._proc.stdin.write(line.encode("utf-8") + b"\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, ValueError) as exc:
            raise WorkerError(f"worker pipe closed: {exc}") from exc

    def recv_line(self, timeout: float) -> str:
        assert self._proc.stdout is not None
        fd = self._proc.stdout.fileno()
        while True:
            newline = self._buffer.find(b"\n")
            if newline >= 0:
                line = bytes(self._buffer[:newline])
                del self._buffer[: newline + 1]
                return line.decode("utf-8")
            ready, _, _ = select.select([fd], [], [], timeout)
            if not ready:
                raise WorkerError(f"worker timed out after {timeout}s")
            chunk = self._proc.stdout.read1(65536)
            if not chunk:
                raise WorkerError("worker closed the connection")
            self._buffer.extend(chunk)

    def close(self) -> None:
        if self._proc.stdin:
            self._proc.stdin.close()
        self._proc.terminate()
        try:
            self._proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()


class TcpTransport:
    """Talks to a worker bound to a local TCP port."""

    def __init__(self, host: str, port: int, connect_timeout: float = 10.0):
        self._sock = socket.create_connection((host, port), timeout=connect_timeout)
        self._buffer = bytearray()

    def send_line(self, line: str) -> None:
        try:
            self._sock.sendall(line.encode("utf-8") + b"\n")
        except OSError as exc:
            raise WorkerError(f"worker socket closed: {exc}") from exc

    def recv_line(self, timeout: float) -> str:
        self._sock.settimeout(timeout)
        while True:
            newline = self._buffer.find(b"\n")
            if newline >= 0:
                line = bytes(self._buffer[:newline])
                del self._buffer[: newline + 1]
                return line.decode("utf-8")
            try:
                chunk = self._sock.recv(65536)
            except socket.timeout:
                raise WorkerError(f"worker timed out after {timeout}s") from None
            if not chunk:
                raise WorkerError("worker closed the connection")
            self._buffer.extend(chunk)

    def close(self) -> None:
        self._sock.close()


class ExternalExtractor:
    """Engine-side handle to one worker connection.

    Performs the handshake on construction and serializes requests; safe to
    share across threads.
    """

    def __init__(self, transport: Transport, timeout: float = 30.0):
        self._transport = transport
        self._timeout = timeout
        self._lock = threading.Lock()
        self._counter = 0
        self._handshake()

    def _handshake(self) -> None:
        line = self._transport.recv_line(self._timeout)
        try:
            message = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"invalid handshake line: {exc.msg}") from None
        if not isinstance(message, dict) or message.get("ready") is not True:
            raise ProtocolError(f"worker did not signal readiness: {line!r}")
        if message.get("protocol") != PROTOCOL_VERSION:
            raise ProtocolError(
                f"unsupported protocol {message.get('protocol')!r}, "
                f"need {PROTOCOL_VERSION}"
            )

    def extract(self, text: str) -> EntitySet:
        """Request entities for one text and validate the response."""
        with self._lock:
            self._counter += 1
            request_id = f"q{self._counter}"
            request = json.dumps(
                {"id": request_id, "text": text}, ensure_ascii=False, separators=(",", ":")
            )
            self._transport.send_line(request)
            line = self._transport.recv_line(self._timeout)
        return _parse_response(line, request_id, text)

    def close(self) -> None:
        self._transport.close()

    def __enter__(self) -> "ExternalExtractor":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()


def _parse_response(line: str, request_id: str, text: str) -> EntitySet:
    try:
        message = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"invalid response line: {exc.msg}") from None
    if not isinstance(message, dict):
        raise ProtocolError("response is not an object")
    if message.get("id") != request_id:
        raise ProtocolError(
            f"response id {message.get('id')!r} does not match request {request_id!r}"
        )
    if "error" in message:
        raise WorkerError(f"worker error: {message['error']}")
    items = message.get("entities")
    if not isinstance(items, list):
        raise ProtocolError("response lacks an entities list")

    entities = []
    for item in items:
        if not isinstance(item, dict) or not isinstance(item.get("text"), str):
            raise ProtocolError(f"malformed entity item: {item!r}")
        start, end = item.get("start"), item.get("end")
        if (
            isinstance(start, bool)
            or isinstance(end, bool)
            or not isinstance(start, int)
            or not isinstance(end, int)
            or not 0 <= start < end <= len(text)
        ):
            raise ProtocolError(f"invalid span ({start!r}, {end!r})")
        label = item.get("label")
        if label is not None and not isinstance(label, str):
            raise ProtocolError(f"invalid label {label!r}")
        try:
            normalized = normalize_entity(item["text"])
        except ValueError as exc:
            raise ProtocolError(f"degenerate entity {item['text']!r}: {exc}") from None
        entities.append(
            Entity(surface=item["text"], normalized=normalized, span=(start, end), label=label)
        )
    return EntitySet.of(entities)


def external_extract(extractor: ExternalExtractor, text: str) -> EntitySet:
    """Extract entities for one text via a connected worker."""
    return extractor.extract(text)
