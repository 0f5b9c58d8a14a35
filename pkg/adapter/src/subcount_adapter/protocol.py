"""Newline-delimited JSON request loop over stdio or TCP.

First line out is the handshake; afterwards every request line gets exactly
one response line. All failures (unparsable requests, unknown patterns,
model exceptions) are answered in-band so the peer never sees a dead
connection, and the loop only ends when the transport closes.
"""
from __future__ import annotations

import json
import socket
import sys
from typing import IO

from .models import AdapterModel

PROTOCOL_NAME = "subcount-attack/1"


def _handshake_line(model: AdapterModel) -> str:
    return json.dumps({"protocol": PROTOCOL_NAME, "model": model.name},
                      separators=(",", ":"))


def _handle_request(model: AdapterModel, line: str) -> str:
    request_id = 0
    try:
        request = json.loads(line)
        request_id = int(request.get("id", 0))
        pattern_name = request["pattern"]
        graphs = [(int(obj["n"]), [tuple(e) for e in obj["edges"]])
                  for obj in request["graphs"]]
        preds = model.fn(graphs, pattern_name)
        response = {"id": request_id, "preds": [float(v) for v in preds]}
    except Exception as exc:
        response = {"id": request_id, "error": f"{type(exc).__name__}: {exc}"}
    return json.dumps(response, separators=(",", ":"))


def serve_streams(model: AdapterModel, reader: IO[str], writer: IO[str]) -> None:
    writer.write(_handshake_line(model) + "\n")
    writer.flush()
    for line in reader:
        line = line.strip()
        if not line:
            continue
        writer.write(_handle_request(model, line) + "\n")
        writer.flush()


def serve_stdio(model: AdapterModel) -> None:
    serve_streams(model, sys.stdin, sys.stdout)


def serve_tcp(model: AdapterModel, port: int) -> None:
    """Listen on localhost and serve connections one at a time."""
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as server:
        server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        server.bind(("127.0.0.1", port))
        server.listen(1)
        actual_port = server.getsockname()[1]
        print(f"listening on 127.0.0.1:{actual_port}", file=sys.stderr, flush=True)
        while True:
            conn, _ = server.accept()
            with conn:
                reader = conn.makefile("r", encoding="utf-8", newline="\n")
                writer = conn.makefile("w", encoding="utf-8", newline="\n")
                try:
                    serve_streams(model, reader, writer)
                except (BrokenPipeError, ConnectionResetError):
                    pass


def serve(model: AdapterModel, transport: str) -> None:
    """``stdio`` or ``tcp:PORT`` (port 0 picks a free one)."""
    if transport == "stdio":
        serve_stdio(model)
    elif transport.startswith("tcp:"):
        serve_tcp(model, int(transport.split(":", 1)[1]))
    else:
        raise ValueError(f"unknown transport {transport!r}; use stdio or tcp:PORT")
