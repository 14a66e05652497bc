"""Byte-stream servers for the environment protocol (TCP and stdio).

One connection = one session = one simulator instance; sessions share
nothing, so the TCP server handles connections in threads.  The stdio
variant serves exactly one session over stdin/stdout, for trainers that
spawn the environment as a subprocess.
"""

from __future__ import annotations

import socketserver
import sys

from .protocol import EnvSession


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        session = EnvSession(default_seed=self.server.default_seed)  # type: ignore[attr-defined]
        while True:
            line = self.rfile.readline()
            if not line:
                break  # connection closed; discard session state
            reply = session.handle_line(line.decode())
            try:
                self.wfile.write(reply.encode())
                self.wfile.flush()
            except BrokenPipeError:
                break


class EnvTCPServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, host: str = "127.0.0.1", port: int = 0, default_seed: int = 0):
        super().__init__((host, port), _Handler)
        self.default_seed = default_seed

    @property
    def port(self) -> int:
        return self.server_address[1]


def serve_tcp(host: str = "127.0.0.1", port: int = 5650, default_seed: int = 0) -> None:
    with EnvTCPServer(host, port, default_seed) as server:
        server.serve_forever()


def serve_stdio(default_seed: int = 0, stdin=None, stdout=None) -> None:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    session = EnvSession(default_seed=default_seed)
    for line in stdin:
        if not line.strip():
            continue
        stdout.write(session.handle_line(line))
        stdout.flush()
