"""Client side of the environment wire protocol (newline-delimited JSON).

The trainer talks to the simulator exclusively through this boundary: a
spawned `netsampler serve --stdio` subprocess (default) or a TCP endpoint.
"""

from __future__ import annotations

import json
import shlex
import socket
import subprocess
import sys
from dataclasses import dataclass

import numpy as np

DEFAULT_ENV_CMD = f"{sys.executable} -m netsampler.cli serve --stdio"


class ProtocolError(RuntimeError):
    def __init__(self, reply: dict):
        self.reply = reply
        super().__init__(f"environment error: {reply.get('why')} (node={reply.get('node')})")


@dataclass
class Observation:
    slot: int
    adjacency: np.ndarray  # (m, m) int
    ages: np.ndarray  # (m, m) int, row i = node i's view
    feedback: np.ndarray  # (m,) int: 0 no-tx, 1 success, 2 collision
    cached: list  # per node, list of cached origins

    @property
    def m(self) -> int:
        return self.adjacency.shape[0]

    @classmethod
    def parse(cls, msg: dict) -> "Observation":
        per_node = msg["per_node"]
        return cls(
            slot=int(msg["slot"]),
            adjacency=np.asarray(msg["adjacency"], dtype=np.int64),
            ages=np.asarray([node["ages"] for node in per_node], dtype=np.int64),
            feedback=np.asarray([node["feedback"] for node in per_node], dtype=np.int64),
            cached=[list(node["cached"]) for node in per_node],
        )


class EnvClient:
    """One protocol session over stdio (spawned subprocess) or TCP."""

    def __init__(self, env_cmd: str | None = None, host: str | None = None, port: int | None = None):
        self._proc = None
        self._sock = None
        if host is not None:
            self._sock = socket.create_connection((host, port))
            stream = self._sock.makefile("rw")
            self._write, self._read = stream.write, stream.readline
            self._stream = stream
        else:
            cmd = shlex.split(env_cmd or DEFAULT_ENV_CMD)
            self._proc = subprocess.Popen(
                cmd, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True, bufsize=1
            )
            self._write, self._read = self._proc.stdin.write, self._proc.stdout.readline
            self._stream = None

    def close(self) -> None:
        if self._proc is not None:
            self._proc.kill()
            self._proc.wait()
        if self._sock is not None:
            self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _exchange(self, msg: dict) -> dict:
        self._write(json.dumps(msg) + "\n")
        if self._proc is not None:
            self._proc.stdin.flush()
        elif self._stream is not None:
            self._stream.flush()
        line = self._read()
        if not line:
            raise RuntimeError("environment closed the stream")
        reply = json.loads(line)
        if reply.get("type") == "error":
            raise ProtocolError(reply)
        return reply

    def reset(
        self,
        graph: dict,
        seed: int,
        steps: int = 1024,
        sigma: float = 1.0,
        reward: str = "expected",
        mu_domain: str = "full",
    ) -> Observation:
        reply = self._exchange(
            {
                "type": "reset",
                "seed": seed,
                "graph": graph,
                "steps": steps,
                "sigma": sigma,
                "reward": reward,
                "mu_domain": mu_domain,
            }
        )
        return Observation.parse(reply)

    def act(self, decisions: np.ndarray) -> tuple[float, bool, dict, Observation]:
        reply = self._exchange(
            {"type": "act", "decisions": [[int(mu), int(nu)] for mu, nu in decisions]}
        )
        return (
            float(reply["reward"]),
            bool(reply["done"]),
            reply["outcome"],
            Observation.parse(reply["obs"]),
        )
