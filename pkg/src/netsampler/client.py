"""Thin HTTP client for the service.

The CLI always speaks HTTP request/response models; without a --server URL
it mounts the app in-process over an ASGI transport, so local runs need no
running daemon and stay byte-deterministic.
"""

from __future__ import annotations

import httpx


class ServiceClient:
    def __init__(self, base_url: str | None = None, timeout: float = 600.0):
        if base_url:
            self._client = httpx.Client(base_url=base_url, timeout=timeout)
        else:
            # ASGITransport is async-only; the Starlette test client wraps the
            # app behind a portal and exposes the sync httpx.Client interface
            from starlette.testclient import TestClient

            from .service import create_app

            self._client = TestClient(create_app())

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ServiceClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _post(self, path: str, payload: dict) -> dict:
        resp = self._client.post(path, json=payload)
        if resp.status_code >= 400:
            raise RuntimeError(f"{path} failed ({resp.status_code}): {resp.text}")
        return resp.json()

    def health(self) -> dict:
        return self._client.get("/health").json()

    def make_graph(self, source: dict, seed: int = 0) -> dict:
        return self._post("/graphs", {"source": source, "seed": seed})

    def run(self, config: dict, episode: int = 0, with_slots: bool = False) -> dict:
        return self._post("/run", {"config": config, "episode": episode, "with_slots": with_slots})

    def evaluate(self, config: dict, episodes: int) -> dict:
        return self._post("/eval", {"config": config, "episodes": episodes})

    def sweep(self, config: dict, m_list: list[int], episodes: int, baselines: list[str]) -> dict:
        return self._post(
            "/transfer/sweep",
            {"config": config, "m_list": m_list, "episodes": episodes, "baselines": baselines},
        )

    def theorem(self, which: int, payload: dict) -> dict:
        return self._post(f"/transfer/theorem{which}", payload)

    def forward(self, payload: dict) -> dict:
        return self._post("/grnn/forward", payload)
