"""Request/response schemas for the HTTP service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field

from ..harness import EpisodeConfig, EpisodeResult, GraphSource


class HealthResponse(BaseModel):
    status: str
    version: str


class GraphRequest(BaseModel):
    source: GraphSource
    seed: int = 0


class GraphResponse(BaseModel):
    m: int
    edges: list[list[int]]
    provenance: dict


class RunRequest(BaseModel):
    config: EpisodeConfig
    episode: int = 0
    with_slots: bool = False


class RunResponse(BaseModel):
    result: EpisodeResult
    csv: str
    slots_csv: Optional[str] = None


class EvalRequest(BaseModel):
    config: EpisodeConfig
    episodes: int = Field(default=30, ge=1)


class EvalResponse(BaseModel):
    summary: dict
    rows: list[EpisodeResult]
    csv: str


class SweepRequest(BaseModel):
    config: EpisodeConfig
    m_list: list[int]
    episodes: int = Field(default=30, ge=1)
    baselines: list[str] = ["uniform", "age"]


class SweepResponse(BaseModel):
    rows: list[dict]
    csv: str


class ScalarNetSpec(BaseModel):
    """Shortcut for bound checks: a seeded random single-feature network."""

    seed: int = 0
    T: int = Field(default=2, ge=1)
    H: int = 4
    L: int = 3
    scale: float = 0.4


class TheoremRequest(BaseModel):
    graphon: dict
    m_list: list[int] = [10, 20, 40, 80]
    n: int = 1024
    epsilon: float = 0.25
    seeds: list[int] = list(range(20))
    weights: Optional[dict] = None  # full weight document; else random per spec below
    network: ScalarNetSpec = ScalarNetSpec()
    constants: Optional[dict] = None  # theorem-1 only


class TheoremResponse(BaseModel):
    rows: list[dict]
    csv: str
    violations: int


class ForwardRequest(BaseModel):
    """Cross-implementation parity surface: run the engine's forward pass."""

    weights: dict
    graph: dict  # exchange format {"m", "edges"} or GraphSource
    inputs: list  # T arrays of shape (m, F)
    z0: Optional[list] = None
    shift_normalization: str = "adjacency_over_m"


class ForwardResponse(BaseModel):
    output: list
    final_state: list


class SessionCreateRequest(BaseModel):
    default_seed: int = 0


class SessionCreateResponse(BaseModel):
    session_id: str


class SessionMessage(BaseModel):
    """One protocol message, passed through verbatim."""

    message: dict
