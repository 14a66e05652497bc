"""Graphon kernels, graph sampling from graphons, and induced graphons.

A graphon here is a symmetric measurable kernel W on [0,1]^2 with values in
[0,1].  Finite graphs are sampled by drawing node labels u_i ~ U[0,1]
(sorted ascending) and edges Bernoulli(W(u_i, u_j)).  A sampled graph can be
lifted back to graphon space as a step-function kernel that is constant on
the cells of the partition induced by its labels: cell i spans
[u_i, u_{i+1}), with the first and last cells extended to 0 and 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import GenerationError, ParameterError
from .topology import MAX_CONNECTIVITY_RETRIES, Topology


def _cell_index(points: np.ndarray, boundaries: np.ndarray) -> np.ndarray:
    """Index of the partition cell containing each point (right-open cells)."""
    idx = np.searchsorted(boundaries, points, side="right") - 1
    return np.clip(idx, 0, len(boundaries) - 2)


@dataclass
class GraphonSpec:
    """Parametric graphon families plus general step-function kernels.

    kinds:
      constant             params: p
      watts_strogatz_limit params: radius (half-bandwidth on the circle, <= 0.5), beta
      stochastic_block     params: probs (BxB symmetric), measures (length B, sums to 1)
      step_function        params: boundaries (len n+1, 0..1), values (nxn symmetric)
    """

    kind: str
    params: dict = field(default_factory=dict)

    @classmethod
    def constant(cls, p: float) -> "GraphonSpec":
        if not (0.0 <= p <= 1.0):
            raise ParameterError(f"constant graphon level must be in [0,1], got {p}")
        return cls("constant", {"p": float(p)})

    @classmethod
    def watts_strogatz_limit(cls, radius: float = 0.2, beta: float = 0.3) -> "GraphonSpec":
        if not (0.0 < radius <= 0.5):
            raise ParameterError(f"radius must be in (0, 0.5], got {radius}")
        if not (0.0 <= beta <= 1.0):
            raise ParameterError(f"beta must be in [0,1], got {beta}")
        return cls("watts_strogatz_limit", {"radius": float(radius), "beta": float(beta)})

    @classmethod
    def stochastic_block(cls, probs, measures) -> "GraphonSpec":
        probs = np.asarray(probs, dtype=float)
        measures = np.asarray(measures, dtype=float)
        if probs.ndim != 2 or probs.shape[0] != probs.shape[1]:
            raise ParameterError("block probability matrix must be square")
        if not np.allclose(probs, probs.T):
            raise ParameterError("block probability matrix must be symmetric")
        if np.any(probs < 0) or np.any(probs > 1):
            raise ParameterError("block probabilities must lie in [0,1]")
        if len(measures) != probs.shape[0] or np.any(measures <= 0) or not np.isclose(measures.sum(), 1.0):
            raise ParameterError("block measures must be positive and sum to 1")
        return cls("stochastic_block", {"probs": probs.tolist(), "measures": measures.tolist()})

    @classmethod
    def step_function(cls, boundaries, values) -> "GraphonSpec":
        boundaries = np.asarray(boundaries, dtype=float)
        values = np.asarray(values, dtype=float)
        n = len(boundaries) - 1
        if n < 1 or values.shape != (n, n):
            raise ParameterError("values must be (n,n) for n+1 boundaries")
        if boundaries[0] != 0.0 or boundaries[-1] != 1.0 or np.any(np.diff(boundaries) <= 0):
            raise ParameterError("boundaries must increase strictly from 0 to 1")
        if not np.allclose(values, values.T):
            raise ParameterError("step kernel must be symmetric")
        if np.any(values < 0) or np.any(values > 1):
            raise ParameterError("step kernel values must lie in [0,1]")
        return cls("step_function", {"boundaries": boundaries.tolist(), "values": values.tolist()})

    @classmethod
    def step_function_from_graph(cls, t: Topology) -> "GraphonSpec":
        """Uniform-grid step kernel whose m cells carry the graph's adjacency."""
        boundaries = np.linspace(0.0, 1.0, t.m + 1)
        return cls.step_function(boundaries, t.adjacency.astype(float))

    def evaluate(self, u, v) -> np.ndarray:
        """W(u, v), vectorized with broadcasting over array inputs."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.kind == "constant":
            return np.broadcast_to(np.float64(self.params["p"]), np.broadcast_shapes(u.shape, v.shape)).copy()
        if self.kind == "watts_strogatz_limit":
            radius, beta = self.params["radius"], self.params["beta"]
            d = np.abs(u - v)
            circ = np.minimum(d, 1.0 - d)
            return (1.0 - beta) * (circ <= radius) + beta * 2.0 * radius
        if self.kind in ("stochastic_block", "step_function"):
            if self.kind == "stochastic_block":
                values = np.asarray(self.params["probs"], dtype=float)
                boundaries = np.concatenate([[0.0], np.cumsum(self.params["measures"])])
                boundaries[-1] = 1.0
            else:
                values = np.asarray(self.params["values"], dtype=float)
                boundaries = np.asarray(self.params["boundaries"], dtype=float)
            iu = _cell_index(u, boundaries)
            iv = _cell_index(v, boundaries)
            return values[iu, iv]
        raise ParameterError(f"unknown graphon kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params}

    @classmethod
    def from_dict(cls, d: dict) -> "GraphonSpec":
        kind = d.get("kind")
        params = d.get("params", {})
        if kind == "constant":
            return cls.constant(params["p"])
        if kind == "watts_strogatz_limit":
            return cls.watts_strogatz_limit(**params)
        if kind == "stochastic_block":
            return cls.stochastic_block(params["probs"], params["measures"])
        if kind == "step_function":
            return cls.step_function(params["boundaries"], params["values"])
        raise ParameterError(f"unknown graphon kind {kind!r}")


@dataclass
class SampledGraph:
    """Finite graph sampled from a graphon, with its realized labels."""

    topology: Topology
    labels: np.ndarray  # sorted ascending, in [0,1]
    graphon: GraphonSpec


@dataclass
class InducedGraphon:
    """Step-function lift of a sampled graph onto the label partition."""

    source: SampledGraph
    boundaries: np.ndarray  # length m+1: [0, u_2, ..., u_m, 1]
    values: np.ndarray  # m x m, equal to the adjacency, in {0,1}

    def evaluate(self, u, v) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        iu = _cell_index(u, self.boundaries)
        iv = _cell_index(v, self.boundaries)
        return self.values[iu, iv]

    def cell_measures(self) -> np.ndarray:
        return np.diff(self.boundaries)


def sample_from_graphon(
    w: GraphonSpec,
    m: int,
    seed: int = 0,
    require_connected: bool = False,
    labels: Sequence[float] | None = None,
) -> SampledGraph:
    """Sample an m-node graph: labels U[0,1] sorted, edges Bernoulli(W(u_i,u_j)).

    Connectivity is NOT enforced unless ``require_connected`` is set, in which
    case sampling repeats with an incremented sub-seed (labels redrawn too).
    ``labels`` pins the label draw; used to realize deterministic samples of
    step-function graphons.
    """
    if m < 1:
        raise ParameterError(f"node count must be >= 1, got {m}")
    if labels is not None and require_connected:
        raise ParameterError("cannot resample for connectivity with pinned labels")
    attempts = MAX_CONNECTIVITY_RETRIES if require_connected else 1
    for attempt in range(attempts):
        sub_seed = seed + attempt
        rng = np.random.default_rng(sub_seed)
        if labels is not None:
            u = np.sort(np.asarray(labels, dtype=float))
            if len(u) != m or np.any(u < 0) or np.any(u > 1):
                raise ParameterError("labels must be m values in [0,1]")
        else:
            u = np.sort(rng.uniform(0.0, 1.0, size=m))
        probs = w.evaluate(u[:, None], u[None, :])
        draws = rng.uniform(0.0, 1.0, size=(m, m))
        upper = np.triu(np.ones((m, m), dtype=bool), k=1)
        adj_upper = (draws < probs) & upper
        edges = [(int(i), int(j)) for i, j in zip(*np.nonzero(adj_upper))]
        topo = Topology.from_edges(
            m,
            edges,
            provenance={"generator": "graphon", "graphon": w.to_dict(), "m": m, "seed": seed, "sub_seed": sub_seed},
        )
        if not require_connected or topo.is_connected():
            return SampledGraph(topology=topo, labels=u, graphon=w)
    raise GenerationError(f"no connected {m}-node sample of {w.kind} graphon in {MAX_CONNECTIVITY_RETRIES} attempts")


def induce_graphon(g: SampledGraph) -> InducedGraphon:
    """Step kernel on the label partition; cell (i,j) carries adjacency(i,j)."""
    u = np.asarray(g.labels, dtype=float)
    m = len(u)
    if m == 1:
        boundaries = np.array([0.0, 1.0])
    else:
        boundaries = np.concatenate([[0.0], u[1:], [1.0]])
    return InducedGraphon(source=g, boundaries=boundaries, values=g.topology.adjacency.astype(float))
