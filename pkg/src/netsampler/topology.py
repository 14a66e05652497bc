"""Graph construction: synthetic generators, GraphML ingestion, permutations.

All generators return a :class:`Topology` whose adjacency is symmetric with a
zero diagonal and which is connected.  Connectivity is obtained by resampling
with an incremented sub-seed (up to ``MAX_CONNECTIVITY_RETRIES`` attempts);
the sub-seed that produced the returned graph is recorded in provenance so
every output is reproducible from its provenance alone.
"""

from __future__ import annotations

import io
import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .errors import GenerationError, ParameterError, TopologyParseError

MAX_CONNECTIVITY_RETRIES = 1000


@dataclass
class Topology:
    """Undirected simple graph on nodes 0..m-1.

    ``edges`` is a sorted tuple of (i, j) pairs with i < j; ``adjacency`` is
    the m-by-m symmetric 0/1 matrix derived from it.  ``provenance`` records
    the generator descriptor and the seed that produced the graph.
    """

    m: int
    edges: tuple[tuple[int, int], ...]
    adjacency: np.ndarray
    provenance: dict = field(default_factory=dict)

    @classmethod
    def from_edges(cls, m: int, edges: Iterable[Sequence[int]], provenance: dict | None = None) -> "Topology":
        if m < 1:
            raise ParameterError(f"node count must be >= 1, got {m}")
        canon = set()
        for e in edges:
            i, j = int(e[0]), int(e[1])
            if i == j:
                continue  # self-loops are meaningless here
            if not (0 <= i < m and 0 <= j < m):
                raise ParameterError(f"edge ({i},{j}) out of range for m={m}")
            canon.add((min(i, j), max(i, j)))
        adjacency = np.zeros((m, m), dtype=np.int8)
        for i, j in canon:
            adjacency[i, j] = 1
            adjacency[j, i] = 1
        return cls(m=m, edges=tuple(sorted(canon)), adjacency=adjacency, provenance=provenance or {})

    def neighbors(self, i: int) -> tuple[int, ...]:
        cache = self.__dict__.get("_neighbors")
        if cache is None:
            cache = [tuple(int(j) for j in np.flatnonzero(self.adjacency[row])) for row in range(self.m)]
            self.__dict__["_neighbors"] = cache
        return cache[i]

    def degree_sequence(self) -> tuple[int, ...]:
        return tuple(int(d) for d in self.adjacency.sum(axis=1))

    def is_connected(self) -> bool:
        if self.m == 1:
            return True
        seen = np.zeros(self.m, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            u = stack.pop()
            for v in np.flatnonzero(self.adjacency[u]):
                if not seen[v]:
                    seen[v] = True
                    stack.append(int(v))
        return bool(seen.all())

    def to_dict(self) -> dict:
        """Graph exchange format used by the CLI and wire protocol."""
        return {
            "m": self.m,
            "edges": [[i, j] for i, j in self.edges],
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Topology":
        if "m" not in d or "edges" not in d:
            raise ParameterError("graph dict requires 'm' and 'edges'")
        return cls.from_edges(int(d["m"]), d["edges"], provenance=dict(d.get("provenance", {})))


def check_topology(t: Topology, expect_connected: bool = True) -> None:
    """Raise if the Topology invariants do not hold."""
    a = t.adjacency
    if a.shape != (t.m, t.m):
        raise ParameterError("adjacency shape disagrees with node count")
    if not np.array_equal(a, a.T):
        raise ParameterError("adjacency is not symmetric")
    if np.any(np.diag(a) != 0):
        raise ParameterError("adjacency has nonzero diagonal")
    derived = {(min(i, j), max(i, j)) for i, j in zip(*np.nonzero(a))}
    if derived != set(t.edges):
        raise ParameterError("edge set and adjacency disagree")
    if expect_connected and not t.is_connected():
        raise ParameterError("topology is not connected")


def generate_watts_strogatz(m: int, k: int = 4, beta: float = 0.3, seed: int = 0) -> Topology:
    """Connected Watts-Strogatz graph; rewiring preserves the m*k/2 edge count."""
    if k % 2 != 0:
        raise ParameterError(f"lattice degree k must be even, got {k}")
    if not (2 <= k < m):
        raise ParameterError(f"require m > k >= 2, got m={m}, k={k}")
    if not (0.0 <= beta <= 1.0):
        raise ParameterError(f"rewiring probability must be in [0,1], got {beta}")
    for attempt in range(MAX_CONNECTIVITY_RETRIES):
        sub_seed = seed + attempt
        g = nx.watts_strogatz_graph(m, k, beta, seed=sub_seed)
        if nx.is_connected(g):
            return Topology.from_edges(
                m,
                g.edges(),
                provenance={
                    "generator": "watts_strogatz",
                    "m": m,
                    "k": k,
                    "beta": beta,
                    "seed": seed,
                    "sub_seed": sub_seed,
                },
            )
    raise GenerationError(f"no connected WS({m},{k},{beta}) sample in {MAX_CONNECTIVITY_RETRIES} attempts")


def generate_sbm(block_sizes: Sequence[int], p_in: float = 0.8, p_out: float = 0.2, seed: int = 0) -> Topology:
    """Connected stochastic-block-model sample (rejection-resampled)."""
    sizes = [int(s) for s in block_sizes]
    if not sizes or any(s < 1 for s in sizes):
        raise ParameterError(f"all block sizes must be >= 1, got {block_sizes}")
    for p, name in ((p_in, "p_in"), (p_out, "p_out")):
        if not (0.0 <= p <= 1.0):
            raise ParameterError(f"{name} must be in [0,1], got {p}")
    b = len(sizes)
    probs = np.full((b, b), p_out, dtype=float)
    np.fill_diagonal(probs, p_in)
    for attempt in range(MAX_CONNECTIVITY_RETRIES):
        sub_seed = seed + attempt
        g = nx.stochastic_block_model(sizes, probs.tolist(), seed=sub_seed)
        if nx.is_connected(g):
            return Topology.from_edges(
                sum(sizes),
                g.edges(),
                provenance={
                    "generator": "sbm",
                    "blocks": sizes,
                    "p_in": p_in,
                    "p_out": p_out,
                    "seed": seed,
                    "sub_seed": sub_seed,
                },
            )
    raise GenerationError(
        f"no connected SBM(blocks={sizes}, p_in={p_in}, p_out={p_out}) sample "
        f"in {MAX_CONNECTIVITY_RETRIES} attempts"
    )


def load_topology_zoo(source) -> Topology:
    """Read a GraphML topology (Topology Zoo convention).

    Keeps the largest connected component (zoo files occasionally contain
    isolates) and remaps node ids to 0..m-1 in file order.  ``source`` may be
    a filesystem path or a readable byte/text stream.
    """
    name = None
    if isinstance(source, (str, os.PathLike)):
        name = os.path.basename(os.fspath(source))
        with open(source, "rb") as fh:
            data = fh.read()
    else:
        data = source.read()
        if isinstance(data, str):
            data = data.encode()
        name = getattr(source, "name", None)
    try:
        g = nx.read_graphml(io.BytesIO(data))
    except ET.ParseError as exc:
        line, col = exc.position if exc.position else ("?", "?")
        raise TopologyParseError(f"malformed GraphML at line {line}, column {col}: {exc}") from exc
    except Exception as exc:  # networkx raises bare exceptions on schema problems
        raise TopologyParseError(f"malformed GraphML: {exc}") from exc
    g = nx.Graph(g)  # collapse multi-edges, drop keys
    g.remove_edges_from(nx.selfloop_edges(g))
    if g.number_of_nodes() == 0:
        raise ParameterError("GraphML file contains no nodes")
    file_order = list(g.nodes())
    components = list(nx.connected_components(g))
    largest = max(components, key=len)
    kept = [n for n in file_order if n in largest]
    index = {n: i for i, n in enumerate(kept)}
    edges = [(index[u], index[v]) for u, v in g.edges() if u in index and v in index]
    return Topology.from_edges(
        len(kept),
        edges,
        provenance={"generator": "graphml", "source": name or "<stream>", "dropped_nodes": len(file_order) - len(kept)},
    )


def permute(t: Topology, p: Sequence[int]) -> Topology:
    """Relabel nodes: node i of the input becomes node p[i] of the output."""
    perm = [int(x) for x in p]
    if sorted(perm) != list(range(t.m)):
        raise ParameterError(f"p is not a permutation of 0..{t.m - 1}")
    edges = [(perm[i], perm[j]) for i, j in t.edges]
    prov = dict(t.provenance)
    prov["permuted"] = True
    return Topology.from_edges(t.m, edges, provenance=prov)
