import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netsampler.errors import GenerationError, ParameterError, TopologyParseError
from netsampler.topology import (
    Topology,
    check_topology,
    generate_sbm,
    generate_watts_strogatz,
    load_topology_zoo,
    permute,
)

GRAPHML_TMPL = """<?xml version="1.0" encoding="UTF-8"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns">
  <graph id="G" edgedefault="undirected">
{body}
  </graph>
</graphml>
"""


def make_graphml(nodes, edges):
    body = "\n".join(f'    <node id="{n}"/>' for n in nodes)
    body += "\n" + "\n".join(f'    <edge source="{u}" target="{v}"/>' for u, v in edges)
    return GRAPHML_TMPL.format(body=body).encode()


class TestWattsStrogatz:
    def test_beta_zero_is_ring_lattice(self):
        t = generate_watts_strogatz(10, 4, 0.0, seed=1)
        check_topology(t)
        assert t.degree_sequence() == (4,) * 10

    def test_rewiring_preserves_edge_count(self):
        t = generate_watts_strogatz(10, 4, 0.3, seed=7)
        check_topology(t)
        assert len(t.edges) == 20
        assert t.is_connected()

    def test_k_not_less_than_m_rejected(self):
        with pytest.raises(ParameterError):
            generate_watts_strogatz(4, 4, 0.1)

    def test_odd_k_rejected(self):
        with pytest.raises(ParameterError):
            generate_watts_strogatz(10, 3, 0.1)

    def test_provenance_records_sub_seed(self):
        t = generate_watts_strogatz(10, 4, 0.3, seed=3)
        assert t.provenance["generator"] == "watts_strogatz"
        assert t.provenance["sub_seed"] >= t.provenance["seed"]


class TestSbm:
    def test_all_probabilities_one_gives_complete_graph(self):
        t = generate_sbm([5, 5], 1.0, 1.0, seed=0)
        assert len(t.edges) == 45
        assert t.degree_sequence() == (9,) * 10

    def test_disconnected_blocks_exhaust_retries(self):
        with pytest.raises(GenerationError):
            generate_sbm([5, 5], 1.0, 0.0, seed=0)

    def test_within_block_density(self):
        # Monte-Carlo estimate of the within-block edge density.
        hits = 0
        trials = 0
        for seed in range(1000):
            t = generate_sbm([5, 5], 0.8, 0.2, seed=seed * 10_000)
            a = t.adjacency
            for block in (range(0, 5), range(5, 10)):
                for i in block:
                    for j in block:
                        if i < j:
                            trials += 1
                            hits += int(a[i, j])
        assert abs(hits / trials - 0.8) < 0.05

    def test_bad_sizes_rejected(self):
        with pytest.raises(ParameterError):
            generate_sbm([5, 0], 0.8, 0.2)


class TestGraphml:
    def test_seven_node_bundled_topology(self):
        from importlib import resources

        with resources.files("netsampler.assets").joinpath("aus_simple.graphml").open("rb") as fh:
            t = load_topology_zoo(fh)
        assert t.m == 7
        assert t.is_connected()

    def test_single_node_no_edges(self):
        t = load_topology_zoo(io.BytesIO(make_graphml(["n0"], [])))
        assert t.m == 1
        assert t.edges == ()

    def test_truncated_file_is_parse_error(self):
        data = make_graphml(["a", "b"], [("a", "b")])[:-30]
        with pytest.raises(TopologyParseError):
            load_topology_zoo(io.BytesIO(data))

    def test_largest_component_kept_with_file_order(self):
        data = make_graphml(["a", "b", "c", "z"], [("a", "b"), ("b", "c")])
        t = load_topology_zoo(io.BytesIO(data))
        assert t.m == 3
        assert t.edges == ((0, 1), (1, 2))
        assert t.provenance["dropped_nodes"] == 1


class TestPermute:
    def test_identity(self, path3):
        t = permute(path3, [0, 1, 2])
        assert t.edges == path3.edges

    def test_reverse_path(self, path3):
        t = permute(path3, [2, 1, 0])
        assert t.edges == ((0, 1), (1, 2))
        assert sorted(t.degree_sequence()) == sorted(path3.degree_sequence())

    def test_non_bijection_rejected(self, path3):
        with pytest.raises(ParameterError):
            permute(path3, [0, 0, 2])

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_permute_then_inverse_is_identity(self, seed):
        t = generate_watts_strogatz(8, 4, 0.4, seed=seed)
        rng = np.random.default_rng(seed)
        p = rng.permutation(8)
        inv = np.argsort(p)
        back = permute(permute(t, p), inv)
        assert back.edges == t.edges

    def test_degree_multiset_invariant(self, ws10, rng):
        p = rng.permutation(10)
        t = permute(ws10, p)
        assert sorted(t.degree_sequence()) == sorted(ws10.degree_sequence())


class TestExchangeFormat:
    def test_round_trip(self, ws10):
        d = ws10.to_dict()
        t = Topology.from_dict(d)
        assert t.edges == ws10.edges
        assert np.array_equal(t.adjacency, ws10.adjacency)

    def test_missing_fields_rejected(self):
        with pytest.raises(ParameterError):
            Topology.from_dict({"edges": []})
