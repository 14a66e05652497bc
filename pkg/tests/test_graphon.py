import numpy as np
import pytest

from netsampler.errors import ParameterError
from netsampler.graphon import (
    GraphonSpec,
    induce_graphon,
    sample_from_graphon,
)
from netsampler.topology import Topology


class TestGraphonSpec:
    @pytest.mark.parametrize(
        "spec",
        [
            GraphonSpec.constant(0.4),
            GraphonSpec.watts_strogatz_limit(0.2, 0.3),
            GraphonSpec.stochastic_block([[0.8, 0.2], [0.2, 0.8]], [0.5, 0.5]),
            GraphonSpec.step_function([0.0, 0.3, 1.0], [[0.1, 0.9], [0.9, 0.5]]),
        ],
    )
    def test_symmetric_and_bounded(self, spec, rng):
        u = rng.uniform(0, 1, size=200)
        v = rng.uniform(0, 1, size=200)
        w_uv = spec.evaluate(u, v)
        w_vu = spec.evaluate(v, u)
        assert np.allclose(w_uv, w_vu)
        assert np.all(w_uv >= 0) and np.all(w_uv <= 1)

    def test_dict_round_trip(self):
        spec = GraphonSpec.stochastic_block([[0.7, 0.1], [0.1, 0.7]], [0.25, 0.75])
        back = GraphonSpec.from_dict(spec.to_dict())
        u = np.linspace(0, 1, 33)
        assert np.allclose(back.evaluate(u[:, None], u[None, :]), spec.evaluate(u[:, None], u[None, :]))

    def test_invalid_kernels_rejected(self):
        with pytest.raises(ParameterError):
            GraphonSpec.constant(1.2)
        with pytest.raises(ParameterError):
            GraphonSpec.step_function([0.0, 0.5, 1.0], [[0.1, 0.2], [0.3, 0.4]])  # asymmetric
        with pytest.raises(ParameterError):
            GraphonSpec.stochastic_block([[0.5, 0.5], [0.5, 0.5]], [0.4, 0.4])  # measures don't sum to 1


class TestSampling:
    def test_constant_one_gives_complete_graph(self):
        g = sample_from_graphon(GraphonSpec.constant(1.0), 5, seed=0)
        assert len(g.topology.edges) == 10

    def test_constant_zero_gives_empty_graph(self):
        g = sample_from_graphon(GraphonSpec.constant(0.0), 5, seed=0)
        assert g.topology.edges == ()

    def test_density_concentrates(self):
        densities = []
        for seed in range(100):
            g = sample_from_graphon(GraphonSpec.constant(0.5), 100, seed=seed)
            densities.append(len(g.topology.edges) / (100 * 99 / 2))
        assert abs(np.mean(densities) - 0.5) < 0.03

    def test_labels_sorted_in_unit_interval(self):
        g = sample_from_graphon(GraphonSpec.constant(0.3), 50, seed=4)
        assert np.all(np.diff(g.labels) >= 0)
        assert g.labels[0] >= 0 and g.labels[-1] <= 1

    def test_step_graphon_at_cell_points_reproduces_graph(self, ws10):
        # A 0/1 step kernel built from a fixed graph, sampled with one label
        # per cell, must reproduce that graph's adjacency with probability 1.
        spec = GraphonSpec.step_function_from_graph(ws10)
        labels = (np.arange(10) + 0.5) / 10
        g = sample_from_graphon(spec, 10, seed=99, labels=labels)
        assert np.array_equal(g.topology.adjacency, ws10.adjacency)

    def test_require_connected(self):
        g = sample_from_graphon(GraphonSpec.constant(0.2), 12, seed=5, require_connected=True)
        assert g.topology.is_connected()


class TestInducedGraphon:
    def test_single_node_zero_kernel(self):
        g = sample_from_graphon(GraphonSpec.constant(0.7), 1, seed=0)
        ind = induce_graphon(g)
        u = np.linspace(0, 1, 9)
        assert np.all(ind.evaluate(u[:, None], u[None, :]) == 0.0)

    def test_k2_offdiagonal_cells(self):
        spec = GraphonSpec.constant(1.0)
        g = sample_from_graphon(spec, 2, seed=0, labels=[0.25, 0.75])
        ind = induce_graphon(g)
        # partition [0, 0.75), [0.75, 1]: off-diagonal cells carry the edge
        assert ind.evaluate(0.1, 0.9) == 1.0
        assert ind.evaluate(0.9, 0.1) == 1.0
        assert ind.evaluate(0.1, 0.2) == 0.0
        assert ind.evaluate(0.9, 0.95) == 0.0

    def test_values_are_binary_and_cells_tile(self):
        g = sample_from_graphon(GraphonSpec.constant(0.5), 8, seed=3)
        ind = induce_graphon(g)
        assert set(np.unique(ind.values)) <= {0.0, 1.0}
        measures = ind.cell_measures()
        assert np.all(measures > 0)
        assert np.isclose(measures.sum(), 1.0)

    def test_kernel_symmetric(self, rng):
        g = sample_from_graphon(GraphonSpec.constant(0.5), 6, seed=11)
        ind = induce_graphon(g)
        u = rng.uniform(0, 1, 50)
        v = rng.uniform(0, 1, 50)
        assert np.allclose(ind.evaluate(u, v), ind.evaluate(v, u))
