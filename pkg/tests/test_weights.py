import json

import numpy as np
import pytest

from netsampler.errors import WeightFormatError
from netsampler.grnn import (
    grnn_forward,
    load_weights,
    random_weights,
    save_weights,
    shift_operator,
)
from netsampler.topology import Topology


class TestRoundTrip:
    def test_bit_exact(self):
        w = random_weights(seed=31)
        back = load_weights(save_weights(w))
        for name in ("B", "C", "D", "theta_action"):
            assert np.array_equal(getattr(back, name), getattr(w, name))
        assert (back.F, back.H, back.G, back.T, back.L) == (w.F, w.H, w.G, w.T, w.L)
        assert back.rho1 == w.rho1 and back.rho2 == w.rho2

    def test_seventeen_significant_digits(self):
        w = random_weights(seed=1)
        text = save_weights(w).decode()
        doc = json.loads(text)
        assert doc["format_version"] == 1
        # a third-order tap value survives textual round-trip bit-exactly
        assert doc["B"][0][0][0] == w.B[0, 0, 0]

    def test_critic_block_preserved(self):
        w = random_weights(seed=2)
        w.critic = {"F": 3, "H": 4, "G": 1, "L": 2, "B": [[[0.5]]], "D": [[[0.25]]]}
        back = load_weights(save_weights(w))
        assert back.critic["B"] == [[[0.5]]]

    def test_file_path_round_trip(self, tmp_path):
        w = random_weights(seed=3)
        path = tmp_path / "w.json"
        path.write_bytes(save_weights(w))
        back = load_weights(str(path))
        assert np.array_equal(back.D, w.D)


class TestValidation:
    def test_inconsistent_tap_shape_names_field(self):
        w = random_weights(seed=4)
        doc = json.loads(save_weights(w))
        doc["B"] = doc["B"][:-1]  # truncate the tap axis
        with pytest.raises(WeightFormatError, match="'B'"):
            load_weights(json.dumps(doc))

    def test_missing_field(self):
        w = random_weights(seed=5)
        doc = json.loads(save_weights(w))
        del doc["theta_action"]
        with pytest.raises(WeightFormatError, match="theta_action"):
            load_weights(json.dumps(doc))

    def test_bad_version(self):
        w = random_weights(seed=6)
        doc = json.loads(save_weights(w))
        doc["format_version"] = 9
        with pytest.raises(WeightFormatError, match="format_version"):
            load_weights(json.dumps(doc))

    def test_not_json(self):
        with pytest.raises(WeightFormatError):
            load_weights(b"{broken")

    def test_unknown_activation(self):
        w = random_weights(seed=7)
        doc = json.loads(save_weights(w))
        doc["rho1"] = "gelu"
        with pytest.raises(WeightFormatError, match="rho1"):
            load_weights(json.dumps(doc))


class TestSizeIndependence:
    def test_weight_bytes_constant_in_node_count(self):
        # the same file drives graphs of any size; bytes never depend on m
        w = random_weights(seed=8)
        data = save_weights(w)
        for m in (5, 10, 50):
            topo = Topology.from_edges(m, [(i, (i + 1) % m) for i in range(m)])
            s = shift_operator(topo)
            y = grnn_forward(w, s, [np.zeros((m, w.F))] * w.T)
            assert y.shape == (m, w.G)
        assert len(save_weights(w)) == len(data)


class TestBundledFixture:
    def test_bundled_random_weights_load_and_run(self):
        from importlib import resources

        data = resources.files("netsampler.assets").joinpath("grnn_random.json").read_bytes()
        w = load_weights(data)
        topo = Topology.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
        y = grnn_forward(w, shift_operator(topo), [np.ones((4, w.F))] * w.T)
        assert np.all(np.isfinite(y))
