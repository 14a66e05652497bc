import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from netsampler.topology import Topology, generate_watts_strogatz


@pytest.fixture
def triangle():
    return Topology.from_edges(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def path3():
    return Topology.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def edge2():
    return Topology.from_edges(2, [(0, 1)])


@pytest.fixture
def ws10():
    return generate_watts_strogatz(10, 4, 0.3, seed=7)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
