import numpy as np
import pytest

from bnrobot.config.settings import ArenaConfig, ExperimentConfig, SearchConfig
from bnrobot.core.network import BooleanNetwork, NetworkState, constant_network

INPUTS = (0, 1, 2, 3, 4)
OUTPUTS = (5, 6)


def build_controller(outputs=None, n=7, fill=0):
    """
    Network with the robot roles; every node outputs ``fill`` unless ``outputs``
    maps it to (sources, table).
    """
    inputs = [((i + 1) % n,) for i in range(n)]
    tables = [np.full(2, fill, dtype=np.uint8) for _ in range(n)]
    for node, (sources, table) in (outputs or {}).items():
        inputs[node] = tuple(sources)
        tables[node] = np.array(table, dtype=np.uint8)
    return BooleanNetwork(n, tuple(inputs), tuple(tables), INPUTS, OUTPUTS)


@pytest.fixture
def make_controller():
    return build_controller


@pytest.fixture
def arena():
    return ArenaConfig()


@pytest.fixture
def stop_controller():
    """Both wheels always off."""
    return constant_network(7, 0).with_roles(INPUTS, OUTPUTS)


@pytest.fixture
def small_search():
    return SearchConfig(n=8, k=2, total_iterations=30, stage1_iterations=10, stage1_T=60, stage2_T=120,
                        clap_window=(50, 70), training_set_size=3, seed=3)


@pytest.fixture
def tiny_experiment(small_search):
    search = small_search.model_copy(update={'total_iterations': 6, 'stage1_iterations': 2})
    return ExperimentConfig(runs=2, test_set_size=3, master_seed=11, search=search)


@pytest.fixture
def witness():
    """Three nodes: x0 = x1 AND x2, x1 = x2, x2 = x1."""
    tables = (np.array([0, 0, 0, 1]), np.array([0, 1, 0, 1]), np.array([0, 1, 0, 1]))
    return BooleanNetwork(3, ((1, 2), (0, 2), (0, 1)), tables)


@pytest.fixture
def witness_attractors():
    return [
        (NetworkState((0, 0, 0)),),
        (NetworkState((0, 0, 1)), NetworkState((0, 1, 0))),
        (NetworkState((1, 1, 1)),),
    ]
