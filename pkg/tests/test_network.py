import numpy as np
import pytest

from bnrobot.core.network import (BooleanNetwork, NetworkState, constant_network, flip_table_bit,
                                  hamming_distance, identity_network, random_network, synchronous_step,
                                  trajectory)
from bnrobot.core.storage import network_to_document
from bnrobot.utils.errors import ContractViolation, ParameterError


def test_random_network_wiring():
    """Every node gets k distinct non-self sources and a 2^k-row table"""
    net = random_network(20, 3, no_self=True, seed=5)

    assert net.n == 20
    for node, sources in enumerate(net.inputs):
        assert len(sources) == 3
        assert len(set(sources)) == 3
        assert node not in sources
        assert net.tables[node].size == 8
        assert set(np.unique(net.tables[node])) <= {0, 1}


def test_random_network_single_self_loop():
    net = random_network(1, 1, no_self=False, seed=0)

    assert net.inputs == ((0,),)
    assert net.tables[0].size == 2


def test_random_network_is_reproducible():
    first = random_network(5, 3, no_self=True, seed=42)
    second = random_network(5, 3, no_self=True, seed=42)

    assert network_to_document(first) == network_to_document(second)
    assert first == second
    assert random_network(5, 3, seed=43) != first


@pytest.mark.parametrize('n, k, no_self', [(3, 3, True), (3, 4, False), (4, 0, True), (0, 1, False)])
def test_random_network_rejects_bad_shapes(n, k, no_self):
    with pytest.raises(ParameterError):
        random_network(n, k, no_self=no_self, seed=1)


def test_random_network_tables_are_fair():
    """Table bits are fair coins: about half of 20*8*50 bits are ones"""
    ones = sum(random_network(20, 3, seed=s).bias().mean() for s in range(50)) / 50
    assert ones == pytest.approx(0.5, abs=0.03)


def test_network_rejects_inconsistent_tables():
    with pytest.raises(ContractViolation):
        BooleanNetwork(2, ((1,), (0,)), (np.array([0, 1]), np.array([0, 1, 1, 0])))
    with pytest.raises(ParameterError):
        BooleanNetwork(2, ((1,), (2,)), (np.array([0, 1]), np.array([0, 1])))
    with pytest.raises(ParameterError):
        BooleanNetwork(2, ((1,), (0,)), (np.array([0, 1]), np.array([0, 1])), (0,), (0,))


def test_synchronous_step_constant_and_identity():
    zero = constant_network(3, 0)
    assert synchronous_step(zero, NetworkState((1, 0, 1))) == NetworkState((0, 0, 0))

    ident = identity_network(3)
    for value in range(8):
        state = NetworkState.from_int(value, 3)
        assert synchronous_step(ident, state) == state


def test_synchronous_step_reads_old_state(witness):
    # The two-cycle of the witness only exists because all nodes read the previous state
    assert synchronous_step(witness, NetworkState((0, 0, 1))) == NetworkState((0, 1, 0))
    assert synchronous_step(witness, NetworkState((0, 1, 0))) == NetworkState((0, 0, 1))
    assert synchronous_step(witness, NetworkState((0, 1, 1))) == NetworkState((1, 1, 1))


def test_synchronous_step_length_mismatch():
    with pytest.raises(ContractViolation):
        synchronous_step(constant_network(3, 0), NetworkState((0, 1)))


def test_step_bits_matches_single_steps():
    net = random_network(8, 3, seed=9)
    states = np.array([[(v >> (7 - i)) & 1 for i in range(8)] for v in range(256)], dtype=np.uint8)
    batch = net.step_bits(states)
    for v in (0, 17, 128, 255):
        assert tuple(batch[v].tolist()) == synchronous_step(net, NetworkState.from_int(v, 8)).bits


def test_row_index_uses_first_source_as_msb():
    # node 0 reads (1, 2); only row 0b10 (x1=1, x2=0) is set
    net = BooleanNetwork(3, ((1, 2), (0,), (0,)), (np.array([0, 0, 1, 0]), np.array([0, 0]), np.array([0, 0])))
    assert synchronous_step(net, NetworkState((0, 1, 0)))[0] == 1
    assert synchronous_step(net, NetworkState((0, 0, 1)))[0] == 0


def test_trajectory_trivial_cases():
    traj = trajectory(constant_network(4, 0), NetworkState((1, 1, 0, 1)), max_steps=10)
    assert traj.repeat_step is not None and traj.repeat_step <= 2
    assert traj.cycle == (NetworkState((0, 0, 0, 0)),)

    traj = trajectory(identity_network(3), NetworkState((1, 0, 1)), max_steps=5)
    assert traj.repeat_step == 1
    assert traj.cycle_entry == 0


def test_trajectory_always_repeats_within_state_count():
    for seed in range(5):
        net = random_network(10, 3, seed=seed)
        traj = trajectory(net, NetworkState.zeros(10), max_steps=2 ** 10 + 1)
        assert traj.repeat_step is not None
        assert len(traj.cycle) >= 1


def test_trajectory_budget_without_repeat():
    """A negation loop needs two steps to repeat"""
    blinker = BooleanNetwork(1, ((0,),), (np.array([1, 0]),))
    traj = trajectory(blinker, NetworkState((0,)), max_steps=1)
    assert traj.repeat_step is None
    assert traj.cycle == ()
    assert len(traj.states) == 2

    with pytest.raises(ParameterError):
        trajectory(blinker, NetworkState((0,)), max_steps=0)


def test_flip_table_bit_is_an_involution():
    net = random_network(6, 2, seed=1)
    flipped = flip_table_bit(net, 2, 3)

    assert flipped != net
    assert flip_table_bit(flipped, 2, 3) == net
    # the input network is untouched
    assert net == random_network(6, 2, seed=1)


def test_flip_on_constant_network():
    flipped = flip_table_bit(constant_network(3, 0), 0, 0)
    assert flipped.tables[0].tolist() == [1, 0]
    assert sum(int(t.sum()) for t in flipped.tables) == 1


def test_flip_changes_one_table_bit_and_no_topology():
    net = random_network(20, 3, seed=7)
    rng = np.random.default_rng(0)
    for _ in range(25):
        node, row = int(rng.integers(20)), int(rng.integers(8))
        flipped = flip_table_bit(net, node, row)
        assert hamming_distance(net, flipped) == 1
        assert flipped.topology_bytes() == net.topology_bytes()


@pytest.mark.parametrize('node, row', [(-1, 0), (6, 0), (0, 4), (0, -1)])
def test_flip_out_of_range(node, row):
    with pytest.raises(ParameterError):
        flip_table_bit(random_network(6, 2, seed=1), node, row)


def test_state_encoding_is_lexicographic():
    states = [NetworkState.from_int(v, 4) for v in range(16)]
    assert sorted(states) == states
    assert NetworkState.from_string('0110').to_int() == 6
    assert str(NetworkState.from_int(6, 4)) == '0110'


def test_roles_are_tagged():
    net = random_network(20, 3, seed=2, input_nodes=(0, 1, 2, 3, 4), output_nodes=(5, 6))
    tags = dict(net.role_tags())
    assert tags[0] == 'sound'
    assert tags[4] == 'light3'
    assert tags[6] == 'wheel_right'
