"""
Boolean networks with synchronous, deterministic dynamics.

Truth-table rows are indexed by the source bits read in source-list order,
the first listed source being the most significant bit. Networks and states
are immutable values.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..utils.errors import ContractViolation, ParameterError
from ..utils.rng import RngLike, coerce_rng, stream

INPUT_ROLES = ('sound', 'light0', 'light1', 'light2', 'light3')
OUTPUT_ROLES = ('wheel_left', 'wheel_right')


@dataclass(frozen=True)
class NetworkState:
    """The values of all n nodes at one time step."""

    bits: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'bits', tuple(int(b) & 1 for b in self.bits))

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, index):
        return self.bits[index]

    def __lt__(self, other: 'NetworkState') -> bool:
        return self.bits < other.bits

    def __str__(self) -> str:
        return ''.join(str(b) for b in self.bits)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.bits, dtype=np.uint8)

    def to_int(self) -> int:
        """Node 0 is the most significant bit, so integer order is lexicographic order."""
        value = 0
        for bit in self.bits:
            value = (value << 1) | bit
        return value

    @classmethod
    def from_int(cls, value: int, n: int) -> 'NetworkState':
        return cls(tuple((value >> (n - 1 - i)) & 1 for i in range(n)))

    @classmethod
    def from_string(cls, text: str) -> 'NetworkState':
        return cls(tuple(int(ch) for ch in text.strip()))

    @classmethod
    def zeros(cls, n: int) -> 'NetworkState':
        return cls((0,) * n)


@dataclass(frozen=True, eq=False)
class BooleanNetwork:
    """
    Topology, truth tables and node roles of a Boolean network.

    ``inputs[i]`` lists the K_i source nodes of node i; ``tables[i]`` holds
    2**K_i output bits, row 0 first. ``input_nodes`` are clamped by sensor
    readings and ``output_nodes`` are observed to drive the actuators.
    """

    n: int
    inputs: Tuple[Tuple[int, ...], ...]
    tables: Tuple[np.ndarray, ...]
    input_nodes: Tuple[int, ...] = ()
    output_nodes: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError('a network needs at least one node', field='n', value=self.n)
        inputs = tuple(tuple(int(s) for s in sources) for sources in self.inputs)
        if len(inputs) != self.n or len(self.tables) != self.n:
            raise ContractViolation(
                f'expected {self.n} source lists and tables, got {len(inputs)} and {len(self.tables)}')

        tables = []
        for node, (sources, table) in enumerate(zip(inputs, self.tables)):
            if any(s < 0 or s >= self.n for s in sources):
                raise ParameterError(f'source index out of range [0, {self.n})',
                                     field=f'inputs[{node}]', value=list(sources))
            array = np.array(table, dtype=np.uint8).reshape(-1)
            if array.size != 2 ** len(sources):
                raise ContractViolation(
                    f'table of node {node} has {array.size} rows, expected {2 ** len(sources)}')
            if np.any(array > 1):
                raise ParameterError('truth tables hold bits only', field=f'tables[{node}]',
                                     value=array.tolist())
            array.setflags(write=False)
            tables.append(array)

        input_nodes = tuple(int(i) for i in self.input_nodes)
        output_nodes = tuple(int(i) for i in self.output_nodes)
        for name, nodes in (('input_nodes', input_nodes), ('output_nodes', output_nodes)):
            if any(i < 0 or i >= self.n for i in nodes) or len(set(nodes)) != len(nodes):
                raise ParameterError(f'must be distinct indices in [0, {self.n})', field=name,
                                     value=list(nodes))
        if set(input_nodes) & set(output_nodes):
            raise ParameterError('input and output nodes must be disjoint', field='output_nodes',
                                 value=list(output_nodes))

        object.__setattr__(self, 'inputs', inputs)
        object.__setattr__(self, 'tables', tuple(tables))
        object.__setattr__(self, 'input_nodes', input_nodes)
        object.__setattr__(self, 'output_nodes', output_nodes)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BooleanNetwork):
            return NotImplemented
        return (self.n == other.n and self.inputs == other.inputs
                and self.input_nodes == other.input_nodes
                and self.output_nodes == other.output_nodes
                and self.table_bits() == other.table_bits())

    def __hash__(self) -> int:
        return hash((self.n, self.inputs, self.input_nodes, self.output_nodes, self.table_bits()))

    @property
    def in_degrees(self) -> List[int]:
        return [len(sources) for sources in self.inputs]

    def table_bits(self) -> str:
        """All truth tables concatenated, node 0 first, row 0 first."""
        return ''.join(''.join('1' if b else '0' for b in table) for table in self.tables)

    def topology_bytes(self) -> bytes:
        """Stable encoding of the wiring (sources and roles), tables excluded."""
        text = '|'.join(','.join(str(s) for s in sources) for sources in self.inputs)
        text += f'#{self.input_nodes}#{self.output_nodes}'
        return text.encode('ascii')

    def bias(self) -> np.ndarray:
        """Fraction of 1-entries in each node's truth table."""
        return np.array([table.mean() if table.size else 0.0 for table in self.tables])

    def role_tags(self) -> List[Tuple[int, str]]:
        """(node, role) pairs for the clamped and observed nodes."""
        tags = []
        for j, node in enumerate(self.input_nodes):
            role = INPUT_ROLES[j] if len(self.input_nodes) == len(INPUT_ROLES) else f'input{j}'
            tags.append((node, role))
        for j, node in enumerate(self.output_nodes):
            role = OUTPUT_ROLES[j] if len(self.output_nodes) == len(OUTPUT_ROLES) else f'output{j}'
            tags.append((node, role))
        return tags

    def with_roles(self, input_nodes: Sequence[int], output_nodes: Sequence[int]) -> 'BooleanNetwork':
        return BooleanNetwork(self.n, self.inputs, self.tables, tuple(input_nodes), tuple(output_nodes))

    @cached_property
    def _compiled(self):
        # Pad every node to the largest in-degree; padded columns carry weight 0.
        k_max = max(self.in_degrees) if self.n else 0
        sources = np.zeros((self.n, max(k_max, 1)), dtype=np.intp)
        weights = np.zeros((self.n, max(k_max, 1)), dtype=np.int64)
        offsets = np.zeros(self.n, dtype=np.int64)
        position = 0
        for node, srcs in enumerate(self.inputs):
            k = len(srcs)
            sources[node, :k] = srcs
            weights[node, :k] = 1 << np.arange(k - 1, -1, -1, dtype=np.int64)
            offsets[node] = position
            position += 2 ** k
        flat = np.concatenate(self.tables) if self.tables else np.zeros(0, dtype=np.uint8)
        return sources, weights, offsets, flat

    def step_bits(self, bits: np.ndarray) -> np.ndarray:
        """
        Synchronous update of a batch of states.

        Args:
            bits: uint8 array of shape (..., n)

        Returns:
            uint8 array of the same shape holding the successor states
        """
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.shape[-1] != self.n:
            raise ContractViolation(f'state length {bits.shape[-1]} does not match network size {self.n}')
        sources, weights, offsets, flat = self._compiled
        gathered = bits[..., sources].astype(np.int64)
        rows = np.einsum('...ij,ij->...i', gathered, weights)
        return flat[rows + offsets]


@dataclass(frozen=True)
class Trajectory:
    """
    Successive states from a start state.

    ``states[t]`` is the state after t steps. ``repeat_step`` is the first t
    whose state already occurred, at index ``cycle_entry``; both are None
    when no repeat happened within the step budget.
    """

    states: Tuple[NetworkState, ...]
    repeat_step: Optional[int]
    cycle_entry: Optional[int]

    @property
    def cycle(self) -> Tuple[NetworkState, ...]:
        if self.repeat_step is None:
            return ()
        return self.states[self.cycle_entry:self.repeat_step]


def _check_state(net: BooleanNetwork, state: NetworkState):
    if len(state) != net.n:
        raise ContractViolation(f'state length {len(state)} does not match network size {net.n}',
                                field='state', value=str(state))


def random_network(n: int, k: int, no_self: bool = True, seed: RngLike = None,
                   input_nodes: Sequence[int] = (), output_nodes: Sequence[int] = ()) -> BooleanNetwork:
    """
    Random topology with exactly k distinct sources per node and fair-coin tables.

    An integer seed draws from the ``network`` stream of that seed, so equal
    seeds give bit-identical networks.
    """
    if n < 1:
        raise ParameterError('need at least one node', field='n', value=n)
    if k < 1:
        raise ParameterError('in-degree must be at least 1', field='k', value=k)
    if no_self and k > n - 1:
        raise ParameterError(f'at most n-1={n - 1} sources without self-connections', field='k', value=k)
    if k > n:
        raise ParameterError(f'at most n={n} distinct sources', field='k', value=k)

    rng = stream(seed, 'network') if isinstance(seed, (int, np.integer)) else coerce_rng(seed)
    inputs = []
    tables = []
    for node in range(n):
        candidates = np.array([j for j in range(n) if not (no_self and j == node)])
        inputs.append(tuple(int(s) for s in rng.choice(candidates, size=k, replace=False)))
        tables.append(rng.integers(0, 2, size=2 ** k, dtype=np.uint8))
    return BooleanNetwork(n, tuple(inputs), tuple(tables), tuple(input_nodes), tuple(output_nodes))


def constant_network(n: int, value: int = 0, k: int = 1) -> BooleanNetwork:
    """Every node outputs ``value`` regardless of its sources (node i reads node i+1..)."""
    inputs = tuple(tuple((node + 1 + j) % n for j in range(k)) for node in range(n))
    tables = tuple(np.full(2 ** k, value & 1, dtype=np.uint8) for _ in range(n))
    return BooleanNetwork(n, inputs, tables)


def identity_network(n: int) -> BooleanNetwork:
    """Every node copies itself, so every state is a fixed point."""
    inputs = tuple((node,) for node in range(n))
    tables = tuple(np.array([0, 1], dtype=np.uint8) for _ in range(n))
    return BooleanNetwork(n, inputs, tables)


def synchronous_step(net: BooleanNetwork, state: NetworkState) -> NetworkState:
    """All nodes read the old state and update at the same instant."""
    _check_state(net, state)
    return NetworkState(tuple(net.step_bits(state.as_array()).tolist()))


def trajectory(net: BooleanNetwork, start: NetworkState, max_steps: int) -> Trajectory:
    """Iterate from ``start`` until a state repeats or ``max_steps`` steps were taken."""
    if max_steps < 1:
        raise ParameterError('need at least one step', field='max_steps', value=max_steps)
    _check_state(net, start)

    states = [start]
    seen = {start: 0}
    current = start.as_array()
    for t in range(1, max_steps + 1):
        current = net.step_bits(current)
        state = NetworkState(tuple(current.tolist()))
        if state in seen:
            states.append(state)
            return Trajectory(tuple(states), t, seen[state])
        seen[state] = t
        states.append(state)
    return Trajectory(tuple(states), None, None)


def flip_table_bit(net: BooleanNetwork, node: int, row: int) -> BooleanNetwork:
    """Copy of ``net`` with one truth-table entry inverted."""
    if not 0 <= node < net.n:
        raise ParameterError(f'node must lie in [0, {net.n})', field='node', value=node)
    rows = net.tables[node].size
    if not 0 <= row < rows:
        raise ParameterError(f'row must lie in [0, {rows})', field='row', value=row)
    table = net.tables[node].copy()
    table[row] ^= 1
    tables = net.tables[:node] + (table,) + net.tables[node + 1:]
    return BooleanNetwork(net.n, net.inputs, tables, net.input_nodes, net.output_nodes)


def hamming_distance(a: Union[BooleanNetwork, str], b: Union[BooleanNetwork, str]) -> int:
    """Number of differing truth-table bits between two networks of equal shape."""
    bits_a = a.table_bits() if isinstance(a, BooleanNetwork) else a
    bits_b = b.table_bits() if isinstance(b, BooleanNetwork) else b
    if len(bits_a) != len(bits_b):
        raise ContractViolation('table encodings differ in length')
    return sum(x != y for x, y in zip(bits_a, bits_b))
