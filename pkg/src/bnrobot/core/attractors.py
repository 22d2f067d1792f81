"""
Attractors and basins of attraction under synchronous update.

The exhaustive sweep builds the full state transition graph with numpy,
peels off transient states to find the cycles, and labels every state by
pointer jumping. Cycles are reported in canonical rotation: the
lexicographically smallest state first. Networks above the exhaustive bound
go through ``sample_attractors`` instead.
"""

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..utils.errors import CapacityError, ParameterError
from ..utils.logging import performance_monitor
from ..utils.rng import RngLike, coerce_rng
from .network import BooleanNetwork, NetworkState

logger = structlog.get_logger(__name__)

EXHAUSTIVE_LIMIT = 24
_CHUNK = 1 << 16


@dataclass(frozen=True)
class AttractorInfo:
    cycle: Tuple[NetworkState, ...]
    basin_size: int

    @property
    def period(self) -> int:
        return len(self.cycle)

    @property
    def is_fixed_point(self) -> bool:
        return self.period == 1


@dataclass(frozen=True)
class StateSpace:
    """
    Complete synchronous dynamics over the free (unclamped) nodes.

    ``successors[s]`` and ``labels[s]`` are indexed by the integer encoding of
    the free-node bits (first free node most significant). ``labels`` gives
    the index into ``attractors`` of the attractor each state reaches.
    """

    attractors: List[AttractorInfo]
    labels: np.ndarray
    successors: np.ndarray
    free_nodes: Tuple[int, ...]
    clamp: Dict[int, int] = field(default_factory=dict)

    def state_index(self, state: NetworkState) -> int:
        value = 0
        for node in self.free_nodes:
            value = (value << 1) | state[node]
        return value

    def attractor_of(self, state: NetworkState) -> AttractorInfo:
        return self.attractors[int(self.labels[self.state_index(state)])]


def canonical_cycle(cycle: Sequence[NetworkState]) -> Tuple[NetworkState, ...]:
    """Rotate a cycle so its smallest state comes first."""
    cycle = tuple(cycle)
    if not cycle:
        return cycle
    start = min(range(len(cycle)), key=lambda j: cycle[j].bits)
    return cycle[start:] + cycle[:start]


def _check_clamp(net: BooleanNetwork, clamp: Optional[Mapping[int, int]]) -> Dict[int, int]:
    clamp = {int(node): int(bit) & 1 for node, bit in (clamp or {}).items()}
    for node in clamp:
        if not 0 <= node < net.n:
            raise ParameterError(f'clamped node must lie in [0, {net.n})', field='clamp', value=node)
    return clamp


def _decode(indices: np.ndarray, net: BooleanNetwork, free: np.ndarray,
            clamp: Dict[int, int]) -> np.ndarray:
    m = free.size
    shifts = np.arange(m - 1, -1, -1, dtype=np.int64)
    bits = np.zeros((indices.size, net.n), dtype=np.uint8)
    if m:
        bits[:, free] = ((indices[:, None] >> shifts) & 1).astype(np.uint8)
    for node, bit in clamp.items():
        bits[:, node] = bit
    return bits


def _encode(bits: np.ndarray, free: np.ndarray) -> np.ndarray:
    m = free.size
    weights = (1 << np.arange(m - 1, -1, -1, dtype=np.int64))
    return bits[:, free].astype(np.int64) @ weights if m else np.zeros(bits.shape[0], dtype=np.int64)


def state_transition_graph(net: BooleanNetwork, clamp: Optional[Mapping[int, int]] = None) -> np.ndarray:
    """Successor index of every free-node state (clamped nodes re-imposed after each step)."""
    clamp = _check_clamp(net, clamp)
    free = np.array([i for i in range(net.n) if i not in clamp], dtype=np.intp)
    if free.size > EXHAUSTIVE_LIMIT:
        raise CapacityError(
            f'{free.size} free nodes exceed the exhaustive bound of {EXHAUSTIVE_LIMIT}; '
            f'use sampled mode (sample_attractors / analyze --samples)',
            field='n', value=net.n)
    total = 1 << free.size
    successors = np.empty(total, dtype=np.int64)
    for begin in range(0, total, _CHUNK):
        indices = np.arange(begin, min(begin + _CHUNK, total), dtype=np.int64)
        nxt = net.step_bits(_decode(indices, net, free, clamp))
        for node, bit in clamp.items():
            nxt[:, node] = bit
        successors[begin:begin + indices.size] = _encode(nxt, free)
    return successors


def _cycle_states(successors: np.ndarray) -> np.ndarray:
    """Mask of states lying on a cycle (peel states with no predecessors)."""
    total = successors.size
    indegree = np.bincount(successors, minlength=total)
    alive = np.ones(total, dtype=bool)
    frontier = np.flatnonzero(indegree == 0)
    while frontier.size:
        alive[frontier] = False
        targets = successors[frontier]
        indegree -= np.bincount(targets, minlength=total)
        frontier = np.unique(targets[indegree[targets] == 0])
        frontier = frontier[alive[frontier]]
    return alive


def state_space(net: BooleanNetwork, clamp: Optional[Mapping[int, int]] = None) -> StateSpace:
    """Exhaustive attractor/basin analysis with the per-state assignment."""
    clamp = _check_clamp(net, clamp)
    free = np.array([i for i in range(net.n) if i not in clamp], dtype=np.intp)
    successors = state_transition_graph(net, clamp)
    total = successors.size

    on_cycle = _cycle_states(successors)
    representative = np.full(total, -1, dtype=np.int64)
    fixed = on_cycle & (successors == np.arange(total))
    representative[fixed] = np.flatnonzero(fixed)

    long_cycles: Dict[int, List[int]] = {}
    for s in np.flatnonzero(on_cycle & ~fixed):
        if representative[s] >= 0:
            continue
        # s is the smallest unvisited cycle state, hence the smallest of its cycle
        members = [int(s)]
        nxt = int(successors[s])
        while nxt != s:
            members.append(nxt)
            nxt = int(successors[nxt])
        representative[members] = s
        long_cycles[int(s)] = members

    reps = np.unique(representative[on_cycle])
    labels = np.full(total, -1, dtype=np.int64)
    labels[on_cycle] = np.searchsorted(reps, representative[on_cycle])

    jump = successors.copy()
    missing = np.flatnonzero(labels < 0)
    while missing.size:
        labels[missing] = labels[jump[missing]]
        jump[missing] = jump[jump[missing]]
        missing = missing[labels[missing] < 0]

    basins = np.bincount(labels, minlength=reps.size)

    def to_state(index: int) -> NetworkState:
        bits = _decode(np.array([index], dtype=np.int64), net, free, clamp)[0]
        return NetworkState(tuple(bits.tolist()))

    attractors = []
    for j, rep in enumerate(reps.tolist()):
        members = long_cycles.get(rep, [rep])
        attractors.append(AttractorInfo(tuple(to_state(s) for s in members), int(basins[j])))

    logger.debug('state space enumerated', n=net.n, clamped=len(clamp),
                 attractors=len(attractors), states=total)
    return StateSpace(attractors, labels, successors, tuple(int(i) for i in free), clamp)


def enumerate_attractors(net: BooleanNetwork,
                         clamp: Optional[Mapping[int, int]] = None) -> List[AttractorInfo]:
    """
    All attractors with exact basin sizes, ordered by their smallest state.

    Raises:
        CapacityError: more than ``EXHAUSTIVE_LIMIT`` free nodes.
    """
    return state_space(net, clamp).attractors


@dataclass(frozen=True)
class SampledAttractors:
    """Attractors reached from random start states; basins are hit counts."""

    attractors: List[AttractorInfo]
    samples: int
    timeouts: int

    def basin_fractions(self) -> List[float]:
        reached = self.samples - self.timeouts
        return [a.basin_size / reached if reached else 0.0 for a in self.attractors]


@performance_monitor('attractors.sample')
def sample_attractors(net: BooleanNetwork, samples: int = 1000, seed: RngLike = None,
                      max_steps: int = 10000,
                      clamp: Optional[Mapping[int, int]] = None) -> SampledAttractors:
    """Estimate the attractor landscape of a large network by simulation."""
    if samples < 1:
        raise ParameterError('need at least one sample', field='samples', value=samples)
    clamp = _check_clamp(net, clamp)
    rng = coerce_rng(seed)
    found: Dict[Tuple[NetworkState, ...], int] = {}
    timeouts = 0
    for _ in range(samples):
        bits = rng.integers(0, 2, size=net.n, dtype=np.uint8)
        for node, bit in clamp.items():
            bits[node] = bit
        seen = {}
        history = []
        cycle = None
        for t in range(max_steps + 1):
            key = bits.tobytes()
            if key in seen:
                cycle = history[seen[key]:]
                break
            seen[key] = t
            history.append(NetworkState(tuple(bits.tolist())))
            bits = net.step_bits(bits)
            for node, bit in clamp.items():
                bits[node] = bit
        if cycle is None:
            timeouts += 1
            continue
        canonical = canonical_cycle(cycle)
        found[canonical] = found.get(canonical, 0) + 1

    attractors = [AttractorInfo(cycle, hits) for cycle, hits in sorted(found.items(), key=lambda kv: kv[0][0].bits)]
    return SampledAttractors(attractors, samples, timeouts)


@performance_monitor('attractors.brute_force')
def find_network_with_attractors(n: int, k: int, target: Iterable[Sequence[NetworkState]],
                                 no_self: bool = True) -> Optional[BooleanNetwork]:
    """
    Brute-force a small network whose attractors are exactly ``target``.

    Topologies (k sources per node) and then truth tables are enumerated in a
    fixed order; the first match is returned, or None.
    """
    wanted = sorted(canonical_cycle(c) for c in target)
    options = []
    for node in range(n):
        candidates = [j for j in range(n) if not (no_self and j == node)]
        options.append(list(itertools.combinations(candidates, k)))
    tables = list(itertools.product((0, 1), repeat=2 ** k))
    for wiring in itertools.product(*options):
        for assignment in itertools.product(tables, repeat=n):
            net = BooleanNetwork(n, wiring, tuple(np.array(t, dtype=np.uint8) for t in assignment))
            found = sorted(a.cycle for a in enumerate_attractors(net))
            if found == wanted:
                return net
    return None
