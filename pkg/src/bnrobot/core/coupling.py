"""
Coupling between a Boolean network and the robot.

Each control step clamps the sensor frame onto the input nodes (sound, then
four Gray-coded light bits), updates the network synchronously and reads
the two output nodes as the left/right wheel levels. Input nodes keep their
clamped value through the update: their truth tables are stored but never
evaluated while clamped.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..utils.errors import ConfigurationError, ContractViolation, ParameterError
from ..utils.rng import stream
from .arena import SECTORS, WheelCommand
from .network import BooleanNetwork, NetworkState

GRAY_BITS = 4


def to_gray_code(x: int) -> int:
    return (x >> 1) ^ x


def from_gray_code(g: int) -> int:
    value = g
    shift = g >> 1
    while shift:
        value ^= shift
        shift >>= 1
    return value


# Row s holds the code of sector s, most significant bit first; row 0 is unused.
GRAY_TABLE = np.array(
    [[(to_gray_code(s) >> (GRAY_BITS - 1 - j)) & 1 for j in range(GRAY_BITS)] for s in range(SECTORS + 1)],
    dtype=np.uint8)


@dataclass(frozen=True)
class SensorFrame:
    sector: int
    sound: int

    def __post_init__(self):
        if not 1 <= self.sector <= SECTORS:
            raise ParameterError(f'sector must lie in 1..{SECTORS}', field='sector', value=self.sector)
        if self.sound not in (0, 1):
            raise ParameterError('sound reading is a bit', field='sound', value=self.sound)


def gray_encode(sector: int) -> Tuple[int, int, int, int]:
    """Binary-reflected Gray code of the sector id on four bits, MSB first."""
    if not 1 <= sector <= SECTORS:
        raise ParameterError(f'sector must lie in 1..{SECTORS}', field='sector', value=sector)
    return tuple(int(b) for b in GRAY_TABLE[sector])


def gray_decode(bits) -> int:
    value = 0
    for bit in bits:
        value = (value << 1) | (int(bit) & 1)
    return from_gray_code(value)


def check_roles(net: BooleanNetwork):
    """The controller needs one sound node, four light nodes and two wheel nodes."""
    if len(net.input_nodes) != 1 + GRAY_BITS:
        raise ConfigurationError(f'expected {1 + GRAY_BITS} input nodes (sound + light bits)',
                                 field='input_nodes', value=list(net.input_nodes))
    if len(net.output_nodes) != 2:
        raise ConfigurationError('expected 2 output nodes (left, right wheel)',
                                 field='output_nodes', value=list(net.output_nodes))


def clamp_inputs(net: BooleanNetwork, bits: np.ndarray, sectors, sounds) -> np.ndarray:
    """Copy of ``bits`` (shape (..., n)) with the sensor readings written onto the input nodes."""
    clamped = np.array(bits, dtype=np.uint8, copy=True)
    inputs = net.input_nodes
    clamped[..., inputs[0]] = np.asarray(sounds, dtype=np.uint8)
    clamped[..., list(inputs[1:])] = GRAY_TABLE[np.asarray(sectors, dtype=np.int64)]
    return clamped


def controller_step_batch(net: BooleanNetwork, bits: np.ndarray, sectors, sounds):
    """
    Sense/update/act for a batch of robots sharing one network.

    Returns:
        (next_bits, left, right) with next_bits of shape (..., n)
    """
    clamped = clamp_inputs(net, bits, sectors, sounds)
    updated = net.step_bits(clamped)
    inputs = list(net.input_nodes)
    updated[..., inputs] = clamped[..., inputs]
    left = updated[..., net.output_nodes[0]]
    right = updated[..., net.output_nodes[1]]
    return updated, left, right


def controller_step(net: BooleanNetwork, state: NetworkState,
                    frame: SensorFrame) -> Tuple[NetworkState, WheelCommand]:
    check_roles(net)
    if len(state) != net.n:
        raise ContractViolation(f'state length {len(state)} does not match network size {net.n}',
                                field='state', value=str(state))
    updated, left, right = controller_step_batch(net, state.as_array(), frame.sector, frame.sound)
    return NetworkState(tuple(updated.tolist())), WheelCommand(int(left), int(right))


def initial_state(net: BooleanNetwork, seed=None, random: bool = False) -> NetworkState:
    """All zeros, or fair coin flips from the ``state`` stream of ``seed``."""
    if not random:
        return NetworkState.zeros(net.n)
    rng = stream(0 if seed is None else seed, 'state')
    return NetworkState(tuple(rng.integers(0, 2, size=net.n).tolist()))


def sensor_clamp(net: BooleanNetwork, sector: Optional[int] = None, sound: Optional[int] = None) -> Dict[int, int]:
    """Node -> bit mapping that holds the input nodes at a fixed sensor reading."""
    check_roles(net)
    clamp = {}
    if sound is not None:
        if sound not in (0, 1):
            raise ParameterError('sound reading is a bit', field='sound', value=sound)
        clamp[net.input_nodes[0]] = int(sound)
    if sector is not None:
        for node, bit in zip(net.input_nodes[1:], gray_encode(sector)):
            clamp[node] = bit
    return clamp
