"""
Error functional of a trial and its mean over a trial set.

Trials are simulated in lock-step: all robots of a batch share the network
and advance one control step together, so a whole training set costs one
pass of vectorised numpy operations per time step.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from ..config.settings import ArenaConfig
from ..utils.errors import ContractViolation, ParameterError
from .arena import (Stage, StepLabel, TrialSpec, wrap_heading, advance, distance_to_light,
                    light_sectors, step_labels)
from .coupling import check_roles, controller_step_batch
from .network import BooleanNetwork, NetworkState


@dataclass(frozen=True)
class TrialTrace:
    """Per-step labels (+1 toward, -1 away, 0 neither) for steps 1..T."""

    labels: np.ndarray
    clap_step: Optional[int]
    horizon: int
    stage: Stage

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int8).reshape(-1)
        labels.setflags(write=False)
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'stage', Stage(self.stage))
        if labels.size != self.horizon:
            raise ContractViolation(f'{labels.size} labels for horizon {self.horizon}',
                                    field='labels', value=labels.size)
        if self.stage is Stage.FULL and (self.clap_step is None or not 1 <= self.clap_step < self.horizon):
            raise ContractViolation(f'clap step must lie in [1, {self.horizon})', field='clap_step',
                                    value=self.clap_step)


@dataclass(frozen=True)
class ErrorReport:
    """
    E and its two terms.

    In the phototaxis-only stage ``antiphototaxis_term`` is None and E equals
    ``phototaxis_term``.
    """

    error: float
    phototaxis_term: float
    antiphototaxis_term: Optional[float]
    alpha: float


@dataclass(frozen=True, eq=False)
class TrialRecord:
    """Per-step trajectory of one simulated trial (index 0 is step 1)."""

    spec: TrialSpec
    x: np.ndarray
    y: np.ndarray
    heading: np.ndarray
    sector: np.ndarray
    sound: np.ndarray
    left: np.ndarray
    right: np.ndarray
    distance: np.ndarray
    labels: np.ndarray
    final_state: NetworkState

    @property
    def trace(self) -> TrialTrace:
        return TrialTrace(self.labels, self.spec.clap_step, self.spec.horizon, self.spec.stage)


def _check_alpha(alpha: float):
    if not 0.0 <= alpha <= 1.0:
        raise ParameterError('alpha must lie in [0, 1]', field='alpha', value=alpha)


def trial_error(trace: TrialTrace, alpha: float = 0.5) -> ErrorReport:
    """
    Full stage:  E = a(1 - toward steps up to t_c / t_c) + (1-a)(1 - away steps after t_c / (T - t_c)).
    Phototaxis-only stage:  E = 1 - toward steps / T.
    """
    _check_alpha(alpha)
    labels = trace.labels
    if trace.stage is Stage.PHOTOTAXIS:
        term = 1.0 - int(np.count_nonzero(labels == StepLabel.TOWARD)) / trace.horizon
        return ErrorReport(term, term, None, alpha)

    tc = trace.clap_step
    toward = int(np.count_nonzero(labels[:tc] == StepLabel.TOWARD))
    away = int(np.count_nonzero(labels[tc:] == StepLabel.AWAY))
    photo = 1.0 - toward / tc
    anti = 1.0 - away / (trace.horizon - tc)
    return ErrorReport(alpha * photo + (1.0 - alpha) * anti, photo, anti, alpha)


def _initial_bits(net: BooleanNetwork, count: int, initial: Optional[NetworkState]) -> np.ndarray:
    if initial is None:
        return np.zeros((count, net.n), dtype=np.uint8)
    if len(initial) != net.n:
        raise ContractViolation(f'initial state length {len(initial)} does not match network size {net.n}')
    return np.tile(initial.as_array(), (count, 1))


def simulate_trials(net: BooleanNetwork, trials: Sequence[TrialSpec], cfg: ArenaConfig,
                    initial: Optional[NetworkState] = None, record: bool = False):
    """
    Run every trial end to end.

    Each step t (1-based): rotate the robots whose perturbation is due, read
    the light sector and the sound bit, run one controller step, move, and
    label the move by its change of distance to the light.

    Returns:
        (labels, records): labels is an int8 array (trials, max horizon) with
        zeros past each trial's own horizon; records is a list of
        ``TrialRecord`` when ``record`` is set, else None.
    """
    check_roles(net)
    count = len(trials)
    horizons = np.array([t.horizon for t in trials], dtype=np.int64)
    t_max = int(horizons.max())
    clap = np.array([t.clap_step if t.stage is Stage.FULL else -1 for t in trials], dtype=np.int64)
    perturb = np.array([t.perturb_step if t.perturb_step is not None else -1 for t in trials], dtype=np.int64)
    angle = np.array([t.perturb_angle for t in trials], dtype=float)

    x = np.array([t.start.x for t in trials], dtype=float)
    y = np.array([t.start.y for t in trials], dtype=float)
    heading = np.array([t.start.heading for t in trials], dtype=float)
    bits = _initial_bits(net, count, initial)
    light = cfg.light
    distance = distance_to_light(x, y, light)

    labels = np.zeros((count, t_max), dtype=np.int8)
    if record:
        log = {name: np.zeros((count, t_max), dtype=float) for name in ('x', 'y', 'heading', 'distance')}
        log.update({name: np.zeros((count, t_max), dtype=np.int8) for name in ('sector', 'sound', 'left', 'right')})

    for t in range(1, t_max + 1):
        due = perturb == t
        if due.any():
            heading = np.where(due, wrap_heading(heading + angle), heading)
        sectors = light_sectors(x, y, heading, light)
        sounds = (clap == t).astype(np.uint8)
        bits, left, right = controller_step_batch(net, bits, sectors, sounds)
        x, y, heading = advance(x, y, heading, left, right, cfg)
        previous, distance = distance, distance_to_light(x, y, light)
        labels[:, t - 1] = step_labels(previous, distance)
        if record:
            for name, values in (('x', x), ('y', y), ('heading', heading), ('distance', distance),
                                 ('sector', sectors), ('sound', sounds), ('left', left), ('right', right)):
                log[name][:, t - 1] = values

    labels[np.arange(t_max)[None, :] >= horizons[:, None]] = 0
    if not record:
        return labels, None

    records = []
    for i, spec in enumerate(trials):
        horizon = spec.horizon
        records.append(TrialRecord(
            spec=spec,
            labels=labels[i, :horizon].copy(),
            final_state=NetworkState(tuple(bits[i].tolist())),
            **{name: values[i, :horizon].copy() for name, values in log.items()},
        ))
    return labels, records


def batch_errors(labels: np.ndarray, trials: Sequence[TrialSpec], alpha: float = 0.5) -> List[ErrorReport]:
    return [trial_error(TrialTrace(labels[i, :spec.horizon], spec.clap_step, spec.horizon, spec.stage), alpha)
            for i, spec in enumerate(trials)]


def aggregate_error(net: BooleanNetwork, trials: Sequence[TrialSpec], cfg: ArenaConfig,
                    alpha: float = 0.5, initial: Optional[NetworkState] = None) -> float:
    """Arithmetic mean of the per-trial errors; exact summation keeps it order-free."""
    if not trials:
        raise ParameterError('need at least one trial', field='trials', value=0)
    labels, _ = simulate_trials(net, trials, cfg, initial)
    return math.fsum(r.error for r in batch_errors(labels, trials, alpha)) / len(trials)


def evaluate_trials(net: BooleanNetwork, trials: Sequence[TrialSpec], cfg: ArenaConfig,
                    alpha: float = 0.5, initial: Optional[NetworkState] = None) -> List[ErrorReport]:
    """Per-trial error reports, in trial order."""
    if not trials:
        raise ParameterError('need at least one trial', field='trials', value=0)
    labels, _ = simulate_trials(net, trials, cfg, initial)
    return batch_errors(labels, trials, alpha)


def run_trial(net: BooleanNetwork, spec: TrialSpec, cfg: ArenaConfig, alpha: float = 0.5,
              initial: Optional[NetworkState] = None):
    """Simulate one trial with its full trajectory; returns (record, report)."""
    _, records = simulate_trials(net, [spec], cfg, initial, record=True)
    record = records[0]
    return record, trial_error(record.trace, alpha)
