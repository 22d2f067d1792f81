"""
Stochastic descent over truth-table bits.

The incumbent is replaced by a one-bit mutant whenever the mutant's mean
error on the fixed training set is not worse. The schedule has two stages:
a short phototaxis-only stage without clap, then the full task. The
incumbent is re-evaluated on the full-task set when the stage changes.
"""

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from ..config.settings import ArenaConfig, SearchConfig
from ..utils.errors import ConfigurationError, ParameterError
from ..utils.logging import enhanced_logger
from ..utils.rng import get_state, set_state, stream
from .arena import Stage, TrialSpec, sample_start_pose
from .coupling import initial_state
from .network import BooleanNetwork, flip_table_bit, random_network
from .objective import aggregate_error
from .storage import FORMAT_VERSION, SearchLog, network_from_document, network_to_document, read_json, write_json

PROGRESS_EVERY = 1000


@dataclass(frozen=True)
class TracePoint:
    iteration: int
    stage: Stage
    error: float


@dataclass
class SearchResult:
    """
    Outcome of one descent.

    ``incumbent_trace`` samples the incumbent error every ``trace_every``
    iterations, plus iteration 0 and the re-evaluation at the stage change.
    """

    best_network: BooleanNetwork
    best_error: float
    incumbent_trace: List[TracePoint]
    accepted_moves: int
    initial_network: BooleanNetwork
    iterations: int
    final_stage: Stage
    trials_per_second: float = field(default=0.0, compare=False)


def propose_move(net: BooleanNetwork, rng: np.random.Generator) -> Tuple[int, int]:
    """A uniformly random node, then a uniformly random row of its table."""
    node = int(rng.integers(net.n))
    row = int(rng.integers(net.tables[node].size))
    return node, row


def accept(candidate_error: float, incumbent_error: float) -> bool:
    """Not worse is good enough: ties are accepted."""
    if not (math.isfinite(candidate_error) and math.isfinite(incumbent_error)):
        raise ParameterError('errors must be finite', field='candidate_error',
                             value=(candidate_error, incumbent_error))
    return candidate_error <= incumbent_error


def build_training_set(seed: int, size: int, stage: Union[Stage, str], cfg: SearchConfig,
                       arena: ArenaConfig, stream_name: str = 'training') -> List[TrialSpec]:
    """
    A fixed list of trials drawn from one random stream.

    Each trial consumes the same draws in both stages (start pose, clap
    instant, perturbation instant as a fraction of the horizon, rotation),
    so stage-1 and stage-2 sets share their start poses and rotations.
    """
    if size < 1:
        raise ParameterError('need at least one trial', field='size', value=size)
    stage = Stage(stage)
    rng = stream(seed, stream_name)
    horizon = cfg.stage1_T if stage is Stage.PHOTOTAXIS else cfg.stage2_T
    lo, hi = cfg.clap_window

    trials = []
    for _ in range(size):
        start = sample_start_pose(rng, arena)
        clap = int(rng.integers(lo, hi + 1))
        perturb_step = 1 + int(rng.random() * horizon)
        angle = float(rng.uniform(-math.pi, math.pi))
        trials.append(TrialSpec(
            start=start,
            horizon=horizon,
            clap_step=clap if stage is Stage.FULL else None,
            perturb_step=min(perturb_step, horizon),
            perturb_angle=angle,
            stage=stage,
        ))
    return trials


def _config_document(cfg: SearchConfig, arena: ArenaConfig) -> Dict[str, Any]:
    return {'search': cfg.model_dump(mode='json', exclude={'checkpoint_every', 'trace_every'}),
            'arena': arena.model_dump(mode='json')}


@dataclass
class Checkpoint:
    """Resumable descent state."""

    config: Dict[str, Any]
    iteration: int
    stage: Stage
    network: BooleanNetwork
    initial_network: BooleanNetwork
    incumbent_error: float
    accepted_moves: int
    move_rng: Dict[str, Any]
    trace: List[TracePoint]

    def to_document(self) -> Dict[str, Any]:
        return {
            'format_version': FORMAT_VERSION,
            'config': self.config,
            'iteration': self.iteration,
            'stage': self.stage.value,
            'network': network_to_document(self.network),
            'initial_network': network_to_document(self.initial_network),
            'incumbent_error': self.incumbent_error,
            'accepted_moves': self.accepted_moves,
            'rng': {'moves': self.move_rng},
            'trace': [[p.iteration, p.stage.value, p.error] for p in self.trace],
        }

    @classmethod
    def from_document(cls, document: Dict[str, Any], source: str = '<checkpoint>') -> 'Checkpoint':
        try:
            return cls(
                config=document['config'],
                iteration=int(document['iteration']),
                stage=Stage(document['stage']),
                network=network_from_document(document['network'], source=source),
                initial_network=network_from_document(document['initial_network'], source=source),
                incumbent_error=float(document['incumbent_error']),
                accepted_moves=int(document['accepted_moves']),
                move_rng=document['rng']['moves'],
                trace=[TracePoint(int(i), Stage(s), float(e)) for i, s, e in document['trace']],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f'{source}: malformed checkpoint ({exc})') from exc


def save_checkpoint(path: Union[str, Path], checkpoint: Checkpoint):
    write_json(path, checkpoint.to_document())


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    return Checkpoint.from_document(read_json(path), source=str(path))


def stochastic_descent(cfg: SearchConfig, arena: ArenaConfig,
                       checkpoint_path: Optional[Union[str, Path]] = None,
                       resume: Optional[Checkpoint] = None,
                       log_path: Optional[Union[str, Path]] = None) -> SearchResult:
    """
    Run the two-stage descent described by ``cfg``.

    Args:
        cfg: schedule, seeds and node roles
        arena: simulation constants
        checkpoint_path: written every ``cfg.checkpoint_every`` iterations
        resume: continue from a checkpoint taken under the same configuration
        log_path: append-only CSV of every iteration

    Returns:
        SearchResult holding the final incumbent
    """
    snapshot = _config_document(cfg, arena)
    training_seed = cfg.effective_training_seed
    move_rng = stream(cfg.seed, 'moves')
    stage1 = (build_training_set(training_seed, cfg.training_set_size, Stage.PHOTOTAXIS, cfg, arena)
              if cfg.stage1_iterations > 0 else None)
    stage2 = build_training_set(training_seed, cfg.training_set_size, Stage.FULL, cfg, arena)

    if resume is not None:
        if resume.config != snapshot:
            raise ConfigurationError('checkpoint was taken under a different configuration', field='resume')
        initial = resume.initial_network
        net = resume.network
        stage = resume.stage
        incumbent_error = resume.incumbent_error
        accepted_moves = resume.accepted_moves
        trace = list(resume.trace)
        start = resume.iteration
        set_state(move_rng, resume.move_rng)
    else:
        initial = random_network(cfg.n, cfg.k, cfg.no_self, cfg.seed,
                                 cfg.input_nodes, cfg.output_nodes)
        net = initial
        stage = Stage.PHOTOTAXIS if cfg.stage1_iterations > 0 else Stage.FULL
        incumbent_error = None
        accepted_moves = 0
        trace = []
        start = 0

    state0 = initial_state(initial, cfg.seed, cfg.random_initial_state)

    def trials_for(current: Stage) -> List[TrialSpec]:
        return stage1 if current is Stage.PHOTOTAXIS else stage2

    def evaluate(candidate: BooleanNetwork, current: Stage) -> float:
        return aggregate_error(candidate, trials_for(current), arena, cfg.alpha, state0)

    # a fresh descent replaces any earlier log at the same path
    log = SearchLog(log_path, truncate_after=start if resume is not None else -1) if log_path else None
    trials_evaluated = 0
    began = time.perf_counter()
    window_start, window_trials = began, 0

    try:
        if incumbent_error is None:
            incumbent_error = evaluate(net, stage)
            trials_evaluated += len(trials_for(stage))
            trace.append(TracePoint(0, stage, incumbent_error))
            if log:
                log.append(0, stage.value, None, None, incumbent_error)

        enhanced_logger.info('descent started', seed=cfg.seed, start_iteration=start, stage=stage.value,
                             incumbent_error=incumbent_error, total_iterations=cfg.total_iterations)

        for iteration in range(start + 1, cfg.total_iterations + 1):
            if stage is Stage.PHOTOTAXIS and iteration > cfg.stage1_iterations:
                stage = Stage.FULL
                incumbent_error = evaluate(net, stage)
                trials_evaluated += len(stage2)
                trace.append(TracePoint(iteration - 1, stage, incumbent_error))
                enhanced_logger.info('stage switched', iteration=iteration - 1, incumbent_error=incumbent_error)

            node, row = propose_move(net, move_rng)
            candidate = flip_table_bit(net, node, row)
            candidate_error = evaluate(candidate, stage)
            trials_evaluated += len(trials_for(stage))
            window_trials += len(trials_for(stage))
            accepted = accept(candidate_error, incumbent_error)
            if accepted:
                net, incumbent_error = candidate, candidate_error
                accepted_moves += 1

            if log:
                log.append(iteration, stage.value, candidate_error, accepted, incumbent_error)
            if iteration % cfg.trace_every == 0 or iteration == cfg.total_iterations:
                trace.append(TracePoint(iteration, stage, incumbent_error))
            if cfg.checkpoint_every and checkpoint_path and iteration % cfg.checkpoint_every == 0:
                save_checkpoint(checkpoint_path, Checkpoint(
                    snapshot, iteration, stage, net, initial, incumbent_error,
                    accepted_moves, get_state(move_rng), list(trace)))
            if iteration % PROGRESS_EVERY == 0:
                now = time.perf_counter()
                enhanced_logger.log_performance('search.evaluate', (now - window_start) * 1000,
                                                items=window_trials, iteration=iteration,
                                                incumbent_error=incumbent_error)
                window_start, window_trials = now, 0

        if stage is Stage.PHOTOTAXIS:
            # the schedule ended on the boundary; report the full-task error
            stage = Stage.FULL
            incumbent_error = evaluate(net, stage)
            trials_evaluated += len(stage2)
            trace.append(TracePoint(cfg.total_iterations, stage, incumbent_error))
            enhanced_logger.info('stage switched', iteration=cfg.total_iterations, incumbent_error=incumbent_error)
    finally:
        if log:
            log.close()

    elapsed = time.perf_counter() - began
    throughput = trials_evaluated / elapsed if elapsed > 0 else 0.0
    enhanced_logger.info('descent finished', seed=cfg.seed, best_error=incumbent_error,
                         accepted_moves=accepted_moves, trials_per_second=round(throughput, 1))
    return SearchResult(
        best_network=net,
        best_error=incumbent_error,
        incumbent_trace=trace,
        accepted_moves=accepted_moves,
        initial_network=initial,
        iterations=cfg.total_iterations,
        final_stage=stage,
        trials_per_second=throughput,
    )
