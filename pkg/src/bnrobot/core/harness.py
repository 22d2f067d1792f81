"""
Repeated independent designs with held-out testing.

All runs share one training set and one test set, both derived from the
master seed on separate streams; each run has its own network and move
seeds. Runs are independent, so they may execute in worker processes; the
result list is merged by run id and then ordered by training median.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import binomtest

from ..config.settings import ExperimentConfig
from ..utils.errors import ParameterError
from ..utils.logging import enhanced_logger
from ..utils.rng import derive_seeds
from .arena import Stage, TrialSpec
from .network import BooleanNetwork
from .objective import ErrorReport, evaluate_trials
from .search import build_training_set, load_checkpoint, stochastic_descent

RUN_SEEDS, TRAINING_SEED, TEST_SEED = 0, 1, 2


def summarize(errors: Sequence[float]) -> Tuple[float, float, float]:
    """(median, Q1, Q3) with linear interpolation between order statistics."""
    if len(errors) == 0:
        raise ParameterError('need at least one error value', field='errors', value=0)
    q1, median, q3 = np.percentile(np.asarray(errors, dtype=float), [25, 50, 75], method='linear')
    return float(median), float(q1), float(q3)


@dataclass(frozen=True)
class ExperimentPlan:
    run_seeds: Tuple[int, ...]
    training_seed: int
    test_seed: int

    def as_dict(self) -> Dict[str, Any]:
        return {'runs': list(self.run_seeds), 'training': self.training_seed, 'test': self.test_seed}


def plan_experiment(cfg: ExperimentConfig) -> ExperimentPlan:
    training_seed = cfg.search.training_seed
    if training_seed is None:
        training_seed = derive_seeds(cfg.master_seed, 1, TRAINING_SEED)[0]
    return ExperimentPlan(
        run_seeds=tuple(derive_seeds(cfg.master_seed, cfg.runs, RUN_SEEDS)),
        training_seed=training_seed,
        test_seed=derive_seeds(cfg.master_seed, 1, TEST_SEED)[0],
    )


@dataclass
class RunSummary:
    run: int
    seed: int
    train_error: float
    train_reports: List[ErrorReport]
    test_reports: List[ErrorReport]
    train_median: float
    test_median: float
    test_q1: float
    test_q3: float
    success: bool
    accepted_moves: int
    best_network: BooleanNetwork
    trials_per_second: float = field(default=0.0, compare=False)

    @property
    def test_errors(self) -> List[float]:
        return [r.error for r in self.test_reports]

    @property
    def train_errors(self) -> List[float]:
        return [r.error for r in self.train_reports]

    def row(self) -> Dict[str, Any]:
        return {
            'run': self.run,
            'train_median': self.train_median,
            'test_median': self.test_median,
            'test_q1': self.test_q1,
            'test_q3': self.test_q3,
            'success': self.success,
        }


def _design_run(run: int, seed: int, cfg: ExperimentConfig, plan: ExperimentPlan,
                log_path: Optional[Path] = None, checkpoint_path: Optional[Path] = None) -> RunSummary:
    search = cfg.search.model_copy(update={'seed': seed, 'training_seed': plan.training_seed})
    with enhanced_logger.run_context(f'run-{run:03d}'):
        resume = None
        if checkpoint_path is not None and checkpoint_path.exists():
            resume = load_checkpoint(checkpoint_path)
            enhanced_logger.info('resuming from checkpoint', run=run, iteration=resume.iteration)
        result = stochastic_descent(search, cfg.arena, checkpoint_path=checkpoint_path,
                                    resume=resume, log_path=log_path)

        training = build_training_set(plan.training_seed, search.training_set_size, Stage.FULL, search, cfg.arena)
        testing = held_out_set(cfg, plan)
        train_reports = evaluate_trials(result.best_network, training, cfg.arena, search.alpha)
        test_reports = evaluate_trials(result.best_network, testing, cfg.arena, search.alpha)
        train_median = summarize([r.error for r in train_reports])[0]
        median, q1, q3 = summarize([r.error for r in test_reports])
        return RunSummary(
            run=run, seed=seed, train_error=result.best_error,
            train_reports=train_reports, test_reports=test_reports,
            train_median=train_median, test_median=median, test_q1=q1, test_q3=q3,
            success=median < cfg.success_threshold, accepted_moves=result.accepted_moves,
            best_network=result.best_network, trials_per_second=result.trials_per_second,
        )


def held_out_set(cfg: ExperimentConfig, plan: ExperimentPlan) -> List[TrialSpec]:
    """Held-out full-task trials from the ``test`` stream."""
    return build_training_set(plan.test_seed, cfg.test_set_size, Stage.FULL, cfg.search, cfg.arena,
                              stream_name='test')


def run_experiment(cfg: ExperimentConfig, parallelism: int = 1,
                   log_dir: Optional[Path] = None,
                   checkpoint_dir: Optional[Path] = None) -> List[RunSummary]:
    """
    Run ``cfg.runs`` independent designs and test each best network.

    The output does not depend on ``parallelism``.
    """
    if parallelism < 1:
        raise ParameterError('parallelism must be at least 1', field='parallelism', value=parallelism)
    plan = plan_experiment(cfg)
    jobs = []
    for run, seed in enumerate(plan.run_seeds):
        log_path = Path(log_dir) / f'search_{run:03d}.csv' if log_dir else None
        checkpoint_path = Path(checkpoint_dir) / f'run_{run:03d}.json' if checkpoint_dir else None
        jobs.append((run, seed, cfg, plan, log_path, checkpoint_path))

    enhanced_logger.info('experiment started', runs=cfg.runs, master_seed=cfg.master_seed,
                         parallelism=parallelism)
    began = time.perf_counter()
    by_run: Dict[int, RunSummary] = {}
    workers = min(parallelism, len(jobs))
    if workers == 1:
        for job in jobs:
            summary = _design_run(*job)
            by_run[summary.run] = summary
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_design_run, *job) for job in jobs]
            for future in futures:
                summary = future.result()
                by_run[summary.run] = summary
                enhanced_logger.info('run finished', run=summary.run, test_median=summary.test_median)

    summaries = [by_run[run] for run in sorted(by_run)]
    summaries.sort(key=lambda s: (s.train_median, s.run))
    enhanced_logger.log_performance('experiment', (time.perf_counter() - began) * 1000, items=len(summaries))
    return summaries


def success_fraction(summaries: Sequence[RunSummary], threshold: Optional[float] = None) -> float:
    if not summaries:
        raise ParameterError('need at least one run', field='summaries', value=0)
    if threshold is None:
        hits = sum(s.success for s in summaries)
    else:
        hits = sum(s.test_median < threshold for s in summaries)
    return hits / len(summaries)


def success_interval(successes: int, runs: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Exact (Clopper-Pearson) confidence band for a success ratio."""
    if runs < 1 or not 0 <= successes <= runs:
        raise ParameterError('need 0 <= successes <= runs and runs >= 1', field='successes',
                             value=(successes, runs))
    interval = binomtest(successes, runs).proportion_ci(confidence_level=confidence, method='exact')
    return float(interval.low), float(interval.high)


def trial_rows(summary: RunSummary, training: Sequence[TrialSpec], testing: Sequence[TrialSpec],
               plan: ExperimentPlan) -> List[Dict[str, Any]]:
    """Per-trial result rows of one run, training set first."""
    rows = []
    for name, seed, trials, reports in (('train', plan.training_seed, training, summary.train_reports),
                                        ('test', plan.test_seed, testing, summary.test_reports)):
        for index, (spec, report) in enumerate(zip(trials, reports)):
            rows.append({
                'run': summary.run, 'set': name, 'trial': index, 'seed': seed,
                'error': report.error, 'phototaxis_term': report.phototaxis_term,
                'antiphototaxis_term': report.antiphototaxis_term, 'clap_step': spec.clap_step,
            })
    return rows


def expected_success_band(runs: int, ratio: float = 0.13, confidence: float = 0.95) -> Tuple[int, int]:
    """Range of success counts compatible with ``ratio`` at the given confidence."""
    if runs < 1:
        raise ParameterError('need at least one run', field='runs', value=runs)
    lo = hi = None
    for k in range(runs + 1):
        low, high = success_interval(k, runs, confidence)
        if low <= ratio <= high:
            lo = k if lo is None else lo
            hi = k
    return (lo, hi) if lo is not None else (0, 0)
