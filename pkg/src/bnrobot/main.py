#!/usr/bin/env python3
"""
bnrobot - Main Entry Point

Command line for designing Boolean-network robot controllers:
``design`` runs the repeated-design experiment, ``simulate`` replays one
trial of a saved network, ``analyze`` reports its attractors and
``check-config`` validates the settings.
"""

import math
import sys
import time
from functools import wraps
from pathlib import Path

import click
from tabulate import tabulate

from .config.settings import ExperimentConfig, apply_overrides, config, load_experiment_config
from .core.arena import RobotPose, Stage, TrialSpec, sample_start_pose
from .core.attractors import enumerate_attractors, sample_attractors
from .core.coupling import initial_state, sensor_clamp
from .core.harness import (held_out_set, plan_experiment, run_experiment, success_fraction,
                           success_interval, trial_rows)
from .core.objective import run_trial
from .core.search import build_training_set
from .core.storage import ResultStore, RunManifest, load_network, write_trajectory
from .utils.errors import EXIT_UNEXPECTED, EXIT_VALIDATION, BNRobotError
from .utils.logging import enhanced_logger, log_shutdown_info, log_startup_info
from .utils.rng import stream
from .utils.validation import content_hash, input_validator, require_valid


def handle_errors(command: str):
    """Map library errors onto exit codes and keep the traceback in the logs."""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            log_startup_info(command)
            try:
                return func(*args, **kwargs)
            except BNRobotError as e:
                enhanced_logger.error(f'{command} failed', error=e)
                click.echo(f'error: {e}', err=True)
                sys.exit(e.exit_code)
            except (click.ClickException, click.exceptions.Exit):
                raise
            except KeyboardInterrupt:
                enhanced_logger.info('interrupted by user', command=command)
                sys.exit(EXIT_UNEXPECTED)
            except Exception as e:
                enhanced_logger.critical(f'{command} crashed', error=e)
                click.echo(f'unexpected error: {e}', err=True)
                sys.exit(EXIT_UNEXPECTED)
            finally:
                log_shutdown_info(command)
        return wrapper
    return decorator


def _load_config(path, seed=None) -> ExperimentConfig:
    return apply_overrides(load_experiment_config(path), seed=seed)


@click.group()
@click.option('--log-level', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
                                               case_sensitive=False),
              default=None, help='Override BNROBOT_LOG_LEVEL.')
def cli(log_level):
    """Design Boolean-network controllers for a phototactic robot."""
    if log_level:
        config.LOG_LEVEL = log_level.upper()
    enhanced_logger.setup(
        level=config.LOG_LEVEL,
        log_dir=config.LOG_DIR if config.ENABLE_FILE_LOGGING else None,
        max_bytes=config.LOG_MAX_BYTES,
        backup_count=config.LOG_BACKUP_COUNT,
    )


@cli.command()
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), default=None,
              help='Experiment config (JSON) or a previous run manifest.')
@click.option('--seed', type=int, default=None, help='Master seed (overrides BNROBOT_SEED and the config).')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), envvar='BNROBOT_OUT_DIR',
              default='results', show_default=True, help='Output directory.')
@click.option('--parallelism', type=click.IntRange(min=1), default=None,
              help='Concurrent runs (default: BNROBOT_PARALLELISM or CPU count).')
@click.option('--format', 'fmt', type=click.Choice(['csv', 'json']), default='csv', show_default=True)
@handle_errors('design')
def design(config_path, seed, out_dir, parallelism, fmt):
    """Run the repeated-design experiment and test every designed network."""
    cfg = _load_config(config_path, seed)
    parallelism = parallelism or config.PARALLELISM
    require_valid(input_validator.validate_output_dir(out_dir))
    store = ResultStore(out_dir, fmt)
    plan = plan_experiment(cfg)
    manifest = RunManifest(config=cfg.model_dump(mode='json'), seeds={'master': cfg.master_seed, **plan.as_dict()})
    enhanced_logger.set_run_id()

    began = time.perf_counter()
    checkpoint_dir = Path(out_dir) / 'checkpoints' if cfg.search.checkpoint_every else None
    summaries = run_experiment(cfg, parallelism, log_dir=Path(out_dir) / 'logs', checkpoint_dir=checkpoint_dir)
    elapsed = time.perf_counter() - began

    training = build_training_set(plan.training_seed, cfg.search.training_set_size, Stage.FULL,
                                  cfg.search, cfg.arena)
    testing = held_out_set(cfg, plan)
    rows = []
    for summary in sorted(summaries, key=lambda s: s.run):
        path = store.save_network(summary.run, summary.best_network)
        manifest.outputs[f'network_{summary.run:03d}'] = str(path.relative_to(store.out_dir))
        rows.extend(trial_rows(summary, training, testing, plan))
    summary_path = store.save_summaries([s.row() for s in summaries])
    trials_path = store.save_trial_results(rows)
    manifest.outputs['summary'] = summary_path.name
    manifest.outputs['trials'] = trials_path.name
    manifest.outputs['search_logs'] = 'logs'

    successes = sum(s.success for s in summaries)
    low, high = success_interval(successes, len(summaries))
    throughput = [s.trials_per_second for s in summaries]
    manifest.performance = {
        'elapsed_seconds': round(elapsed, 3),
        'parallelism': parallelism,
        'trials_per_second_per_run': [round(t, 1) for t in throughput],
        'mean_trials_per_second': round(math.fsum(throughput) / len(throughput), 1),
    }
    manifest.digests = {name: content_hash(store.out_dir / rel) for name, rel in manifest.outputs.items()
                        if name != 'search_logs'}
    manifest.finish()
    store.save_manifest(manifest)

    click.echo(tabulate([[s.run, s.train_median, s.test_median, s.test_q1, s.test_q3, 'yes' if s.success else '']
                         for s in summaries],
                        headers=['run', 'train median', 'test median', 'test Q1', 'test Q3', 'success'],
                        floatfmt='.4f'))
    click.echo(f'\nsuccess (test median < {cfg.success_threshold}): {successes}/{len(summaries)} '
               f'= {success_fraction(summaries):.1%}, 95% CI [{low:.3f}, {high:.3f}]')
    click.echo(f'results written to {store.out_dir}')


@cli.command()
@click.argument('network_path', type=click.Path(dir_okay=False))
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), default=None,
              help='Experiment config supplying the arena and schedule.')
@click.option('--stage', type=click.Choice([s.value for s in Stage]), default=Stage.FULL.value, show_default=True)
@click.option('--t-c', 'clap_step', type=int, default=None, help='Clap step (default: random in the clap window).')
@click.option('--horizon', type=int, default=None, help='Trial length in steps (default: stage horizon).')
@click.option('--seed', type=int, default=0, show_default=True, help='Seed for the start pose and clap step.')
@click.option('--x', type=float, default=None, help='Start x (default: random start region).')
@click.option('--y', type=float, default=None, help='Start y.')
@click.option('--heading', type=float, default=None, help='Start heading in radians.')
@click.option('--perturb-step', type=int, default=None, help='Step at which the robot is rotated.')
@click.option('--perturb-angle', type=float, default=0.0, show_default=True, help='Rotation in radians.')
@click.option('--random-state', is_flag=True, help='Start the network from a seeded random state.')
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), default='trajectory.csv', show_default=True)
@handle_errors('simulate')
def simulate(network_path, config_path, stage, clap_step, horizon, seed, x, y, heading,
             perturb_step, perturb_angle, random_state, out_path):
    """Run one trial of a saved network and write its trajectory."""
    cfg = _load_config(config_path)
    stage = Stage(stage)
    net = load_network(network_path)
    if horizon is None:
        horizon = cfg.search.stage1_T if stage is Stage.PHOTOTAXIS else cfg.search.stage2_T

    rng = stream(seed, 'test')
    start = sample_start_pose(rng, cfg.arena)
    if stage is Stage.FULL and clap_step is None:
        lo, hi = cfg.search.clap_window
        clap_step = int(rng.integers(lo, hi + 1))
    elif stage is Stage.PHOTOTAXIS and clap_step is not None:
        raise click.BadParameter('phototaxis-only trials have no clap', param_hint='--t-c')

    require_valid(input_validator.validate_trial_args(horizon, clap_step, perturb_step, perturb_angle,
                                                      cfg.arena, x, y))
    start = RobotPose(start.x if x is None else x, start.y if y is None else y,
                      start.heading if heading is None else heading)
    spec = TrialSpec(start, horizon, clap_step, perturb_step, perturb_angle if perturb_step else 0.0, stage)

    state = initial_state(net, seed, random_state)
    record, report = run_trial(net, spec, cfg.arena, cfg.search.alpha, state)
    path = write_trajectory(out_path, record)

    click.echo(f'E = {report.error:.6f}')
    click.echo(f'phototaxis term = {report.phototaxis_term:.6f}')
    if report.antiphototaxis_term is not None:
        click.echo(f'antiphototaxis term = {report.antiphototaxis_term:.6f}  (t_c = {clap_step})')
    click.echo(f'trajectory written to {path}')


@cli.command()
@click.argument('network_path', type=click.Path(dir_okay=False))
@click.option('--samples', type=click.IntRange(min=1), default=None,
              help='Sampled mode: number of random start states.')
@click.option('--seed', type=int, default=0, show_default=True, help='Seed for sampled mode.')
@click.option('--max-steps', type=click.IntRange(min=1), default=10000, show_default=True)
@click.option('--sector', type=int, default=None, help='Hold the light inputs at this sector (1..8).')
@click.option('--sound', type=int, default=None, help='Hold the sound input at this bit.')
@handle_errors('analyze')
def analyze(network_path, samples, seed, max_steps, sector, sound):
    """Report the attractors and basins of a saved network."""
    net = load_network(network_path)
    require_valid(input_validator.validate_clamp(sector, sound))
    clamp = sensor_clamp(net, sector, sound) if sector is not None or sound is not None else None
    free = net.n - len(clamp or {})

    if samples:
        sampled = sample_attractors(net, samples, seed, max_steps, clamp)
        attractors = sampled.attractors
        fractions = sampled.basin_fractions()
        header = f'{len(attractors)} attractors reached from {samples} samples ({sampled.timeouts} timeouts)'
        basin_label = 'hits'
    else:
        attractors = enumerate_attractors(net, clamp)
        total = 2 ** free
        fractions = [a.basin_size / total for a in attractors]
        header = (f'{len(attractors)} attractors over 2^{free} states; '
                  f'basins sum to {sum(a.basin_size for a in attractors)}')
        basin_label = 'basin'

    click.echo(header)
    table = []
    for index, (attractor, fraction) in enumerate(zip(attractors, fractions)):
        first = str(attractor.cycle[0])
        table.append([index, attractor.period, attractor.basin_size, fraction, first])
    click.echo(tabulate(table, headers=['#', 'period', basin_label, 'fraction', 'first state'], floatfmt='.6f'))


@cli.command('check-config')
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), default=None)
@handle_errors('check-config')
def check_config(config_path):
    """Validate runtime settings and an experiment config, then print them."""
    cfg = _load_config(config_path)
    if not config.validate_config():
        click.echo('runtime configuration is invalid (see log)', err=True)
        sys.exit(EXIT_VALIDATION)
    click.echo('Configuration Summary:')
    for key, value in config.get_summary().items():
        click.echo(f'  {key}: {value}')
    click.echo(cfg.model_dump_json(indent=2))


def main():
    """Main entry point."""
    cli(prog_name='bnrobot')


if __name__ == '__main__':
    main()
