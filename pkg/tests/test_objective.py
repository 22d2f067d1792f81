import math

import numpy as np
import pytest

from bnrobot.config.settings import ArenaConfig
from bnrobot.core.arena import RobotPose, Stage, TrialSpec, sample_start_pose
from bnrobot.core.network import random_network
from bnrobot.core.objective import (ErrorReport, TrialTrace, aggregate_error, evaluate_trials, run_trial,
                                    simulate_trials, trial_error)
from bnrobot.utils.errors import ContractViolation, ParameterError

TOWARD, AWAY = 1, -1


def full_trace(before, after):
    labels = list(before) + list(after)
    return TrialTrace(np.array(labels), len(before), len(labels), Stage.FULL)


def test_perfect_trial_scores_zero():
    assert trial_error(full_trace([TOWARD] * 5, [AWAY] * 5)).error == 0.0


def test_inverted_trial_scores_one():
    assert trial_error(full_trace([AWAY] * 5, [TOWARD] * 5)).error == 1.0


def test_phototaxis_only_behaviour_scores_one_half():
    report = trial_error(full_trace([TOWARD] * 5, [0] * 5))
    assert report.error == 0.5
    assert report.phototaxis_term == 0.0
    assert report.antiphototaxis_term == 1.0


def test_phototaxis_stage_counts_toward_steps():
    trace = TrialTrace(np.array([TOWARD, TOWARD, 0, AWAY]), None, 4, Stage.PHOTOTAXIS)
    report = trial_error(trace)
    assert report.error == 0.5
    assert report.antiphototaxis_term is None


def test_full_stage_with_alpha_one_is_the_phototaxis_error():
    rng = np.random.default_rng(5)
    for _ in range(20):
        labels = rng.integers(-1, 2, size=30)
        tc = int(rng.integers(1, 30))
        full = trial_error(TrialTrace(labels, tc, 30, Stage.FULL), alpha=1.0)
        photo = trial_error(TrialTrace(labels[:tc], None, tc, Stage.PHOTOTAXIS))
        assert full.error == pytest.approx(photo.error)


def test_error_is_bounded_and_monotone():
    rng = np.random.default_rng(8)
    for _ in range(50):
        labels = rng.integers(-1, 2, size=40)
        tc = int(rng.integers(1, 40))
        alpha = float(rng.random())
        report = trial_error(TrialTrace(labels, tc, 40, Stage.FULL), alpha)
        assert 0.0 <= report.error <= 1.0

        # one more approach before the clap never hurts
        better = labels.copy()
        slots = np.flatnonzero(better[:tc] != TOWARD)
        if slots.size:
            better[slots[0]] = TOWARD
            assert trial_error(TrialTrace(better, tc, 40, Stage.FULL), alpha).error <= report.error


@pytest.mark.parametrize('alpha', [-0.1, 1.5])
def test_alpha_out_of_range(alpha):
    with pytest.raises(ParameterError):
        trial_error(full_trace([TOWARD], [AWAY]), alpha)


def test_trace_checks_its_shape():
    with pytest.raises(ContractViolation):
        TrialTrace(np.zeros(5), 2, 6, Stage.FULL)
    with pytest.raises(ContractViolation):
        TrialTrace(np.zeros(5), None, 5, Stage.FULL)
    with pytest.raises(ContractViolation):
        TrialTrace(np.zeros(5), 5, 5, Stage.FULL)


def make_trials(count, stage=Stage.FULL, horizon=60, seed=0, arena=None, perturb=True):
    arena = arena or ArenaConfig()
    rng = np.random.default_rng(seed)
    trials = []
    for _ in range(count):
        start = sample_start_pose(rng, arena)
        clap = int(rng.integers(horizon // 2, horizon - 5)) if stage is Stage.FULL else None
        step = int(rng.integers(1, horizon)) if perturb else None
        angle = float(rng.uniform(-math.pi, math.pi)) if perturb else 0.0
        trials.append(TrialSpec(start, horizon, clap, step, angle, stage))
    return trials


def test_stopped_robot_scores_one(stop_controller, arena):
    for stage in Stage:
        reports = evaluate_trials(stop_controller, make_trials(5, stage), arena)
        assert [r.error for r in reports] == [1.0] * 5


def test_straight_driver_solves_phototaxis_only(make_controller, arena):
    """Driving straight at the light earns 0 before the clap and 1 after it"""
    net = make_controller(fill=1)
    start = RobotPose(0.1, 0.1, math.pi / 4)

    photo = TrialSpec(start, 60, None, None, 0.0, Stage.PHOTOTAXIS)
    assert aggregate_error(net, [photo], arena) == 0.0

    full = TrialSpec(start, 60, 30, None, 0.0, Stage.FULL)
    assert aggregate_error(net, [full], arena) == 0.5


def test_driving_into_the_light_corner(make_controller):
    """The wall clamp stops a tiny robot just short of the light"""
    arena = ArenaConfig(robot_radius=1e-6)
    net = make_controller(fill=1)
    spec = TrialSpec(RobotPose(0.9, 0.9, math.pi / 4), 100, None, None, 0.0, Stage.PHOTOTAXIS)

    record, report = run_trial(net, spec, arena)
    assert record.distance.min() > 0
    # 15 steps reach the corner; the rest are neither toward nor away
    assert 0.8 < report.error < 0.9


def test_aggregate_error_needs_trials(stop_controller, arena):
    with pytest.raises(ParameterError):
        aggregate_error(stop_controller, [], arena)
    with pytest.raises(ParameterError):
        evaluate_trials(stop_controller, [], arena)


def test_aggregate_error_ignores_trial_order(arena):
    net = random_network(20, 3, seed=6, input_nodes=(0, 1, 2, 3, 4), output_nodes=(5, 6))
    trials = make_trials(12, seed=3)

    assert aggregate_error(net, trials, arena) == aggregate_error(net, trials[::-1], arena)


def test_aggregate_error_is_the_mean_of_trial_errors(mocker, stop_controller, arena):
    trials = make_trials(4)
    mocker.patch('bnrobot.core.objective.batch_errors',
                 return_value=[ErrorReport(e, e, e, 0.5) for e in (0.0, 1.0, 0.5, 0.5)])
    assert aggregate_error(stop_controller, trials, arena) == 0.5


def test_batch_matches_single_trials(arena):
    """Mixed horizons in one batch give the same labels as trials run alone"""
    net = random_network(20, 3, seed=2, input_nodes=(0, 1, 2, 3, 4), output_nodes=(5, 6))
    trials = make_trials(3, horizon=40, seed=1) + make_trials(3, stage=Stage.PHOTOTAXIS, horizon=25, seed=2)

    labels, _ = simulate_trials(net, trials, arena)
    reports = evaluate_trials(net, trials, arena)
    assert labels.shape == (6, 40)
    assert not labels[3:, 25:].any()
    for i, spec in enumerate(trials):
        record, report = run_trial(net, spec, arena)
        assert np.array_equal(record.labels, labels[i, :spec.horizon])
        assert report == reports[i]


def test_record_keeps_the_whole_trajectory(stop_controller, arena):
    spec = TrialSpec(RobotPose(0.2, 0.1, 0.5), 20, 7, 3, math.pi, Stage.FULL)
    record, report = run_trial(stop_controller, spec, arena)

    assert report.error == 1.0
    for name in ('x', 'y', 'heading', 'sector', 'sound', 'left', 'right', 'distance', 'labels'):
        assert len(getattr(record, name)) == 20
    assert record.sound.tolist().index(1) == 6
    assert record.sound.sum() == 1
    # the stopped robot only turns when it is perturbed
    assert record.heading[1] == pytest.approx(0.5)
    assert record.heading[2] == pytest.approx(0.5 - math.pi)
    assert record.x.tolist() == [0.2] * 20


def test_replay_is_deterministic(arena):
    net = random_network(20, 2, seed=9, input_nodes=(0, 1, 2, 3, 4), output_nodes=(5, 6))
    spec = make_trials(1, seed=4)[0]
    first, _ = run_trial(net, spec, arena)
    second, _ = run_trial(net, spec, arena)

    assert np.array_equal(first.x, second.x)
    assert np.array_equal(first.heading, second.heading)
    assert first.final_state == second.final_state
