"""
Square arena with a corner light, a clap event and a differential-drive robot.

Angles are in radians. Headings are counter-clockwise world angles from the
+x axis, wrapped to (-pi, pi]. Light bearings are measured clockwise from
the heading, matching the sensor numbering (1 = ahead, then clockwise).
The array functions accept scalars or equally shaped arrays so one trial
and a batch of trials share the same arithmetic.
"""

import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Optional, Tuple

import numpy as np

from ..config.settings import ArenaConfig
from ..utils.errors import ContractViolation, DegenerateBearingError, ParameterError

SECTOR_WIDTH = math.pi / 4
SECTORS = 8


class Stage(str, Enum):
    PHOTOTAXIS = 'phototaxis-only'
    FULL = 'full'


class StepLabel(IntEnum):
    AWAY = -1
    NEITHER = 0
    TOWARD = 1


def wrap_angle(angle):
    """Wrap into (-pi, pi]."""
    return math.pi - np.mod(math.pi - np.asarray(angle, dtype=float), 2 * math.pi)


def wrap_heading(angle):
    """Wrap only values outside (-pi, pi], leaving in-range headings bit-identical."""
    angle = np.asarray(angle, dtype=float)
    outside = (angle > math.pi) | (angle <= -math.pi)
    if not np.any(outside):
        return angle
    return np.where(outside, wrap_angle(angle), angle)


@dataclass(frozen=True)
class RobotPose:
    x: float
    y: float
    heading: float

    def __post_init__(self):
        object.__setattr__(self, 'x', float(self.x))
        object.__setattr__(self, 'y', float(self.y))
        object.__setattr__(self, 'heading', float(wrap_heading(self.heading)))


@dataclass(frozen=True)
class WheelCommand:
    left: int
    right: int

    def __post_init__(self):
        if self.left not in (0, 1) or self.right not in (0, 1):
            raise ParameterError('wheel levels are binary', field='command',
                                 value=(self.left, self.right))
        object.__setattr__(self, 'left', int(self.left))
        object.__setattr__(self, 'right', int(self.right))


@dataclass(frozen=True)
class TrialSpec:
    """
    One evaluation episode.

    ``clap_step`` is None in the phototaxis-only stage. The perturbation
    rotates the robot by ``perturb_angle`` at the start of ``perturb_step``;
    ``perturb_step`` None disables it.
    """

    start: RobotPose
    horizon: int
    clap_step: Optional[int]
    perturb_step: Optional[int]
    perturb_angle: float
    stage: Stage

    def __post_init__(self):
        object.__setattr__(self, 'stage', Stage(self.stage))
        if self.horizon < 1:
            raise ParameterError('horizon must be at least 1 step', field='horizon', value=self.horizon)
        if self.stage is Stage.FULL:
            if self.clap_step is None or not 1 <= self.clap_step < self.horizon:
                raise ParameterError(f'clap step must lie in [1, {self.horizon})',
                                     field='clap_step', value=self.clap_step)
        elif self.clap_step is not None:
            raise ParameterError('phototaxis-only trials have no clap', field='clap_step',
                                 value=self.clap_step)
        if self.perturb_step is not None and not 1 <= self.perturb_step <= self.horizon:
            raise ParameterError(f'perturbation step must lie in [1, {self.horizon}]',
                                 field='perturb_step', value=self.perturb_step)
        if not -math.pi <= self.perturb_angle <= math.pi:
            raise ParameterError('perturbation angle must lie in [-pi, pi]', field='perturb_angle',
                                 value=self.perturb_angle)


def sector_of_bearing(bearing):
    """Sector id 1..8 for a clockwise bearing; boundaries go to the clockwise-next sector."""
    position = (np.asarray(bearing, dtype=float) + SECTOR_WIDTH / 2) / SECTOR_WIDTH
    index = np.floor(np.round(position, 9)).astype(np.int64)
    return np.mod(index, SECTORS) + 1


def bearing_to_light(x, y, heading, light: Tuple[float, float]):
    """Clockwise angle from the heading to the light direction, in (-pi, pi]."""
    dx = light[0] - np.asarray(x, dtype=float)
    dy = light[1] - np.asarray(y, dtype=float)
    if np.any((dx == 0) & (dy == 0)):
        raise DegenerateBearingError('robot position coincides with the light', field='pose',
                                     value=(float(np.ravel(x)[0]), float(np.ravel(y)[0])))
    return wrap_angle(np.asarray(heading, dtype=float) - np.arctan2(dy, dx))


def light_sectors(x, y, heading, light: Tuple[float, float]):
    return sector_of_bearing(bearing_to_light(x, y, heading, light))


def light_sector(pose: RobotPose, light: Tuple[float, float]) -> int:
    return int(light_sectors(pose.x, pose.y, pose.heading, light))


def sound_value(t: int, spec: TrialSpec) -> int:
    """1 only on the clap step of a full-stage trial."""
    if not 1 <= t <= spec.horizon:
        raise ContractViolation(f'step must lie in [1, {spec.horizon}]', field='t', value=t)
    return int(spec.stage is Stage.FULL and t == spec.clap_step)


def advance(x, y, heading, left, right, cfg: ArenaConfig):
    """
    One Euler step of differential-drive kinematics, then clamp to the walls.

    Returns the new (x, y, heading) arrays.
    """
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    v = cfg.wheel_speed * (left + right) / 2.0
    omega = cfg.wheel_speed * (right - left) / cfg.axle_length
    heading = np.asarray(heading, dtype=float)
    lo, hi = cfg.robot_radius, cfg.side - cfg.robot_radius
    new_x = np.clip(np.asarray(x, dtype=float) + v * cfg.dt * np.cos(heading), lo, hi)
    new_y = np.clip(np.asarray(y, dtype=float) + v * cfg.dt * np.sin(heading), lo, hi)
    new_heading = wrap_heading(heading + omega * cfg.dt)
    return new_x, new_y, new_heading


def apply_command(pose: RobotPose, cmd: WheelCommand, cfg: ArenaConfig) -> RobotPose:
    x, y, heading = advance(pose.x, pose.y, pose.heading, cmd.left, cmd.right, cfg)
    return RobotPose(float(x), float(y), float(heading))


def apply_perturbation(pose: RobotPose, theta: float) -> RobotPose:
    if not -math.pi <= theta <= math.pi:
        raise ParameterError('rotation must lie in [-pi, pi]', field='theta', value=theta)
    return RobotPose(pose.x, pose.y, pose.heading + theta)


def distance_to_light(x, y, light: Tuple[float, float]):
    return np.hypot(light[0] - np.asarray(x, dtype=float), light[1] - np.asarray(y, dtype=float))


def step_labels(prev_distance, cur_distance):
    """+1 toward (strictly closer), -1 away (strictly farther), 0 otherwise."""
    return np.sign(np.asarray(prev_distance, dtype=float) - np.asarray(cur_distance, dtype=float)).astype(np.int8)


def step_label(prev: RobotPose, cur: RobotPose, light: Tuple[float, float]) -> StepLabel:
    label = step_labels(distance_to_light(prev.x, prev.y, light), distance_to_light(cur.x, cur.y, light))
    return StepLabel(int(label))


def sample_start_pose(rng: np.random.Generator, cfg: ArenaConfig) -> RobotPose:
    """Uniform over the quarter disc at the corner opposite the light, uniform heading."""
    cx, cy = cfg.start_corner
    sx = 1.0 if cx == 0 else -1.0
    sy = 1.0 if cy == 0 else -1.0
    radius = cfg.start_radius * math.sqrt(rng.random())
    angle = rng.uniform(0.0, math.pi / 2)
    lo, hi = cfg.robot_radius, cfg.side - cfg.robot_radius
    x = min(max(cx + sx * radius * math.cos(angle), lo), hi)
    y = min(max(cy + sy * radius * math.sin(angle), lo), hi)
    heading = rng.uniform(-math.pi, math.pi)
    return RobotPose(x, y, heading)
