import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..utils.errors import ConfigurationError, StorageError

# Load environment variables
load_dotenv()


class Config:
    """Runtime settings read from the environment."""

    def __init__(self):
        self.LOG_LEVEL = os.getenv('BNROBOT_LOG_LEVEL', 'INFO')
        self.LOG_DIR = os.getenv('BNROBOT_LOG_DIR', 'logs')
        self.LOG_MAX_BYTES = int(os.getenv('BNROBOT_LOG_MAX_BYTES', '10485760'))  # 10MB
        self.LOG_BACKUP_COUNT = int(os.getenv('BNROBOT_LOG_BACKUP_COUNT', '5'))
        self.ENABLE_FILE_LOGGING = os.getenv('BNROBOT_ENABLE_FILE_LOGGING', 'true').lower() == 'true'

        # Overrides applied on top of a config file
        self.SEED = self._optional_int('BNROBOT_SEED')
        self.OUT_DIR = os.getenv('BNROBOT_OUT_DIR') or None
        self.PARALLELISM = self._optional_int('BNROBOT_PARALLELISM') or (os.cpu_count() or 1)

    @staticmethod
    def _optional_int(name: str) -> Optional[int]:
        raw = os.getenv(name, '').strip()
        if not raw:
            return None
        try:
            return int(raw)
        except ValueError:
            logging.warning(f"Ignoring {name}={raw!r}: expected an integer")
            return None

    def get_summary(self) -> Dict[str, Any]:
        return {
            'log_level': self.LOG_LEVEL,
            'log_dir': self.LOG_DIR,
            'file_logging_enabled': self.ENABLE_FILE_LOGGING,
            'seed_override': self.SEED,
            'out_dir_override': self.OUT_DIR,
            'parallelism': self.PARALLELISM,
        }

    def validate_config(self) -> bool:
        issues = []

        if self.LOG_LEVEL.upper() not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            issues.append(f"BNROBOT_LOG_LEVEL={self.LOG_LEVEL!r} is not a log level")

        if self.LOG_MAX_BYTES <= 0:
            issues.append("BNROBOT_LOG_MAX_BYTES must be positive")

        if self.PARALLELISM < 1:
            issues.append(f"BNROBOT_PARALLELISM={self.PARALLELISM} must be at least 1")

        if issues:
            logging.error(f"Configuration validation failed: {'; '.join(issues)}")
            return False

        return True


# Create global config instance
config = Config()


class ArenaConfig(BaseModel):
    """Square arena, light source and robot body (SI units)."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    side: float = Field(1.0, gt=0)
    light_pos: Optional[Tuple[float, float]] = None
    wheel_speed: float = Field(0.1, gt=0)
    axle_length: float = Field(0.053, gt=0)
    dt: float = Field(0.1, gt=0)
    # keeps the clamped pose off the light corner
    robot_radius: float = Field(0.035, gt=0)
    start_radius: float = Field(0.2, gt=0)

    @model_validator(mode='after')
    def _check_geometry(self):
        if 2 * self.robot_radius >= self.side:
            raise ValueError('robot_radius must be smaller than half the arena side')
        light = self.light
        corners = {(0.0, 0.0), (0.0, self.side), (self.side, 0.0), (self.side, self.side)}
        if light not in corners:
            raise ValueError(f'light_pos {light} must be an arena corner')
        return self

    @property
    def light(self) -> Tuple[float, float]:
        if self.light_pos is None:
            return (self.side, self.side)
        return (float(self.light_pos[0]), float(self.light_pos[1]))

    @property
    def start_corner(self) -> Tuple[float, float]:
        """Corner diagonally opposite the light."""
        lx, ly = self.light
        return (self.side - lx, self.side - ly)


class SearchConfig(BaseModel):
    """Two-stage stochastic descent schedule."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    n: int = Field(20, ge=1)
    k: int = Field(3, ge=1)
    no_self: bool = True
    total_iterations: int = Field(25000, ge=0)
    stage1_iterations: int = Field(5000, ge=0)
    stage1_T: int = Field(500, ge=1)
    stage2_T: int = Field(1000, ge=2)
    clap_window: Tuple[int, int] = (500, 650)
    training_set_size: int = Field(30, ge=1)
    seed: int = 0
    training_seed: Optional[int] = None
    alpha: float = Field(0.5, ge=0.0, le=1.0)
    input_nodes: Tuple[int, ...] = (0, 1, 2, 3, 4)
    output_nodes: Tuple[int, ...] = (5, 6)
    random_initial_state: bool = False
    checkpoint_every: int = Field(0, ge=0)
    trace_every: int = Field(1, ge=1)

    @field_validator('clap_window')
    @classmethod
    def _ordered_window(cls, value):
        lo, hi = value
        if lo > hi:
            raise ValueError(f'clap_window lower bound {lo} exceeds upper bound {hi}')
        return value

    @model_validator(mode='after')
    def _check_schedule(self):
        if self.stage1_iterations > self.total_iterations:
            raise ValueError(
                f'stage1_iterations={self.stage1_iterations} exceeds total_iterations={self.total_iterations}')
        lo, hi = self.clap_window
        if lo <= 0 or hi >= self.stage2_T:
            raise ValueError(f'clap_window {self.clap_window} must lie within (0, stage2_T={self.stage2_T})')
        if self.no_self and self.k > self.n - 1:
            raise ValueError(f'k={self.k} needs at least k+1 nodes without self-connections (n={self.n})')
        if not self.no_self and self.k > self.n:
            raise ValueError(f'k={self.k} exceeds n={self.n}')
        roles = list(self.input_nodes) + list(self.output_nodes)
        if len(set(roles)) != len(roles):
            raise ValueError('input_nodes and output_nodes must be distinct')
        if any(i < 0 or i >= self.n for i in roles):
            raise ValueError(f'node roles must lie in [0, {self.n})')
        if len(self.input_nodes) != 5 or len(self.output_nodes) != 2:
            raise ValueError('expected 5 input nodes (sound, 4 light bits) and 2 output nodes (wheels)')
        return self

    @property
    def effective_training_seed(self) -> int:
        return self.seed if self.training_seed is None else self.training_seed


class ExperimentConfig(BaseModel):
    """Repeated independent designs plus held-out testing."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    runs: int = Field(30, ge=1)
    test_set_size: int = Field(30, ge=1)
    master_seed: int = 0
    success_threshold: float = Field(0.11, ge=0.0, le=1.0)
    search: SearchConfig = SearchConfig()
    arena: ArenaConfig = ArenaConfig()


def _field_path(location) -> str:
    return '.'.join(str(part) for part in location) or '<root>'


def parse_experiment_config(document: Dict[str, Any], source: str = '<config>') -> ExperimentConfig:
    """Validate a decoded config document (or a run manifest's ``config`` section)."""
    if not isinstance(document, dict):
        raise ConfigurationError(f'{source}: top level must be an object')
    if 'config' in document and 'format_version' in document:
        document = document['config']
    try:
        return ExperimentConfig.model_validate(document)
    except ValidationError as exc:
        first = exc.errors()[0]
        field = _field_path(first['loc'])
        value = first.get('input')
        if isinstance(value, (dict, list)):
            # model-level checks name the offending field in their message
            error = ConfigurationError(f"{source}: {field}: {first['msg']}")
            error.field = field
            raise error from exc
        raise ConfigurationError(f"{source}: {first['msg']}", field=field, value=value) from exc


def load_experiment_config(path: Union[str, Path, None]) -> ExperimentConfig:
    """Read a JSON experiment config; None yields the published defaults."""
    if path is None:
        return ExperimentConfig()
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise StorageError(f'cannot read config {path}: {exc.strerror}') from exc
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f'{path}: line {exc.lineno}: {exc.msg}') from exc
    return parse_experiment_config(document, source=str(path))


def apply_overrides(cfg: ExperimentConfig, seed: Optional[int] = None) -> ExperimentConfig:
    """Apply the master-seed override (flag first, then environment)."""
    if seed is None:
        seed = config.SEED
    if seed is None:
        return cfg
    return cfg.model_copy(update={'master_seed': int(seed)})
