import hashlib
import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

from ..config.settings import ArenaConfig
from .errors import ParameterError, StorageError


class InputValidator:
    """Checks for command-line arguments before they reach the simulator."""

    def __init__(self):
        self.logger = logging.getLogger(__name__)
        self.sectors = range(1, 9)

    def validate_trial_args(self, horizon: int, clap_step: Optional[int], perturb_step: Optional[int],
                            perturb_angle: float, arena: ArenaConfig,
                            x: Optional[float] = None, y: Optional[float] = None) -> Dict[str, Any]:
        """
        Validate the options of a single simulated trial.

        Returns:
            Dict with ``valid``, ``errors`` (list of (field, value, message))
            and ``warnings``
        """
        result = {'valid': True, 'errors': [], 'warnings': []}

        if horizon < 1:
            result['errors'].append(('horizon', horizon, 'must be at least 1'))
        if clap_step is not None and not 1 <= clap_step < horizon:
            result['errors'].append(('t_c', clap_step, f'must lie in (0, {horizon})'))
        if perturb_step is not None and not 1 <= perturb_step <= max(horizon, 1):
            result['errors'].append(('perturb_step', perturb_step, f'must lie in [1, {horizon}]'))
        if not -math.pi <= perturb_angle <= math.pi:
            result['errors'].append(('perturb_angle', perturb_angle, 'must lie in [-pi, pi]'))

        lo, hi = arena.robot_radius, arena.side - arena.robot_radius
        for name, value in (('x', x), ('y', y)):
            if value is not None and not lo <= value <= hi:
                result['errors'].append((name, value, f'must lie in [{lo}, {hi}]'))
        if x is not None and y is not None and (x, y) == arena.light:
            result['errors'].append(('x', x, 'start position coincides with the light'))

        if perturb_step is None and perturb_angle != 0.0:
            result['warnings'].append('perturbation angle given without a perturbation step; ignored')

        result['valid'] = not result['errors']
        return result

    def validate_clamp(self, sector: Optional[int], sound: Optional[int]) -> Dict[str, Any]:
        result = {'valid': True, 'errors': [], 'warnings': []}
        if sector is not None and sector not in self.sectors:
            result['errors'].append(('sector', sector, 'must lie in 1..8'))
        if sound is not None and sound not in (0, 1):
            result['errors'].append(('sound', sound, 'must be 0 or 1'))
        result['valid'] = not result['errors']
        return result

    def validate_output_dir(self, path: Union[str, Path]) -> Dict[str, Any]:
        result = {'valid': True, 'errors': [], 'warnings': []}
        path = Path(path)
        existing = path
        while not existing.exists() and existing != existing.parent:
            existing = existing.parent
        if existing.exists() and not existing.is_dir():
            result['errors'].append(('out', str(path), f'{existing} is not a directory'))
        elif not os.access(existing, os.W_OK):
            result['errors'].append(('out', str(path), f'{existing} is not writable'))
        if path.exists() and any(path.iterdir()):
            result['warnings'].append(f'{path} is not empty; existing results will be overwritten')
        result['valid'] = not result['errors']
        return result

    def get_content_hash(self, path: Union[str, Path]) -> str:
        """SHA-256 of a file, used to fingerprint outputs in the run manifest."""
        digest = hashlib.sha256()
        try:
            with open(path, 'rb') as handle:
                for block in iter(lambda: handle.read(1 << 16), b''):
                    digest.update(block)
        except OSError as exc:
            raise StorageError(f'cannot read {path}: {exc.strerror or exc}') from exc
        return digest.hexdigest()


def require_valid(result: Dict[str, Any]):
    """Raise the first collected error; log the warnings."""
    for warning in result['warnings']:
        input_validator.logger.warning(warning)
    if not result['valid']:
        field, value, message = result['errors'][0]
        error = StorageError if field == 'out' else ParameterError
        raise error(message, field=field, value=value)


# Global validator instance
input_validator = InputValidator()


def content_hash(path: Union[str, Path]) -> str:
    return input_validator.get_content_hash(path)
