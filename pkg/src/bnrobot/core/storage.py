"""
On-disk formats: network documents, checkpoints, logs, result tables and run manifests.

Every JSON document carries a ``format_version``. Network tables are written
as bitstrings, row 0 first, so the encoding round-trips bit-exactly.
"""

import csv
import json
import logging
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np

from ..utils.errors import NetworkFormatError, StorageError
from .network import INPUT_ROLES, OUTPUT_ROLES, BooleanNetwork

FORMAT_VERSION = 1

SEARCH_LOG_COLUMNS = ('iteration', 'stage', 'candidate_error', 'accepted', 'incumbent_error')
TRAJECTORY_COLUMNS = ('t', 'x', 'y', 'heading', 'sector', 'sound', 'left', 'right', 'distance', 'label')
TRIAL_COLUMNS = ('run', 'set', 'trial', 'seed', 'error', 'phototaxis_term', 'antiphototaxis_term', 'clap_step')
SUMMARY_COLUMNS = ('run', 'train_median', 'test_median', 'test_q1', 'test_q3', 'success')

PathLike = Union[str, Path]

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# JSON helpers
# ---------------------------------------------------------------------------

def write_json(path: PathLike, document: Mapping[str, Any]):
    """Write a JSON document atomically (temp file in the same directory, then rename)."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f'.{path.name}.', suffix='.tmp')
        with os.fdopen(fd, 'w', encoding='utf-8') as handle:
            json.dump(document, handle, indent=2, sort_keys=True)
            handle.write('\n')
        os.replace(tmp, path)
    except OSError as exc:
        raise StorageError(f'cannot write {path}: {exc.strerror or exc}') from exc


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding='utf-8')
    except OSError as exc:
        raise StorageError(f'cannot read {path}: {exc.strerror or exc}') from exc


def _parse_json(text: str, path: Path) -> Dict[str, Any]:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(exc.msg, line=exc.lineno, source=str(path)) from exc
    if not isinstance(document, dict):
        raise NetworkFormatError('top level must be an object', line=1, source=str(path))
    return document


def read_json(path: PathLike) -> Dict[str, Any]:
    path = Path(path)
    return _parse_json(_read_text(path), path)


def _line_of(text: Optional[str], key: str) -> Optional[int]:
    """1-based line of the first occurrence of ``"key"`` in the raw text."""
    if not text:
        return None
    position = text.find(f'"{key}"')
    return None if position < 0 else text.count('\n', 0, position) + 1


# ---------------------------------------------------------------------------
# Networks
# ---------------------------------------------------------------------------

def network_to_document(net: BooleanNetwork) -> Dict[str, Any]:
    return {
        'format_version': FORMAT_VERSION,
        'n': net.n,
        'inputs': [list(sources) for sources in net.inputs],
        'tables': [''.join(str(int(b)) for b in table) for table in net.tables],
        'input_nodes': [{'node': node, 'role': role} for node, role in net.role_tags()[:len(net.input_nodes)]],
        'output_nodes': [{'node': node, 'role': role} for node, role in net.role_tags()[len(net.input_nodes):]],
    }


def _role_nodes(raw: Any, name: str, roles: Sequence[str], fail) -> List[int]:
    if not isinstance(raw, list):
        fail(name, raw, 'must be a list')
    nodes = []
    for j, entry in enumerate(raw):
        if isinstance(entry, int) and not isinstance(entry, bool):
            nodes.append(entry)
            continue
        if not isinstance(entry, dict) or not isinstance(entry.get('node'), int):
            fail(name, entry, 'entries are node indices or {"node", "role"} objects')
        role = entry.get('role')
        if role is not None and len(raw) == len(roles) and role != roles[j]:
            fail(name, role, f'role of entry {j} must be {roles[j]!r}')
        nodes.append(entry['node'])
    return nodes


def network_from_document(document: Mapping[str, Any], source: str = '<network>',
                          text: Optional[str] = None) -> BooleanNetwork:
    """
    Parse a network document.

    Raises:
        NetworkFormatError: with the offending field, value and (when the raw
            text is available) its line.
    """
    def fail(name, value, message):
        raise NetworkFormatError(message, field=name, value=value,
                                 line=_line_of(text, name.split('[')[0]), source=source)

    version = document.get('format_version')
    if version != FORMAT_VERSION:
        fail('format_version', version, f'unsupported format version (expected {FORMAT_VERSION})')
    n = document.get('n')
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        fail('n', n, 'must be a positive integer')

    inputs = document.get('inputs')
    if not isinstance(inputs, list) or len(inputs) != n:
        fail('inputs', inputs, f'must be a list of {n} source lists')
    for i, sources in enumerate(inputs):
        if not isinstance(sources, list) or not all(isinstance(s, int) and 0 <= s < n for s in sources):
            fail(f'inputs[{i}]', sources, f'sources must be node indices in [0, {n})')

    tables = document.get('tables')
    if not isinstance(tables, list) or len(tables) != n:
        fail('tables', tables, f'must be a list of {n} bitstrings')
    arrays = []
    for i, bits in enumerate(tables):
        if not isinstance(bits, str) or set(bits) - {'0', '1'}:
            fail(f'tables[{i}]', bits, 'must be a string of 0/1 characters')
        if len(bits) != 2 ** len(inputs[i]):
            fail(f'tables[{i}]', bits, f'expected {2 ** len(inputs[i])} rows for {len(inputs[i])} sources')
        arrays.append(np.frombuffer(bits.encode('ascii'), dtype=np.uint8) - ord('0'))

    input_nodes = _role_nodes(document.get('input_nodes', []), 'input_nodes', INPUT_ROLES, fail)
    output_nodes = _role_nodes(document.get('output_nodes', []), 'output_nodes', OUTPUT_ROLES, fail)
    try:
        return BooleanNetwork(n, tuple(tuple(s) for s in inputs), tuple(arrays),
                              tuple(input_nodes), tuple(output_nodes))
    except ValueError as exc:
        raise NetworkFormatError(str(exc), source=source) from exc


def save_network(path: PathLike, net: BooleanNetwork):
    write_json(path, network_to_document(net))


def load_network(path: PathLike) -> BooleanNetwork:
    path = Path(path)
    text = _read_text(path)
    document = _parse_json(text, path)
    return network_from_document(document, source=str(path), text=text)


# ---------------------------------------------------------------------------
# Delimited text
# ---------------------------------------------------------------------------

def _open_csv(path: Path, mode: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, mode, newline='', encoding='utf-8')
    except OSError as exc:
        raise StorageError(f'cannot open {path}: {exc.strerror or exc}') from exc


def write_rows(path: PathLike, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]):
    path = Path(path)
    with _open_csv(path, 'w') as handle:
        writer = csv.DictWriter(handle, fieldnames=list(columns), lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({name: _cell(row.get(name)) for name in columns})


def _cell(value: Any) -> Any:
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


class SearchLog:
    """
    Append-only CSV of descent iterations.

    Opening an existing log keeps the rows up to ``truncate_after`` (-1 keeps
    none, None keeps all); the header is written only for a new file.
    """

    def __init__(self, path: PathLike, truncate_after: Optional[int] = None):
        self.path = Path(path)
        if truncate_after is not None and self.path.exists():
            self._truncate(truncate_after)
        new_file = not self.path.exists() or self.path.stat().st_size == 0
        self._handle = _open_csv(self.path, 'a')
        self._writer = csv.DictWriter(self._handle, fieldnames=list(SEARCH_LOG_COLUMNS), lineterminator='\n')
        if new_file:
            self._writer.writeheader()

    def _truncate(self, iteration: int):
        # Rows past the checkpoint are replayed after a resume.
        with _open_csv(self.path, 'r') as handle:
            kept = [row for row in csv.DictReader(handle) if int(row['iteration']) <= iteration]
        write_rows(self.path, SEARCH_LOG_COLUMNS, kept)

    def append(self, iteration: int, stage: str, candidate_error: Optional[float], accepted: Optional[bool],
               incumbent_error: float):
        self._writer.writerow({
            'iteration': iteration,
            'stage': stage,
            'candidate_error': _cell(candidate_error),
            'accepted': _cell(accepted),
            'incumbent_error': _cell(incumbent_error),
        })

    def close(self):
        if not self._handle.closed:
            self._handle.flush()
            self._handle.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        self.close()


def read_search_log(path: PathLike) -> List[Dict[str, Any]]:
    with _open_csv(Path(path), 'r') as handle:
        rows = []
        for row in csv.DictReader(handle):
            rows.append({
                'iteration': int(row['iteration']),
                'stage': row['stage'],
                'candidate_error': float(row['candidate_error']) if row['candidate_error'] else None,
                'accepted': bool(int(row['accepted'])) if row['accepted'] else None,
                'incumbent_error': float(row['incumbent_error']),
            })
        return rows


def write_trajectory(path: PathLike, record) -> Path:
    """One row per step of a ``TrialRecord``."""
    rows = ({
        't': t + 1,
        'x': record.x[t], 'y': record.y[t], 'heading': record.heading[t],
        'sector': record.sector[t], 'sound': record.sound[t],
        'left': record.left[t], 'right': record.right[t],
        'distance': record.distance[t], 'label': record.labels[t],
    } for t in range(record.spec.horizon))
    write_rows(path, TRAJECTORY_COLUMNS, rows)
    return Path(path)


# ---------------------------------------------------------------------------
# Run outputs
# ---------------------------------------------------------------------------

@dataclass
class RunManifest:
    """Everything needed to rerun a design: config, seeds, outputs and timings."""

    config: Dict[str, Any]
    seeds: Dict[str, Any]
    outputs: Dict[str, str] = field(default_factory=dict)
    started_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    finished_at: Optional[str] = None
    performance: Dict[str, Any] = field(default_factory=dict)
    digests: Dict[str, str] = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def finish(self):
        self.finished_at = datetime.now(timezone.utc).isoformat()

    def to_document(self) -> Dict[str, Any]:
        return {
            'format_version': self.format_version,
            'config': self.config,
            'seeds': self.seeds,
            'outputs': self.outputs,
            'started_at': self.started_at,
            'finished_at': self.finished_at,
            'performance': self.performance,
            'digests': self.digests,
        }


class ResultStore:
    """Output directory of one design command."""

    def __init__(self, out_dir: PathLike, fmt: str = 'csv'):
        if fmt not in ('csv', 'json'):
            raise StorageError(f'unknown table format {fmt!r} (csv or json)')
        self.out_dir = Path(out_dir)
        self.fmt = fmt
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            (self.out_dir / 'networks').mkdir(exist_ok=True)
            (self.out_dir / 'logs').mkdir(exist_ok=True)
        except OSError as exc:
            raise StorageError(f'cannot create output directory {self.out_dir}: {exc.strerror or exc}') from exc
        logger.info(f"Result store ready at {self.out_dir}")

    def network_path(self, run: int) -> Path:
        return self.out_dir / 'networks' / f'run_{run:03d}.json'

    @property
    def manifest_path(self) -> Path:
        return self.out_dir / 'manifest.json'

    def save_network(self, run: int, net: BooleanNetwork) -> Path:
        path = self.network_path(run)
        save_network(path, net)
        return path

    def save_summaries(self, summaries: Sequence[Mapping[str, Any]]) -> Path:
        if self.fmt == 'json':
            path = self.out_dir / 'summary.json'
            write_json(path, {'format_version': FORMAT_VERSION, 'runs': [dict(row) for row in summaries]})
        else:
            path = self.out_dir / 'summary.csv'
            write_rows(path, SUMMARY_COLUMNS, summaries)
        return path

    def save_trial_results(self, rows: Sequence[Mapping[str, Any]]) -> Path:
        if self.fmt == 'json':
            path = self.out_dir / 'trials.json'
            write_json(path, {'format_version': FORMAT_VERSION, 'trials': [dict(row) for row in rows]})
        else:
            path = self.out_dir / 'trials.csv'
            write_rows(path, TRIAL_COLUMNS, rows)
        return path

    def save_manifest(self, manifest: RunManifest) -> Path:
        write_json(self.manifest_path, manifest.to_document())
        return self.manifest_path
