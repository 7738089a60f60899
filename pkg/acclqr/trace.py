"""Per-iteration records of solver runs and their CSV form.

A trace CSV starts with ``#``-prefixed comment lines holding the solver
name, the terminal status, the configuration and any warnings. Then
follows a header row and one row per accepted iterate. Floats are
written with 17 significant digits, so reading a file back gives the
exact values that were written.
"""
from collections import OrderedDict
import csv
from dataclasses import dataclass, field
import enum
import io
import logging
from pathlib import Path
import time
from typing import Dict, IO, List, Optional, Union

import numpy as np

from acclqr.problem import Gain


logger = logging.getLogger(__name__)

ExtraValue = Union[float, int, str, None]

BASE_COLUMNS = ['iter', 'f', 'grad_norm', 'restart', 'wall_ms', 'lyap_solves']

OLQR_COLUMNS = ['phase', 'min_eig_est', 'ncd_steps', 'nag_restarts']

HYBRID_COLUMNS = ['t', 'energy', 'dfdt']

_COLUMN_TYPES = {
        'iter': int, 'restart': int, 'lyap_solves': int, 'ncd_steps': int,
        'nag_restarts': int, 'phase': str}


class Status(enum.Enum):
    RUNNING = 'Running'
    CONVERGED = 'Converged'
    MAX_ITERS = 'MaxIters'
    RESTART_BUDGET_EXCEEDED = 'RestartBudgetExceeded'
    LEFT_FEASIBLE_SET = 'LeftFeasibleSet'
    FAILED = 'Failed'


@dataclass
class TraceRow:
    iter: int
    f: float
    grad_norm: float
    restart: int = 0
    wall_ms: float = 0.0
    lyap_solves: int = 0
    extra: Dict[str, ExtraValue] = field(default_factory=dict)

    def value(self, column: str) -> ExtraValue:
        if column in BASE_COLUMNS:
            return getattr(self, column)    # type: ignore
        return self.extra.get(column)


class Trace:
    """The record of one solver run.

    Rows are appended by the run that owns the trace, in iteration
    order.

    Attributes:
        solver: Name of the solver.
        extra_columns: Columns beyond the standard ones.
        rows: The recorded rows.
        status: Terminal status, RUNNING while the run is going.
        config: Configuration echo, written into the CSV header.
        warnings: Warnings about the run, also written into the header.
        gain: The final gain, if the run produced one.
        oracle_calls: Number of oracle queries made.
    """
    def __init__(
            self, solver: str,
            extra_columns: Optional[List[str]] = None) -> None:
        self.solver = solver
        self.extra_columns = list(extra_columns or [])
        self.rows = []  # type: List[TraceRow]
        self.status = Status.RUNNING
        self.config = OrderedDict()     # type: Dict[str, str]
        self.warnings = []  # type: List[str]
        self.gain = None    # type: Optional[Gain]
        self.oracle_calls = 0
        self._start = time.perf_counter()

    @property
    def columns(self) -> List[str]:
        return BASE_COLUMNS + self.extra_columns

    def echo(self, key: str, value: object) -> None:
        """Adds a configuration entry to the header."""
        self.config[key] = str(value)

    def warn(self, message: str) -> None:
        logger.warning('{}: {}'.format(self.solver, message))
        self.warnings.append(message)

    def record(
            self, iteration: int, f: float, grad_norm: float,
            restart: int = 0, lyap_solves: int = 0,
            **extra: ExtraValue) -> TraceRow:
        """Appends a row, stamping it with the elapsed wall time."""
        if not np.isfinite(f):
            raise ValueError('Trace rows must have a finite cost')
        if self.rows and iteration < self.rows[-1].iter:
            raise ValueError('Trace rows must be ordered by iteration')
        unknown = set(extra) - set(self.extra_columns)
        if unknown:
            raise ValueError('Unknown trace columns {}'.format(
                sorted(unknown)))
        row = TraceRow(
                iteration, float(f), float(grad_norm), restart,
                1000.0 * (time.perf_counter() - self._start), lyap_solves,
                dict(extra))
        self.rows.append(row)
        return row

    @property
    def last(self) -> TraceRow:
        if not self.rows:
            raise IndexError('Trace has no rows')
        return self.rows[-1]

    @property
    def iterations(self) -> int:
        return self.last.iter if self.rows else 0

    @property
    def restarts(self) -> int:
        return sum(row.restart for row in self.rows)

    def f_values(self) -> List[float]:
        return [row.f for row in self.rows]

    def column(self, name: str) -> List[ExtraValue]:
        return [row.value(name) for row in self.rows]

    def first_iter_within(self, f_star: float, tol: float) -> Optional[int]:
        """First iteration at which f - f_star <= tol, if any."""
        for row in self.rows:
            if row.f - f_star <= tol:
                return row.iter
        return None


def _format(value: ExtraValue) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return '%.17g' % value
    return str(value)


def _parse(column: str, text: str) -> ExtraValue:
    if text == '':
        return None
    kind = _COLUMN_TYPES.get(column, float)
    if kind is str:
        return text
    if kind is int:
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def write_trace_csv(
        trace: Trace, target: Union[Path, str, IO[str]],
        timing: bool = True) -> None:
    """Writes a trace as CSV.

    Args:
        trace: The trace to write.
        target: A path or an open text stream.
        timing: If False, wall times are written as zero, which makes
                the output identical between repeated runs.
    """
    if isinstance(target, (str, Path)):
        with Path(target).open('w', newline='') as f:
            write_trace_csv(trace, f, timing)
        return

    target.write('# solver: {}\n'.format(trace.solver))
    target.write('# status: {}\n'.format(trace.status.value))
    target.write('# oracle_calls: {}\n'.format(trace.oracle_calls))
    for key, value in trace.config.items():
        target.write('# config {}: {}\n'.format(key, value))
    for message in trace.warnings:
        target.write('# warning: {}\n'.format(message))

    writer = csv.writer(target, lineterminator='\n')
    writer.writerow(trace.columns)
    for row in trace.rows:
        values = []
        for column in trace.columns:
            value = row.value(column)
            if column == 'wall_ms' and not timing:
                value = 0.0
            values.append(_format(value))
        writer.writerow(values)


def read_trace_csv(source: Union[Path, str, IO[str]]) -> Trace:
    """Reads a trace written by :func:`write_trace_csv`."""
    if isinstance(source, (str, Path)):
        with Path(source).open('r', newline='') as f:
            return read_trace_csv(f)

    comments = []   # type: List[str]
    body = io.StringIO()
    for line in source:
        if line.startswith('#'):
            comments.append(line[1:].strip())
        else:
            body.write(line)
    body.seek(0)

    reader = csv.reader(body)
    columns = next(reader)
    if columns[:len(BASE_COLUMNS)] != BASE_COLUMNS:
        raise ValueError('Not a trace file, header is {}'.format(columns))

    trace = Trace('unknown', columns[len(BASE_COLUMNS):])
    for comment in comments:
        key, _, value = comment.partition(': ')
        if key == 'solver':
            trace.solver = value
        elif key == 'status':
            trace.status = Status(value)
        elif key == 'oracle_calls':
            trace.oracle_calls = int(value)
        elif key.startswith('config '):
            trace.config[key[len('config '):]] = value
        elif key == 'warning':
            trace.warnings.append(value)

    for values in reader:
        cells = dict(zip(columns, values))
        trace.rows.append(TraceRow(
            int(cells['iter']), float(cells['f']),
            float(cells['grad_norm']), int(cells['restart']),
            float(cells['wall_ms']), int(cells['lyap_solves']),
            {column: _parse(column, cells[column])
             for column in trace.extra_columns}))
    return trace
