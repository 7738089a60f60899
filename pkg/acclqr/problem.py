from collections import OrderedDict
import enum
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import yatiml

from acclqr.exceptions import ConfigError
from acclqr.linalg import Matrix


logger = logging.getLogger(__name__)

Gain = Matrix
"""A feedback gain K of shape m×r, read-only once made by as_gain()."""

NumberMatrix = List[List[Union[int, float]]]


class ProblemKind(enum.Enum):
    SLQR = 'SLQR'
    OLQR = 'OLQR'


def as_gain(k: Any) -> Gain:
    """Converts a nested sequence or array into an immutable gain.

    Scalars and vectors are promoted to a matrix with one row.

    Raises:
        ValueError: If any entry is not finite.
    """
    gain = np.array(k, dtype=float)
    if gain.ndim < 2:
        gain = np.atleast_2d(gain)
    if gain.ndim != 2:
        raise ValueError('A gain must be a matrix, got shape {}'.format(
            gain.shape))
    if not np.all(np.isfinite(gain)):
        raise ValueError('Gain has non-finite entries')
    gain.setflags(write=False)
    return gain


def _as_matrix(name: str, value: Any) -> Matrix:
    mat = np.array(value, dtype=float)
    if mat.ndim != 2 or mat.size == 0:
        raise ValueError('{} must be a non-empty matrix, got shape {}'.format(
            name, mat.shape))
    if not np.all(np.isfinite(mat)):
        raise ValueError('{} has non-finite entries'.format(name))
    mat.setflags(write=False)
    return mat


def _check_positive_definite(name: str, mat: Matrix) -> None:
    scale = max(1.0, float(np.linalg.norm(mat)))
    if np.linalg.norm(mat - mat.T) > 1e-12 * scale:
        raise ValueError('{} must be symmetric'.format(name))
    smallest = float(np.linalg.eigvalsh(0.5 * (mat + mat.T))[0])
    if smallest <= 1e-12:
        raise ValueError('{} must be positive definite, its smallest'
                         ' eigenvalue is {}'.format(name, smallest))


class LqrProblem:
    """System and cost data of a continuous-time LQR problem.

    The closed loop is ẋ = (A - BKC)x, and the cost of a stabilizing
    gain K is Tr(XΣ), with X the solution of the closed-loop Lyapunov
    equation for Q + CᵀKᵀRKC.

    Attributes:
        A: State matrix, n×n.
        B: Input matrix, n×m.
        C: Output matrix, r×n.
        Q: State weight, n×n, positive definite.
        R: Input weight, m×m, positive definite.
        Sigma: Initial state covariance, n×n, positive definite.
        kind: SLQR if C is exactly the identity, OLQR otherwise.
    """
    def __init__(
            self, A: Any, B: Any, C: Any, Q: Any, R: Any, Sigma: Any,
            kind: Optional[ProblemKind] = None) -> None:
        self.A = _as_matrix('A', A)
        self.B = _as_matrix('B', B)
        self.C = _as_matrix('C', C)
        self.Q = _as_matrix('Q', Q)
        self.R = _as_matrix('R', R)
        self.Sigma = _as_matrix('Sigma', Sigma)

        n = self.A.shape[0]
        m = self.B.shape[1]
        expected = {
                'A': (n, n), 'B': (n, m), 'C': (self.C.shape[0], n),
                'Q': (n, n), 'R': (m, m), 'Sigma': (n, n)}
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ValueError('{} has shape {}, expected {}'.format(
                    name, getattr(self, name).shape, shape))
        for name in ('Q', 'R', 'Sigma'):
            _check_positive_definite(name, getattr(self, name))

        is_identity = (self.C.shape == (n, n)
                       and bool(np.array_equal(self.C, np.eye(n))))
        inferred = ProblemKind.SLQR if is_identity else ProblemKind.OLQR
        if kind is not None and kind != inferred:
            raise ValueError('Problem declared {} but C makes it {}'.format(
                kind.value, inferred.value))
        self.kind = inferred

    @property
    def n(self) -> int:
        return int(self.A.shape[0])

    @property
    def m(self) -> int:
        return int(self.B.shape[1])

    @property
    def r(self) -> int:
        return int(self.C.shape[0])

    def gain_shape(self) -> Tuple[int, int]:
        return self.m, self.r

    def zero_gain(self) -> Gain:
        return as_gain(np.zeros(self.gain_shape()))

    def check_gain(self, k: Gain) -> Gain:
        """Returns k as a gain, checking its shape against the problem."""
        gain = as_gain(k)
        if gain.shape != self.gain_shape():
            raise ValueError('Gain has shape {}, expected {}'.format(
                gain.shape, self.gain_shape()))
        return gain

    def with_sigma(self, sigma: Any) -> 'LqrProblem':
        return LqrProblem(self.A, self.B, self.C, self.Q, self.R, sigma)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, LqrProblem):
            return NotImplemented
        return all(
                np.array_equal(getattr(self, name), getattr(other, name))
                for name in ('A', 'B', 'C', 'Q', 'R', 'Sigma'))

    def __repr__(self) -> str:
        return 'LqrProblem({}, n={}, m={}, r={})'.format(
                self.kind.value, self.n, self.m, self.r)


class ProblemFile:
    """The on-disk form of a problem, optionally with an initial gain."""
    def __init__(
            self, A: NumberMatrix, B: NumberMatrix, C: NumberMatrix,
            Q: NumberMatrix, R: NumberMatrix, Sigma: NumberMatrix,
            kind: Optional[ProblemKind] = None,
            K0: Optional[NumberMatrix] = None) -> None:
        self.A = A
        self.B = B
        self.C = C
        self.Q = Q
        self.R = R
        self.Sigma = Sigma
        self.kind = kind
        self.K0 = K0

    @classmethod
    def from_problem(
            cls, problem: LqrProblem,
            k0: Optional[Gain] = None) -> 'ProblemFile':
        return cls(
                problem.A.tolist(), problem.B.tolist(), problem.C.tolist(),
                problem.Q.tolist(), problem.R.tolist(),
                problem.Sigma.tolist(), problem.kind,
                None if k0 is None else np.asarray(k0).tolist())

    def to_problem(self) -> LqrProblem:
        return LqrProblem(
                self.A, self.B, self.C, self.Q, self.R, self.Sigma,
                self.kind)

    def initial_gain(self) -> Optional[Gain]:
        if self.K0 is None:
            return None
        return as_gain(self.K0)

    def _yatiml_attributes(self) -> Dict[str, Any]:
        attrs = OrderedDict([
            ('A', self.A), ('B', self.B), ('C', self.C), ('Q', self.Q),
            ('R', self.R), ('Sigma', self.Sigma)])    # type: Dict[str, Any]
        if self.kind is not None:
            attrs['kind'] = self.kind
        if self.K0 is not None:
            attrs['K0'] = self.K0
        return attrs


_load_problem_file = yatiml.load_function(ProblemFile, ProblemKind)

_dump_problem_file = yatiml.dump_json_function(ProblemFile, ProblemKind)


def load_problem(path: Path) -> Tuple[LqrProblem, Optional[Gain]]:
    """Loads a problem JSON file.

    Args:
        path: The file to read.

    Returns:
        The problem and the initial gain stored with it, if any.

    Raises:
        ConfigError: If the file cannot be read or does not describe a
                valid problem.
    """
    try:
        doc = _load_problem_file(Path(path))
        problem = doc.to_problem()
        k0 = doc.initial_gain()
    except (yatiml.RecognitionError, OSError, ValueError) as e:
        raise ConfigError('Could not load problem from {}: {}'.format(
            path, e))
    if k0 is not None:
        try:
            k0 = problem.check_gain(k0)
        except ValueError as e:
            raise ConfigError('Invalid K0 in {}: {}'.format(path, e))
    logger.debug('Loaded {} from {}'.format(problem, path))
    return problem, k0


def dump_problem(
        problem: LqrProblem, path: Path, k0: Optional[Gain] = None) -> None:
    """Writes a problem, and optionally an initial gain, as JSON.

    Floats are written in their shortest round-trip form, so loading
    the file gives back the exact same matrices.
    """
    _dump_problem_file(ProblemFile.from_problem(problem, k0), Path(path),
                       indent=2)
