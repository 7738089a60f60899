"""Dense small-matrix kernels.

Everything in here works on plain numpy arrays and is meant for the
desk-scale problems this package deals with (state dimension up to a few
tens). Lyapunov equations are solved by vectorizing them, which costs
O(n^6) but is straightforward to verify.
"""
import logging
import math
from typing import Callable, List, Tuple, Union
import warnings

import numpy as np
import numpy.typing as npt
import scipy.linalg

from acclqr.exceptions import (
        BudgetExceeded, EigenFailure, NotHurwitz, SingularSystem)


logger = logging.getLogger(__name__)

Matrix = npt.NDArray[np.float64]
"""A real matrix or vector of float64 values."""

Seed = Union[int, np.random.Generator]

STABILITY_MARGIN = 1e-9
"""A matrix is Hurwitz if its spectral abscissa is below minus this."""


def as_generator(seed: Seed) -> np.random.Generator:
    """Returns a seeded random generator.

    Integer seeds are turned into a PCG64-based Generator, which gives the
    same stream on every platform. An existing Generator is passed
    through, so that callers can share one stream across calls.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def _check_square(name: str, a: Matrix) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError('The argument {} must be square. Its shape is'
                         ' {}.'.format(name, a.shape))


def spectral_abscissa(a: Matrix) -> float:
    """Returns the largest real part of the eigenvalues of a.

    Raises:
        EigenFailure: If the eigenvalue computation fails.
    """
    a = np.asarray(a, dtype=float)
    _check_square('A', a)
    try:
        eigs = scipy.linalg.eigvals(a)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigenFailure('Eigenvalue computation failed: {}'.format(e))
    if not np.all(np.isfinite(eigs)):
        raise EigenFailure('Eigenvalue computation produced non-finite'
                           ' values')
    return float(np.max(eigs.real))


def is_hurwitz(a: Matrix, margin: float = STABILITY_MARGIN) -> bool:
    """Whether all eigenvalues of a lie left of -margin.

    If the eigenvalue solver fails, it is retried once on a balanced
    copy of the matrix. If that fails too, the matrix is reported as
    not Hurwitz.
    """
    try:
        return spectral_abscissa(a) < -margin
    except EigenFailure:
        logger.debug('Eigenvalue failure, retrying with balancing')
    try:
        balanced, _ = scipy.linalg.matrix_balance(np.asarray(a, dtype=float))
        return spectral_abscissa(balanced) < -margin
    except (EigenFailure, ValueError):
        return False


def lyapunov_residual(
        a: Matrix, x: Matrix, w: Matrix, dual: bool = False) -> float:
    """Frobenius norm of AᵀX + XA + W, or of AX + XAᵀ + W if dual."""
    if dual:
        a = a.T
    return float(np.linalg.norm(a.T @ x + x @ a + w))


def solve_lyapunov(a: Matrix, w: Matrix) -> Matrix:
    """Solves AᵀX + XA + W = 0 for symmetric X.

    The equation is vectorized into (I⊗Aᵀ + Aᵀ⊗I) vec(X) = -vec(W),
    which is solved with a dense LU factorization followed by one step
    of iterative refinement. The result is symmetrized.

    Args:
        a: A Hurwitz matrix of shape n×n.
        w: A symmetric matrix of shape n×n.

    Returns:
        The solution X.

    Raises:
        NotHurwitz: If the spectral abscissa of A is not below
                -STABILITY_MARGIN.
        SingularSystem: If the vectorized system is numerically
                singular.
    """
    a = np.asarray(a, dtype=float)
    w = np.asarray(w, dtype=float)
    _check_square('A', a)
    _check_square('W', w)
    if a.shape != w.shape:
        raise ValueError('The sizes of the arguments are not compatible.'
                         ' A is {} and W is {}.'.format(a.shape, w.shape))

    abscissa = spectral_abscissa(a)
    if abscissa >= -STABILITY_MARGIN:
        raise NotHurwitz('Matrix has spectral abscissa {}, it is not'
                         ' Hurwitz'.format(abscissa))

    n = a.shape[0]
    eye = np.eye(n)
    kron = np.kron(eye, a.T) + np.kron(a.T, eye)
    rhs = -w.reshape(-1, order='F')

    with warnings.catch_warnings():
        warnings.simplefilter('ignore', scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(kron, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= n * n * np.finfo(float).eps * pivots.max():
        raise SingularSystem('The vectorized Lyapunov system is'
                             ' numerically singular')

    vec_x = scipy.linalg.lu_solve((lu, piv), rhs)
    vec_x += scipy.linalg.lu_solve((lu, piv), rhs - kron @ vec_x)
    x = vec_x.reshape((n, n), order='F')
    x = 0.5 * (x + x.T)

    residual = lyapunov_residual(a, x, w)
    if residual > 1e-10 * (1.0 + np.linalg.norm(w)):
        logger.warning('Lyapunov residual {} exceeds tolerance'.format(
            residual))
    return x


def solve_lyapunov_dual(a: Matrix, w: Matrix) -> Matrix:
    """Solves AY + YAᵀ + W = 0 for symmetric Y.

    See :func:`solve_lyapunov` for details and errors.
    """
    a = np.asarray(a, dtype=float)
    return solve_lyapunov(a.T, w)


class LinearOperator:
    """A linear operator on vectors of a fixed length.

    Attributes:
        dim: Length of the vectors the operator acts on.
    """
    def __init__(self, dim: int, apply: Callable[[Matrix], Matrix]) -> None:
        if dim < 1:
            raise ValueError('Operator dimension must be positive')
        self.dim = dim
        self._apply = apply

    def __call__(self, v: Matrix) -> Matrix:
        return self.matvec(v)

    def matvec(self, v: Matrix) -> Matrix:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError('Expected a vector of length {}, got shape'
                             ' {}'.format(self.dim, v.shape))
        return np.asarray(self._apply(v), dtype=float)

    def to_dense(self) -> Matrix:
        """Returns the matrix of the operator, one apply per column."""
        columns = [self.matvec(e) for e in np.eye(self.dim)]
        return np.stack(columns, axis=1)

    def symmetry_defect(self, seed: Seed = 0, probes: int = 3) -> float:
        """Largest |<Av, w> - <v, Aw>| over random unit probes."""
        rng = as_generator(seed)
        defect = 0.0
        for _ in range(probes):
            v = _random_unit(rng, self.dim)
            w = _random_unit(rng, self.dim)
            defect = max(defect, abs(
                float(self.matvec(v) @ w) - float(v @ self.matvec(w))))
        return defect


def _random_unit(rng: np.random.Generator, dim: int) -> Matrix:
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def lanczos_cap(dim: int, upper_bound: float, accuracy: float,
                failure_prob: float) -> int:
    """Iteration cap of the smallest-eigenvalue probe."""
    return int(math.ceil(
        4.0 * math.sqrt(upper_bound / accuracy)
        * math.log(4.0 * dim / failure_prob)))


def min_eig_estimate(
        h: LinearOperator, upper_bound: float, accuracy: float,
        failure_prob: float, seed: Seed) -> Tuple[float, Matrix]:
    """Estimates the smallest eigenpair of a symmetric operator.

    This runs Lanczos with full reorthogonalization on the shifted
    operator L1·I - H, whose leading eigenvector is the smallest
    eigenvector of H. The start vector is uniform on the unit sphere.
    The iteration stops when the Krylov subspace becomes invariant or
    when the iteration cap is reached; in the latter case the Ritz
    residual must be at most accuracy / 2.

    Args:
        h: The operator H, with ‖H‖ ≤ upper_bound.
        upper_bound: The bound L1.
        accuracy: The additive accuracy α, 0 < α ≤ L1.
        failure_prob: Allowed probability of failure, in (0, 1).
        seed: Seed or generator for the start vector.

    Returns:
        A tuple (vᵀHv, v) with v a unit vector.

    Raises:
        BudgetExceeded: If the cap is reached without a certificate.
    """
    if not 0.0 < accuracy <= upper_bound:
        raise ValueError('Accuracy must be in (0, {}], got {}'.format(
            upper_bound, accuracy))
    if not 0.0 < failure_prob < 1.0:
        raise ValueError('Failure probability must be in (0, 1), got'
                         ' {}'.format(failure_prob))

    rng = as_generator(seed)
    dim = h.dim
    cap = lanczos_cap(dim, upper_bound, accuracy, failure_prob)
    breakdown = 1e-12 * max(1.0, upper_bound)

    basis = [_random_unit(rng, dim)]
    diag = []   # type: List[float]
    offdiag = []    # type: List[float]
    invariant = False
    while True:
        q = basis[-1]
        w = upper_bound * q - h(q)
        diag.append(float(q @ w))
        q_mat = np.stack(basis, axis=1)
        for _ in range(2):
            w = w - q_mat @ (q_mat.T @ w)
        beta = float(np.linalg.norm(w))
        if beta <= breakdown:
            invariant = True
            break
        if len(basis) >= cap or len(basis) >= dim:
            break
        offdiag.append(beta)
        basis.append(w / beta)

    _, y = _top_ritz_pair(diag, offdiag)
    v = np.stack(basis, axis=1) @ y
    v /= np.linalg.norm(v)
    hv = h(v)
    estimate = float(v @ hv)

    if not invariant:
        residual = float(np.linalg.norm(hv - estimate * v))
        if residual > 0.5 * accuracy:
            raise BudgetExceeded(
                'Smallest eigenvalue probe stopped after {} iterations'
                ' with residual {}'.format(len(basis), residual))
    logger.debug('Eigen-probe used {} iterations, estimate {}'.format(
        len(basis), estimate))
    return estimate, v


def _top_ritz_pair(
        diag: List[float], offdiag: List[float]) -> Tuple[float, Matrix]:
    if len(diag) == 1:
        return diag[0], np.ones(1)
    try:
        values, vectors = scipy.linalg.eigh_tridiagonal(
                np.array(diag), np.array(offdiag))
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigenFailure('Tridiagonal eigenproblem failed: {}'.format(e))
    return float(values[-1]), vectors[:, -1]


def dense_sym_eig(h: Matrix) -> Tuple[Matrix, Matrix]:
    """Full eigendecomposition of a symmetric matrix.

    Returns:
        Eigenvalues in ascending order and the matching orthonormal
        eigenvectors as columns.

    Raises:
        EigenFailure: If the solver fails.
    """
    h = np.asarray(h, dtype=float)
    _check_square('H', h)
    scale = max(1.0, float(np.linalg.norm(h)))
    if np.linalg.norm(h - h.T) > 1e-10 * scale:
        raise ValueError('Matrix is not symmetric')
    try:
        values, vectors = scipy.linalg.eigh(h)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigenFailure('Symmetric eigenproblem failed: {}'.format(e))
    return values, vectors
