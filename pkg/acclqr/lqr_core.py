"""Cost, derivatives and ground truth of the LQR objective.

For a gain K, with A_K = A - BKC, the cost is f(K) = Tr(XΣ) where

    A_Kᵀ X + X A_K + CᵀKᵀRKC + Q = 0,

and the gradient is 2(RKC - BᵀX)YCᵀ where

    A_K Y + Y A_Kᵀ + Σ = 0.

Hessian-vector products need two more Lyapunov solves each. All
functions here are pure; the :class:`Evaluation` they share only caches
within a single query.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np

from acclqr.exceptions import NoConvergence, NotStabilizing
from acclqr.linalg import (
        is_hurwitz, LinearOperator, Matrix, solve_lyapunov,
        solve_lyapunov_dual, spectral_abscissa)
from acclqr.problem import as_gain, Gain, LqrProblem, ProblemKind


logger = logging.getLogger(__name__)

_EPS = float(np.finfo(float).eps)


class HessianForm:
    """The Hessian of f at K applied to a direction E.

    Attributes:
        E: The direction.
        X_prime: Derivative of X along E.
        Y_prime: Derivative of Y along E.
        hvp: The Hessian-vector product ∇²f(K)[E].
        value: The quadratic form ∇²f(K)[E, E].
    """
    def __init__(
            self, E: Matrix, X_prime: Matrix, Y_prime: Matrix,
            hvp: Matrix) -> None:
        self.E = E
        self.X_prime = X_prime
        self.Y_prime = Y_prime
        self.hvp = hvp
        self.value = float(np.sum(hvp * E))


class Evaluation:
    """Lazily computed quantities of the objective at one gain.

    X and Y are solved for at most once. The number of Lyapunov solves
    done so far is kept in ``lyap_solves``.
    """
    def __init__(self, problem: LqrProblem, k: Gain) -> None:
        self.problem = problem
        self.k = problem.check_gain(k)
        self.a_k = problem.A - problem.B @ self.k @ problem.C
        self.lyap_solves = 0
        self._stabilizing = None    # type: Optional[bool]
        self._x = None  # type: Optional[Matrix]
        self._y = None  # type: Optional[Matrix]

    @property
    def stabilizing(self) -> bool:
        if self._stabilizing is None:
            self._stabilizing = is_hurwitz(self.a_k)
        return self._stabilizing

    def require_stabilizing(self) -> None:
        if not self.stabilizing:
            raise NotStabilizing('Gain {} does not stabilize the'
                                 ' system'.format(self.k.tolist()))

    @property
    def x(self) -> Matrix:
        if self._x is None:
            self.require_stabilizing()
            p = self.problem
            kc = self.k @ p.C
            self._x = solve_lyapunov(self.a_k, p.Q + kc.T @ p.R @ kc)
            self.lyap_solves += 1
        return self._x

    @property
    def y(self) -> Matrix:
        if self._y is None:
            self.require_stabilizing()
            self._y = solve_lyapunov_dual(self.a_k, self.problem.Sigma)
            self.lyap_solves += 1
        return self._y

    @property
    def cost(self) -> float:
        return float(np.trace(self.x @ self.problem.Sigma))

    @property
    def residual_gain(self) -> Matrix:
        """The matrix M = RKC - BᵀX."""
        p = self.problem
        return p.R @ self.k @ p.C - p.B.T @ self.x

    @property
    def gradient(self) -> Matrix:
        return 2.0 * self.residual_gain @ self.y @ self.problem.C.T

    def hessian_form(self, e: Matrix) -> HessianForm:
        p = self.problem
        e = np.asarray(e, dtype=float)
        if e.shape != self.k.shape:
            raise ValueError('Direction has shape {}, expected {}'.format(
                e.shape, self.k.shape))
        m_mat = self.residual_gain
        y = self.y
        mec = m_mat.T @ e @ p.C
        x_prime = solve_lyapunov(self.a_k, mec + mec.T)
        becy = p.B @ e @ p.C @ y
        y_prime = solve_lyapunov_dual(self.a_k, -(becy + becy.T))
        self.lyap_solves += 2
        hvp = (2.0 * (p.R @ e @ p.C - p.B.T @ x_prime) @ y @ p.C.T
               + 2.0 * m_mat @ y_prime @ p.C.T)
        return HessianForm(e, x_prime, y_prime, hvp)


def evaluate(problem: LqrProblem, k: Gain) -> Evaluation:
    return Evaluation(problem, k)


def closed_loop(problem: LqrProblem, k: Gain) -> Matrix:
    """Returns A - BKC."""
    return Evaluation(problem, k).a_k


def is_stabilizing(problem: LqrProblem, k: Gain) -> bool:
    return Evaluation(problem, k).stabilizing


def cost(problem: LqrProblem, k: Gain) -> float:
    """The LQR cost f(K) = Tr(XΣ).

    Raises:
        NotStabilizing: If K does not stabilize the closed loop.
    """
    return Evaluation(problem, k).cost


def gradient(problem: LqrProblem, k: Gain) -> Matrix:
    """The gradient 2(RKC - BᵀX)YCᵀ.

    Raises:
        NotStabilizing: If K does not stabilize the closed loop.
    """
    return Evaluation(problem, k).gradient


def hessian_form(problem: LqrProblem, k: Gain, e: Matrix) -> HessianForm:
    return Evaluation(problem, k).hessian_form(e)


def hessian_quadratic_form(
        problem: LqrProblem, k: Gain, e: Matrix) -> float:
    """The second derivative ∇²f(K)[E, E]."""
    return Evaluation(problem, k).hessian_form(e).value


def hvp_exact(problem: LqrProblem, k: Gain, e: Matrix) -> Matrix:
    """The Hessian-vector product ∇²f(K)[E], from two extra solves."""
    return Evaluation(problem, k).hessian_form(e).hvp


def default_fd_step(k: Gain) -> float:
    """Forward-difference step for Hessian-vector products."""
    return math.sqrt(_EPS) * (1.0 + float(np.linalg.norm(k)))


def hvp_fd(
        problem: LqrProblem, k: Gain, e: Matrix,
        h: Optional[float] = None) -> Matrix:
    """Finite-difference Hessian-vector product.

    Computes (∇f(K + hE) - ∇f(K)) / h, which needs no second-order
    information.

    Raises:
        NotStabilizing: If K or K + hE is not stabilizing.
    """
    k = problem.check_gain(k)
    if h is None:
        h = default_fd_step(k)
    shifted = as_gain(k + h * np.asarray(e, dtype=float))
    return (gradient(problem, shifted) - gradient(problem, k)) / h


def fd_gradient(
        problem: LqrProblem, k: Gain, h: Optional[float] = None) -> Matrix:
    """Central finite-difference approximation of the gradient."""
    k = problem.check_gain(k)
    if h is None:
        h = _EPS ** (1.0 / 3.0) * (1.0 + float(np.linalg.norm(k)))
    result = np.zeros(k.shape)
    for idx in np.ndindex(*k.shape):
        step = np.zeros(k.shape)
        step[idx] = h
        result[idx] = (cost(problem, as_gain(k + step))
                       - cost(problem, as_gain(k - step))) / (2.0 * h)
    return result


def hessian_operator(problem: LqrProblem, k: Gain) -> LinearOperator:
    """The Hessian at K as an operator on row-major vec(K).

    All products share one evaluation, so X and Y are solved for once.
    """
    evaluation = Evaluation(problem, k)
    evaluation.require_stabilizing()
    shape = evaluation.k.shape

    def apply(v: Matrix) -> Matrix:
        return evaluation.hessian_form(v.reshape(shape)).hvp.ravel()

    return LinearOperator(evaluation.k.size, apply)


def assemble_dense_hessian(problem: LqrProblem, k: Gain) -> Matrix:
    """The Hessian at K as a dense, symmetrized (m·r)×(m·r) matrix."""
    dense = hessian_operator(problem, k).to_dense()
    asymmetry = float(np.linalg.norm(dense - dense.T))
    logger.debug('Hessian asymmetry before averaging: {}'.format(asymmetry))
    return 0.5 * (dense + dense.T)


def coercivity_bounds(problem: LqrProblem, k: Gain) -> Tuple[float, float]:
    """Two lower bounds on f(K) that grow towards the boundary of S.

    The first grows as the closed loop approaches instability, the
    second as ‖K‖ grows.
    """
    p = problem
    k = p.check_gain(k)
    a_k = p.A - p.B @ k @ p.C
    sig_min = float(np.linalg.eigvalsh(p.Sigma)[0])
    q_min = float(np.linalg.eigvalsh(p.Q)[0])
    r_min = float(np.linalg.eigvalsh(p.R)[0])
    cct_min = float(np.linalg.eigvalsh(p.C @ p.C.T)[0])
    k_norm = float(np.linalg.norm(k))
    near_instability = sig_min * q_min / (-2.0 * spectral_abscissa(a_k))
    large_gain = (sig_min * r_min * k_norm ** 2 * cct_min
                  / (2.0 * np.linalg.norm(p.A, 2)
                     + 2.0 * k_norm * np.linalg.norm(p.B, 2)
                     * np.linalg.norm(p.C, 2)))
    return near_instability, float(large_gain)


def care_oracle(
        problem: LqrProblem, k0: Gain, max_iters: int = 200,
        tol: float = 1e-12) -> Gain:
    """Computes the optimal state-feedback gain by Kleinman iteration.

    Starting from a stabilizing K0, this alternates a Lyapunov solve
    for X with K ← R⁻¹BᵀX. Every iterate is stabilizing and the costs
    are nonincreasing.

    Args:
        problem: A state-feedback problem.
        k0: A stabilizing initial gain.
        max_iters: Maximum number of iterations.
        tol: Relative step size at which to stop.

    Returns:
        The optimal gain K*.

    Raises:
        NotStabilizing: If K0 is not stabilizing.
        NoConvergence: If the iteration does not converge.
    """
    if problem.kind != ProblemKind.SLQR:
        raise ValueError('Kleinman iteration needs a state-feedback'
                         ' problem')
    k = problem.check_gain(k0)
    evaluation = Evaluation(problem, k)
    evaluation.require_stabilizing()
    r_inv_bt = np.linalg.solve(problem.R, problem.B.T)

    previous_cost = evaluation.cost
    previous_step = math.inf
    for i in range(1, max_iters + 1):
        k_next = as_gain(r_inv_bt @ evaluation.x)
        step = float(np.linalg.norm(k_next - k))
        scale = 1.0 + float(np.linalg.norm(k))

        evaluation = Evaluation(problem, k_next)
        if not evaluation.stabilizing:
            raise NoConvergence('Kleinman iterate {} is not'
                                ' stabilizing'.format(i))
        current_cost = evaluation.cost
        if current_cost > previous_cost * (1.0 + 1e-12):
            logger.warning('Kleinman cost increased from {} to {}'.format(
                previous_cost, current_cost))
        k = k_next

        if step <= tol * scale:
            logger.debug('Kleinman converged after {} iterations'.format(i))
            return k
        if step <= 1e-9 * scale and step >= previous_step:
            logger.debug('Kleinman reached rounding floor after {}'
                         ' iterations, step {}'.format(i, step))
            return k
        previous_step = step
        previous_cost = current_cost

    raise NoConvergence('Kleinman iteration did not converge in {}'
                        ' iterations'.format(max_iters))
