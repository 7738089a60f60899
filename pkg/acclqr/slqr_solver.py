"""State-feedback solvers: gradient descent and restarted heavy-ball.

The accelerated solver discretizes the damped heavy-ball flow
K̈ + 2dK̇ + ∇f(K + βK̇) = 0 with the semi-implicit Euler scheme

    p_{k+1} = (1 - 2dT) p_k - T ∇f(K_k + β p_k)
    K_{k+1} = K_k + T p_{k+1}

and restarts from (K_k, -η∇f(K_k)) whenever a step would take the cost
above the sublevel value alpha1. Restarts keep every accepted iterate
inside that sublevel set.
"""
from dataclasses import dataclass, field
import logging
import math
from typing import Any, Callable, Optional

import numpy as np

from acclqr.constants import constants
from acclqr.exceptions import (
        InvalidDamping, LeftFeasibleSet, NonFiniteValue,
        RestartBudgetExceeded, StepRejected)
from acclqr.linalg import Matrix
from acclqr.lqr_core import care_oracle, Evaluation
from acclqr.problem import as_gain, Gain, LqrProblem, ProblemKind
from acclqr.trace import Status, Trace


logger = logging.getLogger(__name__)


def restart_step_bound(l1: float, d: float, eta: float) -> float:
    """Largest step size for which a restart cannot leave the sublevel set.

    This is (-η + √(η² + 8(1 - 2dη)/L1)) / (2(1 - 2dη)), which reduces
    to √(2/L1) for η = 0.

    Args:
        l1: Smoothness constant on the sublevel set.
        d: Damping.
        eta: Restart gradient gain.

    Raises:
        InvalidDamping: If 1 - 2dη ≤ 0.
    """
    if not l1 > 0.0:
        raise ValueError('L1 must be positive, got {}'.format(l1))
    c = 1.0 - 2.0 * d * eta
    if c <= 0.0:
        raise InvalidDamping('Need 1 - 2 d eta > 0, got {}'.format(c))
    return (-eta + math.sqrt(eta ** 2 + 8.0 * c / l1)) / (2.0 * c)


@dataclass(frozen=True)
class AccelConfig:
    """Settings of the accelerated solver.

    Attributes:
        T: Step size, in time units.
        d: Damping per unit time. Zero gives the undamped scheme.
        beta: Extrapolation of the gradient point, in time units.
        eta: Gradient gain of the momentum after a restart.
        alpha1: Sublevel value; None means f(K0).
        max_restarts: Number of restarts allowed.
        max_iters: Number of steps allowed, including discarded ones.
        grad_tol: Stop when the gradient norm is at most this.
    """
    T: float
    d: float
    beta: float = 0.0
    eta: float = 0.0
    alpha1: Optional[float] = None
    max_restarts: int = 20
    max_iters: int = 10000
    grad_tol: float = 1e-6

    def __post_init__(self) -> None:
        if not self.T > 0.0:
            raise ValueError('Step size T must be positive')
        if self.d < 0.0:
            raise ValueError('Damping d must not be negative')
        if self.eta < 0.0:
            raise ValueError('Restart gain eta must not be negative')
        if self.max_restarts < 0:
            raise ValueError('max_restarts must not be negative')

    @classmethod
    def certified(
            cls, problem: LqrProblem, k0: Gain,
            f_star: Optional[float] = None, **kwargs: Any
            ) -> 'AccelConfig':
        """Builds the default configuration from certified constants.

        Uses alpha1 = f(K0), d = 1/(2√κ) with κ = L1/μ, η = 1/L1 and the
        largest step allowed by :func:`restart_step_bound`. If f_star is
        not given, it is computed with :func:`care_oracle`, which needs a
        state-feedback problem.
        """
        alpha1 = Evaluation(problem, k0).cost
        if f_star is None:
            if problem.kind != ProblemKind.SLQR:
                raise ValueError('f_star is needed for output-feedback'
                                 ' problems')
            f_star = Evaluation(problem, care_oracle(problem, k0)).cost
        bundle = constants(problem, alpha1, f_star)
        assert bundle.kappa_cond is not None
        d = 1.0 / (2.0 * math.sqrt(bundle.kappa_cond))
        eta = 1.0 / bundle.L1
        step = restart_step_bound(bundle.L1, d, eta)
        return cls(T=step, d=d, eta=eta, alpha1=alpha1, **kwargs)


@dataclass
class SolverState:
    """Momentum state of one accelerated run."""
    k: Gain
    p: Matrix
    iter: int = 0
    restarts: int = 0
    f: float = math.inf
    gradient: Matrix = field(default_factory=lambda: np.zeros((0, 0)))


Monitor = Callable[[SolverState], None]


def _finite(*arrays: Matrix) -> bool:
    return all(bool(np.all(np.isfinite(a))) for a in arrays)


def gd_solve(
        problem: LqrProblem, k0: Gain, step: Optional[float] = None,
        grad_tol: float = 1e-6, max_iters: int = 10000) -> Trace:
    """Plain gradient descent K ← K - step·∇f(K).

    Args:
        problem: The problem.
        k0: A stabilizing initial gain.
        step: Step size, by default 1/L1(f(K0)).
        grad_tol: Stop when the gradient norm is at most this.
        max_iters: Maximum number of steps.

    Returns:
        The trace, with status Converged or MaxIters.

    Raises:
        NotStabilizing: If K0 is not stabilizing.
        StepRejected: If a step leaves the set of stabilizing gains.
    """
    k = problem.check_gain(k0)
    evaluation = Evaluation(problem, k)
    evaluation.require_stabilizing()
    if step is None:
        step = 1.0 / constants(problem, evaluation.cost).L1
        logger.info('Using certified step size {}'.format(step))

    trace = Trace('gd')
    trace.echo('step', step)
    trace.echo('grad_tol', grad_tol)
    trace.echo('max_iters', max_iters)

    solves = 0
    iteration = 0
    previous_f = math.inf
    while True:
        f = evaluation.cost
        g = evaluation.gradient
        solves += evaluation.lyap_solves
        grad_norm = float(np.linalg.norm(g))
        if f >= previous_f:
            logger.warning('Gradient descent failed to decrease at'
                           ' iteration {}'.format(iteration))
        trace.record(iteration, f, grad_norm, lyap_solves=solves)
        trace.oracle_calls += 1
        previous_f = f

        if grad_norm <= grad_tol:
            trace.status = Status.CONVERGED
            break
        if iteration >= max_iters:
            trace.status = Status.MAX_ITERS
            break

        k_next = as_gain(k - step * g)
        candidate = Evaluation(problem, k_next)
        if not candidate.stabilizing:
            trace.status = Status.LEFT_FEASIBLE_SET
            trace.gain = k
            raise StepRejected('Step {} leaves the set of stabilizing'
                               ' gains'.format(iteration + 1), trace)
        k, evaluation = k_next, candidate
        iteration += 1

    trace.gain = k
    logger.info('Gradient descent finished with status {} after {}'
                ' iterations, f = {}'.format(
                    trace.status.value, iteration, trace.last.f))
    return trace


def warm_start_gd(
        problem: LqrProblem, k0: Gain, iters: int,
        step: Optional[float] = None) -> Gain:
    """Runs a few gradient steps and returns the gain reached."""
    trace = gd_solve(problem, k0, step, grad_tol=0.0, max_iters=iters)
    assert trace.gain is not None
    return trace.gain


def accel_solve(
        problem: LqrProblem, k0: Gain, cfg: AccelConfig,
        p0: Optional[Matrix] = None,
        monitor: Optional[Monitor] = None) -> Trace:
    """Restarted heavy-ball descent.

    Each trace row is an accepted iterate; its ``iter`` counts all
    steps taken so far including discarded ones, and its ``restart``
    column the restarts since the previous row.

    Args:
        problem: The problem.
        k0: A stabilizing initial gain.
        cfg: Solver settings.
        p0: Initial momentum, zero by default.
        monitor: Called with the solver state after every accepted
                iterate.

    Returns:
        The trace, with status Converged or MaxIters.

    Raises:
        NotStabilizing: If K0 is not stabilizing.
        RestartBudgetExceeded: If more than cfg.max_restarts restarts
                are needed.
        NonFiniteValue: If the iteration blows up.
        LeftFeasibleSet: If an extrapolated gradient point is not
                stabilizing (only possible with beta != 0).
    """
    k = problem.check_gain(k0)
    evaluation = Evaluation(problem, k)
    evaluation.require_stabilizing()
    alpha1 = cfg.alpha1 if cfg.alpha1 is not None else evaluation.cost

    trace = Trace('accel')
    for name in ('T', 'd', 'beta', 'eta', 'max_restarts', 'max_iters',
                 'grad_tol'):
        trace.echo(name, getattr(cfg, name))
    trace.echo('alpha1', alpha1)
    trace.echo('alpha1_source', 'f(K0)' if cfg.alpha1 is None else 'config')
    if cfg.beta != 0.0:
        trace.warn('beta = {} is not 0, restarts do not guarantee'
                   ' sublevel confinement'.format(cfg.beta))

    p = np.zeros(k.shape) if p0 is None else np.array(p0, dtype=float)
    state = SolverState(k, p, f=evaluation.cost, gradient=evaluation.gradient)
    solves = evaluation.lyap_solves
    trace.record(0, state.f, float(np.linalg.norm(state.gradient)),
                 lyap_solves=solves)
    trace.oracle_calls += 1
    if monitor is not None:
        monitor(state)

    damping = 1.0 - 2.0 * cfg.d * cfg.T
    pending_restarts = 0
    while True:
        if np.linalg.norm(state.gradient) <= cfg.grad_tol:
            trace.status = Status.CONVERGED
            break
        if state.iter >= cfg.max_iters:
            trace.status = Status.MAX_ITERS
            break
        state.iter += 1

        look_gradient = state.gradient
        if cfg.beta != 0.0:
            look = Evaluation(problem, as_gain(state.k + cfg.beta * state.p))
            if not look.stabilizing:
                trace.status = Status.LEFT_FEASIBLE_SET
                trace.gain = state.k
                raise LeftFeasibleSet('Extrapolated point is not'
                                      ' stabilizing', look.k, trace)
            look_gradient = look.gradient
            solves += look.lyap_solves
            trace.oracle_calls += 1

        p_next = damping * state.p - cfg.T * look_gradient
        k_next = state.k + cfg.T * p_next
        if not _finite(p_next, k_next):
            trace.status = Status.FAILED
            trace.gain = state.k
            raise NonFiniteValue('Non-finite iterate at step {}'.format(
                state.iter), trace)

        candidate = Evaluation(problem, as_gain(k_next))
        f_next = candidate.cost if candidate.stabilizing else math.inf
        solves += candidate.lyap_solves
        trace.oracle_calls += 1
        if candidate.stabilizing and not math.isfinite(f_next):
            trace.status = Status.FAILED
            trace.gain = state.k
            raise NonFiniteValue('Non-finite cost at step {}'.format(
                state.iter), trace)

        if f_next > alpha1:
            state.restarts += 1
            pending_restarts += 1
            logger.debug('Restart {} at step {}, candidate cost {}'.format(
                state.restarts, state.iter, f_next))
            if state.restarts > cfg.max_restarts:
                trace.status = Status.RESTART_BUDGET_EXCEEDED
                trace.gain = state.k
                raise RestartBudgetExceeded(
                        'More than {} restarts needed'.format(
                            cfg.max_restarts), trace)
            state.p = -cfg.eta * state.gradient
            continue

        counted = candidate.lyap_solves
        state.k = candidate.k
        state.p = p_next
        state.f = f_next
        state.gradient = candidate.gradient
        solves += candidate.lyap_solves - counted
        trace.record(state.iter, state.f,
                     float(np.linalg.norm(state.gradient)),
                     restart=pending_restarts, lyap_solves=solves)
        pending_restarts = 0
        if monitor is not None:
            monitor(state)

    trace.gain = state.k
    logger.info('Accelerated solver finished with status {} after {} steps'
                ' and {} restarts, f = {}'.format(
                    trace.status.value, state.iter, state.restarts,
                    state.f))
    return trace
