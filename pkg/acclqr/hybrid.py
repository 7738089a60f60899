"""Continuous-time simulation of the restarted heavy-ball flow.

The state is z = (K, p) with p = K̇. It flows along

    K̇ = p
    ṗ = -2dp - ∇f(K + βp)

and jumps to (K, -η∇f(K)) whenever the cost has reached the threshold
while still not decreasing. The flow is integrated with the classical
fourth-order Runge-Kutta scheme; jumps are detected after each step.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np

from acclqr.exceptions import (
        JumpBudgetExceeded, LeftFeasibleSet, NonFiniteValue)
from acclqr.linalg import Matrix
from acclqr.lqr_core import care_oracle, Evaluation
from acclqr.problem import as_gain, Gain, LqrProblem, ProblemKind
from acclqr.slqr_solver import AccelConfig
from acclqr.trace import HYBRID_COLUMNS, Status, Trace


logger = logging.getLogger(__name__)


class _Flow:
    """Right-hand side of the flow, counting the work it does."""
    def __init__(self, problem: LqrProblem, cfg: AccelConfig,
                 trace: Trace) -> None:
        self.problem = problem
        self.cfg = cfg
        self.trace = trace
        self.lyap_solves = 0

    def gradient_at(self, k: Matrix) -> Matrix:
        evaluation = Evaluation(self.problem, as_gain(k))
        if not evaluation.stabilizing:
            self.trace.status = Status.LEFT_FEASIBLE_SET
            raise LeftFeasibleSet(
                    'Integration stage at {} is not stabilizing'.format(
                        evaluation.k.tolist()), evaluation.k, self.trace)
        result = evaluation.gradient
        self.lyap_solves += evaluation.lyap_solves
        self.trace.oracle_calls += 1
        return result

    def __call__(self, k: Matrix, p: Matrix) -> Tuple[Matrix, Matrix]:
        g = self.gradient_at(k + self.cfg.beta * p)
        return p, -2.0 * self.cfg.d * p - g


def simulate_hybrid_flow(
        problem: LqrProblem, k0: Gain, p0: Optional[Matrix],
        cfg: AccelConfig, horizon: float, dt: float,
        f_star: Optional[float] = None) -> Trace:
    """Integrates the hybrid heavy-ball system over a time horizon.

    One row is recorded per integration step, plus one for the initial
    state. Besides the standard columns, rows carry the time ``t``, the
    energy ½‖p‖² + f(K) - f*, and ``dfdt``, the rate ⟨∇f(K), p⟩ of the
    cost. The ``restart`` column is 1 on rows where a jump occurred, and
    ``dfdt`` is then taken after the jump.

    Args:
        problem: The problem.
        k0: A stabilizing initial gain.
        p0: Initial velocity, zero if None.
        cfg: Flow parameters d, beta and eta, the jump threshold
                alpha1 (f(K0) if None), the jump budget max_restarts and
                the step size T, which bounds dt.
        horizon: Length of the simulated time interval.
        dt: Integration step, at most min(1e-3, T/10).
        f_star: Energy offset. By default the optimal cost for
                state-feedback problems and 0 otherwise.

    Returns:
        The trace, with status Converged if the gradient norm is at most
        cfg.grad_tol at the end of the horizon, MaxIters otherwise.

    Raises:
        NotStabilizing: If K0 is not stabilizing.
        LeftFeasibleSet: If an integration stage is not stabilizing.
        JumpBudgetExceeded: If more than cfg.max_restarts jumps occur.
        NonFiniteValue: If the state blows up.
    """
    if not 0.0 < dt <= min(1e-3, cfg.T / 10.0):
        raise ValueError('Integration step must be in (0, {}], got {}'.format(
            min(1e-3, cfg.T / 10.0), dt))
    if not horizon > 0.0:
        raise ValueError('Horizon must be positive, got {}'.format(horizon))

    k = problem.check_gain(k0)
    evaluation = Evaluation(problem, k)
    evaluation.require_stabilizing()
    threshold = cfg.alpha1 if cfg.alpha1 is not None else evaluation.cost
    if f_star is None:
        if problem.kind == ProblemKind.SLQR:
            f_star = Evaluation(problem, care_oracle(problem, k)).cost
        else:
            f_star = 0.0

    trace = Trace('hybrid', HYBRID_COLUMNS)
    for name in ('d', 'beta', 'eta', 'max_restarts'):
        trace.echo(name, getattr(cfg, name))
    trace.echo('threshold', threshold)
    trace.echo('f_star', f_star)
    trace.echo('horizon', horizon)
    trace.echo('dt', dt)
    if cfg.beta != 0.0:
        trace.warn('beta = {} is not 0, jumps do not guarantee sublevel'
                   ' confinement'.format(cfg.beta))

    flow = _Flow(problem, cfg, trace)
    q = np.array(k, dtype=float)
    p = np.zeros(k.shape) if p0 is None else np.array(p0, dtype=float)
    if p.shape != k.shape:
        raise ValueError('Initial velocity has shape {}, expected {}'.format(
            p.shape, k.shape))

    f = evaluation.cost
    g = evaluation.gradient
    solves = evaluation.lyap_solves
    trace.oracle_calls += 1
    trace.record(0, f, float(np.linalg.norm(g)), lyap_solves=solves,
                 t=0.0, energy=_energy(p, f, f_star),
                 dfdt=float(np.sum(g * p)))

    steps = int(math.ceil(horizon / dt - 1e-9))
    jumps = 0
    t = 0.0
    for step in range(1, steps + 1):
        h = min(dt, horizon - t)
        q, p = _rk4_step(flow, q, p, h)
        t = step * dt if step < steps else horizon
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            trace.status = Status.FAILED
            raise NonFiniteValue('Non-finite state at t = {}'.format(t),
                                 trace)

        evaluation = Evaluation(problem, as_gain(q))
        if not evaluation.stabilizing:
            trace.status = Status.LEFT_FEASIBLE_SET
            raise LeftFeasibleSet('State at t = {} is not stabilizing'.format(
                t), evaluation.k, trace)
        f = evaluation.cost
        g = evaluation.gradient
        trace.oracle_calls += 1
        dfdt = float(np.sum(g * p))

        jumped = 0
        if f >= threshold and dfdt >= 0.0:
            jumps += 1
            jumped = 1
            logger.debug('Jump {} at t = {}, f = {}'.format(jumps, t, f))
            if jumps > cfg.max_restarts:
                trace.status = Status.RESTART_BUDGET_EXCEEDED
                trace.gain = evaluation.k
                raise JumpBudgetExceeded('More than {} jumps needed'.format(
                    cfg.max_restarts), trace)
            p = -cfg.eta * g
            dfdt = float(np.sum(g * p))

        solves += evaluation.lyap_solves + flow.lyap_solves
        flow.lyap_solves = 0
        trace.record(step, f, float(np.linalg.norm(g)), restart=jumped,
                     lyap_solves=solves, t=t, energy=_energy(p, f, f_star),
                     dfdt=dfdt)

    trace.gain = as_gain(q)
    if trace.last.grad_norm <= cfg.grad_tol:
        trace.status = Status.CONVERGED
    else:
        trace.status = Status.MAX_ITERS
    logger.info('Hybrid flow simulated up to t = {} with {} jumps, f = {}'
                .format(t, jumps, f))
    return trace


def _energy(p: Matrix, f: float, f_star: float) -> float:
    return 0.5 * float(np.sum(p * p)) + f - f_star


def _rk4_step(
        flow: _Flow, q: Matrix, p: Matrix, h: float
        ) -> Tuple[Matrix, Matrix]:
    dq1, dp1 = flow(q, p)
    dq2, dp2 = flow(q + 0.5 * h * dq1, p + 0.5 * h * dp1)
    dq3, dp3 = flow(q + 0.5 * h * dq2, p + 0.5 * h * dp2)
    dq4, dp4 = flow(q + h * dq3, p + h * dp3)
    q_next = q + h / 6.0 * (dq1 + 2.0 * dq2 + 2.0 * dq3 + dq4)
    p_next = p + h / 6.0 * (dp1 + 2.0 * dp2 + 2.0 * dp3 + dp4)
    return q_next, p_next
