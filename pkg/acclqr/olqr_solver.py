"""Hessian-free search for second-order stationary output-feedback gains.

The outer loop alternates two procedures. Negative curvature descent
steps along approximate smallest Hessian eigenvectors until the
curvature is at least -alpha. Then the cost plus a convex penalty on
leaving a small ball around that point is minimized with Semiconvex-NAG,
a sequence of restarted Nesterov solves of proximal subproblems. The
procedures work on :class:`SmoothOracle` objectives, so that they can be
run on test functions as well as on the LQR cost.
"""
from dataclasses import dataclass
import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np

from acclqr.constants import constants
from acclqr.exceptions import (
        ConfigError, IterationBudgetExceeded, LeftFeasibleSet,
        NonConvexDetected, RestartBudgetExceeded)
from acclqr.linalg import (
        as_generator, LinearOperator, Matrix, min_eig_estimate, Seed)
from acclqr.lqr_core import Evaluation
from acclqr.problem import as_gain, Gain, LqrProblem
from acclqr.smooth_oracle import (
        build_penalized, lqr_oracle, proximal_oracle, SmoothOracle)
from acclqr.trace import OLQR_COLUMNS, Status, Trace


logger = logging.getLogger(__name__)

NagMonitor = Callable[[int, Matrix, Matrix], None]
"""Called as monitor(j, K_j, y_j) for every accepted NAG iterate.

j counts from 1 within the current restart, so j == 1 marks the start
of a run of the unrestarted method.
"""


@dataclass
class AOlqrConfig:
    """Settings of :func:`a_olqr`.

    Attributes:
        eps: Target gradient norm.
        L1: Smoothness bound on the working sublevel set.
        L2: Lipschitz bound of the Hessian there.
        alpha: Curvature threshold, √(L2·eps) if None.
        delta_f: Bound on the optimality gap, f(K1) if None.
        delta: Allowed failure probability of the eigenvalue probes.
        max_nag_restarts: Restarts allowed per NAG call.
        seed: Seed of the eigenvalue probes.
        fd_hvp: Use finite-difference Hessian-vector products.
        allow_uncertified: Only warn if L1, L2 or eps do not meet the
                hypotheses of the convergence guarantee.
    """
    eps: float
    L1: float
    L2: float
    alpha: Optional[float] = None
    delta_f: Optional[float] = None
    delta: float = 0.05
    max_nag_restarts: int = 20
    seed: int = 0
    fd_hvp: bool = False
    allow_uncertified: bool = False

    def __post_init__(self) -> None:
        if not (self.eps > 0.0 and self.L1 > 0.0 and self.L2 > 0.0):
            raise ValueError('eps, L1 and L2 must be positive')
        if not 0.0 < self.delta < 1.0:
            raise ValueError('delta must be in (0, 1), got {}'.format(
                self.delta))
        if self.alpha is not None and not 0.0 < self.alpha <= self.L1:
            raise ValueError('alpha must be in (0, L1], got {}'.format(
                self.alpha))
        if self.delta_f is not None and not self.delta_f > 0.0:
            raise ValueError('delta_f must be positive')
        if self.max_nag_restarts < 0:
            raise ValueError('max_nag_restarts must not be negative')

    @property
    def curvature(self) -> float:
        """The curvature threshold alpha in effect."""
        if self.alpha is not None:
            return self.alpha
        return math.sqrt(self.L2 * self.eps)


class OlqrProgress:
    """Records the iterates of the procedures in a trace.

    Rows show ``objective`` at the recorded point, which is evaluated
    separately from the work of the run. The oracle doing that work is
    ``work``; its Lyapunov solves and total calls are copied into the
    trace.
    """
    def __init__(
            self, trace: Trace, objective: SmoothOracle,
            work: Optional[SmoothOracle] = None) -> None:
        self.trace = trace
        self.objective = objective
        self.work = work
        self.iteration = 0
        self.ncd_steps = 0
        self.nag_restarts = 0

    def record(self, phase: str, k: Matrix,
               min_eig_est: Optional[float] = None) -> None:
        lyap_solves = 0
        if self.work is not None:
            lyap_solves = self.work.calls['lyap']
            self.trace.oracle_calls = self.work.total_calls
        self.trace.record(
                self.iteration, self.objective.value(k),
                float(np.linalg.norm(self.objective.gradient(k))),
                lyap_solves=lyap_solves, phase=phase,
                min_eig_est=min_eig_est, ncd_steps=self.ncd_steps,
                nag_restarts=self.nag_restarts)
        self.iteration += 1


def nag_iteration_bound(
        l1: float, sigma1: float, eps: float, gap: float,
        max_restarts: int) -> float:
    """Iterations after which restarted NAG must have converged.

    This is S + 1 + √κ·ln(2^(S+2)·κ^(S+1)·L1·Δ/eps²), with the logarithm
    clipped at zero.
    """
    kappa = l1 / sigma1
    log_term = ((max_restarts + 2) * math.log(2.0)
                + (max_restarts + 1) * math.log(kappa))
    if gap > 0.0:
        log_term += math.log(l1 * gap / eps ** 2)
    return max_restarts + 1 + math.sqrt(kappa) * max(log_term, 0.0)


def nag_restart(
        phi: SmoothOracle, y1: Matrix, eps: float, L1: float,
        sigma1: float, S: int, progress: Optional[OlqrProgress] = None,
        monitor: Optional[NagMonitor] = None,
        max_iters: Optional[int] = None) -> Gain:
    """Nesterov's method for strongly convex functions, with restarts.

    The iteration is

        y_{j+1} = K_j - ∇φ(K_j) / L1
        K_{j+1} = (1 + q) y_{j+1} - q y_j,   q = (√κ - 1) / (√κ + 1).

    A candidate K_{j+1} with φ(K_{j+1}) ≥ φ(y1), or outside the domain
    of φ, is discarded and the method is restarted from K_j with zero
    momentum.

    Args:
        phi: A sigma1-strongly convex, L1-smooth objective.
        y1: Starting point, in the domain of phi.
        eps: Target gradient norm.
        L1: Smoothness constant.
        sigma1: Strong convexity constant.
        S: Number of restarts allowed.
        progress: Receives the number of restarts, if given.
        monitor: Called for every accepted iterate.
        max_iters: Iteration limit. By default twice the iteration
                bound of the method, and exceeding it means that phi is
                not strongly convex with the given constants.

    Returns:
        A point where the gradient norm is at most eps.

    Raises:
        LeftFeasibleSet: If y1 is outside the domain of phi.
        RestartBudgetExceeded: If more than S restarts are needed.
        NonConvexDetected: If the default iteration limit is exceeded.
        IterationBudgetExceeded: If max_iters is exceeded.
    """
    if not (L1 > 0.0 and sigma1 > 0.0 and eps > 0.0):
        raise ValueError('L1, sigma1 and eps must be positive')
    if sigma1 > L1:
        raise ValueError('sigma1 {} exceeds L1 {}'.format(sigma1, L1))
    kappa = L1 / sigma1
    q = (math.sqrt(kappa) - 1.0) / (math.sqrt(kappa) + 1.0)

    k = np.array(y1, dtype=float)
    y = k
    threshold = phi.value(k)
    g = phi.gradient(k)
    if max_iters is None:
        gap = float(np.sum(g * g)) / (2.0 * sigma1)
        limit = 2.0 * nag_iteration_bound(L1, sigma1, eps, gap, S)
    else:
        limit = float(max_iters)

    iters = 0
    restarts = 0
    j = 1
    while True:
        if monitor is not None:
            monitor(j, k, y)
        if np.linalg.norm(g) <= eps:
            break
        if iters >= limit:
            if max_iters is None:
                raise NonConvexDetected(
                        'NAG did not converge within {} iterations, the'
                        ' objective is not {}-strongly convex and'
                        ' {}-smooth'.format(int(limit), sigma1, L1))
            raise IterationBudgetExceeded('NAG did not converge within {}'
                                          ' iterations'.format(max_iters))
        y_next = k - g / L1
        k_next = (1.0 + q) * y_next - q * y
        iters += 1

        if not phi.in_domain(k_next) or phi.value(k_next) >= threshold:
            restarts += 1
            if progress is not None:
                progress.nag_restarts += 1
            logger.debug('NAG restart {} after {} iterations'.format(
                restarts, iters))
            if restarts > S:
                raise RestartBudgetExceeded(
                        'NAG needed more than {} restarts'.format(S))
            y = k
            j = 1
            continue

        y, k = y_next, k_next
        g = phi.gradient(k)
        j += 1

    logger.debug('NAG converged after {} iterations and {} restarts'.format(
        iters, restarts))
    return as_gain(k)


def semiconvex_decrease_holds(
        psi_start: float, psi_end: float, k1: Matrix, k: Matrix,
        gamma: float, eps: float, slack: float = 1e-12) -> bool:
    """Whether ψ(K1) - ψ(K) ≥ min(γ‖K - K1‖², eps/√10·‖K - K1‖)."""
    dist = float(np.linalg.norm(np.asarray(k) - np.asarray(k1)))
    required = min(gamma * dist ** 2, eps / math.sqrt(10.0) * dist)
    return psi_start - psi_end >= required - slack * (1.0 + abs(psi_start))


def semiconvex_nag(
        psi: SmoothOracle, K1: Matrix, eps: float, L1: float,
        gamma: float, S: int, delta_psi: Optional[float] = None,
        progress: Optional[OlqrProgress] = None) -> Gain:
    """Finds an eps-stationary point of a gamma-semiconvex function.

    Each step minimizes g_j(K) = ψ(K) + γ‖K - K_j‖² with
    :func:`nag_restart`, to accuracy eps·√(γ / (50(L1 + 2γ))), starting
    from the current point K_j.

    Args:
        psi: A gamma-semiconvex, L1-smooth objective.
        K1: Starting point.
        eps: Target gradient norm.
        L1: Smoothness constant.
        gamma: Semiconvexity constant, in (0, L1].
        S: Restarts allowed per NAG call.
        delta_psi: Bound on the optimality gap at K1, ψ(K1) by default.
        progress: Receives a row for every proximal centre.

    Returns:
        A point K with ‖∇ψ(K)‖ ≤ eps.

    Raises:
        IterationBudgetExceeded: If more than 2(1 + 5γΔ/eps²) steps are
                needed.
    """
    if not 0.0 < gamma <= L1:
        raise ValueError('gamma must be in (0, L1], got {}'.format(gamma))
    k1 = as_gain(K1)
    psi_start = psi.value(k1)
    if delta_psi is None:
        delta_psi = psi_start
    cap = 2.0 * (1.0 + 5.0 * gamma * max(delta_psi, 0.0) / eps ** 2)
    inner_eps = eps * math.sqrt(gamma / (50.0 * (L1 + 2.0 * gamma)))

    k = k1
    step = 1
    while True:
        if progress is not None:
            progress.record('snag', k)
        if np.linalg.norm(psi.gradient(k)) <= eps:
            break
        if step > cap:
            raise IterationBudgetExceeded(
                    'Semiconvex-NAG did not converge within {} steps'.format(
                        int(cap)))
        g_j = proximal_oracle(psi, k, gamma)
        k = nag_restart(g_j, k, inner_eps, L1 + 2.0 * gamma, gamma, S,
                        progress)
        step += 1

    psi_end = psi.value(k)
    if not semiconvex_decrease_holds(psi_start, psi_end, k1, k, gamma, eps):
        logger.warning('Semiconvex-NAG decrease from {} to {} is less than'
                       ' guaranteed, the objective may not be {}-semiconvex'
                       .format(psi_start, psi_end, gamma))
    logger.debug('Semiconvex-NAG converged after {} steps'.format(step - 1))
    return k


def _sign(x: float) -> float:
    return -1.0 if x < 0.0 else 1.0


def ncd(
        psi: SmoothOracle, K1: Matrix, delta: float, L2: float,
        alpha: float, delta_f: float, L1: float, seed: Seed,
        progress: Optional[OlqrProgress] = None) -> Gain:
    """Negative curvature descent.

    While the eigenvalue probe finds a unit direction v with
    ∇²ψ(K)[v, v] ≤ -alpha/2, steps K ← K - (2|∇²ψ(K)[v, v]|/L2)·s·v,
    with s the sign of ⟨v, ∇ψ(K)⟩ and sign(0) = +1.

    Args:
        psi: An L1-smooth objective with L2-Lipschitz Hessian.
        K1: Starting point.
        delta: Allowed failure probability of the whole procedure.
        L2: Hessian Lipschitz constant.
        alpha: Curvature threshold, in (0, L1].
        delta_f: Bound on the optimality gap at K1.
        L1: Smoothness constant, the eigenvalue probe's upper bound.
        seed: Seed or generator of the eigenvalue probes.
        progress: Receives a row for every iterate.

    Returns:
        A point where, with probability at least 1 - delta, the smallest
        Hessian eigenvalue is at least -alpha.

    Raises:
        BudgetExceeded: If an eigenvalue probe fails to converge.
        IterationBudgetExceeded: If more than 1 + 12L2²Δ/α³ iterations
                would be needed.
    """
    if not 0.0 < alpha <= L1:
        raise ValueError('alpha must be in (0, L1], got {}'.format(alpha))
    if not (L2 > 0.0 and delta_f > 0.0 and 0.0 < delta < 1.0):
        raise ValueError('Need L2 > 0, delta_f > 0 and 0 < delta < 1')
    rng = as_generator(seed)
    ratio = L2 ** 2 * delta_f / alpha ** 3
    probe_delta = delta / (1.0 + ratio)
    cap = 1.0 + 12.0 * ratio
    guaranteed = alpha ** 3 / (12.0 * L2 ** 2)

    k = as_gain(K1)
    shape = k.shape
    j = 1
    while True:
        at = k

        def apply(v: Matrix) -> Matrix:
            return psi.hvp(at, v.reshape(shape)).ravel()

        operator = LinearOperator(k.size, apply)
        curvature, v = min_eig_estimate(operator, L1, alpha, probe_delta, rng)
        if progress is not None:
            progress.record('ncd', k, curvature)
        if curvature > -0.5 * alpha:
            break

        if j + 1 > cap:
            raise IterationBudgetExceeded(
                    'NCD needs more than {} iterations'.format(int(cap)))
        direction = v.reshape(shape)
        s = _sign(float(np.sum(direction * psi.gradient(k))))
        k_next = as_gain(k - 2.0 * abs(curvature) / L2 * s * direction)
        decrease = psi.value(k) - psi.value(k_next)
        if decrease < guaranteed - 1e-12:
            logger.warning('NCD step decreased the objective by {}, less'
                           ' than the guaranteed {}'.format(
                               decrease, guaranteed))
        logger.debug('NCD step {} with curvature {}'.format(j, curvature))
        k = k_next
        j += 1
        if progress is not None:
            progress.ncd_steps += 1

    return k


def _check_certificate(
        problem: LqrProblem, f1: float, cfg: AOlqrConfig, delta_f: float,
        trace: Trace) -> None:
    bundle = constants(problem, f1)
    problems = []
    if cfg.L1 < bundle.L1:
        problems.append('L1 = {} is below the certified {}'.format(
            cfg.L1, bundle.L1))
    if cfg.L2 < bundle.L2:
        problems.append('L2 = {} is below the certified {}'.format(
            cfg.L2, bundle.L2))
    eps_max = min(delta_f ** (2.0 / 3.0) * cfg.L2 ** (1.0 / 3.0),
                  cfg.L1 ** 2 / cfg.L2)
    if cfg.eps > eps_max:
        problems.append('eps = {} exceeds {}'.format(cfg.eps, eps_max))
    if cfg.curvature > cfg.L1:
        problems.append('alpha = {} exceeds L1'.format(cfg.curvature))
    for message in problems:
        if not cfg.allow_uncertified:
            raise ConfigError('Settings are not certified: {}'.format(
                message))
        trace.warn('uncertified setting, {}'.format(message))


def a_olqr(
        problem: LqrProblem, K1: Gain,
        cfg: AOlqrConfig) -> Tuple[Gain, Trace]:
    """Accelerated search for a second-order stationary gain.

    Every oracle query is restricted to stabilizing gains with cost at
    most f(K1).

    Args:
        problem: The problem, usually an output-feedback one.
        K1: A stabilizing initial gain.
        cfg: Settings.

    Returns:
        The gain found and the trace of the run. With probability at
        least 1 - cfg.delta, the gain has ‖∇f‖ ≤ eps and smallest
        Hessian eigenvalue at least -2·alpha.

    Raises:
        NotStabilizing: If K1 is not stabilizing.
        ConfigError: If the settings are not certified and
                cfg.allow_uncertified is not set.
        LeftFeasibleSet: If a query point leaves the sublevel set.
        IterationBudgetExceeded: If the outer loop needs more than
                18·Δf·√L2·eps^(-3/2) iterations.
    """
    k1 = problem.check_gain(K1)
    start = Evaluation(problem, k1)
    start.require_stabilizing()
    f1 = start.cost
    delta_f = cfg.delta_f if cfg.delta_f is not None else f1
    alpha = cfg.curvature
    eps = cfg.eps

    trace = Trace('a-olqr', OLQR_COLUMNS)
    for name in ('eps', 'L1', 'L2', 'delta', 'max_nag_restarts', 'seed',
                 'fd_hvp'):
        trace.echo(name, getattr(cfg, name))
    trace.echo('alpha', alpha)
    trace.echo('delta_f', delta_f)
    trace.echo('sublevel', f1)
    _check_certificate(problem, f1, cfg, delta_f, trace)

    f = lqr_oracle(problem, sublevel=f1, fd_hvp=cfg.fd_hvp)
    progress = OlqrProgress(trace, lqr_oracle(problem), f)
    rng = as_generator(cfg.seed)
    xi = math.ceil(1.0 + delta_f * (12.0 * cfg.L2 ** 2 / alpha ** 3
                                    + math.sqrt(10.0) * cfg.L2
                                    / (alpha * eps)))
    probe_delta = cfg.delta / xi
    cap = 18.0 * delta_f * math.sqrt(cfg.L2) * eps ** -1.5
    trace.echo('outer_cap', cap)

    k = k1
    outer = 1
    try:
        while True:
            k_hat = ncd(f, k, probe_delta, cfg.L2, alpha, delta_f, cfg.L1,
                        rng, progress)
            if np.linalg.norm(f.gradient(k_hat)) <= eps:
                k = k_hat
                break
            if outer >= cap:
                raise IterationBudgetExceeded(
                        'A-OLQR needs more than {} outer iterations'.format(
                            int(cap)))
            f_k = build_penalized(f, k_hat, cfg.L1, cfg.L2, alpha)
            k = semiconvex_nag(
                    f_k, k_hat, 0.5 * eps, 3.0 * cfg.L1, 3.0 * alpha,
                    cfg.max_nag_restarts, delta_f, progress)
            outer += 1
    except LeftFeasibleSet as e:
        trace.status = Status.LEFT_FEASIBLE_SET
        trace.gain = k
        e.trace = trace
        raise
    except (IterationBudgetExceeded, RestartBudgetExceeded,
            NonConvexDetected) as e:
        trace.status = (Status.RESTART_BUDGET_EXCEEDED
                        if isinstance(e, RestartBudgetExceeded)
                        else Status.FAILED)
        trace.gain = k
        e.trace = trace
        raise

    trace.gain = k
    trace.oracle_calls = f.total_calls
    trace.status = Status.CONVERGED
    logger.info('A-OLQR converged after {} outer iterations and {} oracle'
                ' calls, f = {}'.format(outer, f.total_calls,
                                        f.value(k)))
    return k, trace
