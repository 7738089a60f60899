"""Objectives as first- and second-order oracles.

The output-feedback procedures work on any smooth function of a matrix
argument, given as a :class:`SmoothOracle`. This module makes oracles
for the LQR cost, for quadratics, and for the proximal and penalized
functions that the procedures build from other oracles.
"""
from collections import Counter
import logging
from typing import Callable, Optional

import numpy as np

from acclqr.exceptions import LeftFeasibleSet
from acclqr.linalg import as_generator, Matrix, Seed
from acclqr.lqr_core import default_fd_step, Evaluation
from acclqr.problem import as_gain, LqrProblem


logger = logging.getLogger(__name__)

ValueFunction = Callable[[Matrix], float]
GradientFunction = Callable[[Matrix], Matrix]
HvpFunction = Callable[[Matrix, Matrix], Matrix]
DomainFunction = Callable[[Matrix], bool]


class SmoothOracle:
    """A smooth objective with value, gradient and Hessian products.

    Every query first checks that the query point is in the domain of
    the objective, and raises LeftFeasibleSet if it is not. Queries are
    counted in ``calls``, by kind; oracles that solve Lyapunov
    equations also count those there, under ``lyap``.
    """
    def __init__(
            self, value: ValueFunction, gradient: GradientFunction,
            hvp: HvpFunction, domain_check: Optional[DomainFunction] = None,
            name: str = 'oracle') -> None:
        self._value = value
        self._gradient = gradient
        self._hvp = hvp
        self._domain_check = domain_check
        self.name = name
        self.calls = Counter()  # type: Counter[str]

    def in_domain(self, k: Matrix) -> bool:
        if self._domain_check is None:
            return True
        return bool(self._domain_check(k))

    def _guard(self, k: Matrix) -> None:
        if not self.in_domain(k):
            raise LeftFeasibleSet(
                    'Query point {} is outside the domain of {}'.format(
                        np.asarray(k).tolist(), self.name), gain=k)

    def value(self, k: Matrix) -> float:
        self._guard(k)
        self.calls['value'] += 1
        return float(self._value(k))

    def gradient(self, k: Matrix) -> Matrix:
        self._guard(k)
        self.calls['gradient'] += 1
        return np.asarray(self._gradient(k), dtype=float)

    def hvp(self, k: Matrix, e: Matrix) -> Matrix:
        self._guard(k)
        self.calls['hvp'] += 1
        return np.asarray(self._hvp(k, e), dtype=float)

    @property
    def total_calls(self) -> int:
        return (self.calls['value'] + self.calls['gradient']
                + self.calls['hvp'])


class _LqrCallbacks:
    """LQR callbacks sharing the evaluation at the latest query point."""
    def __init__(
            self, problem: LqrProblem, sublevel: Optional[float],
            fd_hvp: bool) -> None:
        self.problem = problem
        self.sublevel = sublevel
        self.fd_hvp = fd_hvp
        self.calls = Counter()  # type: Counter[str]
        self._key = None    # type: Optional[bytes]
        self._evaluation = None     # type: Optional[Evaluation]
        self._charged = 0

    def _charge(self, evaluation: Evaluation, charged: int) -> int:
        self.calls['lyap'] += evaluation.lyap_solves - charged
        return evaluation.lyap_solves

    def evaluation(self, k: Matrix) -> Evaluation:
        k = np.asarray(k, dtype=float)
        key = k.tobytes() + str(k.shape).encode()
        if key != self._key or self._evaluation is None:
            self._evaluation = Evaluation(self.problem, as_gain(k))
            self._key = key
            self._charged = 0
        return self._evaluation

    def _settle(self) -> None:
        if self._evaluation is not None:
            self._charged = self._charge(self._evaluation, self._charged)

    def in_domain(self, k: Matrix) -> bool:
        evaluation = self.evaluation(k)
        if not evaluation.stabilizing:
            return False
        if self.sublevel is None:
            return True
        result = evaluation.cost <= self.sublevel
        self._settle()
        return result

    def value(self, k: Matrix) -> float:
        result = self.evaluation(k).cost
        self._settle()
        return result

    def gradient(self, k: Matrix) -> Matrix:
        result = self.evaluation(k).gradient
        self._settle()
        return result

    def hvp(self, k: Matrix, e: Matrix) -> Matrix:
        evaluation = self.evaluation(k)
        if not self.fd_hvp:
            result = evaluation.hessian_form(e).hvp
            self._settle()
            return result
        base = evaluation.gradient
        self._settle()
        h = default_fd_step(evaluation.k)
        shifted = Evaluation(self.problem, as_gain(evaluation.k + h * e))
        result = (shifted.gradient - base) / h
        self._charge(shifted, 0)
        return result


def lqr_oracle(
        problem: LqrProblem, sublevel: Optional[float] = None,
        fd_hvp: bool = False) -> SmoothOracle:
    """Makes an oracle for the LQR cost.

    Args:
        problem: The problem.
        sublevel: If given, the domain is restricted to gains with cost
                at most this value.
        fd_hvp: Use finite differences of gradients for Hessian-vector
                products instead of the exact formula.
    """
    callbacks = _LqrCallbacks(problem, sublevel, fd_hvp)
    oracle = SmoothOracle(
            callbacks.value, callbacks.gradient, callbacks.hvp,
            callbacks.in_domain, 'LQR cost')
    callbacks.calls = oracle.calls
    return oracle


def quadratic_oracle(
        hessian: Matrix, center: Matrix,
        minimum: float = 0.0) -> SmoothOracle:
    """The quadratic ½ vec(K - c)ᵀ H vec(K - c) + minimum."""
    hessian = np.asarray(hessian, dtype=float)
    center = np.atleast_2d(np.asarray(center, dtype=float))
    if hessian.shape != (center.size, center.size):
        raise ValueError('Hessian has shape {}, expected {}'.format(
            hessian.shape, (center.size, center.size)))

    def value(k: Matrix) -> float:
        d = (k - center).ravel()
        return 0.5 * float(d @ hessian @ d) + minimum

    def gradient(k: Matrix) -> Matrix:
        return (hessian @ (k - center).ravel()).reshape(center.shape)

    def hvp(k: Matrix, e: Matrix) -> Matrix:
        return (hessian @ np.asarray(e).ravel()).reshape(center.shape)

    return SmoothOracle(value, gradient, hvp, name='quadratic')


def proximal_oracle(
        psi: SmoothOracle, center: Matrix, gamma: float) -> SmoothOracle:
    """The regularized function ψ(K) + γ‖K - c‖²."""
    center = np.array(center, dtype=float)

    def value(k: Matrix) -> float:
        return psi.value(k) + gamma * float(np.sum((k - center) ** 2))

    def gradient(k: Matrix) -> Matrix:
        return psi.gradient(k) + 2.0 * gamma * (k - center)

    def hvp(k: Matrix, e: Matrix) -> Matrix:
        return psi.hvp(k, e) + 2.0 * gamma * np.asarray(e, dtype=float)

    return SmoothOracle(
            value, gradient, hvp, psi.in_domain,
            'proximal {}'.format(psi.name))


def build_penalized(
        f: SmoothOracle, k_hat: Matrix, l1: float, l2: float,
        alpha: float) -> SmoothOracle:
    """Adds a penalty on moving away from K̂ by more than alpha / L2.

    The result is f(K) + L1·([‖K - K̂‖_F - alpha/L2]_+)². The penalty
    is convex and vanishes on the ball of radius alpha/L2 around K̂.

    Args:
        f: The objective.
        k_hat: Centre of the penalty.
        l1: Smoothness bound of f.
        l2: Hessian Lipschitz bound of f.
        alpha: Curvature threshold.
    """
    if not (l1 > 0.0 and l2 > 0.0 and alpha > 0.0):
        raise ValueError('L1, L2 and alpha must be positive')
    k_hat = np.array(k_hat, dtype=float)
    radius = alpha / l2

    def excess(d: Matrix) -> float:
        return max(float(np.linalg.norm(d)) - radius, 0.0)

    def value(k: Matrix) -> float:
        return f.value(k) + l1 * excess(k - k_hat) ** 2

    def gradient(k: Matrix) -> Matrix:
        d = k - k_hat
        over = excess(d)
        result = f.gradient(k)
        if over > 0.0:
            result = result + 2.0 * l1 * over * d / np.linalg.norm(d)
        return result

    def hvp(k: Matrix, e: Matrix) -> Matrix:
        d = k - k_hat
        e = np.asarray(e, dtype=float)
        result = f.hvp(k, e)
        norm_d = float(np.linalg.norm(d))
        if norm_d > radius:
            result = result + 2.0 * l1 * (
                    (1.0 - radius / norm_d) * e
                    + radius / norm_d ** 3 * float(np.sum(d * e)) * d)
        return result

    return SmoothOracle(
            value, gradient, hvp, f.in_domain, 'penalized {}'.format(f.name))


def gradient_check(
        oracle: SmoothOracle, k: Matrix, seed: Seed = 0,
        probes: int = 3) -> float:
    """Largest relative mismatch of gradient and finite differences.

    Compares ⟨∇φ(K), E⟩ with a central difference of φ along random unit
    directions E.
    """
    rng = as_generator(seed)
    k = np.asarray(k, dtype=float)
    g = oracle.gradient(k)
    h = float(np.finfo(float).eps) ** (1.0 / 3.0) * (
            1.0 + float(np.linalg.norm(k)))
    worst = 0.0
    for _ in range(probes):
        e = rng.standard_normal(k.shape)
        e /= np.linalg.norm(e)
        fd = (oracle.value(k + h * e) - oracle.value(k - h * e)) / (2.0 * h)
        exact = float(np.sum(g * e))
        worst = max(worst, abs(fd - exact) / max(
            1.0, abs(exact), float(np.linalg.norm(g))))
    return worst

