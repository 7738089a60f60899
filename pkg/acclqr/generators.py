"""Benchmark problems and their standard initial gains."""
from dataclasses import dataclass
import logging
from math import comb
from typing import List

import numpy as np

from acclqr.exceptions import GenerationFailed
from acclqr.linalg import as_generator, is_hurwitz, Matrix
from acclqr.problem import as_gain, Gain, LqrProblem


logger = logging.getLogger(__name__)

JITTER = 1e-9
"""Added to the diagonal of random weights to make them definite."""

MAX_ATTEMPTS = 100


@dataclass
class GeneratedProblem:
    """A randomly generated problem.

    Attributes:
        problem: The problem.
        attempts: Number of draws needed to get a Hurwitz A.
        seed: The seed of the draw that was used.
    """
    problem: LqrProblem
    attempts: int
    seed: int


def _unit(n: int, i: int) -> Matrix:
    e = np.zeros((n, 1))
    e[i, 0] = 1.0
    return e


def gen_integrator_chain(n: int) -> LqrProblem:
    """A chain of n integrators driven at its end, with full state feedback.

    A has ones on the superdiagonal, B is the last unit vector, and
    Q = Σ = I, R = 1.
    """
    if n < 1:
        raise ValueError('Chain length must be at least 1, got {}'.format(n))
    return LqrProblem(
            np.eye(n, k=1), _unit(n, n - 1), np.eye(n), np.eye(n),
            np.eye(1), np.eye(n))


def gen_olqr_chain(n: int) -> LqrProblem:
    """An output-feedback version of the integrator chain.

    The chain is made stable by a unit shift, A = N - I, and only the
    first state is measured, C = e₁ᵀ. The zero gain is stabilizing.
    """
    if n < 1:
        raise ValueError('Chain length must be at least 1, got {}'.format(n))
    return LqrProblem(
            np.eye(n, k=1) - np.eye(n), _unit(n, n - 1), _unit(n, 0).T,
            np.eye(n), np.eye(1), np.eye(n))


def gen_random_medium(n: int, m: int, seed: int) -> GeneratedProblem:
    """A random state-feedback problem with a stable open loop.

    With U, U', Q₁ and R₁ uniform on [0, 1], this makes A = U/n - I,
    B = 1 + U'/2, Q = Q₁Q₁ᵀ + 1e-9·I, R = R₁R₁ᵀ + 1e-9·I and Σ = I. If A
    is not Hurwitz, it is drawn again with the next seed.

    Random numbers come from numpy's PCG64 generator, so the result is
    the same on every platform.

    Raises:
        GenerationFailed: If no Hurwitz A is found in 100 attempts.
    """
    if n < 1 or m < 1:
        raise ValueError('Need n, m >= 1, got n={}, m={}'.format(n, m))
    for attempt in range(MAX_ATTEMPTS):
        rng = as_generator(seed + attempt)
        a = rng.random((n, n)) / n - np.eye(n)
        b = np.ones((n, m)) + 0.5 * rng.random((n, m))
        q1 = rng.random((n, n))
        r1 = rng.random((m, m))
        if not is_hurwitz(a):
            logger.debug('Draw {} gave an unstable A, retrying'.format(
                seed + attempt))
            continue
        q = q1 @ q1.T
        r = r1 @ r1.T
        q = 0.5 * (q + q.T) + JITTER * np.eye(n)
        r = 0.5 * (r + r.T) + JITTER * np.eye(m)
        problem = LqrProblem(a, b, np.eye(n), q, r, np.eye(n))
        return GeneratedProblem(problem, attempt + 1, seed + attempt)
    raise GenerationFailed('No stable A found in {} attempts from seed'
                           ' {}'.format(MAX_ATTEMPTS, seed))


def chain_hurwitz_minors(k: Gain) -> List[float]:
    """Leading principal minors of the Hurwitz matrix of a chain gain.

    With K = [k₁, ..., kₙ] on the integrator chain, the closed loop has
    characteristic polynomial sⁿ + kₙsⁿ⁻¹ + ... + k₂s + k₁, and K is
    stabilizing exactly when all these minors are positive.
    """
    gains = np.asarray(k, dtype=float).ravel()
    n = gains.size
    # coefficients a_0 = 1, a_i = k_{n+1-i}
    coeffs = np.concatenate([[1.0], gains[::-1]])
    hurwitz = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            idx = 2 * (j + 1) - (i + 1)
            if 0 <= idx <= n:
                hurwitz[i, j] = coeffs[idx]
    return [float(np.linalg.det(hurwitz[:i, :i])) for i in range(1, n + 1)]


_FIXED_GAINS = {
        'example1': [5.0, 100.0, 15.0],
        'example2': [1.0, 2.0, 2.0]}


def initial_gain(name: str, n: int, m: int = 1) -> Gain:
    """The initial gain of a named scenario.

    example1 and example2 are the chain gains [5, 100, 15] and [1, 2, 2]
    for n = 3. example3 has the binomial coefficients C(n, i) for
    i = 0, ..., n-1, which puts all closed-loop poles of the chain at -1.
    example4 is the zero gain of shape m×n.

    Raises:
        ValueError: If the name is unknown or does not fit n.
    """
    if name in _FIXED_GAINS:
        if n != 3:
            raise ValueError('{} is defined for n = 3 only'.format(name))
        return as_gain([_FIXED_GAINS[name]])
    if name == 'example3':
        return as_gain([[float(comb(n, i)) for i in range(n)]])
    if name == 'example4':
        return as_gain(np.zeros((m, n)))
    raise ValueError('Unknown initial gain {}'.format(name))
