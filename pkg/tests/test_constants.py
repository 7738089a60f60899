import math

import numpy as np
import pytest

from acclqr.constants import constants
from acclqr.exceptions import InvalidAlpha, ZeroInput
from acclqr.linalg import dense_sym_eig
from acclqr.lqr_core import (
        assemble_dense_hessian, care_oracle, cost, gradient)
from acclqr.problem import as_gain, LqrProblem

from .conftest import random_stabilizing_gain, raises


def test_scalar_constants(scalar_problem: LqrProblem) -> None:
    bundle = constants(scalar_problem, 1.0)
    assert bundle.zeta == pytest.approx(2.0)
    assert bundle.kappa1 == pytest.approx(6.0)
    assert bundle.kappa2 == pytest.approx(6.0)
    assert bundle.kappa3 == pytest.approx(26.0)
    assert bundle.kappa4 == pytest.approx(26.0)
    assert bundle.L2 == pytest.approx(156.0)
    assert bundle.xi == pytest.approx(1.0 + math.sqrt(2.0))
    assert bundle.L1 == pytest.approx(4.0 + 2.0 * math.sqrt(2.0))
    assert bundle.mu is None
    assert bundle.kappa_cond is None

    with_mu = constants(scalar_problem, 1.0, f_star=1.0)
    assert with_mu.mu == pytest.approx(0.125)
    assert with_mu.kappa_cond == pytest.approx(with_mu.L1 / 0.125)
    assert with_mu.f_star == 1.0


def test_monotone_in_alpha(medium4: LqrProblem) -> None:
    for alpha in (0.5, 3.0, 40.0):
        small = constants(medium4, alpha)
        large = constants(medium4, 2.0 * alpha)
        assert large.L1 > small.L1
        assert large.L2 > small.L2
        assert large.xi > small.xi
        assert all(value > 0.0 for value in small.as_dict().values()
                   if value is not None)


def test_as_dict(chain3: LqrProblem) -> None:
    bundle = constants(chain3, 20.0, 9.0)
    values = bundle.as_dict()
    assert values['L1'] == bundle.L1
    assert values['alpha'] == 20.0
    assert set(values) >= {'xi', 'zeta', 'kappa1', 'L2', 'mu', 'kappa_cond'}


def test_errors(scalar_problem: LqrProblem) -> None:
    with raises(InvalidAlpha):
        constants(scalar_problem, 0.0)
    with raises(InvalidAlpha):
        constants(scalar_problem, -1.0)
    with raises(ValueError):
        constants(scalar_problem, 1.0, f_star=0.0)

    one = [[1.0]]
    no_input = LqrProblem([[-1.0]], [[0.0]], one, one, one, one)
    with raises(ZeroInput):
        constants(no_input, 1.0)


def test_smoothness_certificate(scalar_problem: LqrProblem) -> None:
    # on S_α with α = 1.25, k ranges over [0.5, 2] and f''(k) = 1/k³
    bundle = constants(scalar_problem, 1.25)
    for k in np.linspace(0.5, 2.0, 16):
        assert 1.0 / k ** 3 <= bundle.L1


def test_smoothness_certificate_random(medium4: LqrProblem) -> None:
    for seed in range(5):
        k = random_stabilizing_gain(medium4, seed)
        bundle = constants(medium4, cost(medium4, k))
        values, _ = dense_sym_eig(assemble_dense_hessian(medium4, k))
        assert np.max(np.abs(values)) <= bundle.L1


def test_pl_certificate(medium4: LqrProblem, chain3: LqrProblem) -> None:
    for problem, k0 in [
            (medium4, random_stabilizing_gain(medium4, 0)),
            (chain3, as_gain([[5.0, 100.0, 15.0]]))]:
        f_star = cost(problem, care_oracle(problem, k0))
        for seed in range(5):
            rng = np.random.default_rng(seed)
            k = as_gain(k0 * (1.0 + 0.1 * rng.standard_normal(k0.shape)))
            f = cost(problem, k)
            bundle = constants(problem, f, f_star)
            assert bundle.mu is not None
            g = gradient(problem, k)
            assert 0.5 * float(np.sum(g * g)) >= bundle.mu * (f - f_star)


def test_hessian_lipschitz_certificate() -> None:
    # A - BK is Hurwitz for k₁ > -2, k₂ > -3, so the box below is a
    # convex set of stabilizing gains and segments stay inside it
    problem = LqrProblem(
            [[0.0, 1.0], [-2.0, -3.0]], [[0.0], [1.0]], np.eye(2),
            np.eye(2), [[1.0]], np.eye(2))
    rng = np.random.default_rng(5)
    for _ in range(200):
        k1 = as_gain(rng.uniform(-1.0, 3.0, (1, 2)))
        k2 = as_gain(rng.uniform(-1.0, 3.0, (1, 2)))
        alpha = 1.01 * max(cost(problem, as_gain(k1 + t * (k2 - k1)))
                           for t in np.linspace(0.0, 1.0, 9))
        l2 = constants(problem, alpha).L2
        change = (assemble_dense_hessian(problem, k2)
                  - assemble_dense_hessian(problem, k1))
        assert np.linalg.norm(change, 2) <= l2 * np.linalg.norm(k2 - k1)
