import math

import numpy as np
import pytest
import scipy.integrate
import scipy.linalg
from hypothesis import given, settings, strategies as st

from acclqr.constants import constants
from acclqr.exceptions import NotStabilizing
from acclqr.generators import gen_random_medium
from acclqr.linalg import dense_sym_eig, is_hurwitz
from acclqr.lqr_core import (
        assemble_dense_hessian, care_oracle, closed_loop, coercivity_bounds,
        cost, Evaluation, fd_gradient, gradient, hessian_form,
        hessian_operator, hessian_quadratic_form, hvp_exact, hvp_fd,
        is_stabilizing)
from acclqr.problem import as_gain, LqrProblem

from .conftest import random_direction, random_stabilizing_gain, raises


def test_scalar_problem(scalar_problem: LqrProblem) -> None:
    k = as_gain([[2.0]])
    assert cost(scalar_problem, k) == pytest.approx(1.25, rel=1e-12)
    assert gradient(scalar_problem, k)[0, 0] == pytest.approx(
            0.375, rel=1e-12)
    assert hvp_exact(scalar_problem, k, np.ones((1, 1)))[0, 0] == (
            pytest.approx(0.125, rel=1e-10))


@settings(deadline=None, max_examples=50)
@given(st.floats(min_value=0.05, max_value=20.0))
def test_scalar_closed_form(k: float) -> None:
    one = [[1.0]]
    problem = LqrProblem([[0.0]], one, one, one, one, one)
    gain = as_gain([[k]])
    assert cost(problem, gain) == pytest.approx(
            (1.0 + k * k) / (2.0 * k), rel=1e-9)
    assert gradient(problem, gain)[0, 0] == pytest.approx(
            (k * k - 1.0) / (2.0 * k * k), rel=1e-9, abs=1e-12)
    assert hessian_quadratic_form(problem, gain, np.ones((1, 1))) == (
            pytest.approx(1.0 / k ** 3, rel=1e-8))


def test_not_stabilizing(scalar_problem: LqrProblem) -> None:
    k = as_gain([[-1.0]])
    assert not is_stabilizing(scalar_problem, k)
    with raises(NotStabilizing):
        cost(scalar_problem, k)
    with raises(NotStabilizing):
        gradient(scalar_problem, k)
    with raises(NotStabilizing):
        hessian_operator(scalar_problem, k)


def test_closed_loop(chain3: LqrProblem) -> None:
    k = as_gain([[5.0, 100.0, 15.0]])
    a_k = closed_loop(chain3, k)
    assert np.array_equal(a_k[2], [-5.0, -100.0, -15.0])
    assert is_stabilizing(chain3, k)
    assert not is_stabilizing(chain3, chain3.zero_gain())


def test_evaluation_caches_solves(medium4: LqrProblem) -> None:
    evaluation = Evaluation(medium4, random_stabilizing_gain(medium4, 1))
    evaluation.cost
    evaluation.cost
    assert evaluation.lyap_solves == 1
    evaluation.gradient
    evaluation.gradient
    assert evaluation.lyap_solves == 2
    evaluation.hessian_form(np.ones((2, 4)))
    assert evaluation.lyap_solves == 4


def test_cost_quadrature() -> None:
    problem = LqrProblem(
            [[0.0, 1.0], [-2.0, -3.0]], [[0.0], [1.0]], np.eye(2),
            np.eye(2), [[1.0]], np.eye(2))
    k = as_gain([[1.0, 1.0]])
    a_k = closed_loop(problem, k)
    weight = problem.Q + k.T @ problem.R @ k

    def integrand(t: float) -> float:
        flow = scipy.linalg.expm(a_k * t)
        return float(np.trace(weight @ flow @ problem.Sigma @ flow.T))

    reference, _ = scipy.integrate.quad_vec(
            integrand, 0.0, 60.0, epsabs=1e-12, epsrel=1e-10)
    assert cost(problem, k) == pytest.approx(float(reference), rel=1e-6)


def test_gradient_finite_differences(medium4: LqrProblem) -> None:
    for seed in range(20):
        k = random_stabilizing_gain(medium4, seed)
        exact = gradient(medium4, k)
        approx = fd_gradient(medium4, k)
        assert np.allclose(exact, approx, rtol=1e-5, atol=1e-6)


def test_output_feedback_gradient(olqr_chain3: LqrProblem) -> None:
    for k_value in (-0.5, 0.0, 0.3, 2.0):
        k = as_gain([[k_value]])
        exact = gradient(olqr_chain3, k)
        assert np.allclose(exact, fd_gradient(olqr_chain3, k),
                           rtol=1e-5, atol=1e-6)


def test_hessian_quadratic_form(medium4: LqrProblem) -> None:
    h = 1e-4
    for seed in range(5):
        k = random_stabilizing_gain(medium4, seed)
        e = random_direction(k.shape, seed + 100)
        value = hessian_quadratic_form(medium4, k, e)
        second_diff = (cost(medium4, as_gain(k + h * e))
                       - 2.0 * cost(medium4, k)
                       + cost(medium4, as_gain(k - h * e))) / h ** 2
        assert value == pytest.approx(second_diff, rel=1e-4, abs=1e-6)


def test_hessian_form_parts(medium4: LqrProblem) -> None:
    k = random_stabilizing_gain(medium4, 3)
    e = random_direction(k.shape, 4)
    form = hessian_form(medium4, k, e)
    assert np.allclose(form.X_prime, form.X_prime.T)
    assert np.allclose(form.Y_prime, form.Y_prime.T)
    assert form.value == pytest.approx(float(np.sum(form.hvp * e)))

    with raises(ValueError):
        hessian_form(medium4, k, np.ones((3, 3)))


def test_hvp_symmetric(medium4: LqrProblem) -> None:
    k = random_stabilizing_gain(medium4, 5)
    e1 = random_direction(k.shape, 6)
    e2 = random_direction(k.shape, 7)
    left = float(np.sum(e1 * hvp_exact(medium4, k, e2)))
    right = float(np.sum(e2 * hvp_exact(medium4, k, e1)))
    assert left == pytest.approx(right, rel=1e-8, abs=1e-10)


def test_hvp_fd(medium4: LqrProblem) -> None:
    for seed in range(5):
        k = random_stabilizing_gain(medium4, seed)
        e = random_direction(k.shape, seed + 10)
        exact = hvp_exact(medium4, k, e)
        approx = hvp_fd(medium4, k, e)
        assert np.linalg.norm(approx - exact) <= 1e-5 * (
                1.0 + np.linalg.norm(exact))


def test_dense_hessian(medium4: LqrProblem) -> None:
    k = random_stabilizing_gain(medium4, 8)
    dense = assemble_dense_hessian(medium4, k)
    assert dense.shape == (8, 8)
    assert np.array_equal(dense, dense.T)

    operator = hessian_operator(medium4, k)
    assert operator.symmetry_defect() <= 1e-8 * (1.0 + np.linalg.norm(dense))

    rng = np.random.default_rng(0)
    for _ in range(3):
        v = rng.standard_normal(8)
        e = v.reshape(k.shape)
        assert float(v @ dense @ v) == pytest.approx(
                hessian_quadratic_form(medium4, k, e), rel=1e-8, abs=1e-10)


def test_care_oracle_scalar(scalar_problem: LqrProblem) -> None:
    k_star = care_oracle(scalar_problem, as_gain([[2.0]]))
    assert k_star[0, 0] == pytest.approx(1.0, abs=1e-8)
    assert cost(scalar_problem, k_star) == pytest.approx(1.0, abs=1e-8)


def test_care_oracle_chain(chain3: LqrProblem) -> None:
    k_star = care_oracle(chain3, as_gain([[5.0, 100.0, 15.0]]))
    p = scipy.linalg.solve_continuous_are(
            chain3.A, chain3.B, chain3.Q, chain3.R)
    reference = np.linalg.solve(chain3.R, chain3.B.T @ p)
    assert np.allclose(k_star, reference, rtol=1e-8, atol=1e-10)
    assert np.linalg.norm(gradient(chain3, k_star)) <= 1e-9
    assert cost(chain3, k_star) == pytest.approx(
            4.0 + 4.0 * math.sqrt(2.0), rel=1e-10)

    # the optimum is a minimum
    values, _ = dense_sym_eig(assemble_dense_hessian(chain3, k_star))
    assert values[0] > 0.0


def test_care_oracle_chain10() -> None:
    from acclqr.generators import gen_integrator_chain, initial_gain
    problem = gen_integrator_chain(10)
    k_star = care_oracle(problem, initial_gain('example3', 10))
    assert np.linalg.norm(gradient(problem, k_star)) <= 1e-9


def test_care_oracle_from_optimum(
        scalar_problem: LqrProblem, chain3: LqrProblem) -> None:
    for problem, k0 in [
            (scalar_problem, as_gain([[2.0]])),
            (chain3, as_gain([[5.0, 100.0, 15.0]]))]:
        k_star = care_oracle(problem, k0)
        again = care_oracle(problem, k_star, max_iters=2)
        assert np.allclose(again, k_star, rtol=1e-9, atol=1e-12)


def test_care_oracle_errors(
        scalar_problem: LqrProblem, olqr_chain3: LqrProblem) -> None:
    with raises(NotStabilizing):
        care_oracle(scalar_problem, as_gain([[-1.0]]))
    with raises(ValueError):
        care_oracle(olqr_chain3, as_gain([[0.0]]))


def test_coercivity_bounds(medium4: LqrProblem) -> None:
    other = gen_random_medium(3, 1, 7).problem
    for problem in (medium4, other):
        for seed in range(100):
            k = random_stabilizing_gain(problem, seed, scale=2.0)
            near_instability, large_gain = coercivity_bounds(problem, k)
            f = cost(problem, k)
            assert near_instability <= f * (1.0 + 1e-10)
            assert large_gain <= f * (1.0 + 1e-10)
            assert np.linalg.norm(k) <= constants(problem, f).zeta


def test_gradient_scales_with_sigma(
        medium4: LqrProblem, olqr_chain3: LqrProblem) -> None:
    for problem in (medium4, olqr_chain3):
        p = problem
        for seed in range(5):
            k = random_stabilizing_gain(p, seed)
            base = gradient(p, k)
            for c in (0.1, 3.0, 250.0):
                scaled = LqrProblem(p.A, p.B, p.C, p.Q, p.R, c * p.Sigma)
                g = gradient(scaled, k)
                assert np.linalg.norm(g - c * base) <= (
                        1e-10 * c * np.linalg.norm(base))
                assert cost(scaled, k) == pytest.approx(
                        c * cost(p, k), rel=1e-10)


def test_coercivity_grows_near_boundary(scalar_problem: LqrProblem) -> None:
    near, _ = coercivity_bounds(scalar_problem, as_gain([[1e-3]]))
    far, _ = coercivity_bounds(scalar_problem, as_gain([[1.0]]))
    assert near > 100.0 * far
    assert is_hurwitz(closed_loop(scalar_problem, as_gain([[1e-3]])))
