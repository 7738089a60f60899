import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from acclqr.exceptions import BudgetExceeded, NotHurwitz
from acclqr.linalg import (
        as_generator, dense_sym_eig, is_hurwitz, lanczos_cap,
        LinearOperator, lyapunov_residual, min_eig_estimate,
        solve_lyapunov, solve_lyapunov_dual, spectral_abscissa)

from .conftest import raises


def test_solve_lyapunov() -> None:
    a = np.array([[0.0, 1.0], [-2.0, -3.0]])
    w = np.eye(2)
    x = solve_lyapunov(a, w)
    assert lyapunov_residual(a, x, w) <= 1e-10
    assert np.array_equal(x, x.T)

    reference = scipy.linalg.solve_continuous_lyapunov(a.T, -w)
    assert np.allclose(x, reference, rtol=1e-10, atol=1e-12)


def test_solve_lyapunov_dual() -> None:
    a = np.array([[-1.0, 2.0, 0.0], [0.0, -2.0, 1.0], [0.5, 0.0, -3.0]])
    w = np.diag([1.0, 2.0, 3.0])
    y = solve_lyapunov_dual(a, w)
    assert lyapunov_residual(a, y, w, dual=True) <= 1e-10
    assert lyapunov_residual(a, y, w) > 1e-3


@settings(deadline=None, max_examples=30)
@given(st.integers(min_value=1, max_value=5),
       st.integers(min_value=0, max_value=2**32 - 1))
def test_solve_lyapunov_random(n: int, seed: int) -> None:
    rng = as_generator(seed)
    m = rng.standard_normal((n, n))
    a = m - (spectral_abscissa(m) + 0.5) * np.eye(n)
    q = rng.standard_normal((n, n))
    w = q @ q.T + np.eye(n)
    x = solve_lyapunov(a, w)
    assert lyapunov_residual(a, x, w) <= 1e-8 * (1.0 + np.linalg.norm(w))
    # X is positive definite for Hurwitz A and positive definite W
    assert np.linalg.eigvalsh(x)[0] > 0.0


def test_solve_lyapunov_errors() -> None:
    with raises(NotHurwitz):
        solve_lyapunov(np.array([[0.0, 1.0], [0.0, 0.0]]), np.eye(2))

    with raises(NotHurwitz):
        solve_lyapunov(np.array([[1.0, 0.0], [0.0, -1.0]]), np.eye(2))

    with raises(ValueError):
        solve_lyapunov(-np.eye(2), np.eye(3))

    with raises(ValueError):
        solve_lyapunov(np.ones((2, 3)), np.eye(2))


def test_spectral_abscissa() -> None:
    # closed loop of the integrator chain with K = [5, 100, 15]
    a_k = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-5.0, -100.0, -15.0]])
    expected = np.max(np.roots([1.0, 15.0, 100.0, 5.0]).real)
    assert spectral_abscissa(a_k) == pytest.approx(expected, rel=1e-9)
    assert spectral_abscissa(a_k) < 0.0
    assert is_hurwitz(a_k)


def test_is_hurwitz() -> None:
    assert is_hurwitz(-np.eye(3))
    assert not is_hurwitz(np.zeros((2, 2)))
    assert not is_hurwitz(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    assert not is_hurwitz(-1e-10 * np.eye(2))
    assert is_hurwitz(-1e-10 * np.eye(2), margin=0.0)


def test_linear_operator() -> None:
    mat = np.array([[2.0, 1.0], [1.0, 3.0]])
    op = LinearOperator(2, lambda v: mat @ v)
    assert np.allclose(op(np.array([1.0, 0.0])), [2.0, 1.0])
    assert np.array_equal(op.to_dense(), mat)
    assert op.symmetry_defect(seed=1) <= 1e-14

    skew = LinearOperator(2, lambda v: np.array([-v[1], v[0]]))
    assert skew.symmetry_defect(seed=1) > 1e-3

    with raises(ValueError):
        op.matvec(np.ones(3))

    with raises(ValueError):
        LinearOperator(0, lambda v: v)


def test_min_eig_estimate_random() -> None:
    rng = as_generator(1234)
    dim, l1, alpha = 10, 1.0, 0.05
    hits = 0
    for seed in range(100):
        m = rng.standard_normal((dim, dim))
        h = 0.5 * (m + m.T)
        h *= 0.99 * l1 / np.linalg.norm(h, 2)
        op = LinearOperator(dim, lambda v, h=h: h @ v)
        estimate, v = min_eig_estimate(op, l1, alpha, 0.05, seed)
        assert np.linalg.norm(v) == pytest.approx(1.0)
        smallest = dense_sym_eig(h)[0][0]
        if abs(estimate - smallest) <= 0.5 * alpha:
            hits += 1
    assert hits >= 95


def test_min_eig_estimate_invariant_subspace() -> None:
    # H has three distinct eigenvalues, so the Krylov subspace is
    # invariant after three steps
    h = np.diag([-0.5, 0.2, 0.2, 0.2])
    h[1:, 1:] = 0.2
    op = LinearOperator(4, lambda v: h @ v)
    estimate, v = min_eig_estimate(op, 1.0, 0.1, 0.1, 3)
    assert estimate == pytest.approx(-0.5, abs=1e-10)
    assert abs(v[0]) == pytest.approx(1.0, abs=1e-8)


def test_min_eig_estimate_reproducible() -> None:
    h = np.diag(np.linspace(-1.0, 1.0, 20))
    op = LinearOperator(20, lambda v: h @ v)
    first = min_eig_estimate(op, 1.0, 0.1, 0.1, 7)
    second = min_eig_estimate(op, 1.0, 0.1, 0.1, 7)
    assert first[0] == second[0]
    assert np.array_equal(first[1], second[1])


def test_min_eig_estimate_budget() -> None:
    # A skew operator has no eigenvectors to certify: vᵀHv = 0 but
    # ‖Hv‖ is at least the smallest rotation speed, 0.6.
    speeds = np.linspace(0.6, 1.0, 50)

    def apply(v: np.ndarray) -> np.ndarray:
        pairs = v.reshape(50, 2)
        return np.stack(
                [-speeds * pairs[:, 1], speeds * pairs[:, 0]],
                axis=1).ravel()

    op = LinearOperator(100, apply)
    assert lanczos_cap(100, 1.0, 1.0, 0.5) < 100
    with raises(BudgetExceeded):
        min_eig_estimate(op, 1.0, 1.0, 0.5, 0)


def test_min_eig_estimate_arguments() -> None:
    op = LinearOperator(2, lambda v: v)
    with raises(ValueError):
        min_eig_estimate(op, 1.0, 2.0, 0.1, 0)
    with raises(ValueError):
        min_eig_estimate(op, 1.0, 0.0, 0.1, 0)
    with raises(ValueError):
        min_eig_estimate(op, 1.0, 0.5, 1.0, 0)


def test_dense_sym_eig() -> None:
    h = np.array([[2.0, 1.0], [1.0, 2.0]])
    values, vectors = dense_sym_eig(h)
    assert np.allclose(values, [1.0, 3.0])
    assert np.allclose(h @ vectors, vectors * values)

    with raises(ValueError):
        dense_sym_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_as_generator() -> None:
    a = as_generator(5).random(3)
    b = as_generator(5).random(3)
    assert np.array_equal(a, b)
    rng = as_generator(5)
    assert as_generator(rng) is rng
