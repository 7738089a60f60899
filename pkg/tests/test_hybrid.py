import numpy as np
import pytest

from acclqr.exceptions import JumpBudgetExceeded, NotStabilizing
from acclqr.hybrid import simulate_hybrid_flow
from acclqr.problem import as_gain, LqrProblem
from acclqr.slqr_solver import AccelConfig
from acclqr.trace import Status

from .conftest import raises


def test_energy_decreases(scalar_problem: LqrProblem) -> None:
    cfg = AccelConfig(T=0.1, d=0.5, alpha1=10.0)
    trace = simulate_hybrid_flow(
            scalar_problem, as_gain([[2.0]]), None, cfg, 0.1, 1e-3)

    assert len(trace.rows) == 101
    assert trace.restarts == 0
    assert trace.status == Status.MAX_ITERS
    assert trace.column('t')[-1] == 0.1
    # f* = 1 for the scalar problem, and p starts at rest
    assert trace.rows[0].extra['energy'] == pytest.approx(0.25)

    energy = trace.column('energy')
    for before, after in zip(energy, energy[1:]):
        assert after <= before + 1e-12
    assert trace.last.f < 1.25


def test_jump(scalar_problem: LqrProblem) -> None:
    # moving away from the optimum at the threshold f(K0) = 1.25
    cfg = AccelConfig(T=0.1, d=0.0, eta=0.5)
    trace = simulate_hybrid_flow(
            scalar_problem, as_gain([[2.0]]), np.array([[5.0]]), cfg,
            1e-3, 1e-3)

    assert len(trace.rows) == 2
    row = trace.rows[1]
    assert row.restart == 1
    assert row.f > 1.25
    assert row.extra['dfdt'] == pytest.approx(-0.5 * row.grad_norm ** 2)
    assert row.extra['energy'] == pytest.approx(
            0.5 * (0.5 * row.grad_norm) ** 2 + row.f - 1.0)


def test_jump_budget(scalar_problem: LqrProblem) -> None:
    cfg = AccelConfig(T=0.1, d=0.0, eta=0.5, max_restarts=0)
    try:
        simulate_hybrid_flow(
                scalar_problem, as_gain([[2.0]]), np.array([[5.0]]), cfg,
                0.01, 1e-3)
    except JumpBudgetExceeded as e:
        assert e.trace is not None
        assert e.trace.status == Status.RESTART_BUDGET_EXCEEDED
        assert len(e.trace.rows) == 1
    else:
        pytest.fail('Expected JumpBudgetExceeded')


def test_output_feedback_offset(olqr_chain3: LqrProblem) -> None:
    cfg = AccelConfig(T=0.1, d=0.5, beta=0.01, alpha1=1e6)
    trace = simulate_hybrid_flow(
            olqr_chain3, as_gain([[0.3]]), None, cfg, 0.005, 1e-3)
    assert trace.rows[0].extra['energy'] == trace.rows[0].f
    assert len(trace.rows) == 6
    assert len(trace.warnings) == 1


def test_arguments(scalar_problem: LqrProblem) -> None:
    cfg = AccelConfig(T=0.1, d=0.5)
    k0 = as_gain([[2.0]])
    with raises(ValueError):
        simulate_hybrid_flow(scalar_problem, k0, None, cfg, 0.1, 2e-3)
    with raises(ValueError):
        simulate_hybrid_flow(
                scalar_problem, k0, None, AccelConfig(T=0.005, d=0.5),
                0.1, 1e-3)
    with raises(ValueError):
        simulate_hybrid_flow(scalar_problem, k0, None, cfg, 0.0, 1e-3)
    with raises(ValueError):
        simulate_hybrid_flow(
                scalar_problem, k0, np.zeros((1, 2)), cfg, 0.1, 1e-3)
    with raises(NotStabilizing):
        simulate_hybrid_flow(
                scalar_problem, as_gain([[-1.0]]), None, cfg, 0.1, 1e-3)
