"""The :mod:`acclqr` module is the main API of acclqr.

It contains the LQR oracles, the solvers and the experiment harness.
Everything you need is importable from here; the submodules are
documented below for developers.
"""

__version__ = '0.1.0.dev0'

__author__ = 'The acclqr developers'
__email__ = ''

from acclqr.constants import constants, ConstantsBundle
from acclqr.exceptions import (
        AcclqrError, BudgetExceeded, ConfigError, EigenFailure,
        GenerationFailed, InvalidAlpha, InvalidDamping,
        IterationBudgetExceeded, JumpBudgetExceeded, LeftFeasibleSet,
        NoConvergence, NonConvexDetected, NonFiniteValue, NotHurwitz,
        NotStabilizing, RestartBudgetExceeded, SingularSystem, SolverError,
        StepRejected, ZeroInput)
from acclqr.experiment import (
        ExperimentConfig, load_experiment, ProblemSource, Report,
        run_experiment, scenario, SCENARIOS, SolverSpec)
from acclqr.generators import (
        chain_hurwitz_minors, gen_integrator_chain, gen_olqr_chain,
        gen_random_medium, GeneratedProblem, initial_gain)
from acclqr.hybrid import simulate_hybrid_flow
from acclqr.linalg import (
        dense_sym_eig, is_hurwitz, LinearOperator, lyapunov_residual,
        min_eig_estimate, solve_lyapunov, solve_lyapunov_dual,
        spectral_abscissa)
from acclqr.lqr_core import (
        assemble_dense_hessian, care_oracle, closed_loop, coercivity_bounds,
        cost, gradient, hessian_form, hessian_operator,
        hessian_quadratic_form, hvp_exact, hvp_fd, is_stabilizing)
from acclqr.olqr_solver import (
        a_olqr, AOlqrConfig, nag_restart, ncd, semiconvex_nag)
from acclqr.problem import (
        as_gain, dump_problem, Gain, load_problem, LqrProblem, ProblemKind)
from acclqr.slqr_solver import (
        AccelConfig, accel_solve, gd_solve, restart_step_bound,
        warm_start_gd)
from acclqr.smooth_oracle import (
        build_penalized, lqr_oracle, quadratic_oracle, SmoothOracle)
from acclqr.trace import read_trace_csv, Status, Trace, write_trace_csv

import logging

logger = logging.getLogger('acclqr')
"""The acclqr root logger. Use this to set acclqr's log level.

The solvers log a summary of every run at INFO level, and every restart,
jump and curvature step at DEBUG level. To see them, use::

    import logging

    logging.basicConfig()
    acclqr.logger.setLevel(logging.INFO)

or for even more::

    acclqr.logger.setLevel(logging.DEBUG)
"""

__all__ = [
    'logger', 'constants', 'ConstantsBundle', 'AcclqrError',
    'BudgetExceeded', 'ConfigError', 'EigenFailure', 'GenerationFailed',
    'InvalidAlpha', 'InvalidDamping', 'IterationBudgetExceeded',
    'JumpBudgetExceeded', 'LeftFeasibleSet', 'NoConvergence',
    'NonConvexDetected', 'NonFiniteValue', 'NotHurwitz', 'NotStabilizing',
    'RestartBudgetExceeded', 'SingularSystem', 'SolverError',
    'StepRejected', 'ZeroInput', 'ExperimentConfig', 'load_experiment',
    'ProblemSource', 'Report', 'run_experiment', 'scenario', 'SCENARIOS',
    'SolverSpec', 'chain_hurwitz_minors', 'gen_integrator_chain',
    'gen_olqr_chain', 'gen_random_medium', 'GeneratedProblem',
    'initial_gain', 'simulate_hybrid_flow', 'dense_sym_eig', 'is_hurwitz',
    'LinearOperator', 'lyapunov_residual', 'min_eig_estimate',
    'solve_lyapunov', 'solve_lyapunov_dual', 'spectral_abscissa',
    'assemble_dense_hessian', 'care_oracle', 'closed_loop',
    'coercivity_bounds', 'cost', 'gradient', 'hessian_form',
    'hessian_operator', 'hessian_quadratic_form', 'hvp_exact', 'hvp_fd',
    'is_stabilizing', 'a_olqr', 'AOlqrConfig', 'nag_restart', 'ncd',
    'semiconvex_nag', 'as_gain', 'dump_problem', 'Gain', 'load_problem',
    'LqrProblem', 'ProblemKind', 'AccelConfig', 'accel_solve', 'gd_solve',
    'restart_step_bound', 'warm_start_gd', 'build_penalized', 'lqr_oracle',
    'quadratic_oracle', 'SmoothOracle', 'read_trace_csv', 'Status',
    'Trace', 'write_trace_csv']
