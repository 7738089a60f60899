"""The ``acclqr`` command line program.

Exit status is 0 on success, 1 if a run failed or did not converge, and
2 if the command line or a configuration file is invalid.
"""
import argparse
import logging
from pathlib import Path
import sys
from typing import List, Optional, Tuple

import numpy as np
import yatiml

from acclqr.constants import constants, ConstantsBundle
from acclqr.exceptions import AcclqrError, ConfigError, InvalidAlpha
from acclqr.experiment import (
        ExperimentConfig, GENERATOR_NAMES, load_experiment, ProblemSource,
        Report, run_experiment, scenario, SCENARIOS, SOLVER_NAMES,
        SolverSpec, dumps_report)
from acclqr.generators import initial_gain
from acclqr.lqr_core import care_oracle, Evaluation
from acclqr.problem import dump_problem, Gain, load_problem, LqrProblem


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUN_FAILED = 1
EXIT_CONFIG_ERROR = 2

_dumps_json = yatiml.dumps_json_function(ConstantsBundle)

_VERBOSITY = [logging.WARNING, logging.INFO, logging.DEBUG]


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
            prog='acclqr',
            description='Accelerated policy optimization for continuous-time'
                        ' LQR')
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='log more, repeat for debug output')
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True

    gen = commands.add_parser('gen', help='write a generated problem')
    gen.add_argument('generator', choices=GENERATOR_NAMES)
    gen.add_argument('-n', type=int, required=True, help='state dimension')
    gen.add_argument('-m', type=int, default=1, help='input dimension')
    gen.add_argument('--seed', type=int, default=0)
    gen.add_argument('--k0', metavar='NAME',
                     help='store the initial gain of this scenario')
    gen.add_argument('--out', type=Path, required=True,
                     help='problem JSON file to write')

    certify = commands.add_parser(
            'certify', help='print the constants of a sublevel set')
    certify.add_argument('--problem', type=Path, required=True)
    certify.add_argument('--alpha', type=float,
                         help='sublevel value, f(K0) by default')
    certify.add_argument('--f-star', type=float,
                         help='optimal cost, for the PL constant')

    solve = commands.add_parser('solve', help='run one solver on a problem')
    solve.add_argument('--problem', type=Path, required=True)
    solve.add_argument('--solver', choices=SOLVER_NAMES, required=True)
    solve.add_argument('--out', type=Path,
                       help='directory for the trace and report')
    solve.add_argument('--seed', type=int, default=0)
    solve.add_argument('--tol', type=float, default=1e-6,
                       help='gradient norm to stop at')
    solve.add_argument('--max-iters', type=int, default=10000)
    solve.add_argument('--fd-hvp', action='store_true',
                       help='use finite-difference Hessian-vector products')
    solve.add_argument('--warm-start-gd', type=int, metavar='N',
                       help='run N gradient steps before the solver')

    bench = commands.add_parser('bench', help='run an experiment')
    source = bench.add_mutually_exclusive_group(required=True)
    source.add_argument('--config', type=Path,
                        help='experiment YAML file')
    source.add_argument('--scenario', choices=sorted(SCENARIOS))
    bench.add_argument('--out', type=Path,
                       help='directory for traces and the report')
    bench.add_argument('--seed', type=int, action='append',
                       help='seed to run with, may be repeated')
    bench.add_argument('--tol', type=float)
    bench.add_argument('--max-iters', type=int)

    oracle = commands.add_parser(
            'oracle', help='print the optimal gain of a problem')
    oracle.add_argument('--problem', type=Path, required=True)
    return parser


def _problem_and_gain(path: Path) -> Tuple[LqrProblem, Gain]:
    problem, k0 = load_problem(path)
    if k0 is None:
        k0 = problem.zero_gain()
    return problem, k0


def _stabilizing_evaluation(problem: LqrProblem, k0: Gain) -> Evaluation:
    evaluation = Evaluation(problem, k0)
    if not evaluation.stabilizing:
        raise ConfigError('The initial gain {} is not stabilizing, store a'
                          ' stabilizing K0 in the problem file'.format(
                              k0.tolist()))
    return evaluation


def _gen(args: argparse.Namespace) -> int:
    source = ProblemSource(generator=args.generator, n=args.n, m=args.m,
                           seed=args.seed)
    problem, _ = source.build()
    k0 = None   # type: Optional[Gain]
    if args.k0 is not None:
        try:
            k0 = initial_gain(args.k0, problem.n, problem.m)
        except ValueError as e:
            raise ConfigError(str(e))
    dump_problem(problem, args.out, k0)
    logger.info('Wrote {} to {}'.format(problem, args.out))
    return EXIT_OK


def _certify(args: argparse.Namespace) -> int:
    problem, k0 = _problem_and_gain(args.problem)
    alpha = args.alpha
    if alpha is None:
        alpha = _stabilizing_evaluation(problem, k0).cost
    bundle = constants(problem, alpha, args.f_star)
    print(_dumps_json(bundle, indent=2))
    return EXIT_OK


def _print_report(report: Report) -> int:
    print(dumps_report(report, indent=2))
    for run in report.runs:
        if run.error is not None:
            logger.error('{} seed {}: {}'.format(
                run.solver, run.seed, run.error))
    return EXIT_OK if report.success else EXIT_RUN_FAILED


def _solve(args: argparse.Namespace) -> int:
    spec = SolverSpec(args.solver, fd_hvp=args.fd_hvp,
                      warm_start_gd=args.warm_start_gd)
    cfg = ExperimentConfig(
            ProblemSource(file=str(args.problem)), solvers=[spec],
            grad_tol=args.tol, max_iters=args.max_iters, seeds=[args.seed],
            out=None if args.out is None else str(args.out))
    return _print_report(run_experiment(cfg))


def _bench(args: argparse.Namespace) -> int:
    if args.config is not None:
        cfg = load_experiment(args.config)
    else:
        cfg = scenario(args.scenario)
    if args.out is not None:
        cfg.out = str(args.out)
    if args.seed:
        cfg.seeds = args.seed
    if args.tol is not None:
        cfg.grad_tol = args.tol
    if args.max_iters is not None:
        cfg.max_iters = args.max_iters
    return _print_report(run_experiment(cfg))


def _oracle(args: argparse.Namespace) -> int:
    problem, k0 = _problem_and_gain(args.problem)
    _stabilizing_evaluation(problem, k0)
    k_star = care_oracle(problem, k0)
    optimum = Evaluation(problem, k_star)
    result = {
            'K': k_star.tolist(),
            'cost': float(optimum.cost),
            'grad_norm': float(np.linalg.norm(optimum.gradient))}
    print(_dumps_json(result, indent=2))
    return EXIT_OK


_COMMANDS = {
        'gen': _gen,
        'certify': _certify,
        'solve': _solve,
        'bench': _bench,
        'oracle': _oracle}


def main(argv: Optional[List[str]] = None) -> int:
    """Runs the program.

    Args:
        argv: Command line arguments, without the program name. Taken
                from sys.argv if None.

    Returns:
        The exit status.
    """
    args = _parser().parse_args(argv)
    level = _VERBOSITY[min(args.verbose, len(_VERBOSITY) - 1)]
    logging.basicConfig(
            level=level, format='%(levelname)s %(name)s: %(message)s')

    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, InvalidAlpha, ValueError) as e:
        logger.error(str(e))
        return EXIT_CONFIG_ERROR
    except AcclqrError as e:
        logger.error('{}: {}'.format(type(e).__name__, e))
        return EXIT_RUN_FAILED


if __name__ == '__main__':
    sys.exit(main())
