"""Experiment configuration, orchestration and reports.

An experiment runs a list of solvers, each for a list of seeds, on one
problem from one initial gain. Its configuration is a YAML document,
for example::

    problem:
      generator: integrator-chain
      n: 3
    initial-gain: example1
    solvers:
    - name: gd
      step: 0.1139
    - name: accel
      T: 0.3375
      d: 0.3
      eta: 0.1139
    grad-tol: 1e-6
    out: results
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import logging
import math
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import yaml
import yatiml

from acclqr.constants import constants
from acclqr.exceptions import AcclqrError, ConfigError, SolverError
from acclqr.generators import (
        gen_integrator_chain, gen_olqr_chain, gen_random_medium,
        initial_gain)
from acclqr.hybrid import simulate_hybrid_flow
from acclqr.lqr_core import care_oracle, Evaluation
from acclqr.olqr_solver import a_olqr, AOlqrConfig
from acclqr.problem import (
        as_gain, Gain, load_problem, LqrProblem, NumberMatrix, ProblemKind)
from acclqr.slqr_solver import (
        AccelConfig, accel_solve, gd_solve, warm_start_gd)
from acclqr.trace import Status, Trace, write_trace_csv


logger = logging.getLogger(__name__)

Number = Union[int, float]

SOLVER_NAMES = ('gd', 'accel', 'hybrid', 'a-olqr', 'care-oracle')

GENERATOR_NAMES = ('integrator-chain', 'olqr-chain', 'random-medium')

COMPARISON_TOL = 1e-6
"""Suboptimality at which solvers are compared."""


class ProblemSource:
    """Where the problem of an experiment comes from.

    Either ``file`` names a problem JSON file, or ``generator`` names one
    of the generators, with its parameters n, m and seed.
    """
    def __init__(
            self, file: Optional[str] = None,
            generator: Optional[str] = None, n: Optional[int] = None,
            m: Optional[int] = None, seed: Optional[int] = None) -> None:
        self.file = file
        self.generator = generator
        self.n = n
        self.m = m
        self.seed = seed

    def validate(self) -> None:
        if (self.file is None) == (self.generator is None):
            raise ConfigError('A problem needs exactly one of file and'
                              ' generator')
        if self.file is not None:
            if not Path(self.file).exists():
                raise ConfigError('Problem file {} does not exist'.format(
                    self.file))
            return
        if self.generator not in GENERATOR_NAMES:
            raise ConfigError('Unknown generator {}, expected one of'
                              ' {}'.format(self.generator, GENERATOR_NAMES))
        if self.n is None or self.n < 1:
            raise ConfigError('Generator {} needs n >= 1'.format(
                self.generator))
        if self.generator == 'random-medium' and (
                self.m is None or self.m < 1):
            raise ConfigError('Generator random-medium needs m >= 1')

    def build(self) -> Tuple[LqrProblem, Optional[Gain]]:
        """Makes the problem, and returns it with its stored K0 if any."""
        self.validate()
        if self.file is not None:
            return load_problem(Path(self.file))
        assert self.n is not None
        if self.generator == 'integrator-chain':
            return gen_integrator_chain(self.n), None
        if self.generator == 'olqr-chain':
            return gen_olqr_chain(self.n), None
        assert self.m is not None
        generated = gen_random_medium(
                self.n, self.m, 0 if self.seed is None else self.seed)
        if generated.attempts > 1:
            logger.info('Random problem needed {} draws'.format(
                generated.attempts))
        return generated.problem, None


class SolverSpec:
    """One solver to run, with its settings.

    Settings that do not apply to the named solver are ignored. Unset
    settings get the solver's defaults, which for the step sizes are
    the certified values.
    """
    def __init__(
            self, name: str, step: Optional[Number] = None,
            T: Optional[Number] = None, d: Optional[Number] = None,
            beta: Optional[Number] = None, eta: Optional[Number] = None,
            alpha1: Optional[Number] = None,
            max_restarts: Optional[int] = None,
            horizon: Optional[Number] = None, dt: Optional[Number] = None,
            eps: Optional[Number] = None, L1: Optional[Number] = None,
            L2: Optional[Number] = None, alpha: Optional[Number] = None,
            delta: Optional[Number] = None,
            fd_hvp: Optional[bool] = None,
            allow_uncertified: Optional[bool] = None,
            warm_start_gd: Optional[int] = None) -> None:
        self.name = name
        self.step = step
        self.T = T
        self.d = d
        self.beta = beta
        self.eta = eta
        self.alpha1 = alpha1
        self.max_restarts = max_restarts
        self.horizon = horizon
        self.dt = dt
        self.eps = eps
        self.L1 = L1
        self.L2 = L2
        self.alpha = alpha
        self.delta = delta
        self.fd_hvp = fd_hvp
        self.allow_uncertified = allow_uncertified
        self.warm_start_gd = warm_start_gd

    @classmethod
    def _yatiml_savorize(cls, node: yatiml.Node) -> None:
        node.dashes_to_unders_in_keys()

    @classmethod
    def _yatiml_sweeten(cls, node: yatiml.Node) -> None:
        node.unders_to_dashes_in_keys()


class ExperimentConfig:
    """Configuration of an experiment.

    Attributes:
        problem: The problem to solve.
        initial_gain: A scenario name (see
                :func:`acclqr.generators.initial_gain`), an explicit
                gain, or None for the K0 stored in the problem file or
                else the zero gain.
        solvers: Solvers to run.
        grad_tol: Gradient norm at which runs have converged.
        max_iters: Iteration limit of every run.
        seeds: Seeds to run every solver with.
        out: Directory for traces and the report, if any.
        workers: Number of runs to do in parallel.
        timing: Whether to write wall times into the traces.
        f_star: Optimal cost to compare with; computed for
                state-feedback problems if not given.
    """
    def __init__(
            self, problem: ProblemSource,
            initial_gain: Optional[Union[str, NumberMatrix]] = None,
            solvers: Optional[List[SolverSpec]] = None,
            grad_tol: Number = 1e-6, max_iters: int = 10000,
            seeds: Optional[List[int]] = None, out: Optional[str] = None,
            workers: int = 1, timing: bool = True,
            f_star: Optional[Number] = None) -> None:
        self.problem = problem
        self.initial_gain = initial_gain
        self.solvers = solvers if solvers is not None else []
        self.grad_tol = grad_tol
        self.max_iters = max_iters
        self.seeds = seeds if seeds is not None else [0]
        self.out = out
        self.workers = workers
        self.timing = timing
        self.f_star = f_star

    @classmethod
    def _yatiml_savorize(cls, node: yatiml.Node) -> None:
        node.dashes_to_unders_in_keys()

    @classmethod
    def _yatiml_sweeten(cls, node: yatiml.Node) -> None:
        node.unders_to_dashes_in_keys()

    def validate(self) -> None:
        """Checks the configuration.

        Raises:
            ConfigError: If anything is wrong with it.
        """
        self.problem.validate()
        for spec in self.solvers:
            if spec.name not in SOLVER_NAMES:
                raise ConfigError('Unknown solver {}, expected one of'
                                  ' {}'.format(spec.name, SOLVER_NAMES))
            if spec.T is not None and spec.d is None:
                raise ConfigError('Solver {} sets T but not d'.format(
                    spec.name))
        if not self.grad_tol > 0.0:
            raise ConfigError('grad-tol must be positive')
        if self.max_iters < 0:
            raise ConfigError('max-iters must not be negative')
        if self.workers < 1:
            raise ConfigError('workers must be at least 1')


_load_experiment = yatiml.load_function(
        ExperimentConfig, ProblemSource, SolverSpec)


def load_experiment(path: Path) -> ExperimentConfig:
    """Loads an experiment configuration from a YAML file.

    A relative problem file path is taken relative to the directory of
    the configuration file.

    Raises:
        ConfigError: If the file cannot be read or is not valid.
    """
    path = Path(path)
    try:
        cfg = _load_experiment(path)
    except (yatiml.RecognitionError, yaml.YAMLError, OSError) as e:
        raise ConfigError('Could not load experiment from {}: {}'.format(
            path, e))
    source = cfg.problem
    if source.file is not None and not Path(source.file).is_absolute():
        source.file = str(path.parent / source.file)
    cfg.validate()
    return cfg


@dataclass
class RunSummary:
    """Summary of one solver run, taken from the last row of its trace."""
    solver: str
    seed: int
    status: str
    final_f: Optional[float] = None
    final_grad_norm: Optional[float] = None
    iters: Optional[int] = None
    restarts: Optional[int] = None
    wall_ms: Optional[float] = None
    oracle_calls: Optional[int] = None
    trace_file: Optional[str] = None
    error: Optional[str] = None


@dataclass
class Comparison:
    """Iterations a run needed to reach f - f* <= 1e-6, if it did."""
    solver: str
    seed: int
    iters_to_tol: Optional[int] = None


class Report:
    """Results of an experiment.

    Attributes:
        runs: One summary per run, in the order they were configured.
        initial_cost: f(K0).
        f_star: The optimal cost compared with, if known.
        constants: Constants at the sublevel value f(K0), if available.
        comparison: Per run, iterations to reach f - f* <= 1e-6.
    """
    def __init__(
            self, runs: List[RunSummary], initial_cost: float,
            f_star: Optional[float],
            constants: Optional[Dict[str, Optional[float]]],
            comparison: List[Comparison]) -> None:
        self.runs = runs
        self.initial_cost = initial_cost
        self.f_star = f_star
        self.constants = constants
        self.comparison = comparison

    @property
    def success(self) -> bool:
        """True iff every run converged."""
        return all(run.status == Status.CONVERGED.value for run in self.runs)

    def run(self, solver: str, seed: int = 0) -> RunSummary:
        for summary in self.runs:
            if summary.solver == solver and summary.seed == seed:
                return summary
        raise KeyError('No run of {} with seed {}'.format(solver, seed))


dumps_report = yatiml.dumps_json_function(Report, RunSummary, Comparison)


def _opt(value: Optional[Number]) -> Optional[float]:
    return None if value is None else float(value)


class _Run:
    """A single (solver, seed) run of an experiment."""
    def __init__(
            self, cfg: ExperimentConfig, problem: LqrProblem, k0: Gain,
            f_star: Optional[float], spec: SolverSpec, seed: int) -> None:
        self.cfg = cfg
        self.problem = problem
        self.k0 = k0
        self.f_star = f_star
        self.spec = spec
        self.seed = seed

    def _accel_config(self, k0: Gain) -> AccelConfig:
        spec = self.spec
        optional = {}   # type: Dict[str, Any]
        if spec.max_restarts is not None:
            optional['max_restarts'] = spec.max_restarts
        if spec.T is None:
            return AccelConfig.certified(
                    self.problem, k0, self.f_star,
                    max_iters=self.cfg.max_iters,
                    grad_tol=float(self.cfg.grad_tol), **optional)
        assert spec.d is not None
        return AccelConfig(
                T=float(spec.T), d=float(spec.d),
                beta=float(spec.beta or 0.0), eta=float(spec.eta or 0.0),
                alpha1=_opt(spec.alpha1), max_iters=self.cfg.max_iters,
                grad_tol=float(self.cfg.grad_tol), **optional)

    def _olqr_config(self, k0: Gain) -> AOlqrConfig:
        spec = self.spec
        eps = float(spec.eps if spec.eps is not None else self.cfg.grad_tol)
        l1, l2 = _opt(spec.L1), _opt(spec.L2)
        if l1 is None or l2 is None:
            bundle = constants(self.problem, Evaluation(self.problem, k0).cost)
            l1 = bundle.L1 if l1 is None else l1
            l2 = bundle.L2 if l2 is None else l2
        optional = {}   # type: Dict[str, Any]
        if spec.max_restarts is not None:
            optional['max_nag_restarts'] = spec.max_restarts
        if spec.delta is not None:
            optional['delta'] = float(spec.delta)
        return AOlqrConfig(
                eps=eps, L1=l1, L2=l2, alpha=_opt(spec.alpha),
                seed=self.seed, fd_hvp=bool(spec.fd_hvp),
                allow_uncertified=bool(spec.allow_uncertified), **optional)

    def _care_trace(self, k0: Gain) -> Trace:
        trace = Trace('care-oracle')
        start = Evaluation(self.problem, k0)
        trace.record(0, start.cost, float(np.linalg.norm(start.gradient)),
                     lyap_solves=start.lyap_solves)
        k_star = care_oracle(self.problem, k0)
        final = Evaluation(self.problem, k_star)
        trace.record(1, final.cost, float(np.linalg.norm(final.gradient)),
                     lyap_solves=start.lyap_solves + final.lyap_solves)
        trace.oracle_calls = 2
        trace.gain = k_star
        trace.status = (Status.CONVERGED
                        if trace.last.grad_norm <= self.cfg.grad_tol
                        else Status.MAX_ITERS)
        return trace

    def solve(self) -> Trace:
        spec = self.spec
        k0 = self.k0
        if spec.warm_start_gd:
            k0 = warm_start_gd(self.problem, k0, spec.warm_start_gd,
                               _opt(spec.step))
        if spec.name == 'gd':
            return gd_solve(self.problem, k0, _opt(spec.step),
                            float(self.cfg.grad_tol), self.cfg.max_iters)
        if spec.name == 'accel':
            return accel_solve(self.problem, k0, self._accel_config(k0))
        if spec.name == 'hybrid':
            accel_cfg = self._accel_config(k0)
            dt = _opt(spec.dt)
            if dt is None:
                dt = min(1e-3, accel_cfg.T / 10.0)
            horizon = _opt(spec.horizon)
            return simulate_hybrid_flow(
                    self.problem, k0, None, accel_cfg,
                    10.0 if horizon is None else horizon, dt, self.f_star)
        if spec.name == 'a-olqr':
            _, trace = a_olqr(self.problem, k0, self._olqr_config(k0))
            return trace
        return self._care_trace(k0)

    def __call__(self) -> Tuple[RunSummary, Optional[Trace]]:
        summary = RunSummary(self.spec.name, self.seed, Status.FAILED.value)
        trace = None    # type: Optional[Trace]
        try:
            trace = self.solve()
        except (AcclqrError, ValueError) as e:
            logger.warning('Run of {} with seed {} failed: {}'.format(
                self.spec.name, self.seed, e))
            summary.error = '{}: {}'.format(type(e).__name__, e)
            if isinstance(e, SolverError) and isinstance(e.trace, Trace):
                trace = e.trace
                if trace.status == Status.RUNNING:
                    trace.status = Status.FAILED

        if trace is not None:
            summary.status = trace.status.value
            summary.oracle_calls = trace.oracle_calls
            summary.restarts = trace.restarts
            if trace.rows:
                last = trace.last
                summary.final_f = last.f
                summary.final_grad_norm = last.grad_norm
                summary.iters = last.iter
                summary.wall_ms = last.wall_ms if self.cfg.timing else 0.0
        return summary, trace


def _resolve_initial_gain(
        cfg: ExperimentConfig, problem: LqrProblem,
        stored: Optional[Gain]) -> Gain:
    try:
        if isinstance(cfg.initial_gain, str):
            k0 = initial_gain(cfg.initial_gain, problem.n, problem.m)
        elif cfg.initial_gain is not None:
            k0 = as_gain(cfg.initial_gain)
        elif stored is not None:
            k0 = stored
        else:
            k0 = problem.zero_gain()
        k0 = problem.check_gain(k0)
    except ValueError as e:
        raise ConfigError('Invalid initial gain: {}'.format(e))
    if not Evaluation(problem, k0).stabilizing:
        raise ConfigError('The initial gain {} is not stabilizing'.format(
            k0.tolist()))
    return k0


def run_experiment(cfg: ExperimentConfig) -> Report:
    """Runs every configured solver for every seed.

    Failed runs are recorded in the report, and the remaining runs go
    ahead. If ``cfg.out`` is set, a trace CSV per run and the report,
    as ``report.json``, are written there.

    Raises:
        ConfigError: If the configuration is invalid.
    """
    cfg.validate()
    problem, stored = cfg.problem.build()
    k0 = _resolve_initial_gain(cfg, problem, stored)
    initial_cost = Evaluation(problem, k0).cost

    f_star = _opt(cfg.f_star)
    if f_star is None and problem.kind == ProblemKind.SLQR:
        try:
            f_star = Evaluation(problem, care_oracle(problem, k0)).cost
        except AcclqrError as e:
            logger.warning('Could not compute the optimal cost: {}'.format(e))

    bundle = None   # type: Optional[Dict[str, Optional[float]]]
    try:
        bundle = constants(problem, initial_cost, f_star).as_dict()
    except (AcclqrError, ValueError) as e:
        logger.warning('No constants for this problem: {}'.format(e))

    runs = [_Run(cfg, problem, k0, f_star, spec, seed)
            for spec in cfg.solvers for seed in cfg.seeds]
    logger.info('Running {} runs on {} with {} workers'.format(
        len(runs), problem, cfg.workers))
    if cfg.workers > 1 and len(runs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
            futures = [executor.submit(run) for run in runs]
            results = [future.result() for future in futures]
    else:
        results = [run() for run in runs]

    out_dir = None  # type: Optional[Path]
    if cfg.out is not None:
        out_dir = Path(cfg.out)
        out_dir.mkdir(parents=True, exist_ok=True)

    summaries = []  # type: List[RunSummary]
    comparison = []     # type: List[Comparison]
    for summary, trace in results:
        summaries.append(summary)
        iters_to_tol = None     # type: Optional[int]
        if trace is not None and f_star is not None:
            iters_to_tol = trace.first_iter_within(f_star, COMPARISON_TOL)
        comparison.append(Comparison(summary.solver, summary.seed,
                                     iters_to_tol))
        if trace is not None and out_dir is not None:
            trace_path = out_dir / '{}-seed{}.csv'.format(
                    summary.solver, summary.seed)
            write_trace_csv(trace, trace_path, cfg.timing)
            summary.trace_file = str(trace_path)

    report = Report(summaries, initial_cost, f_star, bundle, comparison)
    if out_dir is not None:
        (out_dir / 'report.json').write_text(dumps_report(report, indent=2))
    return report


def _matched_scenario(
        source: ProblemSource, k0: str, gd_step: float, damping: float,
        max_iters: int) -> ExperimentConfig:
    # T = √step gives the heavy ball the gradient gain T² = step of gd
    return ExperimentConfig(
            source, initial_gain=k0,
            solvers=[
                SolverSpec('gd', step=gd_step),
                SolverSpec('accel', T=math.sqrt(gd_step), d=damping,
                           eta=gd_step)],
            max_iters=max_iters)


def _chain_scenario(
        name: str, n: int, gd_step: float, damping: float,
        max_iters: int) -> ExperimentConfig:
    return _matched_scenario(
            ProblemSource(generator='integrator-chain', n=n), name,
            gd_step, damping, max_iters)


def _example4() -> ExperimentConfig:
    return _matched_scenario(
            ProblemSource(generator='random-medium', n=10, m=3, seed=0),
            'example4', 0.01, 0.02, 20000)


def _olqr_chain() -> ExperimentConfig:
    return ExperimentConfig(
            ProblemSource(generator='olqr-chain', n=3),
            initial_gain=[[0.3]],
            solvers=[SolverSpec('a-olqr', eps=1e-3)],
            grad_tol=1e-3, seeds=[0, 1, 2])


SCENARIOS = {
        'example1': lambda: _chain_scenario('example1', 3, 0.1139, 0.3, 10000),
        'example2': lambda: _chain_scenario('example2', 3, 0.1139, 0.3, 10000),
        'example3': lambda: _chain_scenario('example3', 10, 4e-5, 0.3, 20000),
        'example4': _example4,
        'olqr-chain': _olqr_chain,
        }   # type: Dict[str, Callable[[], ExperimentConfig]]
"""Named benchmark experiments, as functions making a fresh config."""


def scenario(name: str) -> ExperimentConfig:
    """Returns a fresh configuration of a named scenario.

    Raises:
        ConfigError: If there is no such scenario.
    """
    if name not in SCENARIOS:
        raise ConfigError('Unknown scenario {}, expected one of {}'.format(
            name, sorted(SCENARIOS)))
    return SCENARIOS[name]()
