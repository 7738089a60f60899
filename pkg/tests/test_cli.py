import json
import math
from pathlib import Path
from typing import Any

import pytest

from acclqr.cli import EXIT_CONFIG_ERROR, EXIT_OK, EXIT_RUN_FAILED, main
from acclqr.problem import load_problem, ProblemKind


def _gen_chain(tmpdir_path: Path, k0: str = 'example1') -> Path:
    path = tmpdir_path / 'chain.json'
    assert main(['gen', 'integrator-chain', '-n', '3', '--k0', k0,
                 '--out', str(path)]) == EXIT_OK
    return path


def test_gen(tmpdir_path: Path) -> None:
    path = _gen_chain(tmpdir_path)
    problem, k0 = load_problem(path)
    assert problem.kind == ProblemKind.SLQR
    assert k0 is not None
    assert k0.tolist() == [[5.0, 100.0, 15.0]]

    medium = tmpdir_path / 'medium.json'
    assert main(['gen', 'random-medium', '-n', '4', '-m', '2', '--seed', '7',
                 '--out', str(medium)]) == EXIT_OK
    problem, k0 = load_problem(medium)
    assert (problem.n, problem.m) == (4, 2)
    assert k0 is None


def test_gen_errors(tmpdir_path: Path) -> None:
    out = str(tmpdir_path / 'x.json')
    assert main(['gen', 'integrator-chain', '-n', '4', '--k0', 'example1',
                 '--out', out]) == EXIT_CONFIG_ERROR
    assert main(['gen', 'integrator-chain', '-n', '0',
                 '--out', out]) == EXIT_CONFIG_ERROR
    with pytest.raises(SystemExit) as e:
        main(['gen', 'ring', '-n', '3', '--out', out])
    assert e.value.code == 2


def test_certify(tmpdir_path: Path, capsys: Any) -> None:
    path = _gen_chain(tmpdir_path)
    capsys.readouterr()
    assert main(['certify', '--problem', str(path)]) == EXIT_OK
    bundle = json.loads(capsys.readouterr().out)
    assert bundle['L1'] > 0.0
    assert bundle['mu'] is None

    assert main(['certify', '--problem', str(path), '--alpha', '20',
                 '--f-star', str(4.0 + 4.0 * math.sqrt(2.0))]) == EXIT_OK
    bundle = json.loads(capsys.readouterr().out)
    assert bundle['alpha'] == 20.0
    assert bundle['mu'] > 0.0

    assert main(['certify', '--problem', str(path), '--alpha', '-1']) == (
            EXIT_CONFIG_ERROR)


def test_oracle(tmpdir_path: Path, capsys: Any) -> None:
    path = _gen_chain(tmpdir_path)
    capsys.readouterr()
    assert main(['oracle', '--problem', str(path)]) == EXIT_OK
    result = json.loads(capsys.readouterr().out)
    assert result['cost'] == pytest.approx(4.0 + 4.0 * math.sqrt(2.0))
    assert result['grad_norm'] <= 1e-9
    assert len(result['K'][0]) == 3

    # the zero gain does not stabilize the chain
    bare = tmpdir_path / 'bare.json'
    assert main(['gen', 'integrator-chain', '-n', '3',
                 '--out', str(bare)]) == EXIT_OK
    assert main(['oracle', '--problem', str(bare)]) == EXIT_CONFIG_ERROR
    assert main(['oracle', '--problem',
                 str(tmpdir_path / 'missing.json')]) == EXIT_CONFIG_ERROR


def test_solve(tmpdir_path: Path, capsys: Any) -> None:
    path = _gen_chain(tmpdir_path)
    out = tmpdir_path / 'results'
    capsys.readouterr()
    assert main(['solve', '--problem', str(path), '--solver', 'care-oracle',
                 '--out', str(out)]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report['runs'][0]['status'] == 'Converged'
    assert (out / 'care-oracle-seed0.csv').exists()
    assert (out / 'report.json').exists()

    assert main(['solve', '--problem', str(path), '--solver', 'gd',
                 '--max-iters', '3']) == EXIT_RUN_FAILED
    report = json.loads(capsys.readouterr().out)
    assert report['runs'][0]['status'] == 'MaxIters'


def test_bench(tmpdir_path: Path, capsys: Any) -> None:
    config = tmpdir_path / 'bench.yml'
    config.write_text(
            'problem:\n  generator: integrator-chain\n  n: 3\n'
            'initial-gain: example2\n'
            'solvers:\n- name: care-oracle\n- name: gd\n  step: 0.1\n')
    capsys.readouterr()
    assert main(['bench', '--config', str(config), '--seed', '1',
                 '--seed', '2', '--max-iters', '2']) == EXIT_RUN_FAILED
    report = json.loads(capsys.readouterr().out)
    assert [run['seed'] for run in report['runs']] == [1, 2, 1, 2]
    assert report['runs'][0]['status'] == 'Converged'
    assert report['runs'][2]['iters'] == 2

    config.write_text('problem:\n  generator: ring\n  n: 3\n')
    assert main(['bench', '--config', str(config)]) == EXIT_CONFIG_ERROR

    with pytest.raises(SystemExit):
        main(['bench', '--scenario', 'example9'])
    with pytest.raises(SystemExit):
        main(['bench'])
