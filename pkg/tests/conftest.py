from contextlib import AbstractContextManager
import os
from pathlib import Path
from types import TracebackType
from typing import Any, cast, ContextManager, Optional
from typing_extensions import Type

import numpy as np
import pytest  # type: ignore

from acclqr.generators import (
        gen_integrator_chain, gen_olqr_chain, gen_random_medium)
from acclqr.linalg import as_generator, is_hurwitz, Matrix
from acclqr.problem import as_gain, Gain, LqrProblem


@pytest.fixture
def tmpdir_path(tmp_path: Any) -> Path:
    # Older versions of PyTest on older versions of Python give us a
    # pathlib2.Path, which yatiml does not support.
    return Path(str(tmp_path))


class DummyRaises(AbstractContextManager):
    def __enter__(self) -> None:
        pass

    def __exit__(
            self, exc_type: Optional[Type[BaseException]],
            exc_value: Optional[BaseException],
            traceback: Optional[TracebackType]) -> Optional[bool]:
        pass


def raises(expected_exception: Any) -> ContextManager:
    """Shows error messages if so configured.

    This function works like pytest.raises(), but can be disabled by an
    environment variable. Setting that environment variable will thus
    cause a whole bunch of tests to fail and print error messages,
    which a developer can then look at and judge for quality.
    """
    if 'ACCLQR_TEST_ERROR_MESSAGES' in os.environ:
        return DummyRaises()
    else:
        return cast(ContextManager, pytest.raises(expected_exception))


def random_stabilizing_gain(
        problem: LqrProblem, seed: int, scale: float = 0.3,
        margin: float = 1e-3) -> Gain:
    """A random gain that stabilizes a problem with Hurwitz A."""
    rng = as_generator(seed)
    while True:
        k = as_gain(scale * rng.standard_normal(problem.gain_shape()))
        if is_hurwitz(problem.A - problem.B @ k @ problem.C, margin):
            return k
        scale *= 0.5


def random_direction(shape: Any, seed: int) -> Matrix:
    rng = as_generator(seed)
    e = rng.standard_normal(shape)
    return cast(Matrix, e / np.linalg.norm(e))


@pytest.fixture
def scalar_problem() -> LqrProblem:
    # f(k) = (1 + k²) / (2k) on k > 0, minimal at k = 1 with f = 1
    one = [[1.0]]
    return LqrProblem([[0.0]], one, one, one, one, one)


@pytest.fixture
def chain3() -> LqrProblem:
    return gen_integrator_chain(3)


@pytest.fixture
def olqr_chain3() -> LqrProblem:
    return gen_olqr_chain(3)


@pytest.fixture
def medium4() -> LqrProblem:
    return gen_random_medium(4, 2, 3).problem
