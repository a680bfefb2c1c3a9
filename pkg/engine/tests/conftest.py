import pytest

from schubert.models.schubert_types import SchubertProblem
from schubert.services.combinatorics import parse_conditions
from schubert.services.geometry import random_instance
from schubert.services.linalg import RandomSource


@pytest.fixture
def rng():
    return RandomSource(20240611)


@pytest.fixture
def four_lines() -> SchubertProblem:
    return SchubertProblem.from_brackets(2, 4, [(2, 4)] * 4)


@pytest.fixture
def gr36_problem() -> SchubertProblem:
    return parse_conditions([[1]] * 9, 3, 6, "partition")


@pytest.fixture
def gr48_problem() -> SchubertProblem:
    return parse_conditions([[2, 3, 5, 7, 8], [1, 3, 6, 7, 8], [8, 4, 6, 7, 8]], 4, 8, "multiplicity")


@pytest.fixture
def four_lines_instance(four_lines, rng):
    return random_instance(four_lines, rng.substream(0))
