import itertools

import numpy as np
import pytest

from qdtl.boolean import BooleanFunction, Leaf, Node


def brute_force_coefficients(values: np.ndarray) -> np.ndarray:
    """2^-n sum_x f(x) chi_S(x) with chi evaluated bit by bit."""
    size = len(values)
    out = np.empty(size)
    for s in range(size):
        total = 0.0
        for x in range(size):
            total += values[x] * (-1) ** bin(s & x).count("1")
        out[s] = total / size
    return out


def random_function(n: int, rng: np.random.Generator) -> BooleanFunction:
    return BooleanFunction(n, rng.choice(np.array([-1, 1]), size=1 << n))


def all_prefixes(n: int):
    for length in range(n + 1):
        yield from itertools.product((0, 1), repeat=length)


@pytest.fixture
def and_tree():
    # +1 only on x = 11
    return Node(0, Leaf(-1), Node(1, Leaf(-1), Leaf(1)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
