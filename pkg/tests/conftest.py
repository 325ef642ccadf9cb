import numpy as np
import pytest

from latentclass.model import LcaParameters, random_parameters
from latentclass.responses import ResponseMatrix
from latentclass.schema import SurveySchema


def make_schema(n_categories):
    names = [f"X{j + 1}" for j in range(len(n_categories))]
    return SurveySchema.from_categories(names, n_categories)


def random_instance(rng, n, n_categories, n_classes):
    """Random complete data and random strictly positive parameters."""
    schema = make_schema(n_categories)
    codes = np.column_stack([rng.integers(1, k + 1, size=n) for k in n_categories])
    params = random_parameters(n_classes, tuple(n_categories), rng)
    return ResponseMatrix(codes, schema), params


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_schema():
    return make_schema((2, 3, 2))


@pytest.fixture
def two_class_params():
    return LcaParameters.from_nested(
        [0.6, 0.4],
        [
            [[0.9, 0.1], [0.7, 0.2, 0.1], [0.8, 0.2]],
            [[0.2, 0.8], [0.1, 0.3, 0.6], [0.3, 0.7]],
        ],
    )


# One line per acceptance criterion, echoed in the terminal summary.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
