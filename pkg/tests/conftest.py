import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fractal_lab import CubeParams, build_system, dimension_from_covers
from fractal_lab.generators import generate, parse_space_token


def space(token):
    return generate(parse_space_token(token))


@pytest.fixture(scope="session")
def grid1000():
    return space("grid:1000")


@pytest.fixture(scope="session")
def grid1001():
    return space("grid:1001")


@pytest.fixture(scope="session")
def grid2_100():
    return space("grid2:100")


@pytest.fixture(scope="session")
def cantor8():
    return space("cantor:8")


@pytest.fixture(scope="session")
def snow4001():
    return space("snowflake:0.5:grid:4001")


@pytest.fixture(scope="session")
def carpet6():
    return space("carpet:6")


@pytest.fixture(scope="session")
def acceptance_params():
    return CubeParams(delta=1.0 / 24.0, c0=1.0, C0=2.0, k_max=3)


@pytest.fixture(scope="session")
def system_grid1000(grid1000, acceptance_params):
    return build_system(grid1000, acceptance_params)


@pytest.fixture(scope="session")
def system_cantor8(cantor8, acceptance_params):
    return build_system(cantor8, acceptance_params)


@pytest.fixture(scope="session")
def system_grid2(grid2_100, acceptance_params):
    return build_system(grid2_100, acceptance_params)


@pytest.fixture(scope="session")
def carpet6_dimension(carpet6):
    """Carpet box dimension, computed once for the whole session (slow)."""
    scales = [3.0 ** (-j / 2) for j in range(8)]
    _, estimate = dimension_from_covers(carpet6, scales=scales)
    return estimate
