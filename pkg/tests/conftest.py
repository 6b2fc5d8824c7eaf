import numpy as np
import pytest

from service.measure_service import Atom, MeasureService, chord_weight, p1_weight
from tools.circle_core import make_grid

measure_service = MeasureService()


@pytest.fixture(scope="session")
def grid():
    return make_grid(4096)


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(1024)


@pytest.fixture(scope="session")
def lebesgue(grid):
    return measure_service.make_lebesgue(grid)


@pytest.fixture(scope="session")
def bs_half(grid):
    """Bernstein-Szego measure with alpha = [0.5] and weight |t - 1|^2"""
    return measure_service.make_bernstein_szego([0.5], grid)


@pytest.fixture(scope="session")
def bs_half_p1(grid):
    return measure_service.make_bernstein_szego([0.5], grid, weight=p1_weight())


@pytest.fixture(scope="session")
def bs_small(small_grid):
    return measure_service.make_bernstein_szego([0.5], small_grid)


@pytest.fixture(scope="session")
def bs_small_atom(small_grid):
    return measure_service.make_bernstein_szego([0.5], small_grid, atoms=[Atom.from_angle(np.pi, 0.2)])


@pytest.fixture(scope="session")
def lebesgue_small(small_grid):
    return measure_service.make_lebesgue(small_grid)


@pytest.fixture(scope="session")
def ps_family(grid):
    return measure_service.make_ps_family(chord_weight(), 1.5, grid=grid)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_alpha(rng, length, bound=0.8):
    radius = bound * np.sqrt(rng.uniform(0.0, 1.0, length))
    return radius * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, length))
