import math

import numpy as np
import pytest

from novikov_cli.core.grid import ScalarGrid, Window
from novikov_cli.core.potential import cosine_potential
from novikov_cli.core.verification import Family

TWO_PI = 2 * math.pi


def periodic_grid(func, n: int) -> ScalarGrid:
    """func(x, y) sampled on the [0, 2π)² torus"""
    step = TWO_PI / n
    x, y = np.meshgrid(np.arange(n) * step, np.arange(n) * step,
                       indexing='ij')
    window = Window.from_vectors((TWO_PI, 0.0), (0.0, TWO_PI))
    return ScalarGrid(window, func(x, y), func(x + step / 2, y + step / 2),
                      True)


@pytest.fixture
def cos_square():
    return cosine_potential(4, TWO_PI)


@pytest.fixture
def square_periods():
    return (TWO_PI, 0.0), (0.0, TWO_PI)


@pytest.fixture
def cos_family():
    layer = cosine_potential(4, TWO_PI)
    return Family(layer, layer)


@pytest.fixture
def stripes_grid():
    return periodic_grid(lambda x, y: np.sin(y), 32)


@pytest.fixture
def cos_grid():
    return periodic_grid(lambda x, y: np.cos(x) + np.cos(y), 32)
