import math

import numpy as np
import pytest
from scipy.spatial import cKDTree

from novikov_cli.core.grid import Window
from novikov_cli.core.lattice_angles import MagicAngle, superposition_periods
from novikov_cli.core.levelsets import (
    Situation, classify_growing_window, classify_situation, classify_window,
    critical_interval, critical_interval_on_grid, default_resolution, probe,
    sample, singular_net,
)
from novikov_cli.core.potential import make_symmetric_potential
from novikov_cli.utils.exceptions import (
    NotPeriodicError, NotSymmetricError, NovikovCliValidationException,
)

TWO_PI = 2 * math.pi


def _on_torus(points: np.ndarray) -> np.ndarray:
    wrapped = np.mod(points, TWO_PI)
    wrapped[wrapped >= TWO_PI] = 0.0
    return wrapped


def test_sample_shapes(cos_square, square_periods):
    window = Window.from_vectors(*square_periods)
    grid = sample(cos_square, window, 16, 12, True)
    assert grid.values.shape == (16, 12)
    assert grid.centers.shape == (16, 12)
    assert grid.values[0, 0] == pytest.approx(2.0)
    assert not grid.values.flags.writeable
    flat = sample(cos_square, window, 16, 12, False)
    assert flat.centers.shape == (15, 11)


def test_sample_parallel_matches_serial(cos_square, square_periods):
    window = Window.from_vectors(*square_periods)
    serial = sample(cos_square, window, 24, 24, True)
    parallel = sample(cos_square, window, 24, 24, True, jobs=4)
    assert parallel.values == pytest.approx(serial.values, abs=1e-12)
    assert parallel.centers == pytest.approx(serial.centers, abs=1e-12)


def test_sample_rejects_small_grids(cos_square, square_periods):
    with pytest.raises(NovikovCliValidationException):
        sample(cos_square, Window.from_vectors(*square_periods), 4, 16, True)


def test_sample_rejects_wrong_periods(cos_square):
    window = Window.from_vectors((math.pi, 0.0), (0.0, TWO_PI))
    with pytest.raises(NotPeriodicError):
        sample(cos_square, window, 16, 16, True)


def test_default_resolution(cos_square, square_periods):
    assert default_resolution(cos_square, square_periods) == (48, 48)
    assert default_resolution(cos_square, square_periods, 10) == (10, 10)


@pytest.mark.parametrize('level, situation', [
    (-1.5, Situation.A_MINUS),
    (1.5, Situation.A_PLUS),
])
def test_situations_of_cosine(cos_grid, level, situation):
    assert classify_situation(cos_grid, level) is situation


def test_stripes_are_open(stripes_grid):
    found = probe(stripes_grid, 0.3)
    assert found.situation is Situation.OPEN
    assert found.below == ((1, 0, 1),)
    assert found.above == ((1, 0, 1),)


def test_probe_needs_periodic_grid(cos_square):
    grid = sample(cos_square, Window.square((0, 0), 5.0), 16, 16, False)
    with pytest.raises(NovikovCliValidationException):
        probe(grid, 0.0)


def test_stripes_interval_fills_range(stripes_grid):
    report = critical_interval_on_grid(stripes_grid)
    assert report.c_hat_1 == stripes_grid.min
    assert report.c_hat_2 == pytest.approx(1.0, abs=1e-3)
    assert not report.degenerate
    levels = [p.level for p in report.evidence]
    assert levels == sorted(levels)


def test_cosine_interval_is_degenerate(cos_square, square_periods):
    report = critical_interval(cos_square, square_periods, nx=32)
    assert report.degenerate
    assert abs(report.c0) < 0.01
    assert report.resolution == (32, 32)
    assert report.to_dict()['steps'] == report.steps


def test_constant_field_is_degenerate(cos_square, square_periods):
    report = critical_interval(cos_square.scaled(0.0), square_periods, nx=16)
    assert report.degenerate
    assert report.width == 0.0
    assert report.tol == 0.0


def test_singular_net_of_cosine(cos_square, square_periods):
    result = singular_net(cos_square, square_periods, nx=32)
    assert abs(result.c0) < 0.01
    assert result.net
    for line in result.net:
        values = cos_square.evaluate(line.vertices)
        assert np.abs(values).max() < 0.05
    assert result.to_dict()['c0'] == result.c0


def test_singular_net_needs_square_sampling(cos_square, square_periods):
    with pytest.raises(NovikovCliValidationException):
        singular_net(cos_square, square_periods, nx=16, ny=20)


def test_singular_net_needs_symmetry(cos_family):
    angle = MagicAngle(2, 1, 4)
    spec = cos_family.at(angle.angle_radians, (0.4, 0.1))
    with pytest.raises(NotSymmetricError):
        singular_net(spec, superposition_periods(angle, TWO_PI), nx=16)


@pytest.mark.slow
def test_singular_net_is_rotation_invariant():
    spec = make_symmetric_potential(seed=2, symmetry=4, cutoff=2)
    periods = (TWO_PI, 0.0), (0.0, TWO_PI)
    result = singular_net(spec, periods, nx=64)
    points = np.vstack([line.vertices for line in result.net])
    rotated = np.column_stack([-points[:, 1], points[:, 0]])
    tree = cKDTree(_on_torus(points), boxsize=TWO_PI)
    distances, _ = tree.query(_on_torus(rotated))
    assert distances.max() < 2 * result.grid.cell_diagonal


@pytest.mark.parametrize('level, situation', [
    (-1.5, Situation.A_MINUS),
    (1.5, Situation.A_PLUS),
])
def test_window_classification(cos_square, level, situation):
    assert classify_window(cos_square, (0.3, 0.2), 8 * math.pi, 80, 80,
                           level) is situation


def test_growing_windows(cos_square):
    found = classify_growing_window(cos_square, (0.0, 0.0), [10.0, 20.0], 4,
                                    -1.5)
    assert [size for size, _ in found] == [10.0, 20.0]
    assert found[-1][1] is Situation.A_MINUS


def test_window_size_must_be_positive(cos_square):
    with pytest.raises(NovikovCliValidationException):
        classify_window(cos_square, (0, 0), 0.0, 16, 16, 0.0)
