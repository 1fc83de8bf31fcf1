import numpy as np
import pytest

from novikov_cli.core.components import (
    label_components, label_raw, lifted_points,
)
from novikov_cli.core.grid import ScalarGrid, Sign, Window
from novikov_cli.core.levelsets import component_diameters


def _saddle(center: float) -> ScalarGrid:
    values = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return ScalarGrid(Window.from_vectors((1, 0), (0, 1)), values,
                      np.array([[center]]), False)


@pytest.mark.parametrize('center, above, below', [
    (0.5, 1, 2),
    (-0.5, 2, 1),
])
def test_saddle_joined_by_center_sign(center, above, below):
    grid = _saddle(center)
    assert label_raw(grid, 0.0, Sign.ABOVE).count == above
    assert label_raw(grid, 0.0, Sign.BELOW).count == below


def test_cap_around_maximum_is_glued_across_seams(cos_grid):
    above = label_raw(cos_grid, 1.5, Sign.ABOVE)
    assert above.count == 1
    assert not above.any_wraps
    below = label_raw(cos_grid, 1.5, Sign.BELOW)
    assert below.count == 1
    assert below.ranks == (2,)


def test_bounded_well_diameter(cos_grid):
    labeling = label_components(cos_grid, -1.5, Sign.BELOW)
    assert len(labeling.component_stats) == 1
    stats = labeling.component_stats[0]
    assert not stats.wraps
    # the well {cos x + cos y < -1.5} is close to a unit disk
    assert 1.5 < stats.diameter < 2.2


def test_wrapping_component_has_infinite_diameter(cos_grid):
    labeling = label_components(cos_grid, -1.5, Sign.ABOVE)
    assert labeling.component_stats[0].diameter == np.inf
    assert component_diameters(cos_grid, -1.5, Sign.ABOVE) == []


def test_stripes_wrap_along_first_axis(stripes_grid):
    for sign in Sign:
        raw = label_raw(stripes_grid, 0.0, sign)
        assert raw.wrapping_classes() == [(1, 0, 1)]


def test_copies_place_samples_in_one_lift(cos_grid):
    raw = label_raw(cos_grid, 1.5, Sign.ABOVE)
    # the cap around the origin is split over the four corners of the window
    ii, jj = np.nonzero(raw.labels == 1)
    spread = cos_grid.point(ii, jj)
    assert np.ptp(spread[:, 0]) > 5.0
    lifted = lifted_points(cos_grid, raw, 1)
    assert np.ptp(lifted[:, 0]) < 2.5
    assert np.ptp(lifted[:, 1]) < 2.5


def test_aperiodic_grid_never_wraps(stripes_grid):
    grid = ScalarGrid(stripes_grid.window, stripes_grid.values,
                      stripes_grid.centers[:-1, :-1], False)
    raw = label_raw(grid, 0.0, Sign.ABOVE)
    assert not raw.any_wraps
    assert raw.count == 1


def test_labels_follow_first_appearance(cos_grid):
    labeling = label_components(cos_grid, 0.5, Sign.ABOVE)
    assert labeling.labels[0, 0] == 1
    assert labeling.to_dict()['sign'] == 'above'
