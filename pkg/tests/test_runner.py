import time

import pytest

from novikov_cli.utils.runner import run_ordered


@pytest.mark.parametrize('jobs', [1, 4])
def test_results_keep_input_order(jobs):
    def slow_square(x):
        time.sleep(0.01 * (5 - x))
        return x * x

    assert run_ordered(slow_square, range(5), jobs) == [0, 1, 4, 9, 16]


def test_first_error_propagates():
    def explode(x):
        if x == 2:
            raise ValueError(x)
        return x

    with pytest.raises(ValueError):
        run_ordered(explode, range(4), jobs=3)
