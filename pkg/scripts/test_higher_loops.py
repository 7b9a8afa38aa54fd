# test_higher_loops.py
import pytest

from src.core.errors import ConfigurationError
from src.core.higher_loops import HigherLoopEngine


@pytest.fixture(scope="module")
def simple_loops(simple_model):
    return HigherLoopEngine(simple_model)


def test_r_one_is_w(simple_loops):
    assert simple_loops.closed_form(1, 1, 1) == simple_loops.closed.W_rational(1, 1)


@pytest.mark.parametrize("r, g, n", [(2, 0, 1), (2, 1, 1), (2, 0, 2), (3, 0, 1)])
def test_three_routes_agree(simple_loops, r, g, n):
    closed = simple_loops.closed_form(r, g, n)
    assert simple_loops.definitional(r, g, n) == closed
    assert simple_loops.explicit(r, g, n) == closed


def test_compute_validates_method(simple_loops):
    with pytest.raises(ConfigurationError):
        simple_loops.compute(2, 1, 1, method="guess")


def test_compute_series_has_label(simple_loops):
    result = simple_loops.compute(2, 1, 1, representation="series", k_max=3)
    assert result.label == "Wr_{1,1}^(2)"
