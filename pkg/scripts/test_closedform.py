# test_closedform.py
from math import factorial

import pytest
from sympy.polys.domains import QQ

from src.core.closedform import ClosedFormEngine, canonical_names, compute_H, subs_checked
from src.core.operators import function_field
from src.core.oracle import TauFunctionOracle
from src.core.rational import RationalFunction

CELLS = [(0, 1), (0, 2), (0, 3), (1, 1), (1, 2)]


@pytest.fixture(scope="module")
def simple_engines(simple_model):
    return ClosedFormEngine(simple_model), TauFunctionOracle(simple_model)


@pytest.mark.parametrize("g, n", CELLS)
def test_simple_hurwitz_expansion_matches_oracle(simple_engines, g, n):
    closed, oracle = simple_engines
    k_max = 4 if n < 3 else 3
    expansion = closed.W_series(g, n, k_max)
    expected = oracle.hurwitz_table(g, n, k_max)
    for k, value in expected.items():
        assert expansion[k] == value, k


@pytest.mark.parametrize("g, n", [(0, 3), (1, 1)])
def test_monotone_expansion_matches_oracle(monotone_model, g, n):
    expansion = ClosedFormEngine(monotone_model).W_series(g, n, 3)
    expected = TauFunctionOracle(monotone_model).hurwitz_table(g, n, 3)
    assert all(expansion[k] == v for k, v in expected.items())


def test_w01_is_y(simple_model):
    assert str(ClosedFormEngine(simple_model).W_rational(0, 1).as_expr()) == "z1"


def test_h_vanishes_at_the_origin(simple_model):
    value = compute_H(simple_model, 1, 2).value
    field = function_field(canonical_names(2))
    at_origin = subs_checked(value, [(field.gen(0), 0), (field.gen(1), 0)])
    assert not at_origin


def test_pinned_representation(simple_model):
    result = ClosedFormEngine(simple_model, seed=7).compute_W(0, 3, "pinned")
    assert isinstance(result.value, RationalFunction)
    assert len(result.pins) == 2
    assert result.label == "W_{0,3}"


def test_series_representation_carries_k_max(simple_model):
    result = ClosedFormEngine(simple_model).compute_W(1, 1, "series", k_max=3)
    assert result.meta["k_max"] == 3
    assert result.value[(2,)] == QQ(1, 12)


def test_unknown_representation(simple_model):
    with pytest.raises(ValueError):
        ClosedFormEngine(simple_model).compute_W(1, 1, "matrix")


def genus_zero_two_parts(i: int, j: int) -> QQ:
    """Simple Hurwitz numbers h_{0;(i,j)} = i^i/i! · j^j/j! / (i + j)."""
    return QQ(i ** i * j ** j, factorial(i) * factorial(j) * (i + j))


@pytest.mark.parametrize("k_max", [2, 3, 4])
def test_w02_expansion_is_stable_in_k_max(simple_model, k_max):
    expansion = ClosedFormEngine(simple_model).W_series(0, 2, k_max)
    assert expansion[(2, 1)] == QQ(2, 3)
    for k, value in expansion.items():
        assert value == genus_zero_two_parts(*k), k
