# test_oracle.py
from math import factorial

import pytest
from sympy.polys.domains import QQ

from src.core.oracle import (
    TauFunctionOracle,
    centralizer_order,
    character,
    contents,
    decreasing_tuples,
    dimension,
    partitions_of,
    schur_in_powersums,
    transpose,
)


def test_partitions_and_transpose():
    assert len(partitions_of(5)) == 7
    assert (3, 1) in partitions_of(4)
    assert transpose((3, 1)) == (2, 1, 1)
    assert sorted(contents((2, 1))) == [-1, 0, 1]
    assert centralizer_order((2, 1, 1)) == 4


def test_characters():
    assert dimension((2, 1)) == 2
    assert character((2, 1), (3,)) == -1
    assert character((1, 1, 1), (2, 1)) == -1
    for n in range(1, 6):
        assert sum(dimension(p) ** 2 for p in partitions_of(n)) == factorial(n)


def test_schur_coefficient():
    s = schur_in_powersums((2,))
    assert s.coefficient((1, 1)) == QQ(1, 2)
    assert s.coefficient((2,)) == QQ(1, 2)


@pytest.fixture(scope="module")
def simple_oracle(simple_model):
    return TauFunctionOracle(simple_model)


@pytest.mark.parametrize(
    "g, k, expected",
    [
        (0, [1], QQ(1)),
        (0, [2], QQ(1, 2)),
        (1, [2], QQ(1, 12)),
        (2, [2], QQ(1, 240)),
        (0, [3], QQ(1, 2)),
        (0, [4], QQ(16, 24)),
        (1, [1], QQ(0)),
    ],
)
def test_simple_hurwitz_values(simple_oracle, g, k, expected):
    assert simple_oracle.hurwitz_number(g, k) == expected


def test_genus_zero_one_part_formula(simple_oracle):
    for d in range(1, 6):
        assert simple_oracle.hurwitz_number(0, [d]) == QQ(d ** (d - 2), factorial(d))


def test_genus_one_quasi_polynomial(simple_oracle):
    for k in range(1, 5):
        assert simple_oracle.hurwitz_number(1, [k]) == QQ((k - 1) * k ** k, 24 * factorial(k))


def test_monotone_genus_zero_catalan(monotone_model):
    oracle = TauFunctionOracle(monotone_model)
    assert oracle.hurwitz_number(0, [2]) == QQ(1, 2)
    assert oracle.hurwitz_number(0, [3]) == QQ(2, 3)


def test_table_is_keyed_by_decreasing_tuples(simple_oracle):
    table = simple_oracle.hurwitz_table(0, 2, 3)
    assert set(table) == set(decreasing_tuples(2, 3))
    assert all(k == tuple(sorted(k, reverse=True)) for k in table)
