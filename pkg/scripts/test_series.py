# test_series.py
from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings, strategies as st
from sympy.polys.domains import QQ

from src.core.errors import ConfigurationError, TruncationError
from src.core.scalars import ComplexField, is_decimal_literal, parse_rational, rational_to_str
from src.core.series import RATIONALS, TruncSeries, s_coefficients, series_reversion, sigma_coefficients

small = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def test_parse_rational_forms():
    assert parse_rational(3) == QQ(3)
    assert parse_rational("-1/2") == QQ(-1, 2)
    assert parse_rational("0.25") == QQ(1, 4)
    assert parse_rational(Fraction(2, 6)) == QQ(1, 3)
    assert is_decimal_literal("0.25") and not is_decimal_literal("1/4")
    assert rational_to_str(QQ(6, 3)) == "2"
    assert rational_to_str(QQ(-3, 6)) == "-1/2"


def test_parse_rational_rejects_garbage():
    with pytest.raises(ConfigurationError):
        parse_rational("one half")
    with pytest.raises(ConfigurationError):
        parse_rational(True)


def test_exp_of_t():
    t = TruncSeries.from_list(RATIONALS, [0, 1], order=8)
    e = t.exp()
    for k in range(8):
        assert e[k] == QQ(1, factorial(k))


def test_geometric_inverse():
    inv = TruncSeries.from_list(RATIONALS, [1, -1], order=6).inverse()
    assert [inv[k] for k in range(6)] == [QQ(1)] * 6


def test_coefficient_beyond_truncation_raises():
    series = TruncSeries.from_list(RATIONALS, [1, 2, 3], order=3)
    with pytest.raises(TruncationError):
        series[3]


def test_reversion_of_t_exp_minus_t_gives_tree_function():
    order = 8
    f = TruncSeries.from_list(
        RATIONALS, [0] + [QQ((-1) ** (j - 1), factorial(j - 1)) for j in range(1, order)], order=order
    )
    g = series_reversion(f, order)
    for k in range(1, order):
        assert g[k] == QQ(k ** (k - 1), factorial(k))


def test_s_operator_coefficients():
    assert s_coefficients(3) == (QQ(1), QQ(1, 24), QQ(1, 1920))
    s, sigma = s_coefficients(4), sigma_coefficients(4)
    for m in range(1, 4):
        assert sum(s[i] * sigma[m - i] for i in range(m + 1)) == 0


@settings(max_examples=25, deadline=None)
@given(small, small)
def test_exp_is_additive(a, b):
    order = 6
    ea = TruncSeries.from_list(RATIONALS, [0, a], order=order).exp()
    eb = TruncSeries.from_list(RATIONALS, [0, b], order=order).exp()
    eab = TruncSeries.from_list(RATIONALS, [0, a + b], order=order).exp()
    assert (ea * eb).equals(eab)


def test_complex_field_tolerance_and_json():
    field = ComplexField(60)
    assert field.is_negligible(field.convert("1e-40"))
    assert not field.is_negligible(field.convert("1e-20"))
    re, im = field.to_json(field.convert("1/4"))
    assert re.startswith("0.25") and float(im) == 0.0
    assert abs(field.root_of_unity(4, 1) - field.ctx.mpc(0, 1)) < field.tolerance


def two_variable(data, orders=(4, 4)) -> TruncSeries:
    return TruncSeries(RATIONALS, ("x", "y"), orders, {exps: RATIONALS.convert(c) for exps, c in data.items()})


def test_two_variable_exp():
    e = two_variable({(1, 0): 1, (0, 1): 1}).exp()
    assert e.orders == (4, 4)
    for i in range(4):
        for j in range(4):
            assert e[(i, j)] == QQ(1, factorial(i) * factorial(j))


def test_two_variable_log_inverts_exp():
    h = two_variable({(1, 0): 1, (0, 1): -2, (1, 1): QQ(1, 3), (0, 2): 5})
    assert h.exp().log() == h


def test_two_variable_inverse_counts_lattice_paths():
    inv = two_variable({(0, 0): 1, (1, 0): -1, (0, 1): -1}, orders=(3, 3)).inverse()
    for i in range(3):
        for j in range(3):
            assert inv[(i, j)] == QQ(factorial(i + j), factorial(i) * factorial(j))


def test_two_variable_log_of_product_is_a_sum():
    x = two_variable({(0, 0): 1, (1, 0): 1})
    y = two_variable({(0, 0): 1, (0, 1): 1})
    assert (x * y).log() == x.log() + y.log()


def test_complex_field_accepts_values_of_any_context():
    field = ComplexField(40)
    own = field.ctx.mpc(1, 2)
    assert field.convert(own) == own
    assert field.convert(field.ctx.mpf("0.5")) == field.ctx.mpc("0.5")
    other = ComplexField(30)
    converted = field.convert(other.convert("1/4"))
    assert abs(converted - field.ctx.mpc("0.25")) < field.tolerance
    assert field.convert(1.5 + 2j) == field.ctx.mpc(1.5, 2)
