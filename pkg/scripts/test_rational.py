# test_rational.py
import pytest
from sympy.polys.domains import QQ

from src.core.errors import LogTermError, PadeError
from src.core.rational import RationalFunction, integrate_rational, pade_reconstruct, reconstruct_rational
from src.core.series import RATIONALS, TruncSeries


def test_principal_part_of_double_pole():
    # 1/(z − 1)^2 + 3/(z − 1)
    f = RationalFunction.from_coeffs([-2, 3], [1, -2, 1])
    assert f.principal_part_at(1) == {-2: QQ(1), -1: QQ(3)}
    assert f.principal_part_at(0) == {}


def test_laurent_expansion_at_zero():
    f = RationalFunction.from_coeffs([1], [1, -1])
    series = f.series_at_zero(5)
    assert [series[k] for k in range(5)] == [QQ(1)] * 5


def test_pole_order_at_infinity():
    assert RationalFunction.from_coeffs([0, 0, 1], [1, 1]).pole_order_at_infinity() == 1
    assert RationalFunction.from_coeffs([1], [0, 1]).pole_order_at_infinity() == -1


def test_pade_recovers_rational_function():
    f = RationalFunction.from_coeffs([1, 2], [1, -3, 1])
    series = f.series_at_zero(12)
    assert pade_reconstruct(series, 1, 2) == f
    assert reconstruct_rational(series) == f


def test_pade_guard_rejects_non_rational_series():
    t = TruncSeries.from_list(RATIONALS, [0, 1], order=10)
    with pytest.raises(PadeError):
        reconstruct_rational(t.exp())


def test_integrate_rational_and_log_terms():
    f = RationalFunction.from_coeffs([1], [1, -2, 1])
    assert integrate_rational(f) == RationalFunction.from_coeffs([0, 1], [1, -1])
    with pytest.raises(LogTermError):
        integrate_rational(RationalFunction.from_coeffs([1], [1, 1]))
