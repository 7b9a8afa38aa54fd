# test_trengine.py
import pytest
from sympy.polys.domains import QQ

from src.core.errors import UnsupportedCurveError
from src.core.model import HypergeometricModel, build_curve
from src.core.oracle import TauFunctionOracle
from src.core.trengine import LocalChart, TopologicalRecursion, deck_series, initial_order


@pytest.fixture(scope="module")
def simple_tr(simple_curve):
    return TopologicalRecursion(simple_curve, "ceo")


def test_initial_order_grows_with_euler_characteristic():
    assert initial_order(0, 3) == 12
    assert initial_order(1, 1) == 12
    assert initial_order(1, 2) == 16


def test_deck_transformation_is_an_involution(simple_curve):
    sigma = deck_series(simple_curve, 0, 8)
    assert sigma[1] == QQ(-1)
    assert sigma.compose(sigma).truncate(0, 8).equals(LocalChart(simple_curve, 0, 8).sheets[0])


@pytest.mark.parametrize("g, n, k_max", [(0, 1, 4), (0, 2, 3), (0, 3, 3), (1, 1, 4), (1, 2, 3)])
def test_simple_hurwitz_tr_matches_oracle(simple_tr, simple_model, g, n, k_max):
    expected = TauFunctionOracle(simple_model).hurwitz_table(g, n, k_max)
    expansion = simple_tr.expand(g, n, k_max)
    for k, value in expected.items():
        assert expansion[k] == value, k


def test_monotone_tr_matches_oracle(monotone_curve, monotone_model):
    tr = TopologicalRecursion(monotone_curve)
    expected = TauFunctionOracle(monotone_model).hurwitz_table(1, 1, 3)
    expansion = tr.expand(1, 1, 3)
    assert all(expansion[k] == v for k, v in expected.items())


def test_stable_omegas_are_symmetric_with_zero_residue(simple_tr):
    for (g, n), omega in simple_tr.table(1, 2).items():
        assert omega.is_symmetric(), (g, n)
        assert omega.residue_sum() == 0
        assert not omega.has_pole_at_infinity()
        assert omega.max_pole_order() <= 6 * g - 6 + 2 * n + 2


def test_be_step_reduces_to_ceo_on_simple_curves(simple_curve, simple_tr):
    be = TopologicalRecursion(simple_curve, "be", check_labelling=True)
    for cell in [(0, 3), (1, 1), (1, 2)]:
        assert be.omega(*cell).agrees_with(simple_tr.omega(*cell)), cell


def test_in_chart_loop_equations(simple_tr):
    assert simple_tr.linear_loop_defect(1, 1, 0) == 0.0
    assert simple_tr.quadratic_loop_defect(0, 3, 0) == 0.0


def test_unknown_method_is_rejected(simple_curve):
    with pytest.raises(ValueError):
        TopologicalRecursion(simple_curve, "ceo+be")


def test_exact_mode_rejects_higher_critical_points():
    # Q = (1 − z)^2
    curve = build_curve(HypergeometricModel.family_one(P1=(0, 2, "-1/2")), "exact")
    [cp] = curve.critical_points
    assert cp.multiplicity == 3
    with pytest.raises(UnsupportedCurveError):
        LocalChart(curve, 0, 6)
    with pytest.raises(UnsupportedCurveError):
        TopologicalRecursion(curve, "ceo")


def test_numeric_orbifold_tr_matches_oracle(suite):
    model = suite["orbifold"]
    curve = build_curve(model, "exact", precision=60, allow_numeric_fallback=True)
    assert curve.mode == "numeric"
    tr = TopologicalRecursion(curve)
    expected = TauFunctionOracle(model).hurwitz_table(0, 3, 2)
    expansion = tr.expand(0, 3, 2)
    for k, value in expected.items():
        approx = expansion[k]
        exact = curve.scalars.convert(value)
        assert abs(approx - exact) <= curve.scalars.tolerance * max(1, abs(exact)), k


@pytest.mark.parametrize("k_max", [2, 4])
def test_bergman_expansion_matches_genus_zero_formula(simple_tr, k_max):
    expansion = simple_tr.expand(0, 2, k_max)
    assert expansion[(2, 2)] == QQ(1)
    if k_max >= 3:
        assert expansion[(3, 2)] == QQ(9, 5)
    assert expansion[(2, 1)] == QQ(2, 3)
