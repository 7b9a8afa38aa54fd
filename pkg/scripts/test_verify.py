# test_verify.py
import pytest
from sympy.polys.domains import QQ

from src.core import verify
from src.core.closedform import ClosedFormEngine
from src.core.model import build_curve
from src.core.rational import RationalFunction
from src.core.trengine import TopologicalRecursion
from src.models.run_models import Verdict


def _verdicts(reports):
    return {r.verdict for r in reports}


def test_odd_simple_pole_passes(simple_curve):
    f = RationalFunction.from_coeffs([1], [-1, 1])
    assert verify.check_xihat(f, simple_curve, 0).verdict is Verdict.PASS


def test_even_double_pole_fails_with_witness(simple_curve):
    f = RationalFunction.from_coeffs([1], [1, -2, 1])
    report = verify.check_xihat(f, simple_curve, 0)
    assert report.verdict is Verdict.FAIL
    assert report.witness["power"] == -2
    assert report.witness["coefficient"] == "2"


def test_monotone_w11_is_in_xihat(monotone_model, monotone_curve):
    value = ClosedFormEngine(monotone_model).W_rational(1, 1)
    f = RationalFunction.from_frac(value)
    assert verify.check_xihat(f, monotone_curve, 0, g=1, n=1).verdict is Verdict.PASS


def test_loop_equations_on_simple_hurwitz(simple_model, simple_curve):
    reports = verify.check_loop_equations(simple_model, simple_curve, 1, 2, 3)
    assert reports
    assert _verdicts(reports) == {Verdict.PASS}
    assert any(r.check == "wr_agreement" for r in reports)


def test_loop_equation_reports_carry_scope_per_critical_point(simple_model, simple_curve):
    reports = verify.check_loop_equations(simple_model, simple_curve, 0, 2, 1)
    assert reports
    assert {r.check for r in reports} == {"loop_equation"}
    assert {(r.g, r.n, r.r) for r in reports} == {(0, 1, 1), (0, 2, 1)}
    assert {r.a for r in reports} == set(range(len(simple_curve.critical_points)))
    assert _verdicts(reports) == {Verdict.PASS}


def test_corrupted_w_fails(simple_model, simple_curve):
    corrupt = verify.corrupt_with_pole(simple_curve.critical_points[0].exact_point)
    reports = verify.check_loop_equations(simple_model, simple_curve, 1, 1, 1, corrupt=corrupt)
    assert any(r.failed for r in reports)
    failed = next(r for r in reports if r.failed)
    assert failed.witness["power"] == -2


@pytest.mark.parametrize("g, n", [(0, 1), (1, 1), (0, 2)])
def test_quadratic_loop_equation(simple_model, simple_curve, g, n):
    reports = verify.check_quadratic_loop(simple_model, simple_curve, g, n)
    assert _verdicts(reports) == {Verdict.PASS}


@pytest.mark.parametrize("g, n", [(0, 3), (1, 1), (1, 2)])
def test_projection_property(simple_model, simple_curve, g, n):
    reports = verify.check_projection(simple_model, simple_curve, g, n)
    assert {r.check for r in reports} == {"projection_poles", "projection_odd"}
    assert _verdicts(reports) == {Verdict.PASS}


def test_undeformed_r_spin_leaves_theta(suite):
    model = suite["r_spin"]
    curve = build_curve(model, "exact", allow_numeric_fallback=True)
    deformed = verify.check_projection(model, curve, 1, 1)
    assert not any(r.failed for r in deformed)
    control = verify.check_projection_control(model, curve, 1, 1)
    assert control.verdict is Verdict.PASS
    assert control.witness


def test_undeformed_variant_is_raw(suite):
    variant = verify.undeformed_variant(suite["r_spin"])
    assert variant.family.value == "raw"
    assert variant.psi_poly == [QQ(0), QQ(0), QQ(0), QQ(1)]


def test_cross_check_simple_hurwitz(simple_model, simple_curve):
    for g, n in [(0, 1), (0, 2), (0, 3), (1, 1)]:
        report = verify.cross_check(simple_model, simple_curve, g, n, 3)
        assert report.verdict is Verdict.PASS, (g, n)
        assert report.witness["engines"] == ["closedform", "oracle", "trengine"]
        assert report.witness["max_residual"] == 0.0


def test_tr_loop_equations(simple_curve):
    reports = verify.check_tr_loop_equations(TopologicalRecursion(simple_curve), 1, 2)
    assert {r.check for r in reports} == {"tr_residues", "tr_linear_loop", "tr_quadratic_loop"}
    assert _verdicts(reports) == {Verdict.PASS}


@pytest.mark.parametrize("g, n", [(0, 3), (1, 1)])
def test_quasipolynomial_fit_predicts_held_out_values(simple_model, simple_curve, g, n):
    report, polynomials = verify.quasipoly_fit(simple_model, simple_curve, g, n, 5 if n == 3 else 6)
    assert report.verdict is Verdict.PASS
    assert report.witness["fitted_degree"] <= 3 * g - 3 + n
    assert polynomials


def test_quasipolynomial_fit_rejects_corrupted_data(simple_model, simple_curve):
    values = dict(ClosedFormEngine(simple_model).W_series(1, 1, 6))
    values[(6,)] += 1
    report, polynomials = verify.quasipoly_fit(simple_model, simple_curve, 1, 1, 6, values=values)
    assert report.verdict is Verdict.FAIL
    assert polynomials is None


def test_quasipolynomial_unstable_is_skipped(simple_model, simple_curve):
    report, _ = verify.quasipoly_fit(simple_model, simple_curve, 0, 2, 4)
    assert report.verdict is Verdict.SKIPPED


def test_lemma_divisibility():
    reports = verify.check_lemma_divisibility()
    assert [r.check for r in reports] == ["lemma_psi", "lemma_psi", "lemma_z"]
    assert _verdicts(reports) == {Verdict.PASS}
