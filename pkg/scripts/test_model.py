# test_model.py
import pytest
from pydantic import ValidationError
from sympy.polys.domains import QQ

from src.core.errors import ConfigurationError, UnsupportedCurveError
from src.core.model import Family, HypergeometricModel, build_curve
from src.models.run_models import ModelSpec


def test_simple_curve_has_one_simple_critical_point(simple_curve):
    assert simple_curve.mode == "exact"
    [cp] = simple_curve.critical_points
    assert cp.exact_point == QQ(1)
    assert cp.multiplicity == 2 and cp.is_simple


def test_monotone_critical_point_is_one_half(monotone_curve):
    [cp] = monotone_curve.critical_points
    assert cp.exact_point == QQ(1, 2)


def test_irrational_critical_points_need_numeric_mode(suite):
    model = suite["r_spin"]
    with pytest.raises(UnsupportedCurveError):
        build_curve(model, "exact")
    curve = build_curve(model, "exact", precision=40, allow_numeric_fallback=True)
    assert curve.mode == "numeric"
    assert len(curve.critical_points) == 3
    assert curve.all_simple


def test_fingerprint_ignores_the_name():
    a = HypergeometricModel.family_one(P1=(0, 1), name="a")
    b = HypergeometricModel.family_one(P1=(0, 1), name="b")
    c = HypergeometricModel.family_one(P1=(0, 2), name="a")
    assert a.fingerprint == b.fingerprint != c.fingerprint


def test_vanishing_at_zero_invariants():
    with pytest.raises(ConfigurationError, match="vanishing at zero"):
        HypergeometricModel.family_one(P1=(0, 1), R1=(1, 1))
    with pytest.raises(ConfigurationError, match="vanishing at zero"):
        HypergeometricModel.family_one(P1=(1, 1))


def test_zero_constant_term_of_P2_is_rejected():
    with pytest.raises(ConfigurationError, match=r"vanishing at zero.*P2\(0\)"):
        HypergeometricModel.family_one(P2=(0, 1))
    with pytest.raises(ConfigurationError, match=r"P3\(0\)"):
        HypergeometricModel.family_one(P2=(1,), P3=(0, 1))


def test_model_spec_round_trip(suite):
    for model in suite.values():
        spec = ModelSpec.from_model(model)
        assert spec.to_model().fingerprint == model.fingerprint
        assert ModelSpec.model_validate_json(spec.model_dump_json()) == spec


def test_family_two_needs_alpha():
    with pytest.raises(ValidationError):
        ModelSpec(family="II", R1=[0])


def test_family_tags(suite):
    assert suite["simple"].family is Family.FAMILY_I
    assert suite["ooguri_vafa"].family is Family.FAMILY_II
