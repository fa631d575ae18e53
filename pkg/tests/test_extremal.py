from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from strebel import Scalar, geodesic_flow, load_surface, parse_scalar
from strebel.extremal import (AffineMapSpec, Curve, ExtBounds, ExtremalError, affine_glue_map, annulus_power_map,
                              continuity_defects, ext_bounds, kerckhoff_check, kappa, qc_distortion_check,
                              walsh_limit_check)
from strebel.numeric import LogRatio

FIX = Path(__file__).resolve().parent.parent / "fixtures"
F = Fraction


def fixture(name):
    return load_surface(FIX / f"{name}.json")


def test_torus_extremal_length_is_exact():
    t = geodesic_flow(fixture("torus"), 3)
    assert ext_bounds(t, Curve.parse("horizontal")) == ExtBounds(Scalar(3), Scalar(3))
    assert ext_bounds(t, Curve.parse("vertical")) == ExtBounds(Scalar(1) / 3, Scalar(1) / 3)
    # the (1,1) curve has flat length sqrt(10) on the 3 x 1 torus of area 3
    assert ext_bounds(t, Curve.parse("torus:1,1")).lower == Scalar(10) / 3


def test_cylinder_core_bounds_bracket():
    b = ext_bounds(fixture("l_origami"), Curve.parse("vertical-core:0"))
    assert b.lower <= b.upper


def test_kerckhoff_flat_torus():
    out = kerckhoff_check(fixture("torus"), 4, [Curve.parse("horizontal"), Curve.parse("vertical")])
    assert out["_achieved"] == LogRatio(Scalar(4))
    assert out["_achieved"] == out["_target"]


def test_unknown_curve_rejected():
    with pytest.raises(ExtremalError):
        Curve.parse("spiral")


@pytest.mark.parametrize("name,e2", [("torus", Scalar(1)), ("l_origami", Scalar(3) / 2)])
def test_walsh_sandwich(name, e2):
    lams = [2 ** k for k in range(11)]
    out = walsh_limit_check(fixture(name), Curve.parse("horizontal-core:0"), lams)
    assert out["E2"] == str(e2)
    rows = out["rows"]
    assert all(r["brackets"] for r in rows)
    assert rows[-1]["relativeWidth"] < 0.1
    uppers = [parse_scalar(r["upper"]) for r in rows]
    assert all(a >= b for a, b in zip(uppers, uppers[1:]))


def test_walsh_vertical_core_tends_to_zero():
    out = walsh_limit_check(fixture("l_origami"), Curve.parse("vertical-core:0"), [1, 16, 256])
    assert out["E2"] == "0"
    highs = [float(parse_scalar(r["upper"])) for r in out["rows"]]
    assert highs[-1] < highs[0] / 100


@st.composite
def specs(draw, eps):
    a = F(draw(st.integers(4, 30)), 4)
    b = a * F(draw(st.integers(4, 10)), 10)
    ci = draw(st.integers(1, 3))
    c = b * F(ci, 10)
    d = b * F(draw(st.integers(5, 10 - ci)), 10)  # keeps c <= b - d
    B = F(draw(st.integers(5, 20)), 10)
    C = F(draw(st.integers(5, 30)), 10)
    s1, s2 = B * (1 + eps), B  # then b2 = B b forces the third slope B(1 - eps c/(b - d))
    c2 = s1 * c
    d2 = c2 + s2 * (d - c)
    return AffineMapSpec.make(a, b, c, d, C * a, B * b, c2, d2)


@pytest.mark.parametrize("eps", [F(1, 10), F(1, 100)])
@given(data=st.data())
@settings(max_examples=25, deadline=None)
def test_affine_map_bound(eps, data):
    spec = data.draw(specs(eps))
    assert spec.epsilon == eps
    out = affine_glue_map(spec, n=24)
    assert out["withinBound"]
    assert out["samplesBelowSymbolic"]
    assert all(x == 0 for x in continuity_defects(spec))


def test_affine_identity_and_pure_stretch():
    one = AffineMapSpec.make(2, 1, F(1, 3), F(2, 3), 2, 1, F(1, 3), F(2, 3))
    assert affine_glue_map(one)["symbolicMaxK"] == pytest.approx(1.0, abs=1e-12)
    stretch = AffineMapSpec.make(2, 1, F(1, 3), F(2, 3), 4, 1, F(1, 3), F(2, 3))
    assert affine_glue_map(stretch)["symbolicMaxK"] == pytest.approx(2.0, abs=1e-12)


def test_affine_exact_values_on_boundary():
    spec = AffineMapSpec.make(2, 1, F(1, 3), F(2, 3), 4, F(11, 10), F(2, 5), F(4, 5))
    u, v = spec(spec.a, spec.b)
    assert (u, v) == (spec.a2, spec.b2)
    assert spec(0, spec.c) == (0, spec.c2)


def test_kappa_grows_with_eps():
    assert kappa(1.0, 0.0) == pytest.approx(2.0)
    assert kappa(2.0, 0.1) > kappa(2.0, 0.01)


@pytest.mark.parametrize("r", [F(1, 3), F(1, 2), 1, 2, 3])
def test_power_map_dilatation(r):
    out = annulus_power_map(Scalar(r))
    assert out["samples"] == 10_000
    assert out["maxError"] < 1e-12


def test_qc_distortion_interval():
    b = qc_distortion_check(2, ExtBounds(Scalar(1), Scalar(3)))
    assert (b.lower, b.upper) == (Scalar(1) / 2, Scalar(6))
    with pytest.raises(ExtremalError):
        qc_distortion_check(F(1, 2), b)
