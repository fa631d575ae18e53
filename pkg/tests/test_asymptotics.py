import json
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from strebel import Scalar, geodesic_flow, load_surface
from strebel.asymptotics import (Correspondence, detour_metric, limiting_distance, modulus_ratios, modulus_term,
                                 shifted_modulus_term)
from strebel.foliation import decompose_vertical
from strebel.numeric import LogRatio

FIX = Path(__file__).resolve().parent.parent / "fixtures"

ratios = st.lists(st.fractions(min_value=Fraction(1, 20), max_value=20, max_denominator=20).map(Scalar),
                  min_size=1, max_size=5)


def widened_l(width="2"):
    """L-origami with the one-square column widened; its cylinders no longer scale together."""
    data = json.loads((FIX / "l_origami.json").read_text())
    target = None
    for g in data["gluings"]:
        a, b = g["from"], g["to"]
        if a["rect"] == b["rect"] and {a["side"], b["side"]} == {"top", "bottom"}:
            target = a["rect"]
            a["length"] = b["length"] = width
    for r in data["rectangles"]:
        if r["id"] == target:
            r["width"] = width
    return load_surface(data)


def test_detour_examples():
    d, s = detour_metric([Scalar(1), Scalar(1) / 4])
    assert (d.pretty(), s.pretty()) == ("log 2", "1/2 log 2")
    d, s = detour_metric([Scalar(2), Scalar(1) / 2])
    assert (d.pretty(), s.pretty()) == ("log 2", "0")


@given(ratios)
@settings(max_examples=200, deadline=None)
def test_detour_closed_form_and_optimal_shift(rs):
    delta, sigma = detour_metric(rs)
    assert delta == LogRatio(max(rs)) + LogRatio(max(1 / r for r in rs))
    half = delta.scale(Fraction(1, 2))
    assert shifted_modulus_term(rs, sigma) == half
    assert modulus_term(rs) >= half


@given(ratios)
@settings(max_examples=100, deadline=None)
def test_detour_is_symmetric(rs):
    assert detour_metric(rs)[0] == detour_metric([1 / r for r in rs])[0]


@given(ratios, st.fractions(min_value=Fraction(1, 10), max_value=10, max_denominator=10))
@settings(max_examples=100, deadline=None)
def test_detour_ignores_common_scale(rs, c):
    assert detour_metric(rs)[0] == detour_metric([r * Scalar(c) for r in rs])[0]


@pytest.mark.parametrize("lam", [2, 3, 10])
def test_l_origami_self_distance(lam):
    s = load_surface(FIX / "l_origami.json")
    rep = limiting_distance(decompose_vertical(s), decompose_vertical(geodesic_flow(s, lam)))
    assert rep.distance == LogRatio(Scalar(lam))
    assert rep.asymptotic == "yes"
    assert [e.ratio for e in rep.ratios] == [Scalar(lam)] * 2


def test_non_modular_pair_is_not_asymptotic():
    a = decompose_vertical(load_surface(FIX / "l_origami.json"))
    b = decompose_vertical(widened_l())
    rs = sorted(e.ratio for e in modulus_ratios(a, b))
    assert rs == [1, 2]
    rep = limiting_distance(a, b)
    assert rep.limit_surface_term == "exactZero"
    assert rep.asymptotic == "no"
    assert rep.distance == LogRatio(Scalar(2))


def test_kind_mismatch_is_not_equivalent():
    a = decompose_vertical(load_surface(FIX / "torus.json"))
    b = decompose_vertical(load_surface(FIX / "golden_torus.json"))
    rep = limiting_distance(a, b, Correspondence([(0, 0)]))
    assert rep.verdict == "notEquivalent"
    assert rep.asymptotic == "no"


def test_minimal_components_matched_through_certificates():
    g = load_surface(FIX / "golden_torus.json")
    s = load_surface(FIX / "silver_torus.json")
    same = limiting_distance(decompose_vertical(g), decompose_vertical(geodesic_flow(g, 3)))
    assert same.asymptotic == "yes"
    other = limiting_distance(decompose_vertical(g), decompose_vertical(s))
    assert other.verdict == "notEquivalent"
