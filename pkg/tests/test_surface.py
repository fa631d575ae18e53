import copy
import json
from pathlib import Path

import pytest
from hypothesis import assume, given, settings, strategies as st

from strebel import SurfaceError, geodesic_flow, load_surface, origami, parse_scalar

FIX = Path(__file__).resolve().parent.parent / "fixtures"


def perms(n):
    return st.permutations(list(range(n)))


@st.composite
def origamis(draw, max_squares=6):
    n = draw(st.integers(1, max_squares))
    try:
        return origami(draw(perms(n)), draw(perms(n)))
    except SurfaceError:
        assume(False)  # disconnected square pattern


def test_torus_basic():
    t = load_surface(FIX / "torus.json")
    assert t.genus() == 1
    assert t.area() == 1
    assert [s.cone_angle for s in t.singularities] == [2]
    assert t.singularities[0].is_puncture


def test_l_origami_has_one_six_pi_point():
    s = load_surface(FIX / "l_origami.json")
    assert s.genus() == 2
    assert sorted(v.cone_angle for v in s.singularities) == [6]


def test_pillowcase_four_poles():
    s = load_surface(FIX / "pillowcase_a.json")
    assert s.genus() == 0
    assert sorted(v.cone_angle for v in s.singularities) == [1, 1, 1, 1]
    assert s.euler_characteristic() == 2


@pytest.mark.parametrize("name", sorted(p.stem for p in FIX.glob("*.json")))
def test_fixture_round_trip(name):
    s = load_surface(FIX / f"{name}.json")
    again = load_surface(json.loads(json.dumps(s.to_json())))
    assert again == s
    assert again.to_json() == s.to_json()


@given(origamis())
@settings(max_examples=60, deadline=None)
def test_gauss_bonnet(s):
    # cone angles k*pi: sum(k - 2) = 4g - 4
    total = sum(k - 2 for k in s.cone_angles)
    assert total == 4 * s.genus() - 4
    assert s.euler_characteristic() == 2 - 2 * s.genus()


@given(origamis(), st.sampled_from([2, 3, "1/2", "5/3"]))
@settings(max_examples=40, deadline=None)
def test_flow_scales_area_and_composes(s, lam):
    lam = parse_scalar(lam)
    f = geodesic_flow(s, lam)
    assert f.area() == lam * s.area()
    assert geodesic_flow(f, 1 / lam) == s
    assert f.cone_angles == s.cone_angles


@given(origamis())
@settings(max_examples=30, deadline=None)
def test_rotate_four_times_is_identity(s):
    r = s.rotate()
    assert r.area() == s.area()
    assert sorted(r.cone_angles) == sorted(s.cone_angles)
    assert r.rotate().rotate().rotate() == s


def _broken(mutate):
    data = json.loads((FIX / "torus.json").read_text())
    data = copy.deepcopy(data)
    mutate(data)
    return data


def test_rejects_length_mismatch():
    def m(d):
        d["gluings"][0]["to"]["length"] = "1/2"
    with pytest.raises(SurfaceError):
        load_surface(_broken(m))


def test_rejects_uncovered_side():
    def m(d):
        del d["gluings"][1]
    with pytest.raises(SurfaceError):
        load_surface(_broken(m))


def test_rejects_unknown_rectangle():
    def m(d):
        d["gluings"][0]["to"]["rect"] = "nope"
    with pytest.raises(SurfaceError):
        load_surface(_broken(m))


def test_rejects_nonpositive_width():
    def m(d):
        d["rectangles"][0]["width"] = "0"
    with pytest.raises(SurfaceError):
        load_surface(_broken(m))


def test_rejects_illegal_side_pairing():
    # translation must pair bottom with top, half turn pairs a side with itself
    def m(d):
        d["gluings"][1]["orientation"] = "halfTurn"
    with pytest.raises(SurfaceError):
        load_surface(_broken(m))
