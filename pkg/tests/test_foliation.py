from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from strebel import Scalar, geodesic_flow, load_surface, parse_scalar
from strebel.foliation import (IncompleteGraphError, decompose_vertical, masur_case, ribbon_topology,
                               trace_separatrices)

from test_surface import origamis

FIX = Path(__file__).resolve().parent.parent / "fixtures"


def fixture(name):
    return load_surface(FIX / f"{name}.json")


def test_torus_one_loop():
    g = trace_separatrices(fixture("torus"))
    assert [e.length for e in g.edges] == [Scalar(1)]
    assert not g.incomplete
    (comp,) = ribbon_topology(g)
    assert (comp.genus, comp.n_boundary, comp.marked) == (0, 2, 1)
    dec = decompose_vertical(fixture("torus"))
    (cyl,) = dec.cylinders
    assert (cyl.height, cyl.circumference) == (1, 1)


def test_l_origami_graph_and_cylinders():
    s = fixture("l_origami")
    g = trace_separatrices(s)
    assert sorted(e.length for e in g.edges) == [1, 1, 1]
    (comp,) = ribbon_topology(g)
    assert (comp.genus, comp.n_boundary) == (0, 4)
    assert comp.euler == -2
    dec = decompose_vertical(s)
    got = sorted((c.height, c.circumference) for c in dec.cylinders)
    assert got == [(1, 1), (2, 1)]
    assert sorted(c.modulus for c in dec.cylinders) == [Scalar(1) / 2, 1]
    assert not masur_case(g)


def test_pillowcase_is_masur_case():
    g = trace_separatrices(fixture("pillowcase_a"))
    assert sorted(e.length for e in g.edges) == [1, 1]
    assert masur_case(g)
    comps = ribbon_topology(g)
    assert [(c.genus, c.n_boundary, c.marked) for c in comps] == [(0, 1, 2), (0, 1, 2)]
    (cyl,) = decompose_vertical(fixture("pillowcase_a")).cylinders
    assert (cyl.height, cyl.circumference) == (2, 1)


@pytest.mark.parametrize("name", ["golden_torus", "silver_torus"])
def test_irrational_twist_is_minimal(name):
    dec = decompose_vertical(fixture(name))
    assert not dec.cylinders
    (m,) = dec.minimal
    assert m.area == 1
    assert m.ue_status == "certified"
    assert m.first_return.total == m.transversal.length


def test_golden_first_return_lengths():
    (m,) = decompose_vertical(fixture("golden_torus")).minimal
    phi = (1 + parse_scalar("sqrt(5)")) / 2
    assert sorted(m.first_return.lengths) == sorted([2 - phi, phi - 1])


def test_small_budget_on_rational_surface_is_incomplete():
    g = trace_separatrices(fixture("torus"), budget=Scalar(1) / 2)
    assert g.incomplete
    with pytest.raises(IncompleteGraphError):
        decompose_vertical(fixture("torus"), g)


@given(origamis(max_squares=7))
@settings(max_examples=50, deadline=None)
def test_origami_decomposes_into_cylinders(s):
    g = trace_separatrices(s)
    for comp in ribbon_topology(g):
        assert len(comp.vertices) - len(comp.edges) == 2 - 2 * comp.genus - comp.n_boundary
    dec = decompose_vertical(s, g)
    assert not dec.minimal
    assert sum((c.area for c in dec.cylinders), Scalar(0)) == s.area()
    # with a nonempty critical graph every cylinder has two boundary curves on it
    if g.vertices:
        assert sum(c.n_boundary for c in ribbon_topology(g)) == 2 * len(dec.cylinders)


@given(origamis(max_squares=5), st.sampled_from(["2", "3", "1/3"]))
@settings(max_examples=30, deadline=None)
def test_flow_keeps_graph_and_heights(s, lam):
    lam = parse_scalar(lam)
    a, b = decompose_vertical(s), decompose_vertical(geodesic_flow(s, lam))
    assert sorted(e.length for e in a.graph.edges) == sorted(e.length for e in b.graph.edges)
    ka = sorted((c.height, c.circumference * lam) for c in a.cylinders)
    kb = sorted((c.height, c.circumference) for c in b.cylinders)
    assert ka == kb
