import itertools
import random

import pytest
from helpers import (RFUM2_FIXTURES, atoms, emits_infinitely_by_count, fixture, fixture_names,
                     infinite_by_count, minimal_emitters, random_graph, window)
from hypothesis import given, settings
from hypothesis import strategies as st

from ultrashift.setexpr import parse_set
from ultrashift.ultragraph import NotInG0, NotRfum2, graph_to_ultragraph


@pytest.mark.parametrize("name", fixture_names())
def test_emitter_dichotomy(name):
    ug = fixture(name)
    for A in minimal_emitters(ug):
        for B in atoms(ug):
            if not emits_infinitely_by_count(ug, B):
                continue
            AB = A.intersect(B)
            assert A.is_subset(B) or not infinite_by_count(ug, AB), (str(A), str(B))


@pytest.mark.parametrize("name", fixture_names())
def test_minimal_sink_dichotomy(name):
    ug = fixture(name)
    sinks = [c.set for c in ug.minimal_cells() if ug.is_minimal_sink(c.set)]
    for A1, A2 in itertools.product(sinks, repeat=2):
        assert A1 == A2 or not infinite_by_count(ug, A1.intersect(A2))


@pytest.mark.parametrize("name", fixture_names())
def test_minimal_emitters_are_singletons_or_infinite(name):
    ug = fixture(name)
    for A in minimal_emitters(ug):
        assert A.cardinality() in (1, None)


@pytest.mark.parametrize("name", RFUM2_FIXTURES)
def test_decompose_is_a_left_inverse_of_union(name):
    ug = fixture(name)
    for e in ug.edges_upto(window(ug)):
        R = ug.range(e)
        dec = ug.decompose(R)
        assert dec.union() == R
        for part in dec.minimal_parts:
            again = ug.decompose(part)
            assert part in again.minimal_parts
        # the finite part is made of sinks and regular vertices only
        for v in dec.finite_part.elements():
            assert ug.is_sink(v) or ug.is_regular(v)


def test_example_sink_structure():
    ug = fixture("example_sink.json")
    V = ug.family_set("V")
    assert ug.range("e") == V
    assert ug.epsilon(ug.singleton("v0")).elements() == ["e"]
    assert ug.is_minimal_sink(V)
    dec = ug.decompose(V)
    assert [g.set for g in dec.minimal_sinks] == [V]
    assert dec.finite_part.is_empty()


def test_nested_ranges_fail_rfum2():
    ug = fixture("nested_ranges.json")
    verdict = ug.check_rfum2()
    assert not verdict.holds
    assert verdict.counterexample == "x"
    assert verdict.residue is not None and not verdict.residue.is_finite()
    with pytest.raises(NotRfum2):
        ug.decompose(ug.range("x"))


def test_sets_outside_g0_are_rejected():
    ug = fixture("example_sink.json")
    A = parse_set("FAMILY(V) MINUS FINITE([V[1]])", ug.vertex_families)
    assert not ug.in_g0(A)
    with pytest.raises(NotInG0):
        ug.decompose(A)


def test_rfum2_on_random_graphs():
    rng = random.Random(7)
    for _ in range(200):
        edges, verts = random_graph(rng, rng.randint(1, 8), rng.randint(0, 14))
        ug = graph_to_ultragraph(edges, verts)
        assert ug.check_rfum2().holds
        for i, (s, t) in enumerate(edges):
            assert ug.source(f"e{i}") == s
            assert ug.range(f"e{i}").elements() == [t]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), max_size=12))
def test_graph_sinks_are_vertices_without_out_edges(pairs):
    edges = [(f"v{a}", f"v{b}") for a, b in pairs]
    verts = [f"v{i}" for i in range(6)]
    ug = graph_to_ultragraph(edges, verts)
    sources = {s for s, _ in edges}
    assert set(ug.sinks().elements()) == set(verts) - sources
