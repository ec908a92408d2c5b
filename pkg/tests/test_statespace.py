"""Canonical forms and symmetry-reduced exploration."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pnid.core import (
    FiringEvent,
    Identifier,
    Kind,
    Marking,
    Multiset,
    Place,
    TypeLabel,
    TypedNet,
    Variable,
    enabled_bindings,
    fire_sequence,
)
from pnid.statespace import (
    ExplorationBounds,
    canonicalize,
    check_boundedness,
    check_genericity,
    complete_permutation,
    dump_graph,
    explore,
    random_type_bijection,
)
from pnid.verdict import Status

from conftest import load_fixture
from generators import random_marking
from oracles import all_bijection_canonical, naive_explore

A, B = TypeLabel("alpha"), TypeLabel("beta")
RES = TypeLabel("res", Kind.RESOURCE)


# ---------------------------------------------------------------------------
# Canonical forms
# ---------------------------------------------------------------------------


def test_canonicalize_empty_and_single_orbit():
    empty = canonicalize(Marking.empty())
    assert empty.marking == Marking.empty() and empty.renaming == {}

    m = Marking({"p": [(Identifier(A, 7), Identifier(B, 3))]})
    can = canonicalize(m)
    assert can.marking == Marking({"p": [(Identifier(A, 0), Identifier(B, 0))]})
    assert can.renaming[Identifier(A, 7)] == Identifier(A, 0)


def test_canonicalize_matches_all_bijection_oracle():
    rng = random.Random(42)
    for trial in range(120):
        m = random_marking(rng, max_ids=4)
        got = canonicalize(m).marking
        want = all_bijection_canonical(m)
        assert got == want, f"trial {trial}: {m!r}"


def test_canonicalize_orbit_invariance():
    rng = random.Random(43)
    for trial in range(120):
        m = random_marking(rng, max_ids=4)
        h = random_type_bijection(m.identifiers(), rng)
        assert canonicalize(m).marking == canonicalize(m.rename(h)).marking, f"trial {trial}"


def test_canonicalize_idempotent():
    rng = random.Random(44)
    for _ in range(60):
        m = random_marking(rng)
        can = canonicalize(m).marking
        again = canonicalize(can)
        assert again.marking == can
        assert all(k == v for k, v in again.renaming.items())


def test_canonicalize_renaming_is_a_witness():
    rng = random.Random(45)
    for _ in range(60):
        m = random_marking(rng)
        can = canonicalize(m)
        assert m.rename(dict(can.renaming)) == can.marking
        assert set(can.renaming) == m.identifiers()


def test_canonicalize_pins_resources_and_explicit_ids():
    r5 = Identifier(RES, 5)
    a9 = Identifier(A, 9)
    m = Marking({"pool": [(r5,)], "u": [(a9,)]})
    can = canonicalize(m)
    assert can.marking.tokens("pool").count((r5,)) == 1  # resource untouched
    assert can.marking.tokens("u").count((Identifier(A, 0),)) == 1

    pinned = canonicalize(m, pinned={a9})
    assert pinned.marking == m


def test_canonicalize_symmetric_rings_exactly():
    """Two rings of different length defeat naive color refinement; the
    search must still deliver the true lexicographic minimum."""
    ids = [Identifier(A, i) for i in range(10, 17)]
    ring3 = [(ids[0], ids[1]), (ids[1], ids[2]), (ids[2], ids[0])]
    ring4 = [(ids[3], ids[4]), (ids[4], ids[5]), (ids[5], ids[6]), (ids[6], ids[3])]
    m = Marking({"w": ring3 + ring4})
    got = canonicalize(m).marking
    want = all_bijection_canonical(m)
    assert got == want


def test_complete_permutation_closes_chains():
    a0, a1, a2 = (Identifier(A, i) for i in range(3))
    perm = complete_permutation({a0: a1})
    assert perm == {a0: a1, a1: a0}
    perm = complete_permutation({a0: a1, a1: a2})
    assert perm == {a0: a1, a1: a2, a2: a0}


# ---------------------------------------------------------------------------
# Exploration
# ---------------------------------------------------------------------------


def _counter_net():
    """Classical 1-safe net: a token cycles through three black places."""
    places = [Place("p0"), Place("p1"), Place("p2")]
    arcs = {
        ("p0", "t01"): [()],
        ("t01", "p1"): [()],
        ("p1", "t12"): [()],
        ("t12", "p2"): [()],
        ("p2", "t20"): [()],
        ("t20", "p0"): [()],
    }
    return TypedNet(places, ["t01", "t12", "t20"], arcs), Marking({"p0": [()]})


def test_explore_classical_net_matches_naive_bfs():
    net, m0 = _counter_net()
    graph = explore(net, m0)
    states, edges, complete = naive_explore(net, m0)
    assert complete and graph.complete
    assert len(graph.states) == len(states) == 3
    assert len(graph.edges) == len(edges) == 3


def test_explore_collapses_symmetric_identifiers():
    x = Variable("x", A)
    net = TypedNet(
        [Place("fuel"), Place("pool", (A,))],
        ["mk"],
        {("fuel", "mk"): [()], ("mk", "pool"): [(x,)]},
    )
    m0 = Marking({"fuel": [()] * 3})
    graph = explore(net, m0)
    assert graph.complete
    # 0..3 identifiers, indistinguishable: 4 canonical states
    assert len(graph.states) == 4
    states, _, complete = naive_explore(net, m0)
    assert complete and len(states) == 4  # canonical fresh policy: same here


def test_explore_conservative_clerks_is_finite():
    doc = load_fixture("clerk_conservative.pnid")
    from pnid.resources import mark_closure

    m0 = mark_closure(doc.net, doc.initial_marking, doc.resources)
    graph = explore(doc.net, m0)
    assert graph.complete and not graph.bound_hits
    assert len(graph.states) > 1


def test_explore_unbounded_emitter_hits_identifier_budget():
    doc = load_fixture("unbounded_emitter.pnid")
    graph = explore(doc.net, doc.initial_marking, ExplorationBounds(max_states=500))
    assert not graph.complete
    assert any(h.kind == "ids" for h in graph.bound_hits)
    assert graph.clamped_only


def test_explore_edge_replay():
    doc = load_fixture("clerk_conservative.pnid")
    from pnid.resources import mark_closure

    net = doc.net
    m0 = mark_closure(net, doc.initial_marking, doc.resources)
    graph = explore(net, m0)
    for idx in range(len(graph.states)):
        trace = graph.trace_to(idx)
        final = fire_sequence(net, m0, trace)
        assert canonicalize(final).marking == graph.states[idx].marking
    # every edge refires from its source representative to its target
    for e in graph.edges:
        from pnid.core import fire

        nxt = fire(net, graph.marking(e.source), e.event())
        assert canonicalize(nxt).marking == graph.marking(e.target)


def test_explore_is_deterministic():
    doc = load_fixture("clerk_conservative.pnid")
    from pnid.resources import mark_closure

    m0 = mark_closure(doc.net, doc.initial_marking, doc.resources)
    g1 = explore(doc.net, m0)
    g2 = explore(doc.net, m0)
    assert dump_graph(g1) == dump_graph(g2)
    assert [s.marking for s in g1.states] == [s.marking for s in g2.states]


def test_explore_max_depth_truncates():
    net, m0 = _counter_net()
    graph = explore(net, m0, ExplorationBounds(max_depth=1))
    assert len(graph.states) == 2
    assert any(h.kind == "depth" for h in graph.bound_hits)


# ---------------------------------------------------------------------------
# Boundedness
# ---------------------------------------------------------------------------


def test_boundedness_no_transitions():
    net = TypedNet([Place("p", (A,))], [], {})
    m0 = Marking({"p": [(Identifier(A, 0),), (Identifier(A, 1),)]})
    graph = explore(net, m0)
    verdict = check_boundedness(graph, "bounded")
    assert verdict.status is Status.HOLDS and verdict.detail["bound"] == 2


def test_boundedness_retail_width_violated(retail):
    from pnid.statespace import measure_boundedness

    verdict = measure_boundedness(
        retail.net,
        retail.initial_marking,
        "width",
        ExplorationBounds(max_states=20_000, max_identifiers_per_type=3),
    )
    assert verdict.status is Status.VIOLATED
    assert verdict.detail["detail"] in {"customer", "product", "order"}
    # the witness replays
    fire_sequence(retail.net, retail.initial_marking, verdict.witness)


def test_boundedness_conservative_closure_holds():
    doc = load_fixture("clerk_conservative.pnid")
    from pnid.resources import mark_closure

    m0 = mark_closure(doc.net, doc.initial_marking, doc.resources)
    graph = explore(doc.net, m0)
    for mode in ("bounded", "width", "depth"):
        assert check_boundedness(graph, mode).status is Status.HOLDS


# ---------------------------------------------------------------------------
# Genericity
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "fixture",
    ["clerk_conservative.pnid", "sound_projections_unsound_net.pnid", "parallel_lifecycle.pnid"],
)
def test_genericity_self_test_holds(fixture):
    doc = load_fixture(fixture)
    from pnid.resources import mark_closure

    m0 = mark_closure(doc.net, doc.initial_marking, doc.resources)
    verdict = check_genericity(doc.net, m0, samples=60, seed=7)
    assert verdict.status is Status.HOLDS


def test_genericity_catches_broken_canonicalizer(monkeypatch):
    """Mutation test: a canonicalizer that forgets one identifier's orbit
    must be flagged."""
    import pnid.statespace as ss

    doc = load_fixture("parallel_lifecycle.pnid")
    real = ss.canonicalize

    def broken(m, pinned=(), pin_resources=True):
        # pin everything: isomorphic markings no longer collapse
        return real(m, pinned=m.identifiers(), pin_resources=pin_resources)

    monkeypatch.setattr(ss, "canonicalize", broken)
    verdict = ss.check_genericity(doc.net, doc.initial_marking, samples=40, seed=3)
    assert verdict.status is Status.VIOLATED
