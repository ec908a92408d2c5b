"""Type projections, WF-net soundness, identifier soundness, liveness."""

import random

import pytest

from pnid.core import (
    Identifier,
    Marking,
    Multiset,
    NetError,
    Place,
    TypeLabel,
    TypedNet,
    Variable,
    fire_sequence,
)
from pnid.soundness import (
    WeightedNet,
    check_generalized_soundness,
    check_identifier_soundness,
    check_liveness,
    check_proper_completion,
    check_quasi_liveness,
    check_wf_soundness,
    check_weak_termination,
    depth_bounded_note,
    projection_closure,
    type_projection,
    weighted_from_classical,
)
from pnid.statespace import ExplorationBounds, explore
from pnid.verdict import Status

from conftest import load_fixture
from generators import random_micro_net, sound_wf_net
from oracles import naive_weak_termination, wf_reachable

CUSTOMER = TypeLabel("customer")
ORDER = TypeLabel("order")
PRODUCT = TypeLabel("product")


# ---------------------------------------------------------------------------
# Type projections
# ---------------------------------------------------------------------------


def test_projection_retail_customer(retail):
    wf, projected = type_projection(retail.net, CUSTOMER, retail.initial_marking)
    assert {"T", "G", "K", "V", "U"} <= set(wf.transitions)
    assert {"A", "B", "C", "D"}.isdisjoint(set(wf.transitions))
    assert {"customer", "blocked", "p", "q", "r", "s"} <= set(wf.places)
    assert "product" not in wf.places
    assert all(w == 1 for w in wf.weights.values())
    assert projected == {p: 0 for p in wf.places}


def test_projection_skips_untouched_transitions(retail):
    wf, _ = type_projection(retail.net, PRODUCT)
    assert set(wf.transitions) == {"A", "B", "C", "D"}


def test_projection_matches_filter_oracle():
    rng = random.Random(21)
    for _ in range(30):
        net, m = random_micro_net(rng)
        for label in sorted(net.place_types()):
            wf, projected = type_projection(net, label, m)
            want_places = {p.name for p in net.places.values() if label in p.place_type}
            assert set(wf.places) == want_places
            for t in net.transitions:
                touches = any(
                    v.type_label == label
                    for key, ms in net.arcs.items()
                    if t in key
                    for vec in ms.support()
                    for v in vec
                )
                assert (t in wf.transitions) == touches
            for (a, b), w in wf.weights.items():
                assert w == net.arcs[(a, b)].total()
            for p in want_places:
                assert projected[p] == m.tokens(p).total()


def test_projection_weights_count_vectors():
    doc = load_fixture("sound_net_unsound_projection.pnid")
    wf, _ = type_projection(doc.net, ORDER)
    assert wf.weights[("B", "w")] == 2
    assert wf.weights[("w", "D")] == 1


# ---------------------------------------------------------------------------
# WF-net soundness
# ---------------------------------------------------------------------------


def _chain_wf() -> WeightedNet:
    return WeightedNet(
        places=("in", "out"),
        transitions=("t",),
        weights={("in", "t"): 1, ("t", "out"): 1},
        source="in",
        sink="out",
    )


def test_wf_soundness_single_transition():
    wf = _chain_wf()
    for k in (1, 2, 3):
        assert check_wf_soundness(wf, k).status is Status.HOLDS
    assert check_generalized_soundness(wf, 3).status is Status.HOLDS


def test_wf_soundness_retail_customer_closure_violated(retail):
    wf = projection_closure(retail.net, CUSTOMER)
    assert wf.is_workflow_net()
    verdict = check_wf_soundness(wf, 1)
    assert verdict.status is Status.VIOLATED
    assert verdict.detail["clause"] in ("proper completion", "weak termination")


def test_wf_soundness_requires_interface():
    wf = WeightedNet(("p",), ("t",), {("p", "t"): 1}, source=None, sink=None)
    with pytest.raises(NetError):
        check_wf_soundness(wf, 1)


def test_wf_one_sound_but_not_two_sound():
    """Two tokens can split over the parallel branches and deadlock the
    synchronizing join; a single token cannot."""
    wf = WeightedNet(
        places=("in", "a", "b", "out"),
        transitions=("split_a", "split_b", "join"),
        weights={
            ("in", "split_a"): 1,
            ("split_a", "a"): 1,
            ("in", "split_b"): 1,
            ("split_b", "b"): 1,
            ("a", "join"): 1,
            ("b", "join"): 1,
            ("join", "out"): 2,
        },
        source="in",
        sink="out",
    )
    # oracle: direct reachability over classical markings
    states, _ = wf_reachable(wf.weights, wf.transitions, {"in": 1})
    assert all(dict(s).get("out", 0) == 0 or dict(s) == {"out": 2} for s in states)

    assert check_wf_soundness(wf, 1).status is Status.VIOLATED  # join emits 2
    verdict = check_generalized_soundness(wf, 3)
    assert verdict.status is Status.VIOLATED


def test_wf_parallel_net_generalized_sound():
    wf = WeightedNet(
        places=("in", "a", "b", "c", "d", "out"),
        transitions=("split", "ta", "tb", "join"),
        weights={
            ("in", "split"): 1,
            ("split", "a"): 1,
            ("split", "b"): 1,
            ("a", "ta"): 1,
            ("ta", "c"): 1,
            ("b", "tb"): 1,
            ("tb", "d"): 1,
            ("c", "join"): 1,
            ("d", "join"): 1,
            ("join", "out"): 1,
        },
        source="in",
        sink="out",
    )
    assert check_generalized_soundness(wf, 3).status is Status.HOLDS


def test_wf_soundness_matches_bfs_oracle_on_random_nets():
    rng = random.Random(31)
    for trial in range(25):
        wf = sound_wf_net(rng)
        verdict = check_wf_soundness(wf, 1)
        # oracle re-derives the three clauses from plain reachability
        states, edges = wf_reachable(wf.weights, wf.transitions, {wf.source: 1})
        final = tuple(sorted({(wf.sink, 1)}.union()))
        final = ((wf.sink, 1),)
        proper = all(dict(s).get(wf.sink, 0) == 0 or s == final for s in states)
        succ = {}
        for src, _, dst in edges:
            succ.setdefault(src, set()).add(dst)
        reach_final = set()
        if final in {tuple(s) for s in states}:
            rev = {}
            for src, _, dst in edges:
                rev.setdefault(dst, set()).add(src)
            stack = [final]
            reach_final = {final}
            while stack:
                cur = stack.pop()
                for prv in rev.get(cur, ()):
                    if prv not in reach_final:
                        reach_final.add(prv)
                        stack.append(prv)
        weak = all(s in reach_final for s in states)
        quasi = {t for _, t, _ in edges} == set(wf.transitions)
        want = proper and weak and quasi
        assert bool(verdict) == want, f"trial {trial}"
        assert want, f"trial {trial}: generator produced an unsound net"


# ---------------------------------------------------------------------------
# Proper completion / weak termination / identifier soundness
# ---------------------------------------------------------------------------


def test_retail_completion_witness_is_the_seven_step_chain(retail):
    verdict = check_proper_completion(
        retail.net, retail.initial_marking, CUSTOMER
    )
    assert verdict.status is Status.VIOLATED
    assert [e.transition for e in verdict.witness] == ["T", "G", "H", "J", "L", "N", "K"]
    fire_sequence(retail.net, retail.initial_marking, verdict.witness)


def test_completion_holds_when_collector_takes_the_only_token():
    x = Variable("x", ORDER)
    net = TypedNet(
        [Place("fuel"), Place("p", (ORDER,))],
        ["mk", "rm"],
        {("fuel", "mk"): [()], ("mk", "p"): [(x,)], ("p", "rm"): [(x,)]},
    )
    m0 = Marking({"fuel": [()] * 2})
    assert check_proper_completion(net, m0, ORDER).status is Status.HOLDS


def test_weak_termination_deadlocked_pair():
    doc = load_fixture("sound_projections_unsound_net.pnid")
    label = next(l for l in doc.net.place_types() if l.name == "xkind")
    verdict = check_weak_termination(doc.net, doc.initial_marking, label)
    assert verdict.status is Status.VIOLATED
    fire_sequence(doc.net, doc.initial_marking, verdict.witness)
    # oracle agrees on the complete graph
    stuck = naive_weak_termination(doc.net, doc.initial_marking, label)
    assert stuck is not None


def test_weak_termination_agrees_with_naive_oracle_on_fixtures():
    cases = [
        ("clerk_conservative.pnid", "order", True),
        ("sound_projections_unsound_net.pnid", "xkind", False),
        ("sound_projections_unsound_net.pnid", "ykind", False),
        ("sound_net_unsound_projection.pnid", "order", True),
    ]
    from pnid.resources import mark_closure

    for fixture, type_name, expect_holds in cases:
        doc = load_fixture(fixture)
        label = next(l for l in doc.net.place_types() if l.name == type_name)
        m0 = mark_closure(doc.net, doc.initial_marking, doc.resources)
        verdict = check_weak_termination(doc.net, m0, label)
        assert (verdict.status is Status.HOLDS) == expect_holds, fixture
        stuck = naive_weak_termination(doc.net, m0, label)
        assert (stuck is None) == expect_holds, fixture


def test_identifier_soundness_report_retail(retail):
    report = check_identifier_soundness(retail.net, retail.initial_marking)
    assert report.overall.status is Status.VIOLATED
    assert report.violated_types() == [CUSTOMER]
    assert report.per_type[CUSTOMER].proper_completion.status is Status.VIOLATED
    assert depth_bounded_note(report) is None


def test_identifier_soundness_vacuous_for_classical_nets():
    net = TypedNet([Place("p")], ["t"], {("p", "t"): [()], ("t", "p"): [()]})
    report = check_identifier_soundness(net, Marking({"p": [()]}))
    assert report.overall.status is Status.HOLDS
    assert report.per_type == {}


def test_identifier_soundness_n1_n2_opposite_directions():
    """Identifier soundness and projection soundness are independent."""
    n1 = load_fixture("sound_net_unsound_projection.pnid")
    report = check_identifier_soundness(n1.net, n1.initial_marking)
    assert report.overall.status is Status.HOLDS
    closure = projection_closure(n1.net, ORDER)
    assert check_wf_soundness(closure, 1).status is Status.VIOLATED

    n2 = load_fixture("sound_projections_unsound_net.pnid")
    report2 = check_identifier_soundness(n2.net, n2.initial_marking)
    assert report2.overall.status is Status.VIOLATED
    for type_name in ("xkind", "ykind"):
        label = next(l for l in n2.net.place_types() if l.name == type_name)
        closure2 = projection_closure(n2.net, label)
        assert check_wf_soundness(closure2, 1).status is Status.HOLDS, type_name
    assert depth_bounded_note(report2) is None


def test_depth_note_on_sound_fixture():
    doc = load_fixture("clerk_conservative.pnid")
    from pnid.resources import mark_closure

    m0 = mark_closure(doc.net, doc.initial_marking, doc.resources)
    report = check_identifier_soundness(doc.net, m0)
    assert report.overall.status is Status.HOLDS
    note = depth_bounded_note(report)
    assert note and "depth-bounded" in note
    graph = explore(doc.net, m0)
    from pnid.statespace import check_boundedness

    assert check_boundedness(graph, "depth").status is Status.HOLDS


# ---------------------------------------------------------------------------
# Liveness
# ---------------------------------------------------------------------------


def test_liveness_conservative_closure():
    doc = load_fixture("clerk_conservative.pnid")
    from pnid.resources import mark_closure

    m0 = mark_closure(doc.net, doc.initial_marking, doc.resources)
    graph = explore(doc.net, m0)
    assert check_liveness(graph).status is Status.HOLDS


def test_liveness_dead_transition_violated():
    x = Variable("x", ORDER)
    net = TypedNet(
        [Place("fuel"), Place("p", (ORDER,)), Place("void", (CUSTOMER,))],
        ["mk", "rm", "never"],
        {
            ("fuel", "mk"): [()],
            ("mk", "p"): [(x,)],
            ("p", "rm"): [(x,)],
            ("void", "never"): [(Variable("z", CUSTOMER),)],
        },
    )
    m0 = Marking({"fuel": [()]})
    graph = explore(net, m0)
    verdict = check_liveness(graph)
    assert verdict.status is Status.VIOLATED and verdict.detail["transition"] == "never"
    assert check_quasi_liveness(graph).status is Status.VIOLATED


def test_liveness_bounded_graph_is_inconclusive_with_quasi_report(retail):
    graph = explore(
        retail.net,
        retail.initial_marking,
        ExplorationBounds(max_states=4000, max_identifiers_per_type=2, max_tokens_per_place=6),
    )
    verdict = check_liveness(graph)
    assert verdict.status is Status.INCONCLUSIVE
    assert check_quasi_liveness(graph).status is Status.HOLDS
