"""Unsafety evaluation and (bi)simulation checking."""

import itertools
import random

import pytest

from pnid.core import Identifier, Marking, Place, TypeLabel, TypedNet, Variable
from pnid.logic import (
    TAU,
    Compare,
    FiniteLts,
    FormulaVar,
    PinnedIdentifierFilter,
    PlaceCount,
    PlaceTotal,
    TransitionOnly,
    UnsafetyFormula,
    check_bisimulation,
    check_unsafety,
    eval_unsafety,
    hide_labels,
    lts_from_graph,
    rename_labels,
    satisfying_assignment,
    saturate,
)
from pnid.netformat import parse_formula
from pnid.statespace import ExplorationBounds, explore
from pnid.verdict import Status

from conftest import load_fixture
from oracles import naive_unsafe

ORDER = TypeLabel("order")
CUSTOMER = TypeLabel("customer")


def _lts(initial, *transitions):
    states = {initial}
    for s, _, t in transitions:
        states.update({s, t})
    return FiniteLts(tuple(sorted(states, key=repr)), initial, frozenset(transitions))


# ---------------------------------------------------------------------------
# LTS operations
# ---------------------------------------------------------------------------


def test_hide_identity_and_all():
    lts = _lts(0, (0, "a", 1), (1, "b", 2))
    assert hide_labels(lts, ()) == lts
    hidden = hide_labels(lts, {"a", "b", "ghost"})
    assert all(a is TAU for _, a, _ in hidden.transitions)


def test_rename_identity_and_composition():
    lts = _lts(0, (0, "a", 1), (1, "b", 2))
    assert rename_labels(lts, {}) == lts
    r1 = {"a": "x"}
    r2 = {"x": "y", "b": TAU}
    composed = {"a": "y", "b": TAU}
    assert rename_labels(rename_labels(lts, r1), r2) == rename_labels(lts, composed)


def test_saturation_matches_transitive_closure_oracle():
    rng = random.Random(17)
    for _ in range(25):
        n = rng.randint(2, 8)
        labels = ["a", "b", TAU]
        transitions = set()
        for _ in range(rng.randint(1, 14)):
            transitions.add(
                (rng.randrange(n), rng.choice(labels), rng.randrange(n))
            )
        lts = FiniteLts(tuple(range(n)), 0, frozenset(transitions))
        sat = saturate(lts)

        tau_edges = {(s, t) for s, a, t in transitions if a is TAU}
        closure = {(s, s) for s in range(n)}
        changed = True
        while changed:
            changed = False
            for s, t in list(closure):
                for u, v in tau_edges:
                    if t == u and (s, v) not in closure:
                        closure.add((s, v))
                        changed = True
        # tau part of the saturation == reflexive-transitive closure
        assert {(s, t) for s, a, t in sat.transitions if a is TAU} == closure
        # visible part == tau* a tau*
        for s, a, t in sat.transitions:
            if a is TAU:
                continue
            assert any(
                (s, u) in closure and (v, t) in closure
                for u, b, v in transitions
                if b == a
            )


# ---------------------------------------------------------------------------
# Bisimulation
# ---------------------------------------------------------------------------


def test_identical_lts_bisimilar_both_flavors():
    lts = _lts(0, (0, "a", 1), (1, "b", 0))
    for flavor in ("strong", "weak"):
        assert check_bisimulation(lts, lts, flavor).verdict.status is Status.HOLDS


def test_tau_stutter_weakly_but_not_strongly_bisimilar():
    """a;tau;b versus a;b: the textbook 3-state pair, checked for weak
    equivalence by exhaustive relation search as well."""
    with_tau = _lts(0, (0, "a", 1), (1, TAU, 2), (2, "b", 3))
    without = _lts(10, (10, "a", 11), (11, "b", 12))
    assert check_bisimulation(with_tau, without, "strong").verdict.status is Status.VIOLATED
    assert check_bisimulation(with_tau, without, "weak").verdict.status is Status.HOLDS

    # oracle: enumerate all relations containing the root pair over the
    # saturated systems and look for a weak bisimulation
    s1, s2 = saturate(with_tau), saturate(without)
    pairs = list(itertools.product(s1.states, s2.states))

    def is_weak_bisim(rel):
        for p, q in rel:
            for s, a, t in s1.transitions:
                if s != p:
                    continue
                if not any(
                    (u == q and b == a and (t, v) in rel) for u, b, v in s2.transitions
                ) and not (a is TAU and (t, q) in rel):
                    return False
            for u, b, v in s2.transitions:
                if u != q:
                    continue
                if not any(
                    (s == p and a == b and (t, v) in rel) for s, a, t in s1.transitions
                ) and not (b is TAU and (p, v) in rel):
                    return False
        return True

    found = False
    for size in range(1, 7):
        for rel in itertools.combinations(pairs, size):
            if (0, 10) in rel and is_weak_bisim(set(rel)):
                found = True
                break
        if found:
            break
    assert found


def test_strong_implies_weak_on_random_pairs():
    rng = random.Random(23)
    for _ in range(20):
        n = rng.randint(2, 5)
        transitions = frozenset(
            (rng.randrange(n), rng.choice(["a", "b", TAU]), rng.randrange(n))
            for _ in range(rng.randint(1, 8))
        )
        l1 = FiniteLts(tuple(range(n)), 0, transitions)
        transitions2 = frozenset(
            (rng.randrange(n), rng.choice(["a", "b", TAU]), rng.randrange(n))
            for _ in range(rng.randint(1, 8))
        )
        l2 = FiniteLts(tuple(range(n)), 0, transitions2)
        strong = check_bisimulation(l1, l2, "strong").verdict
        weak = check_bisimulation(l1, l2, "weak").verdict
        if strong.status is Status.HOLDS:
            assert weak.status is Status.HOLDS
        # reflexivity/symmetry
        assert check_bisimulation(l1, l1, "weak").verdict.status is Status.HOLDS
        assert (
            check_bisimulation(l1, l2, "weak").verdict.status
            == check_bisimulation(l2, l1, "weak").verdict.status
        )


def test_violated_bisimulation_carries_distinguishing_sequence():
    l1 = _lts(0, (0, "a", 1))
    l2 = _lts(0, (0, "b", 1))
    result = check_bisimulation(l1, l2, "strong")
    assert result.verdict.status is Status.VIOLATED
    assert result.verdict.detail["distinguishing"] == ["a"]


def test_depth_bounded_bisimulation_qualifier():
    # distinguishable only at round 3
    deep1 = _lts(0, (0, "a", 1), (1, "a", 2), (2, "a", 3))
    deep2 = _lts(0, (0, "a", 1), (1, "a", 2))
    shallow = check_bisimulation(deep1, deep2, "strong", depth=1)
    assert shallow.verdict.status is Status.HOLDS
    assert "up to depth 1" in shallow.verdict.reason
    full = check_bisimulation(deep1, deep2, "strong")
    assert full.verdict.status is Status.VIOLATED


# ---------------------------------------------------------------------------
# LTS extraction
# ---------------------------------------------------------------------------


def test_lts_from_graph_empty_and_classical():
    net = TypedNet([Place("p")], ["t"], {("p", "t"): [()], ("t", "p"): [()]})
    graph = explore(net, Marking({"p": [()]}))
    lts = lts_from_graph(graph)
    assert lts.states == (0,)
    assert lts.transitions == frozenset({(0, "t", 0)})

    empty = explore(TypedNet([], [], {}), Marking.empty())
    assert lts_from_graph(empty).states == (0,)
    assert not lts_from_graph(empty).transitions


def test_lts_pinned_filter_labels():
    doc = load_fixture("unbounded_emitter.pnid")
    thing = next(iter(doc.net.place_types()))
    v = Variable("v", thing)
    pinned = (Identifier(thing, 0),)
    graph = explore(
        doc.net,
        doc.initial_marking,
        ExplorationBounds(max_identifiers_per_type=2),
        pinned=pinned,
    )
    lts = lts_from_graph(graph, PinnedIdentifierFilter((v,), pinned))
    visible = {a for _, a, _ in lts.transitions if a is not TAU}
    silent = {(s, t) for s, a, t in lts.transitions if a is TAU}
    assert visible == {"mk"} and silent  # other emissions are silent


# ---------------------------------------------------------------------------
# Unsafety evaluation
# ---------------------------------------------------------------------------


def test_unsafety_offer_property_found(retail):
    formula = parse_formula(
        "exists z:order, y:customer . created_offer(z, y) >= 1 && customer(y) >= 1",
        retail.net,
    )
    verdict = check_unsafety(retail.net, retail.initial_marking, formula)
    assert verdict.status is Status.VIOLATED
    assert [e.transition for e in verdict.witness] == ["T", "G"]
    assert verdict.detail["assignment"] == {"z": "order#0", "y": "customer#0"}


def test_unsafety_trivial_threshold_initial(retail):
    formula = parse_formula("exists . p >= 0", retail.net)
    verdict = check_unsafety(retail.net, retail.initial_marking, formula)
    assert verdict.status is Status.VIOLATED and verdict.witness == ()


def test_unsafety_safe_on_complete_graph():
    doc = load_fixture("clerk_conservative.pnid")
    from pnid.resources import mark_closure

    net = doc.net
    m0 = mark_closure(net, doc.initial_marking, doc.resources)
    graph = explore(net, m0)
    assert graph.complete

    label_order = next(l for l in net.place_types() if l.name == "order")
    # three simultaneous orders are impossible with two clerks
    formula = parse_formula(
        "exists a:order, b:order, c:order . order(a) >= 1 && order(b) >= 1 && "
        "order(c) >= 1 && a != b && b != c && a != c",
        net,
    )
    verdict = eval_unsafety(graph, formula)
    assert verdict.status is Status.HOLDS  # safe, decisively
    streaming = check_unsafety(net, m0, formula)
    assert streaming.status is Status.HOLDS

    two = parse_formula(
        "exists a:order, b:order . order(a) >= 1 && order(b) >= 1 && a != b", net
    )
    assert eval_unsafety(graph, two).status is Status.VIOLATED


def test_unsafety_pure_inequality_uses_fresh_identifiers():
    net = TypedNet([Place("p", (ORDER,))], [], {})
    graph = explore(net, Marking.empty())
    formula = UnsafetyFormula(
        bound=(FormulaVar("x", ORDER), FormulaVar("y", ORDER)),
        atoms=(Compare(FormulaVar("x", ORDER), FormulaVar("y", ORDER), equal=False),),
    )
    verdict = eval_unsafety(graph, formula)
    assert verdict.status is Status.VIOLATED  # two fresh identifiers differ


def test_unsafety_matches_exhaustive_oracle_on_fixtures():
    from pnid.resources import mark_closure

    cases = [
        ("clerk_conservative.pnid", "exists a:order, b:order . order(a) >= 1 && order(b) >= 1 && a != b", True),
        ("clerk_conservative.pnid", "exists . busy >= 3", False),
        ("clerk_conservative.pnid", "exists o:order, c:clerk . busy(o, c) >= 1 && clerk(c) >= 1", False),
        ("sound_projections_unsound_net.pnid", "exists a:xkind . p(a) >= 1 && q(a) >= 1", True),
        ("sound_projections_unsound_net.pnid", "exists . p >= 2", False),
        ("sound_net_unsound_projection.pnid", "exists a:order, b:order . w(a) >= 1 && w(b) >= 1 && a != b", True),
    ]
    for fixture, text, expect_unsafe in cases:
        doc = load_fixture(fixture)
        m0 = mark_closure(doc.net, doc.initial_marking, doc.resources)
        formula = parse_formula(text, doc.net)
        graph = explore(doc.net, m0)
        assert graph.complete
        got = eval_unsafety(graph, formula)
        assert (got.status is Status.VIOLATED) == expect_unsafe, (fixture, text)
        assert naive_unsafe(doc.net, m0, formula) == expect_unsafe, (fixture, text)
        if got.status is Status.VIOLATED:
            from pnid.core import fire_sequence

            fire_sequence(doc.net, m0, got.witness)


def test_unsafety_literal_comparisons_constant_folded(retail):
    same = parse_formula("exists . customer#0 = customer#0", retail.net)
    diff = parse_formula("exists . customer#0 = customer#1", retail.net)
    m = Marking.empty()
    assert satisfying_assignment(same, m) == {}
    assert satisfying_assignment(diff, m) is None
