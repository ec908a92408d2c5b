"""Object-level and system-level correctness checks.

Identifier soundness of a net asks, per object type, for proper type
completion (a collector firing removes every remaining reference to the
identifiers it deletes) and weak type termination (every live identifier
can eventually be removed). Both are undecidable in general; verdicts are
three-valued, and Holds is only claimed when exploration completed
(possibly relative to the configured identifier budget, which the verdict
then says).

Classical weighted workflow nets, k-soundness and the per-type projections
that connect the two worlds live here as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .core import (
    Binding,
    FiringEvent,
    Identifier,
    Kind,
    Marking,
    Multiset,
    NetError,
    TypeLabel,
    TypedNet,
    enabled_bindings,
    fire,
)
from .statespace import (
    TRACKED_INDEX,
    BoundHit,
    CanonicalMarking,
    Edge,
    ExplorationBounds,
    StateGraph,
    canonicalize,
    explore,
    replay_path,
)
from .verdict import Status, Verdict


# ---------------------------------------------------------------------------
# Weighted Petri nets and workflow nets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightedNet:
    """A weighted place/transition net, optionally with a WF interface."""

    places: tuple[str, ...]
    transitions: tuple[str, ...]
    weights: Mapping[tuple[str, str], int]
    source: Optional[str] = None
    sink: Optional[str] = None

    def __post_init__(self):
        for (a, b), w in self.weights.items():
            if w <= 0:
                raise ValueError(f"weight of ({a},{b}) must be positive")

    def preset(self, node: str) -> frozenset[str]:
        return frozenset(a for (a, b) in self.weights if b == node)

    def postset(self, node: str) -> frozenset[str]:
        return frozenset(b for (a, b) in self.weights if a == node)

    def has_wf_interface(self) -> bool:
        return (
            self.source in self.places
            and self.sink in self.places
            and not self.preset(self.source)
            and not self.postset(self.sink)
        )

    def is_workflow_net(self) -> bool:
        """WF interface plus every node on a path from source to sink."""
        if not self.has_wf_interface():
            return False
        nodes = set(self.places) | set(self.transitions)
        forward = {self.source}
        stack = [self.source]
        while stack:
            for nxt in self.postset(stack.pop()):
                if nxt not in forward:
                    forward.add(nxt)
                    stack.append(nxt)
        backward = {self.sink}
        stack = [self.sink]
        while stack:
            for prv in self.preset(stack.pop()):
                if prv not in backward:
                    backward.add(prv)
                    stack.append(prv)
        return forward == nodes and backward == nodes


WfMarking = tuple[tuple[str, int], ...]  # sorted (place, count) pairs, no zeros


def _wf_marking(counts: Mapping[str, int]) -> WfMarking:
    return tuple(sorted((p, c) for p, c in counts.items() if c))


def _wf_fire(wf: WeightedNet, m: WfMarking, t: str) -> Optional[WfMarking]:
    counts = dict(m)
    for p in wf.preset(t):
        need = wf.weights[(p, t)]
        if counts.get(p, 0) < need:
            return None
        counts[p] = counts[p] - need
    for p in wf.postset(t):
        counts[p] = counts.get(p, 0) + wf.weights[(t, p)]
    return _wf_marking(counts)


def explore_weighted(
    wf: WeightedNet, m0: WfMarking, max_states: int = 50_000
) -> tuple[dict[WfMarking, int], list[tuple[int, str, int]], bool]:
    """Plain BFS over classical markings; returns (index, edges, complete)."""
    index: dict[WfMarking, int] = {m0: 0}
    order = [m0]
    edges: list[tuple[int, str, int]] = []
    qpos = 0
    while qpos < len(order):
        m = order[qpos]
        src = index[m]
        qpos += 1
        for t in wf.transitions:
            nxt = _wf_fire(wf, m, t)
            if nxt is None:
                continue
            idx = index.get(nxt)
            if idx is None:
                if len(order) >= max_states:
                    return index, edges, False
                idx = len(order)
                index[nxt] = idx
                order.append(nxt)
            edges.append((src, t, idx))
    return index, edges, True


def _wf_trace(edges: list[tuple[int, str, int]], target: int) -> tuple[str, ...]:
    parent: dict[int, tuple[int, str]] = {}
    for src, t, dst in edges:
        if dst not in parent and dst != 0:
            parent[dst] = (src, t)
    path = []
    cur = target
    while cur != 0:
        src, t = parent[cur]
        path.append(t)
        cur = src
    return tuple(reversed(path))


def check_wf_soundness(wf: WeightedNet, k: int = 1, max_states: int = 50_000) -> Verdict:
    """k-soundness: proper completion and weak termination from [in^k],
    quasi-liveness from [in]. Violated names the failing clause. Proper
    completion is checked during the BFS, so a violation is reported even
    when the reachability set itself would exceed the cap."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if not wf.is_workflow_net():
        raise NetError("not a workflow net (missing interface or unconnected nodes)")
    m0 = _wf_marking({wf.source: k})
    final = _wf_marking({wf.sink: k})

    index: dict[WfMarking, int] = {m0: 0}
    order = [m0]
    edges: list[tuple[int, str, int]] = []
    complete = True
    qpos = 0
    while qpos < len(order):
        m = order[qpos]
        src = index[m]
        qpos += 1
        for t in wf.transitions:
            nxt = _wf_fire(wf, m, t)
            if nxt is None:
                continue
            idx = index.get(nxt)
            if idx is None:
                idx = len(index)
                index[nxt] = idx
                order.append(nxt)
            edges.append((src, t, idx))
            if dict(nxt).get(wf.sink, 0) >= k and nxt != final:
                return Verdict.violated(
                    f"proper completion fails at k={k}: marking covers the final "
                    "marking but is larger",
                    (),
                    clause="proper completion",
                    trace=_wf_trace(edges, idx),
                )
        if len(order) >= max_states:
            complete = False
            break
    if not complete:
        return Verdict.inconclusive(f"state cap {max_states} hit at k={k}")

    reaches_final: set[int] = set()
    if final in index:
        reaches_final.add(index[final])
        reverse: dict[int, set[int]] = {}
        for src, _, dst in edges:
            reverse.setdefault(dst, set()).add(src)
        stack = [index[final]]
        while stack:
            cur = stack.pop()
            for prv in reverse.get(cur, ()):
                if prv not in reaches_final:
                    reaches_final.add(prv)
                    stack.append(prv)
    for m, idx in sorted(index.items(), key=lambda kv: kv[1]):
        if idx not in reaches_final:
            return Verdict.violated(
                f"weak termination fails at k={k}: the final marking is unreachable "
                "from a reachable marking",
                (),
                clause="weak termination",
                trace=_wf_trace(edges, idx),
            )

    if k == 1:
        fired = {t for _, t, _ in edges}
    else:
        _, edges1, complete1 = explore_weighted(wf, _wf_marking({wf.source: 1}), max_states)
        if not complete1:
            return Verdict.inconclusive(f"state cap {max_states} hit during quasi-liveness check")
        fired = {t for _, t, _ in edges1}
    dead = sorted(set(wf.transitions) - fired)
    if dead:
        return Verdict.violated(
            f"quasi-liveness fails: transition {dead[0]!r} is never enabled",
            (),
            clause="quasi-liveness",
            transition=dead[0],
        )
    return Verdict.holds(f"{k}-sound ({len(index)} markings)")


def check_generalized_soundness(wf: WeightedNet, k_max: int = 3, max_states: int = 50_000) -> Verdict:
    """Bounded surrogate: k-sound for every k ≤ k_max. Never claims
    unbounded generalized soundness."""
    for k in range(1, k_max + 1):
        verdict = check_wf_soundness(wf, k, max_states)
        if verdict.status is Status.VIOLATED:
            return Verdict.violated(
                f"not {k}-sound: {verdict.reason}", verdict.witness, k=k, **dict(verdict.detail)
            )
        if verdict.status is Status.INCONCLUSIVE:
            return Verdict.inconclusive(f"k={k}: {verdict.reason}")
    return Verdict.holds(f"k-sound for all k <= {k_max}")


def wf_lts(wf: WeightedNet, k: int = 1, max_states: int = 50_000):
    """The LTS of a marked WF-net from [in^k]; states are marking indices."""
    from .logic import FiniteLts

    if not wf.has_wf_interface():
        raise NetError("WF interface required")
    index, edges, complete = explore_weighted(wf, _wf_marking({wf.source: k}), max_states)
    if not complete:
        raise NetError("WF-net LTS exceeds the state cap")
    return FiniteLts(
        states=tuple(range(len(index))),
        initial=0,
        transitions=frozenset(edges),
    )


def wf_case_cycle_lts(wf: WeightedNet, max_states: int = 50_000):
    """The single-case reference LTS for the emitter/collector closure: a
    fresh bottom state silently starts a case at [in] and silently restarts
    after [out], mirroring how one pinned case cycles through the closure."""
    from .logic import TAU, FiniteLts

    if not wf.has_wf_interface():
        raise NetError("WF interface required")
    m_in = _wf_marking({wf.source: 1})
    m_out = _wf_marking({wf.sink: 1})
    index, edges, complete = explore_weighted(wf, m_in, max_states)
    if not complete:
        raise NetError("WF-net LTS exceeds the state cap")
    bot = -1
    transitions = set(edges)
    transitions.add((bot, TAU, index[m_in]))
    if m_out in index:
        transitions.add((index[m_out], TAU, bot))
    return FiniteLts(
        states=tuple(range(len(index))) + (bot,),
        initial=bot,
        transitions=frozenset(transitions),
    )


def weighted_from_classical(net: TypedNet) -> WeightedNet:
    """Interpret a black-token t-PNID as a weighted net. The WF interface is
    detected as the unique source/sink place when present."""
    colored = [p.name for p in net.places.values() if p.place_type]
    if colored:
        raise NetError(f"net has typed places (e.g. {colored[0]!r}); not a classical net")
    weights = {key: ms.total() for key, ms in net.arcs.items()}
    sources = [p for p in net.places if not net.preset(p)]
    sinks = [p for p in net.places if not net.postset(p)]
    source = sources[0] if len(sources) == 1 else None
    sink = sinks[0] if len(sinks) == 1 else None
    return WeightedNet(
        places=tuple(sorted(net.places)),
        transitions=net.transitions,
        weights=weights,
        source=source,
        sink=sink,
    )


# ---------------------------------------------------------------------------
# Type projections
# ---------------------------------------------------------------------------


def type_projection(
    net: TypedNet, label: TypeLabel, m: Optional[Marking] = None
) -> tuple[WeightedNet, dict[str, int]]:
    """The per-type weighted net: places whose type mentions the label,
    transitions whose adjacent inscriptions use a variable of that type,
    arc weights = inscription sizes; markings project to token counts."""
    net._require_type(label)
    places = tuple(sorted(p.name for p in net.places.values() if label in p.place_type))
    place_set = set(places)

    def touches(t: str) -> bool:
        for _, ms in net.input_arcs(t) + net.output_arcs(t):
            for vec in ms.support():
                if any(v.type_label == label for v in vec):
                    return True
        return False

    transitions = tuple(sorted(t for t in net.transitions if touches(t)))
    tset = set(transitions)
    weights = {
        (a, b): ms.total()
        for (a, b), ms in net.arcs.items()
        if (a in place_set and b in tset) or (a in tset and b in place_set)
    }
    projected = {p: m.tokens(p).total() for p in places} if m is not None else {}
    return WeightedNet(places=places, transitions=transitions, weights=weights), projected


def projection_closure(net: TypedNet, label: TypeLabel) -> WeightedNet:
    """Close the type projection into a WF-net: a fresh source place feeds
    every emitter of the type, every collector feeds a fresh sink place."""
    wf, _ = type_projection(net, label)
    emitters = sorted(net.emitters(label))
    collectors = sorted(net.collectors(label))
    if not emitters or not collectors:
        raise NetError(f"type {label.name!r} lacks emitters or collectors; no closure")
    taken = set(wf.places) | set(wf.transitions)
    source = "_in"
    while source in taken:
        source += "_"
    sink = "_out"
    while sink in taken:
        sink += "_"
    weights = dict(wf.weights)
    for t in emitters:
        weights[(source, t)] = 1
    for t in collectors:
        weights[(t, sink)] = 1
    return WeightedNet(
        places=wf.places + (source, sink),
        transitions=wf.transitions,
        weights=weights,
        source=source,
        sink=sink,
    )


# ---------------------------------------------------------------------------
# Proper type completion
# ---------------------------------------------------------------------------


def _budget_note(graph: StateGraph) -> str:
    return " (within identifier budget)" if graph.clamped_only else ""


def _completion_violation(
    net: TypedNet,
    labels: Iterable[TypeLabel],
    source_marking: Marking,
    event: FiringEvent,
    successor: Marking,
) -> Optional[tuple[TypeLabel, Identifier]]:
    """A deleted identifier of one of the types that survives the firing."""
    vs = net.variable_sets(event.transition)
    if not vs.collect:
        return None
    live = source_marking.identifiers()
    after = successor.identifiers()
    for label in labels:
        for v in sorted(vs.collect):
            if v.type_label != label:
                continue
            ident = event.binding[v]
            if ident in live and ident in after:
                return label, ident
    return None


def check_proper_completion(
    net: TypedNet,
    m0: Marking,
    label: TypeLabel,
    bounds: ExplorationBounds = ExplorationBounds(),
    graph: Optional[StateGraph] = None,
) -> Verdict:
    """Every collector firing must remove the identifiers it deletes: after
    m -[t,ψ]-> m' with t a collector, no deleted identifier of the type may
    remain in m'. Exploration stops at the first violating firing, so the
    witness is a shortest violating run."""
    net._require_type(label)
    if graph is None:
        found: list[tuple[TypeLabel, Identifier]] = []

        def stop(src_idx, src, event, succ) -> bool:
            hit = _completion_violation(net, (label,), src, event, succ)
            if hit:
                found.append(hit)
                return True
            return False

        graph = explore(net, m0, bounds, on_edge=stop)
        if graph.stopped is not None:
            state, event = graph.stopped
            _, survivor = found[0]
            return Verdict.violated(
                f"collector {event.transition!r} fired but {survivor} survived",
                graph.trace_to(state, event),
                type=label.name,
                identifier=str(survivor),
            )
    else:
        for edge in graph.edges:
            src = graph.marking(edge.source)
            succ = fire(net, src, edge.event(), check=False)
            hit = _completion_violation(net, (label,), src, edge.event(), succ)
            if hit:
                return Verdict.violated(
                    f"collector {edge.transition!r} fired but {hit[1]} survived",
                    graph.trace_to(edge.source, edge.event()),
                    type=label.name,
                    identifier=str(hit[1]),
                )
        for state, event, _ in graph.pruned:
            src = graph.marking(state)
            succ = fire(net, src, event, check=False)
            hit = _completion_violation(net, (label,), src, event, succ)
            if hit:
                return Verdict.violated(
                    f"collector {event.transition!r} fired but {hit[1]} survived "
                    "(beyond exploration bounds)",
                    graph.trace_to(state, event),
                    type=label.name,
                    identifier=str(hit[1]),
                )
    if graph.complete:
        return Verdict.holds(f"properly {label.name}-completing")
    if graph.clamped_only:
        return Verdict.holds(f"properly {label.name}-completing{_budget_note(graph)}")
    return Verdict.inconclusive("exploration incomplete; no violation found so far")


# ---------------------------------------------------------------------------
# Weak type termination (tracked-identifier product)
# ---------------------------------------------------------------------------


def _tracked_id(label: TypeLabel) -> Identifier:
    return Identifier(label, TRACKED_INDEX)


def _product_successors(net: TypedNet, m: Marking, label: TypeLabel) -> list[FiringEvent]:
    """Ordinary events, plus retracking variants: while no tracked identifier
    is live, any emission of the type may create it instead of the canonical
    fresh identifier (one variant per emitting variable)."""
    tracked = _tracked_id(label)
    track_live = tracked in m.identifiers()
    events: list[FiringEvent] = []
    for t in net.transitions:
        vs = net.variable_sets(t)
        emit_here = sorted(v for v in vs.emit if v.type_label == label)
        for b in enabled_bindings(net, m, t):
            events.append(FiringEvent(t, b))
            if not track_live:
                for v in emit_here:
                    events.append(FiringEvent(t, b.replace(v, tracked)))
    return events


def _escape_analysis(graph: StateGraph, tracked: Identifier) -> list[int]:
    """Indices of tracked states from which no tracked-free state is
    reachable (backward closure from the tracked-free states)."""
    free_states = {
        i for i, s in enumerate(graph.states) if tracked not in s.marking.identifiers()
    }
    reverse: dict[int, set[int]] = {}
    for e in graph.edges:
        reverse.setdefault(e.target, set()).add(e.source)
    escaping = set(free_states)
    stack = list(free_states)
    while stack:
        cur = stack.pop()
        for prv in reverse.get(cur, ()):
            if prv not in escaping:
                escaping.add(prv)
                stack.append(prv)
    return [i for i in range(len(graph.states)) if i not in escaping]


def check_weak_termination(
    net: TypedNet,
    m0: Marking,
    label: TypeLabel,
    bounds: ExplorationBounds = ExplorationBounds(),
) -> Verdict:
    """From every reachable marking, every live identifier of the type must
    be removable. One pinned identifier per orbit suffices: the check runs
    product explorations in which a reserved tracked identifier stands in
    for an arbitrary one, and asks that every tracked state can reach a
    tracked-free state. Roots are the original marking (fresh identifiers
    get tracked on emission) plus one variant per initially live identifier
    of the type."""
    net._require_type(label)
    tracked = _tracked_id(label)

    roots: list[tuple[Marking, Optional[Identifier]]] = [(m0, None)]
    for ident in sorted(i for i in m0.identifiers() if i.type_label == label):
        roots.append((m0.rename({ident: tracked}), ident))

    from .statespace import complete_permutation

    any_clamped = False
    any_incomplete = False
    for origin, renamed_from in roots:
        graph = explore(
            net,
            origin,
            bounds,
            pinned=(tracked,),
            successor_fn=lambda n, m: _product_successors(n, m, label),
        )
        stuck = _escape_analysis(graph, tracked)
        if stuck:
            if graph.complete:
                idx = stuck[0]
                witness = graph.trace_to(idx)
                if renamed_from is not None:
                    back = complete_permutation({tracked: renamed_from})
                    witness = tuple(
                        FiringEvent(e.transition, e.binding.rename(back)) for e in witness
                    )
                return Verdict.violated(
                    f"an identifier of type {label.name!r} can never be removed",
                    witness,
                    type=label.name,
                    state=idx,
                )
            return Verdict.inconclusive(
                "a non-escaping region was found, but exploration was bounded; "
                "an escape may exist beyond the bounds"
            )
        if not graph.complete:
            if graph.clamped_only:
                any_clamped = True
            else:
                any_incomplete = True
    if any_incomplete:
        return Verdict.inconclusive(
            "exploration incomplete; every explored identifier escapes"
        )
    note = " (within identifier budget)" if any_clamped else ""
    return Verdict.holds(f"weakly {label.name}-terminating{note}")


# ---------------------------------------------------------------------------
# Identifier soundness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TypeSoundness:
    proper_completion: Verdict
    weak_termination: Verdict

    @property
    def verdict(self) -> Verdict:
        for v in (self.proper_completion, self.weak_termination):
            if v.status is Status.VIOLATED:
                return v
        for v in (self.proper_completion, self.weak_termination):
            if v.status is Status.INCONCLUSIVE:
                return v
        return self.proper_completion


@dataclass(frozen=True)
class SoundnessReport:
    per_type: Mapping[TypeLabel, TypeSoundness]
    overall: Verdict

    def violated_types(self) -> list[TypeLabel]:
        return sorted(
            label
            for label, ts in self.per_type.items()
            if ts.verdict.status is Status.VIOLATED
        )


def check_identifier_soundness(
    net: TypedNet,
    m0: Marking,
    bounds: ExplorationBounds = ExplorationBounds(),
    stop_at_first: bool = True,
) -> SoundnessReport:
    """Proper completion plus weak termination for every object type.

    A net without object types is identifier sound vacuously. Resource-kind
    types are excluded here; their discipline is the resource module's
    conservative-management check. With ``stop_at_first`` (the default) a
    completion violation for any type short-circuits the remaining checks;
    the skipped types are reported inconclusive.
    """
    labels = net.object_types()
    if not labels:
        return SoundnessReport(
            per_type={}, overall=Verdict.holds("no object types; identifier sound vacuously")
        )

    # One exploration detects completion violations for every type at once
    # and stops at the first one, which keeps broken unbounded nets cheap.
    found: list[tuple[TypeLabel, Identifier]] = []

    def stop(src_idx, src, event, succ) -> bool:
        hit = _completion_violation(net, labels, src, event, succ)
        if hit:
            found.append(hit)
            return True
        return False

    graph = explore(net, m0, bounds, on_edge=stop)
    per_type: dict[TypeLabel, TypeSoundness] = {}

    if graph.stopped is not None:
        state, event = graph.stopped
        bad_label, survivor = found[0]
        witness = graph.trace_to(state, event)
        violated = Verdict.violated(
            f"collector {event.transition!r} fired but {survivor} survived",
            witness,
            type=bad_label.name,
            identifier=str(survivor),
        )
        skipped = Verdict.inconclusive("skipped after first violation")
        for label in labels:
            if label == bad_label:
                per_type[label] = TypeSoundness(violated, skipped)
            elif stop_at_first:
                per_type[label] = TypeSoundness(skipped, skipped)
            else:
                per_type[label] = TypeSoundness(
                    check_proper_completion(net, m0, label, bounds),
                    check_weak_termination(net, m0, label, bounds),
                )
        overall = Verdict.violated(
            f"not {bad_label.name}-sound: {violated.reason}",
            witness,
            **dict(violated.detail),
        )
        return SoundnessReport(per_type=per_type, overall=overall)

    for label in labels:
        completion = check_proper_completion(net, m0, label, bounds, graph=graph)
        termination = check_weak_termination(net, m0, label, bounds)
        per_type[label] = TypeSoundness(completion, termination)
        if stop_at_first and per_type[label].verdict.status is Status.VIOLATED:
            skipped = Verdict.inconclusive("skipped after first violation")
            for rest in labels:
                if rest not in per_type:
                    per_type[rest] = TypeSoundness(skipped, skipped)
            break

    worst = None
    for label in labels:
        v = per_type[label].verdict
        if v.status is Status.VIOLATED:
            worst = Verdict.violated(
                f"not {label.name}-sound: {v.reason}", v.witness, **dict(v.detail)
            )
            break
    if worst is None:
        for label in labels:
            v = per_type[label].verdict
            if v.status is Status.INCONCLUSIVE:
                worst = Verdict.inconclusive(f"{label.name}: {v.reason}")
                break
    if worst is None:
        note = _budget_note(graph)
        worst = Verdict.holds(f"identifier sound for {len(labels)} object type(s){note}")
    return SoundnessReport(per_type=per_type, overall=worst)


def depth_bounded_note(report: SoundnessReport) -> Optional[str]:
    """Identifier soundness implies depth-boundedness; surface that derived
    fact for cross-checking against the explorer's depth analysis."""
    if report.overall.status is Status.HOLDS and report.per_type:
        return "depth-bounded (implied by identifier soundness)"
    return None


# ---------------------------------------------------------------------------
# Liveness
# ---------------------------------------------------------------------------


def check_quasi_liveness(graph: StateGraph) -> Verdict:
    """Each transition fired at least once. Firing is existential, so Holds
    is sound even on bounded explorations; Violated needs completeness."""
    fired = {e.transition for e in graph.edges}
    missing = sorted(set(graph.net.transitions) - fired)
    if not missing:
        return Verdict.holds(f"all {len(fired)} transitions fired{_budget_note(graph)}")
    if graph.complete:
        return Verdict.violated(
            f"transition {missing[0]!r} is never enabled", (), transition=missing[0]
        )
    return Verdict.inconclusive(f"transition {missing[0]!r} not seen within bounds")


def check_liveness(graph: StateGraph) -> Verdict:
    """Full liveness on complete graphs: from every state, every transition
    is enabled somewhere in the forward cone (computed on the SCC
    condensation). Bounded graphs only support the quasi-liveness report."""
    net = graph.net
    if not graph.complete:
        quasi = check_quasi_liveness(graph)
        return Verdict.inconclusive(
            f"graph bounded; full liveness undetermined (quasi-liveness: {quasi.status.value})",
            quasi_live=quasi.status.value,
        )

    n = len(graph.states)
    succ: list[set[int]] = [set() for _ in range(n)]
    labels: list[set[str]] = [set() for _ in range(n)]
    for e in graph.edges:
        succ[e.source].add(e.target)
        labels[e.source].add(e.transition)

    comp = _scc(succ)
    n_comp = max(comp) + 1 if n else 0
    comp_succ: list[set[int]] = [set() for _ in range(n_comp)]
    comp_labels: list[set[str]] = [set() for _ in range(n_comp)]
    for v in range(n):
        comp_labels[comp[v]] |= labels[v]
        for w in succ[v]:
            if comp[w] != comp[v]:
                comp_succ[comp[v]].add(comp[w])

    # Tarjan numbering is reverse-topological: successors have lower indices.
    cone: list[set[str]] = [set() for _ in range(n_comp)]
    for c in range(n_comp):
        acc = set(comp_labels[c])
        for d in comp_succ[c]:
            acc |= cone[d]
        cone[c] = acc

    all_t = set(net.transitions)
    for v in range(n):
        missing = all_t - cone[comp[v]]
        if missing:
            t = sorted(missing)[0]
            return Verdict.violated(
                f"transition {t!r} is unreachable from some reachable marking",
                graph.trace_to(v),
                transition=t,
                state=v,
            )
    return Verdict.holds("live: every transition stays reachable from every marking")


def _scc(succ: list[set[int]]) -> list[int]:
    """Iterative Tarjan; returns component ids in reverse topological order."""
    n = len(succ)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp = [-1] * n
    stack: list[int] = []
    counter = 0
    n_comp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, iter(sorted(succ[root])))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(sorted(succ[w]))))
                    advanced = True
                    break
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                pv = work[-1][0]
                low[pv] = min(low[pv], low[v])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = n_comp
                    if w == v:
                        break
                n_comp += 1
    return comp
