"""Symmetry-reduced state spaces.

Markings that differ only by a type-respecting renaming of identifiers are
behaviourally indistinguishable, so exploration works on canonical
representatives: the lexicographically least serialization of a marking
over all admissible renamings. Identifiers of resource-kind types (and any
explicitly pinned identifiers) keep their literal identity, which is what
the resource checks and the tracked-identifier constructions rely on.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .core import (
    Binding,
    FiringEvent,
    Identifier,
    IdVector,
    Kind,
    Marking,
    Multiset,
    TypeLabel,
    TypedNet,
    enabled_bindings,
    fire,
    fresh_identifier,
)
from .verdict import Status, Verdict

#: Reserved index for the tracked identifier used by product constructions;
#: canonical renamings never assign it, so a pinned tracked identifier can
#: be followed through the quotient graph.
TRACKED_INDEX = 10**9


def _id_key(ident: Identifier) -> tuple:
    return (ident.type_label.name, ident.index)


# ---------------------------------------------------------------------------
# Canonical forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CanonicalMarking:
    """A canonical representative plus the renaming that produced it."""

    marking: Marking
    renaming: Mapping[Identifier, Identifier]

    def inverse_renaming(self) -> dict[Identifier, Identifier]:
        return {v: k for k, v in self.renaming.items()}


class _CanonSearch:
    """Exact lexicographic-minimum search over identifier renamings.

    Entries ``(place, vector, count)`` are emitted one at a time in sorted
    order; free identifiers receive canonical indices in order of first
    occurrence along the chosen emission order. Branching happens only when
    several remaining entries tie for the minimal provisional key; ties
    whose fresh identifiers are exchangeable by a verified marking
    automorphism are pruned, which keeps fully symmetric tokens cheap while
    staying exact.
    """

    def __init__(self, marking: Marking, pinned: frozenset[Identifier]):
        self.entries: list[tuple[str, IdVector, int]] = [
            (place, vec, cnt) for place, ms in marking.items() for vec, cnt in ms.items()
        ]
        self.pinned = pinned
        self.free = sorted(
            (i for i in marking.identifiers() if i not in pinned), key=_id_key
        )
        self.best: Optional[list[tuple]] = None
        self.best_assign: Optional[dict[Identifier, Identifier]] = None
        self.n = len(self.entries)
        self.occurrences: dict[Identifier, int] = {}
        for _, vec, _ in self.entries:
            for ident in vec:
                self.occurrences[ident] = self.occurrences.get(ident, 0) + 1
        self._baseline = sorted(self.entries)

    def run(self) -> tuple[list[tuple], dict[Identifier, Identifier]]:
        if not self.free:
            serial = sorted(self._entry_key(e, {}, {})[0] for e in self.entries)
            return serial, {}
        forced = self._forced_assignment()
        if forced is not None:
            serial = sorted(self._entry_key(e, forced, {})[0] for e in self.entries)
            return serial, forced
        self._rec([], [False] * self.n, {}, {})
        assert self.best is not None and self.best_assign is not None
        return self.best, self.best_assign

    def _forced_assignment(self) -> Optional[dict[Identifier, Identifier]]:
        """With at most one free identifier per type every admissible
        renaming maps it to index 0; no search is needed."""
        seen: set[str] = set()
        assign = {}
        for ident in self.free:
            tname = ident.type_label.name
            if tname in seen:
                return None
            seen.add(tname)
            assign[ident] = Identifier(ident.type_label, 0)
        return assign

    def _entry_key(
        self,
        entry: tuple[str, IdVector, int],
        assign: Mapping[Identifier, Identifier],
        counters: Mapping[str, int],
    ) -> tuple[tuple, dict[Identifier, Identifier]]:
        """Provisional sort key; allocates provisional indices to unassigned
        free identifiers in first-occurrence order."""
        place, vec, cnt = entry
        local: dict[Identifier, Identifier] = {}
        ctr = dict(counters)
        mapped = []
        for ident in vec:
            if ident in self.pinned:
                mapped.append(_id_key(ident))
                continue
            target = assign.get(ident) or local.get(ident)
            if target is None:
                tname = ident.type_label.name
                target = Identifier(ident.type_label, ctr.get(tname, 0))
                ctr[tname] = target.index + 1
                local[ident] = target
            mapped.append(_id_key(target))
        return (place, tuple(mapped), cnt), local

    def _automorphic(self, delta_a: dict, delta_b: dict, assign: Mapping) -> bool:
        """Is the swap pairing delta_a's fresh ids with delta_b's (by target
        index) a marking automorphism fixing pinned and assigned ids?"""
        by_target_a = {v: k for k, v in delta_a.items()}
        by_target_b = {v: k for k, v in delta_b.items()}
        if set(by_target_a) != set(by_target_b):
            return False
        swap: dict[Identifier, Identifier] = {}
        for target, ia in by_target_a.items():
            ib = by_target_b[target]
            if ia == ib:
                continue
            if ia in assign or ib in assign or ia in self.pinned or ib in self.pinned:
                return False
            if swap.get(ia, ib) != ib or swap.get(ib, ia) != ia:
                return False
            swap[ia] = ib
            swap[ib] = ia
        if not swap:
            return True
        original = sorted((p, v, c) for p, v, c in self.entries)
        swapped = sorted(
            (p, tuple(swap.get(i, i) for i in v), c) for p, v, c in self.entries
        )
        return original == swapped

    def _rec(
        self,
        out: list[tuple],
        used: list[bool],
        assign: dict[Identifier, Identifier],
        counters: dict[str, int],
    ) -> None:
        pos = len(out)
        if pos == self.n:
            if self.best is None or out < self.best:
                self.best = list(out)
                self.best_assign = dict(assign)
            return

        candidates: list[tuple[tuple, int, dict]] = []
        for e_i in range(self.n):
            if used[e_i]:
                continue
            key, local = self._entry_key(self.entries[e_i], assign, counters)
            candidates.append((key, e_i, local))
        min_key = min(k for k, _, _ in candidates)

        # Emitted keys are nondecreasing under assignment growth, so the
        # greedy minimum at each position enumerates exactly the candidate
        # lexicographic minima; prefixes already above the best are dead.
        if self.best is not None:
            prefix = self.best[: pos + 1]
            if out + [min_key] > prefix:
                return

        kept: list[tuple[int, dict]] = []
        for key, e_i, local in candidates:
            if key != min_key:
                continue
            if any(self._automorphic(k_local, local, assign) for _, k_local in kept):
                continue
            kept.append((e_i, local))

        out.append(min_key)
        for e_i, local in kept:
            used[e_i] = True
            new_counters = dict(counters)
            for ident, target in local.items():
                assign[ident] = target
                tname = ident.type_label.name
                new_counters[tname] = max(new_counters.get(tname, 0), target.index + 1)
            self._rec(out, used, assign, new_counters)
            for ident in local:
                del assign[ident]
            used[e_i] = False
            if self.best is not None and out > self.best[:pos + 1]:
                break
        out.pop()


def canonicalize(
    m: Marking,
    pinned: Iterable[Identifier] = (),
    pin_resources: bool = True,
) -> CanonicalMarking:
    """Canonical representative of ``m`` up to type-respecting renaming.

    ``pinned`` identifiers (plus all identifiers of resource-kind types when
    ``pin_resources``) map to themselves; all others map onto contiguous
    indices per type, chosen so the serialized marking is lexicographically
    least. Idempotent and orbit-invariant: isomorphic markings share their
    canonical form.
    """
    pin = set(pinned)
    if pin_resources:
        pin.update(i for i in m.identifiers() if i.type_label.kind == Kind.RESOURCE)
    search = _CanonSearch(m, frozenset(pin))
    serial, assign = search.run()
    full = {i: i for i in pin if i in m.identifiers()}
    full.update(assign)
    return CanonicalMarking(marking=m.rename(assign), renaming=full)


def marking_isomorphic(m1: Marking, m2: Marking, pin_resources: bool = True) -> bool:
    return (
        canonicalize(m1, pin_resources=pin_resources).marking
        == canonicalize(m2, pin_resources=pin_resources).marking
    )


# ---------------------------------------------------------------------------
# Exploration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExplorationBounds:
    """Semi-decision envelope for exploration.

    ``max_identifiers_per_type`` is a generative clamp: successors that
    would raise a type's active-identifier count above it are pruned (and
    recorded), so checks can still complete *relative to that budget*. The
    other bounds record a hit and prune (or, for ``max_states``, stop).
    """

    max_states: int = 100_000
    max_tokens_per_place: int = 16
    max_identifiers_per_type: int = 12
    max_depth: Optional[int] = None

    def __post_init__(self):
        if self.max_states <= 0 or self.max_tokens_per_place <= 0 or self.max_identifiers_per_type <= 0:
            raise ValueError("bounds must be positive")
        if self.max_depth is not None and self.max_depth <= 0:
            raise ValueError("bounds must be positive")


@dataclass(frozen=True)
class BoundHit:
    kind: str  # states | tokens | ids | depth
    detail: str = ""  # offending place / type name
    state: int = -1  # source state of the pruned event (or last state)
    event: Optional[FiringEvent] = None

    def __str__(self) -> str:
        text = f"{self.kind} bound hit"
        if self.detail:
            text += f" ({self.detail})"
        return text


@dataclass(frozen=True)
class Edge:
    source: int
    transition: str
    binding: Binding  # in the coordinates of the source representative
    target: int

    @property
    def digest(self) -> str:
        return ",".join(f"{v.name}={i}" for v, i in self.binding.items())

    def event(self) -> FiringEvent:
        return FiringEvent(self.transition, self.binding)


@dataclass
class StateGraph:
    """Canonical reachability graph; doubles as a finite LTS.

    Edges fire from the *source representative*: replaying
    ``edge.event()`` on ``states[edge.source].marking`` and canonicalizing
    yields ``states[edge.target].marking``.
    """

    net: TypedNet
    origin: Marking
    states: list[CanonicalMarking] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)
    initial: int = 0
    out_edges: list[list[int]] = field(default_factory=list)
    parent: list[Optional[tuple[int, int]]] = field(default_factory=list)  # (state, edge idx)
    depth: list[int] = field(default_factory=list)
    bound_hits: list[BoundHit] = field(default_factory=list)
    pruned: list[tuple[int, FiringEvent, str]] = field(default_factory=list)
    pinned: frozenset[Identifier] = frozenset()
    stopped: Optional[tuple[int, FiringEvent]] = None  # early stop via on_edge

    @property
    def complete(self) -> bool:
        """True when the full canonical reachability set was explored."""
        return not self.bound_hits and self.stopped is None

    @property
    def clamped_only(self) -> bool:
        """True when the only bounds hit were identifier budgets, i.e. the
        graph is complete for the identifier-budget-restricted semantics."""
        return bool(self.bound_hits) and all(h.kind == "ids" for h in self.bound_hits)

    def marking(self, idx: int) -> Marking:
        return self.states[idx].marking

    def path_to(self, idx: int) -> list[Edge]:
        path: list[Edge] = []
        cur = idx
        while self.parent[cur] is not None:
            src, e_i = self.parent[cur]
            path.append(self.edges[e_i])
            cur = src
        path.reverse()
        return path

    def trace_to(self, idx: int, extra: Optional[FiringEvent] = None) -> tuple[FiringEvent, ...]:
        """A firing sequence from the *original* marking into state ``idx``
        (optionally extended by one more event), replayable via core.fire."""
        return replay_path(self, self.path_to(idx), extra)


def _exceeds(m: Marking, bounds: ExplorationBounds) -> Optional[tuple[str, str]]:
    for place, ms in m.items():
        if ms.total() > bounds.max_tokens_per_place:
            return ("tokens", place)
    per_type: dict[str, int] = {}
    for ident in m.identifiers():
        per_type[ident.type_label.name] = per_type.get(ident.type_label.name, 0) + 1
    for tname, cnt in sorted(per_type.items()):
        if cnt > bounds.max_identifiers_per_type:
            return ("ids", tname)
    return None


def explore(
    net: TypedNet,
    m0: Marking,
    bounds: ExplorationBounds = ExplorationBounds(),
    pinned: Iterable[Identifier] = (),
    successor_fn: Optional[Callable[[TypedNet, Marking], list[FiringEvent]]] = None,
    on_edge: Optional[Callable[[int, Marking, FiringEvent, Marking], bool]] = None,
) -> StateGraph:
    """Breadth-first closure over canonical markings.

    Deterministic for fixed inputs: states are numbered in discovery order,
    successors of a state are processed sorted by (transition, binding).
    ``successor_fn`` may override plain enabled-event enumeration (used by
    the tracked-identifier product construction). ``on_edge`` sees every
    generated firing, including ones whose successor is later pruned by a
    bound; returning True stops the exploration with ``graph.stopped`` set,
    which is how checkers cut exploration at a first violation.
    """
    pinned = frozenset(pinned)
    graph = StateGraph(net=net, origin=m0, pinned=pinned)

    def successors(m: Marking) -> list[FiringEvent]:
        if successor_fn is not None:
            return successor_fn(net, m)
        events = []
        for t in net.transitions:
            for b in enabled_bindings(net, m, t):
                events.append(FiringEvent(t, b))
        return events

    root = canonicalize(m0, pinned=pinned)
    canon_cache: dict[Marking, CanonicalMarking] = {}
    index: dict[Marking, int] = {root.marking: 0}
    graph.states.append(root)
    graph.out_edges.append([])
    graph.parent.append(None)
    graph.depth.append(0)

    hit_kinds: set[str] = set()

    def record_hit(kind: str, detail: str, state: int, event: Optional[FiringEvent]) -> None:
        if kind not in hit_kinds:
            hit_kinds.add(kind)
            graph.bound_hits.append(BoundHit(kind, detail, state, event))
        if event is not None and len(graph.pruned) < 10_000:
            graph.pruned.append((state, event, kind))

    start_violation = _exceeds(m0, bounds)
    if start_violation:
        record_hit(start_violation[0], start_violation[1], 0, None)

    queue = [0]
    qpos = 0
    while qpos < len(queue):
        cur = queue[qpos]
        qpos += 1
        cur_depth = graph.depth[cur]
        rep = graph.states[cur].marking
        events = successors(rep)
        if bounds.max_depth is not None and cur_depth >= bounds.max_depth:
            if events:
                record_hit("depth", str(bounds.max_depth), cur, None)
            continue
        for event in events:
            succ = fire(net, rep, event, check=False)
            if on_edge is not None and on_edge(cur, rep, event, succ):
                graph.stopped = (cur, event)
                return graph
            violation = _exceeds(succ, bounds)
            if violation:
                record_hit(violation[0], violation[1], cur, event)
                continue
            cached = canon_cache.get(succ)
            if cached is None:
                cached = canonicalize(succ, pinned=pinned)
                canon_cache[succ] = cached
            can = cached
            idx = index.get(can.marking)
            if idx is None:
                if len(graph.states) >= bounds.max_states:
                    record_hit("states", str(bounds.max_states), cur, event)
                    return graph
                idx = len(graph.states)
                index[can.marking] = idx
                graph.states.append(can)
                graph.out_edges.append([])
                graph.parent.append(None)
                graph.depth.append(cur_depth + 1)
                queue.append(idx)
            e_i = len(graph.edges)
            graph.edges.append(Edge(cur, event.transition, event.binding, idx))
            graph.out_edges[cur].append(e_i)
            if graph.parent[idx] is None and idx != graph.initial:
                graph.parent[idx] = (cur, e_i)
    return graph


def replay_path(
    graph: StateGraph, path: Sequence[Edge], extra: Optional[FiringEvent] = None
) -> tuple[FiringEvent, ...]:
    """Translate a path of canonical edges into a firing sequence that
    replays from the graph's original (pre-canonicalization) marking."""
    net = graph.net
    root = graph.states[graph.initial]
    # map: representative-side identifier -> concrete-side identifier
    iso = root.inverse_renaming()
    concrete = graph.origin
    events: list[FiringEvent] = []

    def translate(rep_marking: Marking, event: FiringEvent):
        nonlocal iso, concrete
        vs = net.variable_sets(event.transition)
        conc_assign = {}
        fresh_map = {}
        taken = set(concrete.identifiers())
        for v, ident in event.binding.items():
            if v in vs.emit:
                conc = fresh_identifier(v.type_label, taken)
                taken.add(conc)
                fresh_map[ident] = conc
                conc_assign[v] = conc
            else:
                conc_assign[v] = iso[ident]
        conc_event = FiringEvent(event.transition, Binding(conc_assign))
        rep_next = fire(net, rep_marking, event, check=False)
        concrete = fire(net, concrete, conc_event, check=False)
        g_total = dict(iso)
        g_total.update(fresh_map)
        can = canonicalize(rep_next, pinned=graph.pinned)
        iso = {can.renaming[x]: g_total[x] for x in rep_next.identifiers()}
        events.append(conc_event)
        return can.marking

    rep = root.marking
    for edge in path:
        rep = translate(rep, edge.event())
    if extra is not None:
        translate(rep, extra)
    return tuple(events)


# ---------------------------------------------------------------------------
# Boundedness and genericity
# ---------------------------------------------------------------------------

BOUNDED = "bounded"
WIDTH_BOUNDED = "width"
DEPTH_BOUNDED = "depth"


def _mode_trigger(m: Marking, mode: str, bounds: ExplorationBounds) -> Optional[str]:
    """The place/type whose growth trips the mode's cap in marking m."""
    if mode == BOUNDED:
        for place, ms in m.items():
            if ms.total() > bounds.max_tokens_per_place:
                return place
        return None
    if mode == WIDTH_BOUNDED:
        for place, ms in m.items():
            if len(ms) > bounds.max_tokens_per_place:
                return place
        per_type: dict[str, int] = {}
        for ident in m.identifiers():
            per_type[ident.type_label.name] = per_type.get(ident.type_label.name, 0) + 1
        for tname in sorted(per_type):
            if per_type[tname] > bounds.max_identifiers_per_type:
                return tname
        return None
    for place, ms in m.items():
        per_id: dict[Identifier, int] = {}
        for vec, cnt in ms.items():
            for ident in set(vec):
                per_id[ident] = per_id.get(ident, 0) + cnt
        if per_id and max(per_id.values()) > bounds.max_tokens_per_place:
            return place
    return None


def measure_boundedness(
    net: TypedNet,
    m0: Marking,
    mode: str = BOUNDED,
    bounds: ExplorationBounds = ExplorationBounds(),
) -> Verdict:
    """Streaming boundedness check: exploration stops at the first marking
    that trips the mode's cap, so unbounded nets answer quickly. Completing
    without a trip yields Holds with the realized bound."""
    if mode not in (BOUNDED, WIDTH_BOUNDED, DEPTH_BOUNDED):
        raise ValueError(f"unknown boundedness mode {mode!r}")
    start = _mode_trigger(m0, mode, bounds)
    if start is not None:
        return Verdict.violated(
            f"cap for {start!r} exceeded in the initial marking", (), detail=start
        )

    def stop(src_idx, src, event, succ) -> bool:
        return _mode_trigger(succ, mode, bounds) is not None

    graph = explore(net, m0, bounds, on_edge=stop)
    if graph.stopped is not None:
        state, event = graph.stopped
        succ = fire(net, graph.marking(state), event, check=False)
        culprit = _mode_trigger(succ, mode, bounds)
        what = {
            BOUNDED: "token count",
            WIDTH_BOUNDED: "distinct identifiers",
            DEPTH_BOUNDED: "tokens per identifier",
        }[mode]
        return Verdict.violated(
            f"{what} for {culprit!r} exceeded the configured cap",
            graph.trace_to(state, event),
            bound=mode,
            detail=culprit,
        )
    return check_boundedness(graph, mode)


def _depth_load(m: Marking) -> int:
    """Max over places and identifiers of the token count referencing one
    identifier in one place."""
    worst = 0
    for _, ms in m.items():
        per_id: dict[Identifier, int] = {}
        for vec, cnt in ms.items():
            for ident in set(vec):
                per_id[ident] = per_id.get(ident, 0) + cnt
        if per_id:
            worst = max(worst, max(per_id.values()))
    return worst


def check_boundedness(graph: StateGraph, mode: str = BOUNDED) -> Verdict:
    """Boundedness / width-boundedness / depth-boundedness of the explored
    system. Holds carries the realized bound; a cap exceeded during
    exploration yields Violated with a growing-marking witness path."""
    if mode not in (BOUNDED, WIDTH_BOUNDED, DEPTH_BOUNDED):
        raise ValueError(f"unknown boundedness mode {mode!r}")

    trigger_kinds = {"tokens"} if mode == BOUNDED else {"ids", "tokens"}
    for hit in graph.bound_hits:
        if hit.kind in trigger_kinds and hit.event is not None:
            witness = graph.trace_to(hit.state, hit.event)
            what = "token count" if hit.kind == "tokens" else "distinct identifiers"
            return Verdict.violated(
                f"{what} for {hit.detail!r} exceeded the configured cap",
                witness,
                bound=hit.kind,
                detail=hit.detail,
            )
    if not graph.complete:
        kinds = ",".join(sorted({h.kind for h in graph.bound_hits}))
        return Verdict.inconclusive(f"exploration incomplete ({kinds} bound hit)")

    if mode == BOUNDED:
        k = 0
        for s in graph.states:
            for _, ms in s.marking.items():
                k = max(k, ms.total())
        return Verdict.holds(f"every place holds at most {k} tokens", bound=k)
    if mode == WIDTH_BOUNDED:
        k = 0
        for s in graph.states:
            for _, ms in s.marking.items():
                k = max(k, len(ms))
        return Verdict.holds(f"every place carries at most {k} distinct vectors", bound=k)
    k = max((_depth_load(s.marking) for s in graph.states), default=0)
    return Verdict.holds(f"at most {k} tokens reference any one identifier", bound=k)


def complete_permutation(
    mapping: Mapping[Identifier, Identifier]
) -> dict[Identifier, Identifier]:
    """Close an injective finite map into a permutation of domain ∪ range.

    Chains d1 -> d2 -> ... -> dk with dk outside the domain are closed by
    mapping dk back to the chain's start, so the result is a genuine
    bijection that can safely be extended by the identity.
    """
    perm = dict(mapping)
    range_ids = set(perm.values())
    for start in sorted((d for d in perm if d not in range_ids), key=_id_key):
        cur = start
        seen = {start}
        while cur in perm:
            cur = perm[cur]
            if cur in seen:
                break
            seen.add(cur)
        if cur not in perm and cur != start:
            perm[cur] = start
    return perm


def random_type_bijection(
    ids: Iterable[Identifier], rng: random.Random, spread: int = 3
) -> dict[Identifier, Identifier]:
    """A random type-respecting bijection covering the given identifiers,
    possibly moving them onto indices outside the current set; completed to
    a permutation so identity-extension stays injective."""
    by_type: dict[TypeLabel, list[Identifier]] = {}
    for i in ids:
        by_type.setdefault(i.type_label, []).append(i)
    mapping: dict[Identifier, Identifier] = {}
    for label, members in sorted(by_type.items(), key=lambda kv: kv[0].name):
        members = sorted(members, key=_id_key)
        pool = list(range(len(members) + spread))
        rng.shuffle(pool)
        for ident, idx in zip(members, pool):
            mapping[ident] = Identifier(label, idx)
    return complete_permutation(mapping)


def check_genericity(
    net: TypedNet,
    m0: Marking,
    samples: int = 100,
    seed: int = 0,
    walk_depth: int = 8,
) -> Verdict:
    """Built-in self-test of the symmetry machinery.

    For random reachable markings m and random type-respecting bijections
    h, the canonicalized successor sets of m and h(m) must coincide (with
    h applied to m's successors). Any violation indicates a bug in
    canonicalization or binding enumeration, never a property of the net.
    """
    rng = random.Random(seed)
    for trial in range(samples):
        m = m0
        for _ in range(rng.randrange(walk_depth + 1)):
            events = [
                FiringEvent(t, b)
                for t in net.transitions
                for b in enabled_bindings(net, m, t)
            ]
            if not events:
                break
            m = fire(net, m, rng.choice(events), check=False)
        h = random_type_bijection(m.identifiers(), rng)
        hm = m.rename(h)

        def successor_set(marking: Marking, post: Mapping[Identifier, Identifier]):
            out = set()
            for t in net.transitions:
                for b in enabled_bindings(net, marking, t):
                    nxt = fire(net, marking, FiringEvent(t, b), check=False).rename(post)
                    out.add((t, canonicalize(nxt).marking))
            return out

        lhs = successor_set(m, h)
        rhs = successor_set(hm, {})
        if lhs != rhs:
            return Verdict.violated(
                f"successor sets differ under renaming at sample {trial}",
                (),
                marking=repr(m),
                bijection=str({str(k): str(v) for k, v in h.items()}),
            )
    return Verdict.holds(f"{samples} random (marking, bijection) samples agree")


# ---------------------------------------------------------------------------
# Dump format
# ---------------------------------------------------------------------------


def serialize_marking_line(m: Marking) -> str:
    parts = []
    for place, ms in m.items():
        toks = ",".join(
            "(" + " ".join(str(i) for i in vec) + ")" + (f"^{cnt}" if cnt > 1 else "")
            for vec, cnt in ms.items()
        )
        parts.append(f"{place}=[{toks}]")
    return " ".join(parts) if parts else "-"


def dump_graph(graph: StateGraph) -> str:
    """Line-oriented dump: STATE <idx> <serialization> / EDGE lines."""
    lines = []
    for i, s in enumerate(graph.states):
        lines.append(f"STATE {i} {serialize_marking_line(s.marking)}")
    for e in graph.edges:
        lines.append(f"EDGE {e.source} {e.transition} {e.digest or '-'} {e.target}")
    for h in graph.bound_hits:
        lines.append(f"BOUND {h.kind} {h.detail or '-'}")
    return "\n".join(lines) + "\n"
