"""Independent reference implementations used as test oracles.

Everything here recomputes results by exhaustive enumeration or plain BFS,
deliberately sharing no logic with the library's optimized code paths.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Optional

from pnid.core import (
    Binding,
    FiringEvent,
    Identifier,
    Marking,
    Multiset,
    TypeLabel,
    TypedNet,
    Variable,
    rename_multiset,
)


# ---------------------------------------------------------------------------
# Enabled bindings by brute force
# ---------------------------------------------------------------------------


def brute_force_bindings(
    net: TypedNet, m: Marking, t: str, fresh_per_type: int = 2
) -> set[Binding]:
    """All enabling bindings, enumerating every injective type-respecting
    assignment of var(t) into the marking's identifiers plus a bounded pool
    of fresh identifiers per type."""
    variables = sorted(net.variables(t))
    marking_ids = sorted(m.identifiers())
    per_type: dict[TypeLabel, int] = {}
    for v in variables:
        per_type[v.type_label] = per_type.get(v.type_label, 0) + 1
    pools: list[list[Identifier]] = []
    for v in variables:
        pool = [i for i in marking_ids if i.type_label == v.type_label]
        taken = {i.index for i in pool}
        idx = 0
        added = 0
        # enough fresh identifiers for every same-typed variable to differ
        want_fresh = max(fresh_per_type, per_type[v.type_label])
        while added < want_fresh:
            if idx not in taken:
                pool.append(Identifier(v.type_label, idx))
                added += 1
            idx += 1
        pools.append(pool)

    vs = net.variable_sets(t)
    live = m.identifiers()
    out: set[Binding] = set()
    for combo in itertools.product(*pools) if variables else [()]:
        if len(set(combo)) != len(combo):
            continue
        assignment = dict(zip(variables, combo))
        ok = True
        for v, ident in assignment.items():
            if (ident not in live) != (v in vs.emit):
                ok = False
                break
        if not ok:
            continue
        enabled = True
        for place, insc in net.input_arcs(t):
            need = rename_multiset(insc, assignment)
            if not need <= m.tokens(place):
                enabled = False
                break
        if enabled:
            out.add(Binding(assignment))
    return out


def quotient_fresh(net: TypedNet, t: str, bindings: Iterable[Binding]) -> set:
    """Bindings modulo the choice of fresh identifiers: the emitting part is
    reduced to which variables are fresh (their types are forced)."""
    vs = net.variable_sets(t)
    out = set()
    for b in bindings:
        stable = tuple((v, b[v]) for v in sorted(b.domain()) if v not in vs.emit)
        out.add(stable)
    return out


# ---------------------------------------------------------------------------
# Firing arithmetic
# ---------------------------------------------------------------------------


def fire_by_arithmetic(net: TypedNet, m: Marking, event: FiringEvent) -> Marking:
    """Token counts recomputed place by place, vector by vector."""
    mapping = dict(event.binding.items())
    places = set(m.marked_places())
    for p, _ in net.input_arcs(event.transition) + net.output_arcs(event.transition):
        places.add(p)
    tokens = {}
    for place in places:
        counts: dict = {vec: cnt for vec, cnt in m.tokens(place).items()}
        for arc_place, insc in net.input_arcs(event.transition):
            if arc_place != place:
                continue
            for vec, cnt in insc.items():
                ground = tuple(mapping[v] for v in vec)
                counts[ground] = counts.get(ground, 0) - cnt
        for arc_place, insc in net.output_arcs(event.transition):
            if arc_place != place:
                continue
            for vec, cnt in insc.items():
                ground = tuple(mapping[v] for v in vec)
                counts[ground] = counts.get(ground, 0) + cnt
        assert all(c >= 0 for c in counts.values()), "oracle saw a disabled firing"
        tokens[place] = Multiset({k: c for k, c in counts.items() if c})
    return Marking(tokens)


# ---------------------------------------------------------------------------
# Canonical forms by enumeration
# ---------------------------------------------------------------------------


def _serialize(m: Marking) -> tuple:
    return tuple(
        (place, tuple((tuple((i.type_label.name, i.index) for i in vec), cnt) for vec, cnt in ms.items()))
        for place, ms in m.items()
    )


def all_bijection_canonical(m: Marking, pinned: frozenset[Identifier] = frozenset()) -> Marking:
    """Least serialization over every type-respecting bijection that maps
    free identifiers onto contiguous indices per type (exhaustive)."""
    from pnid.core import Kind

    pin = set(pinned) | {
        i for i in m.identifiers() if i.type_label.kind == Kind.RESOURCE
    }
    free = [i for i in sorted(m.identifiers()) if i not in pin]
    by_type: dict[TypeLabel, list[Identifier]] = {}
    for i in free:
        by_type.setdefault(i.type_label, []).append(i)
    labels = sorted(by_type)
    perms_per_type = [
        list(itertools.permutations(range(len(by_type[l])))) for l in labels
    ]
    best: Optional[tuple] = None
    best_marking = m
    for combo in itertools.product(*perms_per_type) if labels else [()]:
        mapping = {}
        for label, perm in zip(labels, combo):
            for ident, idx in zip(by_type[label], perm):
                mapping[ident] = Identifier(label, idx)
        candidate = m.rename(mapping)
        key = _serialize(candidate)
        if best is None or key < best:
            best = key
            best_marking = candidate
    return best_marking


# ---------------------------------------------------------------------------
# Naive (non-canonical) exploration
# ---------------------------------------------------------------------------


def naive_explore(
    net: TypedNet, m0: Marking, max_states: int = 5_000
) -> tuple[list[Marking], list[tuple[int, FiringEvent, int]], bool]:
    """Plain BFS on concrete markings under the canonical-fresh firing rule;
    no symmetry reduction."""
    from pnid.core import enabled_bindings, fire

    index: dict[Marking, int] = {m0: 0}
    order = [m0]
    edges: list[tuple[int, FiringEvent, int]] = []
    qpos = 0
    while qpos < len(order):
        m = order[qpos]
        src = index[m]
        qpos += 1
        for t in net.transitions:
            for b in enabled_bindings(net, m, t):
                event = FiringEvent(t, b)
                nxt = fire(net, m, event, check=False)
                idx = index.get(nxt)
                if idx is None:
                    if len(order) >= max_states:
                        return order, edges, False
                    idx = len(order)
                    index[nxt] = idx
                    order.append(nxt)
                edges.append((src, event, idx))
    return order, edges, True


def naive_weak_termination(
    net: TypedNet, m0: Marking, label: TypeLabel, max_states: int = 5_000
) -> Optional[tuple[Marking, Identifier]]:
    """For every reachable (marking, identifier) pair, BFS for a marking
    free of the identifier; returns a stuck pair or None."""
    states, edges, complete = naive_explore(net, m0, max_states)
    assert complete, "oracle needs a finite naive graph"
    succ: dict[int, set[int]] = {}
    for src, _, dst in edges:
        succ.setdefault(src, set()).add(dst)
    for start, m in enumerate(states):
        for ident in sorted(m.identifiers()):
            if ident.type_label != label:
                continue
            seen = {start}
            stack = [start]
            escaped = False
            while stack and not escaped:
                cur = stack.pop()
                if ident not in states[cur].identifiers():
                    escaped = True
                    break
                for nxt in succ.get(cur, ()):
                    if nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
            if not escaped:
                return states[start], ident
    return None


def naive_unsafe(net: TypedNet, m0: Marking, formula, max_states: int = 5_000) -> bool:
    """Exhaustive-assignment unsafety evaluation over the naive graph."""
    from pnid.logic import formula_holds

    states, _, complete = naive_explore(net, m0, max_states)
    assert complete, "oracle needs a finite naive graph"
    for m in states:
        ids = sorted(m.identifiers())
        pools = []
        for var in formula.bound:
            pool = [i for i in ids if i.type_label == var.type_label]
            taken = {i.index for i in pool}
            idx = 0
            added = 0
            while added < max(1, len(formula.bound)):
                if idx not in taken:
                    pool.append(Identifier(var.type_label, idx))
                    added += 1
                idx += 1
            pools.append(pool)
        for combo in itertools.product(*pools) if formula.bound else [()]:
            if formula_holds(formula, m, dict(zip(formula.bound, combo))):
                return True
    return False


# ---------------------------------------------------------------------------
# Classical reachability (for WF-net checks)
# ---------------------------------------------------------------------------


def wf_reachable(weights, transitions, m0: dict[str, int], cap: int = 20_000):
    """Reference BFS over classical weighted markings; returns (markings,
    edges) with markings as frozen dicts."""

    def freeze(d):
        return tuple(sorted((k, v) for k, v in d.items() if v))

    pre: dict[str, list] = {t: [] for t in transitions}
    post: dict[str, list] = {t: [] for t in transitions}
    for (a, b), w in weights.items():
        if b in pre:
            pre[b].append((a, w))
        if a in post:
            post[a].append((b, w))
    start = freeze(m0)
    seen = {start}
    order = [start]
    edges = []
    qpos = 0
    while qpos < len(order):
        cur = order[qpos]
        qpos += 1
        counts = dict(cur)
        for t in transitions:
            if all(counts.get(p, 0) >= w for p, w in pre[t]):
                nxt = dict(counts)
                for p, w in pre[t]:
                    nxt[p] -= w
                for p, w in post[t]:
                    nxt[p] = nxt.get(p, 0) + w
                frozen = freeze(nxt)
                if frozen not in seen:
                    if len(order) >= cap:
                        raise RuntimeError("oracle cap exceeded")
                    seen.add(frozen)
                    order.append(frozen)
                edges.append((cur, t, frozen))
    return order, edges
