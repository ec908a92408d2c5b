"""Unsafety-property evaluation and finite-LTS (bi)simulation checking.

Unsafety properties are existential conjunctive queries over place counts
and identifier (in)equalities; a net is unsafe when some reachable marking
satisfies the query. Bisimulation checking (strong/weak, optionally rooted,
optionally depth-bounded) is the mechanical oracle behind the
transformation lemmas.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Optional, Sequence, Union

from .core import Identifier, TypeLabel, TypedNet
from .statespace import StateGraph
from .verdict import Verdict

#: Silent action. Labels are otherwise plain strings.
TAU = None

Label = Optional[str]


# ---------------------------------------------------------------------------
# Unsafety formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FormulaVar:
    name: str
    type_label: TypeLabel

    def __str__(self) -> str:
        return self.name


Term = Union[FormulaVar, Identifier]


@dataclass(frozen=True)
class PlaceCount:
    """place(x1..xn) >= threshold: at least `threshold` matching tokens."""

    place: str
    args: tuple[Term, ...]
    threshold: int


@dataclass(frozen=True)
class PlaceTotal:
    """place >= threshold: at least `threshold` tokens in total."""

    place: str
    threshold: int


@dataclass(frozen=True)
class Compare:
    """x = y or x != y over variables and identifier literals."""

    left: Term
    right: Term
    equal: bool


Atom = Union[PlaceCount, PlaceTotal, Compare]


@dataclass(frozen=True)
class UnsafetyFormula:
    """exists y1:λ1, ..., yk:λk. atom ∧ ... ∧ atom"""

    bound: tuple[FormulaVar, ...]
    atoms: tuple[Atom, ...]

    def variables(self) -> tuple[FormulaVar, ...]:
        return self.bound


def _term_value(term: Term, assignment: Mapping[FormulaVar, Identifier]) -> Identifier:
    if isinstance(term, FormulaVar):
        return assignment[term]
    return term


def _atom_holds(atom: Atom, marking, assignment: Mapping[FormulaVar, Identifier]) -> bool:
    if isinstance(atom, PlaceTotal):
        return marking.tokens(atom.place).total() >= atom.threshold
    if isinstance(atom, PlaceCount):
        vec = tuple(_term_value(a, assignment) for a in atom.args)
        return marking.tokens(atom.place).count(vec) >= atom.threshold
    left = _term_value(atom.left, assignment)
    right = _term_value(atom.right, assignment)
    return (left == right) == atom.equal


def formula_holds(
    formula: UnsafetyFormula, marking, assignment: Mapping[FormulaVar, Identifier]
) -> bool:
    return all(_atom_holds(a, marking, assignment) for a in formula.atoms)


def satisfying_assignment(
    formula: UnsafetyFormula, marking
) -> Optional[dict[FormulaVar, Identifier]]:
    """Search an assignment of the bound variables satisfying the formula.

    Candidates per variable are the marking's identifiers of its type plus
    up to k fresh identifiers per type (k = number of bound variables), so
    pure-(in)equality formulas quantify beyond the marking as the semantics
    over an infinite identifier universe demands. Object identifiers in
    canonical markings carry canonical names; identifier literals in
    formulas are only stable for pinned (resource) identifiers.
    """
    pools: dict[FormulaVar, list[Identifier]] = {}
    ids = sorted(marking.identifiers())
    k = len(formula.bound)
    for var in formula.bound:
        pool = [i for i in ids if i.type_label == var.type_label]
        taken = {i.index for i in pool}
        idx = 0
        for _ in range(k):
            while idx in taken:
                idx += 1
            pool.append(Identifier(var.type_label, idx))
            taken.add(idx)
        pools[var] = pool
    for combo in itertools.product(*(pools[v] for v in formula.bound)):
        assignment = dict(zip(formula.bound, combo))
        if formula_holds(formula, marking, assignment):
            return assignment
    if not formula.bound and formula_holds(formula, marking, {}):
        return {}
    return None


def _render_assignment(assignment: Mapping[FormulaVar, Identifier]) -> dict[str, str]:
    return {
        v.name: str(i)
        for v, i in sorted(assignment.items(), key=lambda kv: kv[0].name)
    }


def eval_unsafety(graph: StateGraph, formula: UnsafetyFormula) -> Verdict:
    """Violated (= unsafe) with a witness marking/assignment/trace when some
    explored marking satisfies the formula; Holds (= safe) only when the
    exploration was complete; otherwise inconclusive."""
    for idx in range(len(graph.states)):
        assignment = satisfying_assignment(formula, graph.states[idx].marking)
        if assignment is not None:
            return Verdict.violated(
                "unsafety property satisfied",
                graph.trace_to(idx),
                state=idx,
                assignment=_render_assignment(assignment),
            )
    if graph.complete:
        return Verdict.holds("no reachable marking satisfies the property")
    return Verdict.inconclusive("exploration incomplete; property unseen so far")


def check_unsafety(net, m0, formula: UnsafetyFormula, bounds=None) -> Verdict:
    """Streaming variant: exploration stops at the first satisfying marking,
    so unsafe unbounded nets answer quickly. On bounded nets this is a
    decision: Safe/Unsafe, never inconclusive."""
    from .statespace import ExplorationBounds, explore

    if bounds is None:
        bounds = ExplorationBounds()
    root = satisfying_assignment(formula, m0)
    if root is not None:
        return Verdict.violated(
            "unsafety property satisfied in the initial marking",
            (),
            assignment=_render_assignment(root),
        )

    def stop(src_idx, src, event, succ) -> bool:
        return satisfying_assignment(formula, succ) is not None

    graph = explore(net, m0, bounds, on_edge=stop)
    if graph.stopped is not None:
        state, event = graph.stopped
        witness = graph.trace_to(state, event)
        final = graph.marking(state)
        from .core import fire

        assignment = satisfying_assignment(formula, fire(net, final, event, check=False))
        return Verdict.violated(
            "unsafety property satisfied",
            witness,
            assignment=_render_assignment(assignment or {}),
        )
    if graph.complete:
        return Verdict.holds("no reachable marking satisfies the property")
    return Verdict.inconclusive("exploration incomplete; property unseen so far")


# ---------------------------------------------------------------------------
# Finite labeled transition systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteLts:
    states: tuple[Hashable, ...]
    initial: Hashable
    transitions: frozenset[tuple[Hashable, Label, Hashable]]

    def __post_init__(self):
        if self.initial not in self.states:
            raise ValueError("initial state missing from state set")

    def labels(self) -> frozenset[str]:
        return frozenset(a for _, a, _ in self.transitions if a is not TAU)

    def successors(self, state: Hashable) -> list[tuple[Label, Hashable]]:
        return sorted(
            ((a, t) for s, a, t in self.transitions if s == state),
            key=lambda at: (at[0] is not TAU, at[0] or "", str(at[1])),
        )


def hide_labels(lts: FiniteLts, hidden: Iterable[str]) -> FiniteLts:
    """Relabel the given actions to τ; unknown labels are ignored."""
    hidden = set(hidden)
    return FiniteLts(
        states=lts.states,
        initial=lts.initial,
        transitions=frozenset(
            (s, TAU if a in hidden else a, t) for s, a, t in lts.transitions
        ),
    )


def rename_labels(lts: FiniteLts, renaming: Mapping[str, Label]) -> FiniteLts:
    """Apply a total relabeling (identity where unspecified); values may be
    τ (None) to silence an action."""
    return FiniteLts(
        states=lts.states,
        initial=lts.initial,
        transitions=frozenset(
            (s, renaming.get(a, a) if a is not TAU else TAU, t)
            for s, a, t in lts.transitions
        ),
    )


def _adjacency(lts: FiniteLts) -> dict[Hashable, list[tuple[Label, Hashable]]]:
    adj: dict[Hashable, list[tuple[Label, Hashable]]] = {s: [] for s in lts.states}
    for s, a, t in lts.transitions:
        adj[s].append((a, t))
    for s in adj:
        adj[s].sort(key=lambda at: (at[0] is not TAU, at[0] or "", repr(at[1])))
    return adj


def saturate(lts: FiniteLts) -> FiniteLts:
    """The weak-transition system: s =a=> t iff s (τ*) a (τ*) t, and
    s =τ=> t iff t is τ-reachable from s (reflexively)."""
    adj = _adjacency(lts)

    tau_closure: dict[Hashable, set[Hashable]] = {}
    for s in lts.states:
        seen = {s}
        stack = [s]
        while stack:
            cur = stack.pop()
            for a, t in adj[cur]:
                if a is TAU and t not in seen:
                    seen.add(t)
                    stack.append(t)
        tau_closure[s] = seen

    weak: set[tuple[Hashable, Label, Hashable]] = set()
    for s in lts.states:
        for mid in tau_closure[s]:
            weak.add((s, TAU, mid))
            for a, t in adj[mid]:
                if a is TAU:
                    continue
                for end in tau_closure[t]:
                    weak.add((s, a, end))
    return FiniteLts(states=lts.states, initial=lts.initial, transitions=frozenset(weak))


def _partition_refinement(
    adj: Mapping[Hashable, list[tuple[Label, Hashable]]],
    states: Sequence[Hashable],
    max_rounds: Optional[int] = None,
) -> dict[Hashable, int]:
    """Iterated signature refinement to the coarsest (bounded) bisimulation
    partition. With ``max_rounds`` = k the result distinguishes states that
    differ within k rounds of the bisimulation game."""
    block = {s: 0 for s in states}
    rounds = 0
    while True:
        signatures: dict[Hashable, tuple] = {}
        for s in states:
            sig = frozenset((a, block[t]) for a, t in adj[s])
            canon = tuple(sorted(sig, key=lambda x: (x[0] is not TAU, x[0] or "", x[1])))
            signatures[s] = (block[s], canon)
        renumber: dict[tuple, int] = {}
        new_block = {}
        for s in states:  # first-occurrence numbering keeps runs deterministic
            new_block[s] = renumber.setdefault(signatures[s], len(renumber))
        rounds += 1
        if new_block == block or (max_rounds is not None and rounds >= max_rounds):
            return new_block
        block = new_block


@dataclass(frozen=True)
class BisimResult:
    verdict: Verdict
    partition: Mapping[Hashable, int] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return bool(self.verdict)


def _distinguishing_sequence(
    adj1, adj2, block, s1, s2, limit: int = 12
) -> list[str]:
    """Best-effort distinguishing action sequence between two non-bisimilar
    states, following moves whose successor blocks cannot be matched."""
    seq: list[str] = []
    for _ in range(limit):
        if block[(1, s1)] == block[(2, s2)]:
            break
        moved = False
        for a, t1 in sorted(adj1[s1], key=lambda at: (at[0] or "", str(at[1]))):
            matches = [t2 for b, t2 in adj2[s2] if b == a]
            unmatched = all(block[(1, t1)] != block[(2, t2)] for t2 in matches)
            if unmatched:
                seq.append(a if a is not TAU else "tau")
                if matches:
                    s1 = t1
                    s2 = matches[0]
                    moved = True
                    break
                return seq
        if not moved:
            break
    return seq


def check_bisimulation(
    lts1: FiniteLts,
    lts2: FiniteLts,
    flavor: str = "strong",
    rooted: bool = True,
    depth: Optional[int] = None,
) -> BisimResult:
    """Strong or weak (bi)simulation equivalence via partition refinement on
    the disjoint union.

    ``rooted`` compares the initial states' classes; otherwise every state
    of each system must have a partner in the other. ``depth`` bounds the
    refinement rounds, giving "bisimilar up to depth d" verdicts for
    truncated systems (a smoke test, not a proof).
    """
    if flavor not in ("strong", "weak"):
        raise ValueError(f"unknown bisimulation flavor {flavor!r}")
    a, b = (lts1, lts2) if flavor == "strong" else (saturate(lts1), saturate(lts2))

    states = [(1, s) for s in a.states] + [(2, s) for s in b.states]
    adj: dict = {}
    for s in a.states:
        adj[(1, s)] = [(lab, (1, t)) for lab, t in _adjacency(a)[s]]
    for s in b.states:
        adj[(2, s)] = [(lab, (2, t)) for lab, t in _adjacency(b)[s]]

    block = _partition_refinement(adj, states, max_rounds=depth)
    qualifier = f" up to depth {depth}" if depth is not None else ""

    if rooted:
        ok = block[(1, a.initial)] == block[(2, b.initial)]
        if ok:
            return BisimResult(Verdict.holds(f"rooted {flavor} bisimulation{qualifier}"), block)
        adj1 = {s: [(lab, t[1]) for lab, t in adj[(1, s)]] for s in a.states}
        adj2 = {s: [(lab, t[1]) for lab, t in adj[(2, s)]] for s in b.states}
        seq = _distinguishing_sequence(adj1, adj2, block, a.initial, b.initial)
        return BisimResult(
            Verdict.violated(
                f"initial states distinguished{qualifier}",
                (),
                distinguishing=seq,
            ),
            block,
        )
    blocks1 = {block[(1, s)] for s in a.states}
    blocks2 = {block[(2, s)] for s in b.states}
    if blocks1 == blocks2:
        return BisimResult(Verdict.holds(f"total {flavor} bisimulation{qualifier}"), block)
    return BisimResult(
        Verdict.violated(f"some states have no {flavor}-bisimilar partner{qualifier}"), block
    )


# ---------------------------------------------------------------------------
# LTS extraction from state graphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransitionOnly:
    """Label every edge with its transition name."""


@dataclass(frozen=True)
class PinnedIdentifierFilter:
    """Label an edge with its transition when the binding maps ``variables``
    to exactly ``identifiers`` (the pinned case); silence it otherwise.
    ``silent`` transitions are silenced even when they match."""

    variables: tuple
    identifiers: tuple[Identifier, ...]
    silent: frozenset[str] = frozenset()


def lts_from_graph(graph: StateGraph, labeling=TransitionOnly()) -> FiniteLts:
    """A finite LTS over the canonical state graph's states."""
    transitions: set[tuple[Hashable, Label, Hashable]] = set()
    for e in graph.edges:
        if isinstance(labeling, TransitionOnly):
            label: Label = e.transition
        else:
            bound = tuple(e.binding.get(v) for v in labeling.variables)
            matches = bound == tuple(labeling.identifiers)
            if e.transition in labeling.silent:
                label = TAU
            else:
                label = e.transition if matches else TAU
        transitions.add((e.source, label, e.target))
    return FiniteLts(
        states=tuple(range(len(graph.states))),
        initial=graph.initial,
        transitions=frozenset(transitions),
    )
