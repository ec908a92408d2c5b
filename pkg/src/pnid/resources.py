"""Resource-aware nets: closures and conservative-management checking.

A resource closure gives an object type a pool place (available resources)
and an assignment place (which resource serves which object): emitters take
one resource per created object and record the pair, collectors consume the
pair and may return the resource, selected internal transitions read-check
the pair. Conservative management asks that no resource is ever created
during execution and that a resource serves at most one object at a time.

Resource identifiers are named individuals: canonicalization pins them, so
preservation and exclusivity are checked on literal identities while object
identifiers stay freely renamable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .core import (
    FiringEvent,
    Identifier,
    Kind,
    Marking,
    Multiset,
    NetError,
    Place,
    TypeLabel,
    TypedNet,
    Variable,
)
from .statespace import ExplorationBounds, StateGraph, explore
from .verdict import Status, Verdict


@dataclass(frozen=True)
class ClosureOptions:
    """The free choices of a closure: which collectors return their resource
    to the pool, and which internal transitions synchronize on the
    assignment place."""

    returning_collectors: frozenset[str] = frozenset()
    synchronized_internals: frozenset[str] = frozenset()
    resource_type: Optional[str] = None  # defaults to res_<type>
    pool_place: Optional[str] = None
    assignment_place: Optional[str] = None

    @staticmethod
    def all_returning(net: TypedNet, label: TypeLabel) -> "ClosureOptions":
        return ClosureOptions(returning_collectors=frozenset(net.collectors(label)))


def _fresh(taken: set[str], base: str) -> str:
    name = base
    while name in taken:
        name += "_"
    taken.add(name)
    return name


def _fresh_variables(
    net: TypedNet, t: str, label: TypeLabel, count: int, prefix: str
) -> list[Variable]:
    used = {v.name for v in net.variables(t)}
    out = []
    i = 1
    while len(out) < count:
        name = f"{prefix}{i}"
        if name not in used:
            out.append(Variable(name, label))
            used.add(name)
        i += 1
    return out


def resource_close(
    net: TypedNet, label: TypeLabel, opts: ClosureOptions = ClosureOptions()
) -> TypedNet:
    """The closure of one object type.

    Every emitter of the type consumes one pool resource per created object
    and produces the (object, resource) pair into the assignment place;
    every collector consumes the pairs of the objects it deletes and, when
    selected, returns the resources; selected internal transitions
    read-check the pairs of the objects they access.
    """
    if label.kind is not Kind.OBJECT:
        raise NetError(f"{label.name!r} is not an object type")
    net._require_type(label)
    emitters = net.emitters(label)
    collectors = net.collectors(label)
    if not opts.returning_collectors <= collectors:
        extra = sorted(opts.returning_collectors - collectors)
        raise NetError(f"{extra[0]!r} is not a collector of {label.name!r}")
    internals = frozenset(net.transitions) - emitters - collectors
    if not opts.synchronized_internals <= internals:
        extra = sorted(opts.synchronized_internals - internals)
        raise NetError(f"{extra[0]!r} is not an internal transition for {label.name!r}")

    existing_types = {l.name for l in net.place_types()}
    res_name = opts.resource_type or f"res_{label.name}"
    if res_name in existing_types:
        raise NetError(f"resource type name {res_name!r} already used in the net")
    eta = TypeLabel(res_name, Kind.RESOURCE)

    taken = set(net.places) | set(net.transitions)
    pool = _fresh(taken, opts.pool_place or f"{res_name}_pool")
    assign = _fresh(taken, opts.assignment_place or f"{res_name}_busy")

    places = list(net.places.values()) + [
        Place(pool, (eta,)),
        Place(assign, (label, eta)),
    ]
    arcs: dict = dict(net.arcs)

    def pair_multisets(objects: Sequence[Variable], rvars: Sequence[Variable]):
        singles = Multiset([(r,) for r in rvars])
        pairs = Multiset([(x, r) for x, r in zip(objects, rvars)])
        return singles, pairs

    for t in sorted(emitters):
        created = sorted(v for v in net.variable_sets(t).emit if v.type_label == label)
        rvars = _fresh_variables(net, t, eta, len(created), "r")
        singles, pairs = pair_multisets(created, rvars)
        arcs[(pool, t)] = singles
        arcs[(t, assign)] = pairs
    for t in sorted(collectors):
        deleted = sorted(v for v in net.variable_sets(t).collect if v.type_label == label)
        rvars = _fresh_variables(net, t, eta, len(deleted), "rc")
        singles, pairs = pair_multisets(deleted, rvars)
        arcs[(assign, t)] = pairs
        if t in opts.returning_collectors:
            arcs[(t, pool)] = singles
    for t in sorted(opts.synchronized_internals):
        accessed = sorted(
            v for v in net.variable_sets(t).input if v.type_label == label
        )
        rvars = _fresh_variables(net, t, eta, len(accessed), "rs")
        _, pairs = pair_multisets(accessed, rvars)
        arcs[(assign, t)] = pairs
        arcs[(t, assign)] = pairs

    return TypedNet(places, net.transitions, arcs, name=net.name)


def full_resource_close(
    net: TypedNet, opts_per_type: Mapping[TypeLabel, ClosureOptions] = ()
) -> TypedNet:
    """Fold the closure over every object type of the net."""
    opts_per_type = dict(opts_per_type)
    closed = net
    for label in net.object_types():
        closed = resource_close(closed, label, opts_per_type.get(label, ClosureOptions()))
    return closed


def mark_closure(
    net: TypedNet,
    m0: Marking,
    resources: Mapping[str, Iterable[Identifier]],
) -> Marking:
    """Extend a marking with one unary token per declared resource. The
    declaration must be a set: duplicates are an error, as is a resource of
    the wrong type or an unknown pool place."""
    tokens = {p: ms for p, ms in m0.items()}
    for place_name in sorted(resources):
        place = net.places.get(place_name)
        if place is None:
            raise NetError(f"unknown resource place {place_name!r}")
        if len(place.place_type) != 1 or place.place_type[0].kind is not Kind.RESOURCE:
            raise NetError(f"{place_name!r} is not a resource place")
        eta = place.place_type[0]
        seen: set[Identifier] = set()
        for ident in resources[place_name]:
            if ident in seen:
                raise NetError(f"duplicate resource {ident} (sets only)")
            seen.add(ident)
            if ident.type_label != eta:
                raise NetError(f"resource {ident} does not have type {eta.name!r}")
        extra = Multiset([(i,) for i in sorted(seen)])
        tokens[place_name] = tokens.get(place_name, Multiset()) + extra
    return Marking(tokens)


def default_resources(net: TypedNet, count: int) -> dict[str, list[Identifier]]:
    """``count`` resources (indices 0..count-1) for every resource place."""
    out: dict[str, list[Identifier]] = {}
    for name in net.resource_places():
        place = net.places[name]
        if len(place.place_type) == 1:
            eta = place.place_type[0]
            out[name] = [Identifier(eta, i) for i in range(count)]
    return out


# ---------------------------------------------------------------------------
# Conservative resource management
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResourceReport:
    preservation: Verdict
    exclusivity: Verdict
    per_resource: Mapping[str, str] = field(default_factory=dict)

    @property
    def conservative(self) -> bool:
        return bool(self.preservation) and bool(self.exclusivity)

    @property
    def overall(self) -> Verdict:
        for v in (self.preservation, self.exclusivity):
            if v.status is Status.VIOLATED:
                return v
        for v in (self.preservation, self.exclusivity):
            if v.status is Status.INCONCLUSIVE:
                return v
        return Verdict.holds("resources are managed conservatively")


def _exclusivity_offender(m: Marking) -> Optional[tuple[Identifier, list]]:
    """A resource with not-exactly-one support tuple of shape (r) / (o, r).

    Multiplicities of one tuple are fine; two distinct tuples (or a tuple of
    any other shape) referencing the same resource are not.
    """
    tuples: dict[Identifier, set] = {}
    for _, ms in m.items():
        for vec in ms.support():
            for ident in vec:
                if ident.type_label.kind is Kind.RESOURCE:
                    tuples.setdefault(ident, set()).add(vec)
    for ident in sorted(tuples):
        vecs = tuples[ident]
        good_shape = all(
            (len(v) == 1 and v[0] == ident)
            or (
                len(v) == 2
                and v[1] == ident
                and v[0].type_label.kind is Kind.OBJECT
            )
            for v in vecs
        )
        if len(vecs) != 1 or not good_shape:
            return ident, sorted(vecs)
    return None


def check_conservative(
    net: TypedNet,
    m0: Marking,
    bounds: ExplorationBounds = ExplorationBounds(),
) -> ResourceReport:
    """Resource preservation plus exclusive assignment over the explored
    state space (resource identifiers pinned, so checked literally).

    Preservation fails exactly when some reachable firing emits a
    resource-kind variable: under local freshness the emitted identifier
    may textually reuse a collected one, but over the unbounded identifier
    universe such an emission can always pick an identifier outside the
    initial marking.
    """
    if not net.resource_places():
        raise NetError("net has no resource places")
    initial_resources = {
        i for i in m0.identifiers() if i.type_label.kind is Kind.RESOURCE
    }

    offense: list[tuple[str, object]] = []

    def stop(src_idx, src, event, succ) -> bool:
        vs = net.variable_sets(event.transition)
        for v in sorted(vs.emit):
            if v.type_label.kind is Kind.RESOURCE:
                offense.append(("preservation", (event, v)))
                return True
        leaked = [
            i
            for i in succ.identifiers()
            if i.type_label.kind is Kind.RESOURCE and i not in initial_resources
        ]
        if leaked:
            offense.append(("preservation", (event, leaked[0])))
            return True
        bad = _exclusivity_offender(succ)
        if bad is not None:
            offense.append(("exclusivity", bad))
            return True
        return False

    start_bad = _exclusivity_offender(m0)
    if start_bad is not None:
        ident, vecs = start_bad
        return ResourceReport(
            preservation=Verdict.holds("initial marking only"),
            exclusivity=Verdict.violated(
                f"resource {ident} is referenced by {len(vecs)} distinct tuples "
                "in the initial marking",
                (),
                resource=str(ident),
            ),
            per_resource={str(ident): "not exclusive"},
        )

    graph = explore(net, m0, bounds, on_edge=stop)

    if graph.stopped is not None:
        state, event = graph.stopped
        witness = graph.trace_to(state, event)
        kind, info = offense[0]
        if kind == "preservation":
            return ResourceReport(
                preservation=Verdict.violated(
                    f"firing {event.transition!r} brings a fresh resource into the marking",
                    witness,
                    transition=event.transition,
                ),
                exclusivity=Verdict.inconclusive("skipped after preservation violation"),
                per_resource={},
            )
        ident, vecs = info
        shapes = ", ".join("(" + ",".join(str(i) for i in v) + ")" for v in vecs)
        return ResourceReport(
            preservation=Verdict.holds("no resource emission reachable so far"),
            exclusivity=Verdict.violated(
                f"resource {ident} is referenced by tuples {shapes} in one marking",
                witness,
                resource=str(ident),
            ),
            per_resource={str(ident): "not exclusive"},
        )

    if graph.complete:
        qualifier = ""
    elif graph.clamped_only:
        qualifier = " (within identifier budget)"
    else:
        kinds = ",".join(sorted({h.kind for h in graph.bound_hits}))
        inconclusive = Verdict.inconclusive(f"exploration incomplete ({kinds} bound hit)")
        return ResourceReport(
            preservation=inconclusive, exclusivity=inconclusive, per_resource={}
        )

    per_resource = {str(i): "conservative" for i in sorted(initial_resources)}
    return ResourceReport(
        preservation=Verdict.holds(f"only initial resources ever occur{qualifier}"),
        exclusivity=Verdict.holds(
            f"every resource serves at most one object at a time{qualifier}"
        ),
        per_resource=per_resource,
    )
