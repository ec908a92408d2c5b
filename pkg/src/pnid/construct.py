"""Soundness-preserving constructions.

EC-closure wraps a workflow net with an emitter and a collector so every
case runs as one identifier vector. The six construction rules (place
expansion, transition expansion, place/transition duplication, self-loop
addition, identifier introduction) generate the class of nets that are
identifier sound and live by construction; the recognizer searches for a
reduction of a given net back to the single-transition seed. Workflow
refinement substitutes a place by a generalized-sound workflow net.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

from .core import (
    Kind,
    Marking,
    Multiset,
    NetError,
    Place,
    TypeLabel,
    TypedNet,
    Variable,
)
from .soundness import WeightedNet

RULES = ("expandP", "expandT", "dupP", "dupT", "selfloop", "idintro")


class SideConditionError(NetError):
    def __init__(self, rule: str, condition: str):
        super().__init__(f"{rule}: {condition}")
        self.rule = rule
        self.condition = condition


@dataclass(frozen=True)
class RuleApplication:
    """One construction step; ``names`` optionally fixes the fresh nodes
    (otherwise deterministic suffixes are used, so scripts replay
    identically)."""

    rule: str
    target: str
    types: tuple[TypeLabel, ...] = ()
    variables: tuple[Variable, ...] = ()
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown rule {self.rule!r}")

    def __str__(self) -> str:
        parts = [self.rule, self.target]
        if self.types:
            parts.append("(" + ",".join(l.name for l in self.types) + ")")
        if self.variables:
            parts.append("(" + ",".join(v.name for v in self.variables) + ")")
        if self.names:
            parts.append("as " + ",".join(self.names))
        return " ".join(parts)


MarkedNet = tuple[TypedNet, Marking]


def initial_net(transition: str = "t0", name: str = "tjn") -> MarkedNet:
    """The construction seed: a single isolated transition, empty marking."""
    return TypedNet(places=(), transitions=(transition,), arcs={}, name=name), Marking.empty()


def _fresh_name(taken: set[str], base: str) -> str:
    if base not in taken:
        taken.add(base)
        return base
    i = 2
    while f"{base}{i}" in taken:
        i += 1
    taken.add(f"{base}{i}")
    return f"{base}{i}"


def _pick_names(net: TypedNet, requested: Sequence[str], defaults: Sequence[str],
                rule: str, released: Iterable[str] = ()) -> list[str]:
    taken = (set(net.places) | set(net.transitions)) - set(released)
    if requested:
        if len(requested) != len(defaults):
            raise SideConditionError(rule, f"expected {len(defaults)} fresh names")
        for n in requested:
            if n in taken or requested.count(n) > 1:
                raise SideConditionError(rule, f"name {n!r} is not fresh")
            taken.add(n)
        return list(requested)
    return [_fresh_name(taken, d) for d in defaults]


def _distinct(variables: Sequence[Variable], rule: str) -> None:
    if len(set(variables)) != len(variables):
        raise SideConditionError(rule, "variable vector must be duplicate-free")


def _check_types(variables: Sequence[Variable], types: Sequence[TypeLabel], rule: str) -> None:
    got = tuple(v.type_label for v in variables)
    if got != tuple(types):
        want = ",".join(l.name for l in types)
        raise SideConditionError(rule, f"variable vector must have type ({want})")


def apply_rule(net: TypedNet, m: Marking, app: RuleApplication) -> MarkedNet:
    """Apply one construction rule, checking its side conditions."""
    handler = {
        "expandP": _expand_place,
        "expandT": _expand_transition,
        "dupP": _duplicate_place,
        "dupT": _duplicate_transition,
        "selfloop": _add_self_loop,
        "idintro": _introduce_identifiers,
    }[app.rule]
    return handler(net, m, app)


def _expand_place(net: TypedNet, m: Marking, app: RuleApplication) -> MarkedNet:
    p = net.places.get(app.target)
    if p is None:
        raise SideConditionError(app.rule, f"unknown place {app.target!r}")
    mu = app.variables
    _distinct(mu, app.rule)
    _check_types(mu, p.place_type, app.rule)
    p_i, p_f, t = _pick_names(
        net, app.names, (f"{p.name}_i", f"{p.name}_f", f"t_{p.name}"), app.rule,
        released=(p.name,),
    )
    places = [q for q in net.places.values() if q.name != p.name]
    places += [Place(p_i, p.place_type), Place(p_f, p.place_type)]
    arcs: dict = {}
    for (a, b), ms in net.arcs.items():
        if b == p.name:
            arcs[(a, p_i)] = ms
        elif a == p.name:
            arcs[(p_f, b)] = ms
        else:
            arcs[(a, b)] = ms
    vec = Multiset([tuple(mu)])
    arcs[(p_i, t)] = vec
    arcs[(t, p_f)] = vec
    tokens = {q: ms for q, ms in m.items() if q != p.name}
    if m.tokens(p.name):
        tokens[p_i] = m.tokens(p.name)
    return (
        TypedNet(places, net.transitions + (t,), arcs, name=net.name),
        Marking(tokens),
    )


def _expand_transition(net: TypedNet, m: Marking, app: RuleApplication) -> MarkedNet:
    t = app.target
    if t not in net.transitions:
        raise SideConditionError(app.rule, f"unknown transition {t!r}")
    mu, labels = app.variables, app.types
    _distinct(mu, app.rule)
    _check_types(mu, labels, app.rule)
    vs = net.variable_sets(t)
    if not vs.input <= set(mu):
        missing = sorted(v.name for v in vs.input - set(mu))
        raise SideConditionError(app.rule, f"vector must contain input variables {missing}")
    emitted = [v for v in mu if v in vs.emit]
    if emitted:
        raise SideConditionError(
            app.rule, f"vector must avoid emitting variables of {t!r} ({emitted[0].name})"
        )
    p, t_e, t_c = _pick_names(
        net, app.names, (f"p_{t}", f"{t}_e", f"{t}_c"), app.rule, released=(t,)
    )
    places = list(net.places.values()) + [Place(p, tuple(labels))]
    transitions = tuple(x for x in net.transitions if x != t) + (t_e, t_c)
    arcs: dict = {}
    for (a, b), ms in net.arcs.items():
        if b == t:
            arcs[(a, t_e)] = ms
        elif a == t:
            arcs[(t_c, b)] = ms
        else:
            arcs[(a, b)] = ms
    vec = Multiset([tuple(mu)])
    arcs[(t_e, p)] = vec
    arcs[(p, t_c)] = vec
    return TypedNet(places, transitions, arcs, name=net.name), m


def _duplicate_place(net: TypedNet, m: Marking, app: RuleApplication) -> MarkedNet:
    p = net.places.get(app.target)
    if p is None:
        raise SideConditionError(app.rule, f"unknown place {app.target!r}")
    if m.tokens(p.name):
        raise SideConditionError(app.rule, f"place {p.name!r} must be unmarked")
    pre, post = net.preset(p.name), net.postset(p.name)
    if len(pre) != 1 or len(post) != 1:
        raise SideConditionError(
            app.rule, f"place {p.name!r} needs exactly one producer and one consumer"
        )
    (t,), (u,) = tuple(pre), tuple(post)
    mu, labels = app.variables, app.types
    _distinct(mu, app.rule)
    _check_types(mu, labels, app.rule)
    forbidden = [v for v in mu if v in net.variable_sets(u).emit]
    if forbidden:
        raise SideConditionError(
            app.rule, f"vector must avoid emitting variables of {u!r} ({forbidden[0].name})"
        )
    (q,) = _pick_names(net, app.names, (f"{p.name}_d",), app.rule)
    places = list(net.places.values()) + [Place(q, tuple(labels))]
    arcs = dict(net.arcs)
    vec = Multiset([tuple(mu)])
    arcs[(t, q)] = vec
    arcs[(q, u)] = vec
    return TypedNet(places, net.transitions, arcs, name=net.name), m


def _duplicate_transition(net: TypedNet, m: Marking, app: RuleApplication) -> MarkedNet:
    t = app.target
    if t not in net.transitions:
        raise SideConditionError(app.rule, f"unknown transition {t!r}")
    pre, post = net.preset(t), net.postset(t)
    if len(pre) != 1 or len(post) != 1:
        raise SideConditionError(
            app.rule, f"transition {t!r} needs singleton preset and postset"
        )
    (p,), (q,) = tuple(pre), tuple(post)
    (u,) = _pick_names(net, app.names, (f"{t}_d",), app.rule)
    arcs = dict(net.arcs)
    arcs[(p, u)] = net.arcs[(p, t)]
    arcs[(u, q)] = net.arcs[(t, q)]
    return TypedNet(net.places.values(), net.transitions + (u,), arcs, name=net.name), m


def _add_self_loop(net: TypedNet, m: Marking, app: RuleApplication) -> MarkedNet:
    p = net.places.get(app.target)
    if p is None:
        raise SideConditionError(app.rule, f"unknown place {app.target!r}")
    mu = app.variables
    _distinct(mu, app.rule)
    _check_types(mu, p.place_type, app.rule)
    (t,) = _pick_names(net, app.names, (f"t_{p.name}_loop",), app.rule)
    arcs = dict(net.arcs)
    vec = Multiset([tuple(mu)])
    arcs[(p.name, t)] = vec
    arcs[(t, p.name)] = vec
    return TypedNet(net.places.values(), net.transitions + (t,), arcs, name=net.name), m


def _introduce_identifiers(net: TypedNet, m: Marking, app: RuleApplication) -> MarkedNet:
    t = app.target
    if t not in net.transitions:
        raise SideConditionError(app.rule, f"unknown transition {t!r}")
    mu, labels = app.variables, app.types
    if not labels:
        raise SideConditionError(app.rule, "type vector must be nonempty")
    _distinct(mu, app.rule)
    _check_types(mu, labels, app.rule)
    used_types = net.place_types()
    clash = [l for l in labels if l in used_types]
    if clash:
        raise SideConditionError(
            app.rule, f"type {clash[0].name!r} already occurs on a place"
        )
    overlap = [v for v in mu if v in net.variables(t)]
    if overlap:
        raise SideConditionError(
            app.rule, f"vector must avoid variables of {t!r} ({overlap[0].name})"
        )
    p, t_e, t_c = _pick_names(
        net, app.names, (f"p_{t}_ids", f"{t}_ide", f"{t}_idc"), app.rule
    )
    places = list(net.places.values()) + [Place(p, tuple(labels))]
    transitions = net.transitions + (t_e, t_c)
    arcs = dict(net.arcs)
    vec = Multiset([tuple(mu)])
    arcs[(p, t)] = vec
    arcs[(t, p)] = vec
    arcs[(t_e, p)] = vec
    arcs[(p, t_c)] = vec
    return TypedNet(places, transitions, arcs, name=net.name), m


# ---------------------------------------------------------------------------
# Scripts
# ---------------------------------------------------------------------------


def build_script(
    apps: Sequence[RuleApplication], seed: str = "t0", name: str = "tjn"
) -> MarkedNet:
    """Fold rule applications from the single-transition seed; the index of
    the first failing application is reported."""
    net, m = initial_net(seed, name=name)
    for i, app in enumerate(apps):
        try:
            net, m = apply_rule(net, m, app)
        except NetError as exc:
            raise SideConditionError(app.rule, f"step {i}: {exc}") from exc
    return net, m


def parse_script(text: str) -> tuple[str, list[RuleApplication]]:
    """Script files: one rule per line, e.g. ``expandT t (order,customer)
    (y,z) as p,te,tc``; an optional leading ``init <name>`` names the seed
    transition. Types are declared implicitly; ``resource <name>`` inside a
    type list marks a resource type."""
    seed = "t0"
    apps: list[RuleApplication] = []
    types: dict[str, TypeLabel] = {}

    def parse_types(chunk: str, lineno: int) -> tuple[TypeLabel, ...]:
        inner = chunk.strip()
        if not (inner.startswith("(") and inner.endswith(")")):
            raise NetError(f"line {lineno}: expected a (...) type list, got {chunk!r}")
        names = [x.strip() for x in inner[1:-1].split(",") if x.strip()]
        out = []
        for n in names:
            kind = Kind.OBJECT
            if n.startswith("resource "):
                kind = Kind.RESOURCE
                n = n[len("resource "):].strip()
            label = types.setdefault(n, TypeLabel(n, kind))
            out.append(label)
        return tuple(out)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//")[0].strip()
        if not line:
            continue
        if line.startswith("init "):
            seed = line.split()[1]
            continue
        names: tuple[str, ...] = ()
        if " as " in line:
            line, _, names_part = line.rpartition(" as ")
            names = tuple(x.strip() for x in names_part.split(","))
        parts = line.split(None, 2)
        if len(parts) < 2:
            raise NetError(f"line {lineno}: expected '<rule> <target> ...'")
        rule, target = parts[0], parts[1]
        rest = parts[2] if len(parts) > 2 else ""
        groups = []
        depth = 0
        cur = ""
        for ch in rest:
            if ch == "(":
                depth += 1
            if ch == ")":
                depth -= 1
            cur += ch
            if depth == 0 and cur.strip():
                groups.append(cur.strip())
                cur = ""
        if cur.strip():
            raise NetError(f"line {lineno}: unbalanced parentheses")
        if rule in ("expandT", "dupP", "idintro"):
            if len(groups) != 2:
                raise NetError(f"line {lineno}: {rule} needs (types) (vars)")
            labels = parse_types(groups[0], lineno)
            var_names = [x.strip() for x in groups[1].strip()[1:-1].split(",") if x.strip()]
            if len(var_names) != len(labels):
                raise NetError(f"line {lineno}: type and variable vectors differ in length")
            variables = tuple(Variable(n, l) for n, l in zip(var_names, labels))
            apps.append(RuleApplication(rule, target, labels, variables, names))
        elif rule in ("expandP", "selfloop"):
            if len(groups) != 1:
                raise NetError(f"line {lineno}: {rule} needs a (vars) list")
            var_names = tuple(x.strip() for x in groups[0].strip()[1:-1].split(",") if x.strip())
            apps.append(RuleApplication(rule, target, (), var_names, names))
        elif rule == "dupT":
            if groups:
                raise NetError(f"line {lineno}: dupT takes no vectors")
            apps.append(RuleApplication(rule, target, (), (), names))
        else:
            raise NetError(f"line {lineno}: unknown rule {rule!r}")
    return seed, apps


def resolve_script(seed: str, apps: Sequence[RuleApplication], name: str = "tjn") -> MarkedNet:
    """Build a parsed script. expandP/selfloop variable names are resolved
    against the target place's type at application time."""
    net, m = initial_net(seed, name=name)
    for i, app in enumerate(apps):
        if app.rule in ("expandP", "selfloop") and app.variables and isinstance(
            app.variables[0], str
        ):
            place = net.places.get(app.target)
            if place is None:
                raise SideConditionError(app.rule, f"step {i}: unknown place {app.target!r}")
            if len(app.variables) != len(place.place_type):
                raise SideConditionError(
                    app.rule, f"step {i}: expected {len(place.place_type)} variables"
                )
            variables = tuple(
                Variable(n, l) for n, l in zip(app.variables, place.place_type)
            )
            app = replace(app, variables=variables, types=place.place_type)
        try:
            net, m = apply_rule(net, m, app)
        except NetError as exc:
            raise SideConditionError(app.rule, f"step {i}: {exc}") from exc
    return net, m


# ---------------------------------------------------------------------------
# EC-closure and workflow refinement
# ---------------------------------------------------------------------------


def ec_close(
    wf: WeightedNet,
    labels: Sequence[TypeLabel],
    variables: Sequence[Variable],
    emitter: str = "tE",
    collector: str = "tC",
) -> MarkedNet:
    """Wrap a WF-net: a new emitter feeds the source, a new collector drains
    the sink, every place takes the case type, every arc the case vector
    (at the arc's weight). An empty type vector gives the classical closed
    net over black tokens."""
    if not wf.is_workflow_net():
        raise NetError("EC-closure needs a workflow net")
    if tuple(v.type_label for v in variables) != tuple(labels):
        raise NetError("case variable vector does not match the case type")
    if len(set(variables)) != len(variables):
        raise NetError("case variable vector must be duplicate-free")
    taken = set(wf.places) | set(wf.transitions)
    t_e = emitter
    while t_e in taken:
        t_e += "_"
    taken.add(t_e)
    t_c = collector
    while t_c in taken:
        t_c += "_"
    vec = tuple(variables)
    places = [Place(p, tuple(labels)) for p in wf.places]
    arcs: dict = {}
    for (a, b), w in wf.weights.items():
        arcs[(a, b)] = Multiset({vec: w})
    arcs[(t_e, wf.source)] = Multiset([vec])
    arcs[(wf.sink, t_c)] = Multiset([vec])
    net = TypedNet(places, tuple(wf.transitions) + (t_e, t_c), arcs, name="ec_closure")
    return net, Marking.empty()


def refine(
    host: TypedNet,
    m0: Marking,
    place: str,
    wf: WeightedNet,
    variables: Sequence[Variable],
) -> MarkedNet:
    """Replace a place by a generalized-sound WF-net: internal arcs carry
    the refinement vector at the arc's weight, boundary arcs inherit the
    host's inscriptions on the refined place."""
    p = host.places.get(place)
    if p is None:
        raise NetError(f"unknown place {place!r}")
    if m0.tokens(place):
        raise NetError(f"refined place {place!r} must be unmarked")
    if not wf.is_workflow_net():
        raise NetError("refinement needs a workflow net")
    if tuple(v.type_label for v in variables) != p.place_type:
        raise NetError("refinement vector does not match the place type")
    if len(set(variables)) != len(variables):
        raise NetError("refinement vector must be duplicate-free")
    clash = (set(wf.places) | set(wf.transitions)) & (
        set(host.places) | set(host.transitions)
    )
    if clash:
        raise NetError(f"name clash between host and refinement: {sorted(clash)[0]!r}")

    vec = tuple(variables)
    places = [q for q in host.places.values() if q.name != place]
    places += [Place(q, p.place_type) for q in wf.places]
    transitions = host.transitions + tuple(wf.transitions)
    arcs: dict = {}
    for (a, b), ms in host.arcs.items():
        if b == place:
            arcs[(a, wf.source)] = ms
        elif a == place:
            arcs[(wf.sink, b)] = ms
        else:
            arcs[(a, b)] = ms
    for (a, b), w in wf.weights.items():
        arcs[(a, b)] = Multiset({vec: w})
    return TypedNet(places, transitions, arcs, name=host.name), m0


# ---------------------------------------------------------------------------
# Recognition (reverse reduction)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionWitness:
    """Forward applications that rebuild the input net from the seed."""

    seed: str
    steps: tuple[RuleApplication, ...]

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class NotConstructible:
    reason: str  # "exhausted" | "budget" | "marked"

    def __bool__(self) -> bool:
        return False


def _net_signature(net: TypedNet) -> tuple:
    return (
        tuple(sorted((p.name, p.place_type) for p in net.places.values())),
        net.transitions,
        tuple(sorted(net.arcs.items())),
    )


def _single_vector(ms: Multiset) -> Optional[tuple[Variable, ...]]:
    items = ms.items()
    if len(items) == 1 and items[0][1] == 1:
        vec = items[0][0]
        if len(set(vec)) == len(vec):
            return vec
    return None


def _inverse_moves(net: TypedNet) -> list[tuple[RuleApplication, TypedNet]]:
    """All single reverse-rule applications, cheapest patterns first."""
    moves: list[tuple[RuleApplication, TypedNet]] = []

    # inverse self-loop: transition with exactly the loop arcs on one place
    for t in net.transitions:
        ins, outs = net.input_arcs(t), net.output_arcs(t)
        if len(ins) == 1 and len(outs) == 1 and ins[0][0] == outs[0][0]:
            place, ms = ins[0]
            vec = _single_vector(ms)
            if vec is None or outs[0][1] != ms:
                continue
            arcs = {k: v for k, v in net.arcs.items() if t not in k}
            reduced = TypedNet(
                net.places.values(),
                tuple(x for x in net.transitions if x != t),
                arcs,
                name=net.name,
            )
            app = RuleApplication("selfloop", place, net.places[place].place_type, vec, (t,))
            moves.append((app, reduced))

    # inverse duplicate transition: u copies t between the same two nodes
    for u in net.transitions:
        ins, outs = net.input_arcs(u), net.output_arcs(u)
        if len(ins) != 1 or len(outs) != 1:
            continue
        (p, in_ms), (q, out_ms) = ins[0], outs[0]
        for t in net.transitions:
            if t == u:
                continue
            if (
                net.preset(t) == frozenset({p})
                and net.postset(t) == frozenset({q})
                and net.arcs.get((p, t)) == in_ms
                and net.arcs.get((t, q)) == out_ms
            ):
                arcs = {k: v for k, v in net.arcs.items() if u not in k}
                reduced = TypedNet(
                    net.places.values(),
                    tuple(x for x in net.transitions if x != u),
                    arcs,
                    name=net.name,
                )
                moves.append((RuleApplication("dupT", t, (), (), (u,)), reduced))
                break

    # inverse duplicate place: q copies some p between one producer/consumer
    for q in sorted(net.places):
        pre, post = net.preset(q), net.postset(q)
        if len(pre) != 1 or len(post) != 1:
            continue
        (t,), (u,) = tuple(pre), tuple(post)
        vec = _single_vector(net.arcs[(t, q)])
        if vec is None or net.arcs[(t, q)] != net.arcs[(q, u)]:
            continue
        if any(v in net.variable_sets(u).emit for v in vec):
            continue
        for p in sorted(net.places):
            if p == q:
                continue
            if net.preset(p) == frozenset({t}) and net.postset(p) == frozenset({u}):
                arcs = {k: v for k, v in net.arcs.items() if q not in k}
                places = [x for x in net.places.values() if x.name != q]
                reduced = TypedNet(places, net.transitions, arcs, name=net.name)
                app = RuleApplication(
                    "dupP", p, net.places[q].place_type, vec, (q,)
                )
                moves.append((app, reduced))
                break

    # inverse place expansion: p_i -> t -> p_f collapses back into one place
    for t in net.transitions:
        ins, outs = net.input_arcs(t), net.output_arcs(t)
        if len(ins) != 1 or len(outs) != 1:
            continue
        (p_i, in_ms), (p_f, out_ms) = ins[0], outs[0]
        if p_i == p_f or in_ms != out_ms:
            continue
        vec = _single_vector(in_ms)
        if vec is None:
            continue
        if net.places[p_i].place_type != net.places[p_f].place_type:
            continue
        if net.postset(p_i) != frozenset({t}) or net.preset(p_f) != frozenset({t}):
            continue
        # merge p_f into p_i, drop t
        places = [x for x in net.places.values() if x.name != p_f]
        arcs = {}
        ok = True
        for (a, b), ms in net.arcs.items():
            if t in (a, b):
                continue
            a2 = p_i if a == p_f else a
            b2 = p_i if b == p_f else b
            if (a2, b2) in arcs:
                ok = False
                break
            arcs[(a2, b2)] = ms
        if not ok:
            continue
        reduced = TypedNet(
            places, tuple(x for x in net.transitions if x != t), arcs, name=net.name
        )
        app = RuleApplication(
            "expandP", p_i, net.places[p_i].place_type, vec, (p_i, p_f, t)
        )
        moves.append((app, reduced))

    # inverse transition expansion: t_e -> p -> t_c collapses back into one
    for p in sorted(net.places):
        pre, post = net.preset(p), net.postset(p)
        if len(pre) != 1 or len(post) != 1:
            continue
        (t_e,), (t_c,) = tuple(pre), tuple(post)
        if t_e == t_c:
            continue
        vec = _single_vector(net.arcs[(t_e, p)])
        if vec is None or net.arcs[(t_e, p)] != net.arcs[(p, t_c)]:
            continue
        if net.postset(t_e) != frozenset({p}) or net.preset(t_c) != frozenset({p}):
            continue
        in_vars = net.variable_sets(t_e).input
        if not in_vars <= set(vec):
            continue
        merged = t_e  # reuse the emitter's name for the merged transition
        arcs = {}
        ok = True
        for (a, b), ms in net.arcs.items():
            if p in (a, b):
                continue
            a2 = merged if a == t_c else a
            b2 = merged if b == t_c else b
            if (a2, b2) in arcs:
                ok = False
                break
            arcs[(a2, b2)] = ms
        if not ok:
            continue
        merged_net = TypedNet(
            [x for x in net.places.values() if x.name != p],
            tuple(x for x in net.transitions if x != t_c),
            arcs,
            name=net.name,
        )
        new_vars = merged_net.variable_sets(merged).emit if merged in merged_net.transitions else frozenset()
        if any(v in new_vars for v in vec):
            continue
        app = RuleApplication(
            "expandT", merged, net.places[p].place_type, vec, (p, t_e, t_c)
        )
        moves.append((app, merged_net))

    # inverse identifier introduction: storage place p with its own emitter
    # and collector, read by exactly one transition
    for p in sorted(net.places):
        place = net.places[p]
        if not place.place_type:
            continue
        others = {
            q.name
            for q in net.places.values()
            if q.name != p and set(q.place_type) & set(place.place_type)
        }
        if others:
            continue
        pre, post = net.preset(p), net.postset(p)
        if len(pre) != 2 or len(post) != 2:
            continue
        loops = pre & post
        if len(loops) != 1:
            continue
        (t,) = tuple(loops)
        (t_e,) = tuple(pre - loops)
        (t_c,) = tuple(post - loops)
        vec = _single_vector(net.arcs[(p, t)])
        if vec is None:
            continue
        if not (
            net.arcs[(t, p)] == net.arcs[(p, t)]
            and net.arcs.get((t_e, p)) == net.arcs[(p, t)]
            and net.arcs.get((p, t_c)) == net.arcs[(p, t)]
        ):
            continue
        if net.preset(t_e) or net.postset(t_e) != frozenset({p}):
            continue
        if net.postset(t_c) or net.preset(t_c) != frozenset({p}):
            continue
        arcs = {k: v for k, v in net.arcs.items() if p not in k}
        reduced = TypedNet(
            [x for x in net.places.values() if x.name != p],
            tuple(x for x in net.transitions if x not in (t_e, t_c)),
            arcs,
            name=net.name,
        )
        if any(v in reduced.variables(t) for v in vec):
            continue
        app = RuleApplication("idintro", t, place.place_type, vec, (p, t_e, t_c))
        moves.append((app, reduced))

    return moves


def recognize(
    net: TypedNet, m: Marking, budget: int = 20_000
) -> ReductionWitness | NotConstructible:
    """Search a reduction to the single-transition seed by inverting the six
    rules; a found witness is verified by forward replay before returning.
    Failure distinguishes an exhausted search from a budget cut."""
    if m:
        return NotConstructible("marked")
    visited: set[tuple] = set()
    steps: list[RuleApplication] = []
    spent = [0]

    def is_seed(n: TypedNet) -> bool:
        return not n.places and len(n.transitions) == 1 and not n.arcs

    def dfs(current: TypedNet) -> Optional[str]:
        if is_seed(current):
            return current.transitions[0]
        if spent[0] >= budget:
            return None
        sig = _net_signature(current)
        if sig in visited:
            return None
        visited.add(sig)
        for app, reduced in _inverse_moves(current):
            spent[0] += 1
            steps.append(app)
            seed = dfs(reduced)
            if seed is not None:
                return seed
            steps.pop()
        return None

    seed = dfs(net)
    if seed is None:
        return NotConstructible("budget" if spent[0] >= budget else "exhausted")
    witness = ReductionWitness(seed=seed, steps=tuple(reversed(steps)))
    rebuilt, rebuilt_m = build_script(witness.steps, seed=witness.seed, name=net.name)
    if rebuilt != net or rebuilt_m != m:
        raise NetError("internal error: reduction witness failed forward replay")
    return witness
