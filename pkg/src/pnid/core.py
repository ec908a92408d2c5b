"""Domain model and execution semantics of typed Petri nets with identifiers.

Tokens are vectors of typed identifiers, arcs carry multisets of variable
vectors, and transitions fire under injective, type-respecting bindings.
Fresh identifiers are created locally: an emitting variable is bound to the
smallest index of its type that does not occur in the current marking.

All values are immutable after construction; every operation is a pure
function, so nets, markings and bindings can be shared freely between
threads and explorations.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union


class Kind(str, Enum):
    """Partition of type labels into object types and resource types."""

    OBJECT = "object"
    RESOURCE = "resource"


@dataclass(frozen=True)
class TypeLabel:
    name: str
    kind: Kind = Kind.OBJECT

    def __lt__(self, other: "TypeLabel") -> bool:
        return self.name < other.name

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Identifier:
    """A typed identifier; (type, index) determines it uniquely."""

    type_label: TypeLabel
    index: int

    def __lt__(self, other: "Identifier") -> bool:
        return (self.type_label.name, self.index) < (other.type_label.name, other.index)

    def __str__(self) -> str:
        return f"{self.type_label.name}#{self.index}"


@dataclass(frozen=True)
class Variable:
    name: str
    type_label: TypeLabel

    def __lt__(self, other: "Variable") -> bool:
        return (self.name, self.type_label.name) < (other.name, other.type_label.name)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Place:
    """A place; an empty place type means a classical black-token place."""

    name: str
    place_type: tuple[TypeLabel, ...] = ()


IdVector = tuple[Identifier, ...]
VarVector = tuple[Variable, ...]

#: The single token value carried by black-token places.
BLACK: IdVector = ()


class NetError(Exception):
    """Base class for semantic errors raised by net operations."""


class NotEnabledError(NetError):
    pass


class InvalidBindingError(NetError):
    pass


class NotEnabledAtError(NetError):
    """A firing sequence failed; ``index`` is the first disabled event."""

    def __init__(self, index: int, cause: str = ""):
        super().__init__(f"event {index} not enabled" + (f": {cause}" if cause else ""))
        self.index = index


class Multiset:
    """Immutable multiset in normal form (no zero counts), hashable.

    Elements must be hashable and mutually comparable (token vectors and
    variable vectors are); iteration and ``items()`` are sorted so that
    serializations are deterministic.
    """

    __slots__ = ("_counts", "_hash")

    def __init__(self, items: Union[Mapping, Iterable] = ()):
        counts: dict = {}
        if isinstance(items, Multiset):
            counts = dict(items._counts)
        elif isinstance(items, Mapping):
            for elem, cnt in items.items():
                if cnt < 0:
                    raise ValueError(f"negative multiplicity for {elem!r}")
                if cnt:
                    counts[elem] = counts.get(elem, 0) + cnt
        else:
            for elem in items:
                counts[elem] = counts.get(elem, 0) + 1
        object.__setattr__(self, "_counts", counts)
        # order-independent combination; cheaper than hashing a frozenset
        h = 0
        for item in counts.items():
            h += hash(item)
        object.__setattr__(self, "_hash", h & 0x7FFFFFFFFFFFFFFF)

    def __setattr__(self, *a):  # pragma: no cover - immutability guard
        raise AttributeError("Multiset is immutable")

    def count(self, elem) -> int:
        return self._counts.get(elem, 0)

    def __contains__(self, elem) -> bool:
        return elem in self._counts

    def __len__(self) -> int:
        """Number of distinct elements (the support size)."""
        return len(self._counts)

    def total(self) -> int:
        """Total multiplicity, |m|."""
        return sum(self._counts.values())

    def support(self):
        return self._counts.keys()

    def items(self) -> list[tuple]:
        return sorted(self._counts.items())

    def __iter__(self) -> Iterator:
        for elem, cnt in self.items():
            for _ in range(cnt):
                yield elem

    def __bool__(self) -> bool:
        return bool(self._counts)

    def __eq__(self, other) -> bool:
        return isinstance(other, Multiset) and self._counts == other._counts

    def __hash__(self) -> int:
        return self._hash

    def __le__(self, other: "Multiset") -> bool:
        return all(other.count(e) >= c for e, c in self._counts.items())

    def __add__(self, other: "Multiset") -> "Multiset":
        counts = dict(self._counts)
        for e, c in other._counts.items():
            counts[e] = counts.get(e, 0) + c
        return Multiset(counts)

    def __sub__(self, other: "Multiset") -> "Multiset":
        counts = dict(self._counts)
        for e, c in other._counts.items():
            left = counts.get(e, 0) - c
            if left < 0:
                raise ValueError(f"multiset difference undefined: missing {e!r}")
            if left:
                counts[e] = left
            else:
                counts.pop(e, None)
        return Multiset(counts)

    def __repr__(self) -> str:
        inner = ", ".join(f"{e!r}^{c}" if c > 1 else repr(e) for e, c in self.items())
        return f"Multiset([{inner}])"


def rename_vector(vec: Sequence, mapping: Mapping) -> tuple:
    return tuple(mapping.get(x, x) for x in vec)


def rename_multiset(ms: Multiset, mapping: Mapping) -> Multiset:
    counts: dict = {}
    for vec, cnt in ms.items():
        out = rename_vector(vec, mapping)
        counts[out] = counts.get(out, 0) + cnt
    return Multiset(counts)


class Marking:
    """A finite map from place names to multisets of identifier vectors."""

    __slots__ = ("_places", "_hash", "_ids")

    def __init__(self, tokens: Mapping[str, Union[Multiset, Iterable]] = ()):
        places: dict[str, Multiset] = {}
        for name, toks in dict(tokens).items():
            ms = toks if isinstance(toks, Multiset) else Multiset(toks)
            if ms:
                places[name] = ms
        object.__setattr__(self, "_places", places)
        object.__setattr__(self, "_hash", hash(frozenset((p, ms) for p, ms in places.items())))
        object.__setattr__(self, "_ids", None)

    def __setattr__(self, *a):  # pragma: no cover - immutability guard
        raise AttributeError("Marking is immutable")

    @staticmethod
    def empty() -> "Marking":
        return Marking()

    def tokens(self, place: str) -> Multiset:
        return self._places.get(place, _EMPTY_MS)

    def marked_places(self) -> list[str]:
        return sorted(self._places)

    def items(self) -> list[tuple[str, Multiset]]:
        return sorted(self._places.items())

    def identifiers(self) -> frozenset[Identifier]:
        """Id(M): all identifiers occurring in some token."""
        cached = self._ids
        if cached is None:
            ids = frozenset(
                ident for ms in self._places.values() for vec in ms.support() for ident in vec
            )
            object.__setattr__(self, "_ids", ids)
            cached = ids
        return cached

    def total_tokens(self) -> int:
        return sum(ms.total() for ms in self._places.values())

    def rename(self, mapping: Mapping[Identifier, Identifier]) -> "Marking":
        """Apply an identifier mapping (identity outside its domain)."""
        return Marking({p: rename_multiset(ms, mapping) for p, ms in self._places.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, Marking) and self._places == other._places

    def __hash__(self) -> int:
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._places)

    def __repr__(self) -> str:
        parts = []
        for place, ms in self.items():
            toks = ", ".join(
                "(" + ",".join(str(i) for i in vec) + ")" + (f"^{c}" if c > 1 else "")
                for vec, c in ms.items()
            )
            parts.append(f"{place}: [{toks}]")
        return "{" + "; ".join(parts) + "}"


_EMPTY_MS = Multiset()


@dataclass(frozen=True)
class VariableSets:
    """The input/output/emitting/collecting variable sets of a transition."""

    input: frozenset[Variable]
    output: frozenset[Variable]
    emit: frozenset[Variable]
    collect: frozenset[Variable]

    @property
    def all(self) -> frozenset[Variable]:
        return self.input | self.output


class Binding:
    """An injective, type-respecting valuation of one transition's variables."""

    __slots__ = ("_map", "_hash")

    def __init__(self, assignment: Mapping[Variable, Identifier]):
        mapping = dict(assignment)
        object.__setattr__(self, "_map", mapping)
        object.__setattr__(self, "_hash", hash(frozenset(mapping.items())))

    def __setattr__(self, *a):  # pragma: no cover - immutability guard
        raise AttributeError("Binding is immutable")

    def __getitem__(self, var: Variable) -> Identifier:
        return self._map[var]

    def get(self, var: Variable) -> Optional[Identifier]:
        return self._map.get(var)

    def __contains__(self, var: Variable) -> bool:
        return var in self._map

    def items(self) -> list[tuple[Variable, Identifier]]:
        return sorted(self._map.items())

    def values(self) -> list[Identifier]:
        return [i for _, i in self.items()]

    def domain(self) -> frozenset[Variable]:
        return frozenset(self._map)

    def replace(self, var: Variable, ident: Identifier) -> "Binding":
        mapping = dict(self._map)
        mapping[var] = ident
        return Binding(mapping)

    def rename(self, mapping: Mapping[Identifier, Identifier]) -> "Binding":
        return Binding({v: mapping.get(i, i) for v, i in self._map.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, Binding) and self._map == other._map

    def __lt__(self, other: "Binding") -> bool:
        return self.items() < other.items()

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{v.name}={i}" for v, i in self.items())
        return "{" + inner + "}"


@dataclass(frozen=True)
class FiringEvent:
    transition: str
    binding: Binding

    def __str__(self) -> str:
        args = " ".join(f"{v.name}={i}" for v, i in self.binding.items())
        return f"{self.transition} {args}".rstrip()


@dataclass(frozen=True)
class Diagnostic:
    message: str
    location: str = ""

    def __str__(self) -> str:
        return f"{self.location}: {self.message}" if self.location else self.message


class TypedNet:
    """A typed Petri net with identifiers: places, transitions, inscribed arcs.

    Arcs are keyed by ``(source, target)`` node names; each maps to a
    multiset of variable vectors. The constructor only requires shape
    validity; :func:`validate_net` reports semantic problems (unresolved
    names, inscription/place type mismatches) as diagnostics.
    """

    def __init__(
        self,
        places: Iterable[Place],
        transitions: Iterable[str],
        arcs: Mapping[tuple[str, str], Union[Multiset, Iterable[VarVector]]],
        name: str = "net",
    ):
        self.name = name
        self.places: dict[str, Place] = {}
        for p in places:
            if p.name in self.places:
                raise ValueError(f"duplicate place {p.name!r}")
            self.places[p.name] = p
        self.transitions: tuple[str, ...] = tuple(sorted(set(transitions)))
        tset = set(self.transitions)
        if tset & set(self.places):
            clash = sorted(tset & set(self.places))
            raise ValueError(f"names used for both place and transition: {clash}")
        self.arcs: dict[tuple[str, str], Multiset] = {}
        for (src, dst), insc in dict(arcs).items():
            ms = insc if isinstance(insc, Multiset) else Multiset(insc)
            if ms:
                self.arcs[(src, dst)] = ms

        self._inputs: dict[str, tuple[tuple[str, Multiset], ...]] = {t: () for t in self.transitions}
        self._outputs: dict[str, tuple[tuple[str, Multiset], ...]] = {t: () for t in self.transitions}
        by_in: dict[str, list] = {t: [] for t in self.transitions}
        by_out: dict[str, list] = {t: [] for t in self.transitions}
        for (src, dst), ms in sorted(self.arcs.items()):
            if dst in by_in and src in self.places:
                by_in[dst].append((src, ms))
            if src in by_out and dst in self.places:
                by_out[src].append((dst, ms))
        for t in self.transitions:
            self._inputs[t] = tuple(by_in[t])
            self._outputs[t] = tuple(by_out[t])

        self._varsets: dict[str, VariableSets] = {}
        for t in self.transitions:
            invars = frozenset(v for _, ms in self._inputs[t] for vec in ms.support() for v in vec)
            outvars = frozenset(v for _, ms in self._outputs[t] for vec in ms.support() for v in vec)
            self._varsets[t] = VariableSets(
                input=invars,
                output=outvars,
                emit=outvars - invars,
                collect=invars - outvars,
            )

    # -- structure ---------------------------------------------------------

    def input_arcs(self, t: str) -> tuple[tuple[str, Multiset], ...]:
        self._require_transition(t)
        return self._inputs[t]

    def output_arcs(self, t: str) -> tuple[tuple[str, Multiset], ...]:
        self._require_transition(t)
        return self._outputs[t]

    def preset(self, node: str) -> frozenset[str]:
        return frozenset(src for (src, dst) in self.arcs if dst == node)

    def postset(self, node: str) -> frozenset[str]:
        return frozenset(dst for (src, dst) in self.arcs if src == node)

    def variable_sets(self, t: str) -> VariableSets:
        self._require_transition(t)
        return self._varsets[t]

    def variables(self, t: str) -> frozenset[Variable]:
        return self.variable_sets(t).all

    def emitters(self, label: TypeLabel) -> frozenset[str]:
        """E_N(λ): transitions with an emitting variable of the given type."""
        self._require_type(label)
        return frozenset(
            t for t in self.transitions if any(v.type_label == label for v in self._varsets[t].emit)
        )

    def collectors(self, label: TypeLabel) -> frozenset[str]:
        """C_N(λ): transitions with a collecting variable of the given type."""
        self._require_type(label)
        return frozenset(
            t
            for t in self.transitions
            if any(v.type_label == label for v in self._varsets[t].collect)
        )

    def place_types(self) -> frozenset[TypeLabel]:
        """All type labels occurring in some place type."""
        return frozenset(lab for p in self.places.values() for lab in p.place_type)

    def object_types(self) -> tuple[TypeLabel, ...]:
        return tuple(sorted(l for l in self.place_types() if l.kind == Kind.OBJECT))

    def resource_types(self) -> tuple[TypeLabel, ...]:
        return tuple(sorted(l for l in self.place_types() if l.kind == Kind.RESOURCE))

    def resource_places(self) -> tuple[str, ...]:
        return tuple(
            sorted(
                p.name
                for p in self.places.values()
                if any(l.kind == Kind.RESOURCE for l in p.place_type)
            )
        )

    def _require_transition(self, t: str) -> None:
        if t not in self._varsets:
            raise NetError(f"unknown transition {t!r}")

    def _require_type(self, label: TypeLabel) -> None:
        if label not in self.place_types():
            raise NetError(f"type {label.name!r} not used in net {self.name!r}")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TypedNet)
            and self.places == other.places
            and self.transitions == other.transitions
            and self.arcs == other.arcs
        )

    def __hash__(self) -> int:
        return hash((frozenset(self.places.items()), self.transitions, frozenset(self.arcs.items())))

    def __repr__(self) -> str:
        return (
            f"TypedNet({self.name!r}, |P|={len(self.places)}, |T|={len(self.transitions)}, "
            f"|F|={len(self.arcs)})"
        )


def validate_net(net: TypedNet) -> list[Diagnostic]:
    """Check a net; returns one diagnostic per violation, empty when valid."""
    out: list[Diagnostic] = []
    nodes = set(net.places) | set(net.transitions)

    seen_types: dict[str, TypeLabel] = {}

    def check_type(label: TypeLabel, where: str) -> None:
        prev = seen_types.setdefault(label.name, label)
        if prev != label:
            out.append(Diagnostic(f"type {label.name!r} declared with conflicting kinds", where))

    for p in sorted(net.places.values(), key=lambda p: p.name):
        for lab in p.place_type:
            check_type(lab, f"place {p.name}")

    for (src, dst), ms in sorted(net.arcs.items()):
        where = f"arc {src} -> {dst}"
        if src not in nodes:
            out.append(Diagnostic(f"unknown node {src!r}", where))
            continue
        if dst not in nodes:
            out.append(Diagnostic(f"unknown node {dst!r}", where))
            continue
        if (src in net.places) == (dst in net.places):
            out.append(Diagnostic("arc must connect a place and a transition", where))
            continue
        place = net.places[src if src in net.places else dst]
        for vec in ms.support():
            vec_types = tuple(v.type_label for v in vec)
            if vec_types != place.place_type:
                got = "(" + ",".join(l.name for l in vec_types) + ")"
                want = "(" + ",".join(l.name for l in place.place_type) + ")"
                out.append(
                    Diagnostic(
                        f"inscription ({','.join(v.name for v in vec)}) has type {got}, "
                        f"place {place.name!r} expects {want}",
                        where,
                    )
                )
            for v in vec:
                check_type(v.type_label, where)

    for t in net.transitions:
        by_name: dict[str, Variable] = {}
        for v in sorted(net.variables(t)):
            prev = by_name.setdefault(v.name, v)
            if prev.type_label != v.type_label:
                out.append(
                    Diagnostic(
                        f"variable {v.name!r} used with types {prev.type_label.name!r} "
                        f"and {v.type_label.name!r}",
                        f"transition {t}",
                    )
                )
    return out


def validate_marking(net: TypedNet, m: Marking) -> list[Diagnostic]:
    """Check that every token vector matches its place's type."""
    out: list[Diagnostic] = []
    for place_name, ms in m.items():
        place = net.places.get(place_name)
        if place is None:
            out.append(Diagnostic(f"unknown place {place_name!r}", "marking"))
            continue
        for vec in ms.support():
            if tuple(i.type_label for i in vec) != place.place_type:
                out.append(
                    Diagnostic(
                        f"token ({','.join(str(i) for i in vec)}) does not match type of "
                        f"place {place_name!r}",
                        "marking",
                    )
                )
    return out


def fresh_identifier(label: TypeLabel, taken: Iterable[Identifier], start: int = 0) -> Identifier:
    """Smallest-index identifier of ``label`` not in ``taken``."""
    used = {i.index for i in taken if i.type_label == label}
    idx = start
    while idx in used:
        idx += 1
    return Identifier(label, idx)


def enabled_bindings(net: TypedNet, m: Marking, t: str) -> tuple[Binding, ...]:
    """All bindings enabling ``t`` in ``m``, sorted deterministically.

    Input variables are drawn from tokens in the input places; each emitting
    variable receives the one canonical fresh identifier of its type (the
    smallest index absent from the marking), so branching stays finite. Up
    to isomorphism of successor markings no behaviour is lost.
    """
    ins = net.input_arcs(t)
    vs = net.variable_sets(t)
    input_vars = sorted(vs.input)

    pools: dict[Variable, list[Identifier]] = {}
    for v in input_vars:
        cand: set[Identifier] = set()
        for place, insc in ins:
            toks = m.tokens(place)
            if not toks:
                return ()
            for pattern in insc.support():
                positions = [i for i, pv in enumerate(pattern) if pv == v]
                if not positions:
                    continue
                for vec in toks.support():
                    for i in positions:
                        if vec[i].type_label == v.type_label:
                            cand.add(vec[i])
        if not cand and any(
            v in pattern for _, insc in ins for pattern in insc.support()
        ):
            return ()
        pools[v] = sorted(cand)

    # Black-token / variable-free coverage must hold regardless of bindings.
    def covered(assignment: dict[Variable, Identifier]) -> bool:
        for place, insc in ins:
            toks = m.tokens(place)
            need: dict[IdVector, int] = {}
            for pattern, cnt in insc.items():
                vec = tuple(assignment[pv] for pv in pattern)
                need[vec] = need.get(vec, 0) + cnt
            for vec, cnt in need.items():
                if toks.count(vec) < cnt:
                    return False
        return True

    partial: dict[Variable, Identifier] = {}
    used: set[Identifier] = set()
    found: list[dict[Variable, Identifier]] = []

    def rec(i: int) -> None:
        if i == len(input_vars):
            if covered(partial):
                found.append(dict(partial))
            return
        v = input_vars[i]
        for ident in pools[v]:
            if ident in used:
                continue
            partial[v] = ident
            used.add(ident)
            rec(i + 1)
            used.discard(ident)
            del partial[v]

    rec(0)

    if not input_vars and not found:
        if covered({}):
            found.append({})

    emit_vars = sorted(vs.emit)
    marking_ids = m.identifiers()
    bindings = []
    for asg in found:
        taken = set(marking_ids) | set(asg.values())
        full = dict(asg)
        for v in emit_vars:
            ident = fresh_identifier(v.type_label, taken)
            full[v] = ident
            taken.add(ident)
        bindings.append(Binding(full))
    return tuple(sorted(bindings))


def is_enabled(net: TypedNet, m: Marking, event: FiringEvent) -> bool:
    try:
        _check_event(net, m, event)
        return True
    except NetError:
        return False


def _check_event(net: TypedNet, m: Marking, event: FiringEvent) -> None:
    t, b = event.transition, event.binding
    vs = net.variable_sets(t)
    if b.domain() != vs.all:
        missing = sorted(v.name for v in vs.all - b.domain())
        extra = sorted(v.name for v in b.domain() - vs.all)
        raise InvalidBindingError(
            f"binding domain mismatch for {t!r} (missing {missing}, extra {extra})"
        )
    values = b.values()
    if len(set(values)) != len(values):
        raise InvalidBindingError(f"binding for {t!r} is not injective")
    marking_ids = m.identifiers()
    for v, ident in b.items():
        if ident.type_label != v.type_label:
            raise InvalidBindingError(
                f"variable {v.name!r}:{v.type_label} bound to {ident} of wrong type"
            )
        fresh = ident not in marking_ids
        if fresh != (v in vs.emit):
            if v in vs.emit:
                raise InvalidBindingError(f"emitting variable {v.name!r} bound to live {ident}")
            raise InvalidBindingError(f"variable {v.name!r} bound to fresh {ident}")
    for place, insc in net.input_arcs(t):
        toks = m.tokens(place)
        need = rename_multiset(insc, dict(b.items()))
        if not need <= toks:
            raise NotEnabledError(f"{t!r} lacks tokens in {place!r} under {b!r}")


def fire(net: TypedNet, m: Marking, event: FiringEvent, check: bool = True) -> Marking:
    """Fire one event: M'(p) + ψ(β(p,t)) = M(p) + ψ(β(t,p)) for every p."""
    if check:
        _check_event(net, m, event)
    mapping = dict(event.binding.items())
    tokens = {p: ms for p, ms in m.items()}
    for place, insc in net.input_arcs(event.transition):
        tokens[place] = tokens.get(place, _EMPTY_MS) - rename_multiset(insc, mapping)
    for place, insc in net.output_arcs(event.transition):
        tokens[place] = tokens.get(place, _EMPTY_MS) + rename_multiset(insc, mapping)
    return Marking(tokens)


def fire_sequence(net: TypedNet, m0: Marking, events: Sequence[FiringEvent]) -> Marking:
    """Left fold of :func:`fire`; fails fast with the index of the first
    disabled event."""
    m = m0
    for i, ev in enumerate(events):
        try:
            m = fire(net, m, ev)
        except NetError as exc:
            raise NotEnabledAtError(i, str(exc)) from exc
    return m
