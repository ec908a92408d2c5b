"""Textual format for nets, markings, resource declarations and properties.

Grammar (``//`` comments run to end of line, whitespace is free-form)::

    net <Name> {
      type <id>;                 // object type
      resource type <id>;        // resource type
      place <id> : (<type>, ...);   // "()" declares a black-token place
      var <id> : <type>;
      trans <id> { consume <place>: [v,...]^n, ...; produce ...; }
      marking { <place>: [type#0, type#1]^n, ...; }
      resources <place>: { type#0, type#1 };
    }

Repeated ``place:`` entries inside one consume/produce clause accumulate the
arc's multiset. Property files use::

    exists x:type, y:type . place(x,y) >= 1 && place >= 2 && x != y

Parsing raises :class:`ParseError` with a 1-based line/column for any
malformed input; serialization is canonical (sorted declarations), so
``parse . serialize`` is the identity and ``serialize . parse`` is
idempotent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from .core import (
    Identifier,
    Kind,
    Marking,
    Multiset,
    Place,
    TypeLabel,
    TypedNet,
    Variable,
    validate_marking,
    validate_net,
)
from .logic import Compare, FormulaVar, PlaceCount, PlaceTotal, UnsafetyFormula


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{line}:{column}: {message}" if line else message)
        self.line = line
        self.column = column
        self.message = message


@dataclass(frozen=True)
class NetDocument:
    net: TypedNet
    initial_marking: Marking
    resources: Mapping[str, tuple[Identifier, ...]] = field(default_factory=dict)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, NetDocument)
            and self.net == other.net
            and self.initial_marking == other.initial_marking
            and dict(self.resources) == dict(other.resources)
        )


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_PUNCT = ("&&", "!=", ">=", "{", "}", "(", ")", "[", "]", ":", ";", ",", "^", "#", ".", "=")


@dataclass(frozen=True)
class _Token:
    kind: str  # name | number | punct | eof
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        matched = None
        for p in _PUNCT:
            if text.startswith(p, i):
                matched = p
                break
        if matched:
            tokens.append(_Token("punct", matched, line, col))
            i += len(matched)
            col += len(matched)
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("name", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("number", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.pos]

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.cur.line, self.cur.column)

    def accept(self, text: str) -> bool:
        if self.cur.text == text and self.cur.kind != "eof":
            self.pos += 1
            return True
        return False

    def _found(self) -> str:
        return repr(self.cur.text) if self.cur.kind != "eof" else "end of input"

    def expect(self, text: str) -> _Token:
        if self.cur.text != text or self.cur.kind == "eof":
            raise self.error(f"expected {text!r}, found {self._found()}")
        tok = self.cur
        self.pos += 1
        return tok

    def name(self, what: str = "name") -> _Token:
        if self.cur.kind != "name":
            raise self.error(f"expected {what}, found {self._found()}")
        tok = self.cur
        self.pos += 1
        return tok

    def number(self) -> int:
        if self.cur.kind != "number":
            raise self.error(f"expected number, found {self._found()}")
        tok = self.cur
        self.pos += 1
        return int(tok.text)

    def at_end(self) -> bool:
        return self.cur.kind == "eof"


# ---------------------------------------------------------------------------
# Net documents
# ---------------------------------------------------------------------------


class _NetParser(_Parser):
    def __init__(self, text: str):
        super().__init__(text)
        self.types: dict[str, TypeLabel] = {}
        self.places: dict[str, Place] = {}
        self.vars: dict[str, Variable] = {}
        self.transitions: list[str] = []
        self.arcs: dict[tuple[str, str], dict] = {}
        self.marking: dict[str, dict] = {}
        self.resources: dict[str, list[Identifier]] = {}

    def parse(self) -> NetDocument:
        self.expect("net")
        name = self.name("net name").text
        self.expect("{")
        while not self.accept("}"):
            self.declaration()
        if not self.at_end():
            raise self.error("trailing input after net body")

        net = TypedNet(
            places=self.places.values(),
            transitions=self.transitions,
            arcs={k: Multiset(v) for k, v in self.arcs.items()},
            name=name,
        )
        diagnostics = validate_net(net)
        if diagnostics:
            raise ParseError(f"invalid net: {diagnostics[0]}")
        marking = Marking({p: Multiset(v) for p, v in self.marking.items()})
        bad = validate_marking(net, marking)
        if bad:
            raise ParseError(f"invalid marking: {bad[0]}")
        return NetDocument(
            net=net,
            initial_marking=marking,
            resources={p: tuple(sorted(ids)) for p, ids in self.resources.items()},
        )

    def declaration(self) -> None:
        tok = self.cur
        if self.accept("type"):
            self.type_decl(Kind.OBJECT)
        elif self.accept("resource"):
            self.expect("type")
            self.type_decl(Kind.RESOURCE)
        elif self.accept("place"):
            self.place_decl()
        elif self.accept("var"):
            self.var_decl()
        elif self.accept("trans"):
            self.trans_decl()
        elif self.accept("marking"):
            self.marking_decl()
        elif self.accept("resources"):
            self.resources_decl()
        else:
            raise ParseError(f"expected a declaration, found {tok.text!r}", tok.line, tok.column)

    def type_decl(self, kind: Kind) -> None:
        tok = self.name("type name")
        if tok.text in self.types:
            raise ParseError(f"duplicate type {tok.text!r}", tok.line, tok.column)
        self.types[tok.text] = TypeLabel(tok.text, kind)
        self.expect(";")

    def lookup_type(self, tok: _Token) -> TypeLabel:
        label = self.types.get(tok.text)
        if label is None:
            raise ParseError(f"unknown type {tok.text!r}", tok.line, tok.column)
        return label

    def place_decl(self) -> None:
        tok = self.name("place name")
        if tok.text in self.places:
            raise ParseError(f"duplicate name {tok.text!r}", tok.line, tok.column)
        self.expect(":")
        self.expect("(")
        labels: list[TypeLabel] = []
        if not self.accept(")"):
            labels.append(self.lookup_type(self.name("type name")))
            while self.accept(","):
                labels.append(self.lookup_type(self.name("type name")))
            self.expect(")")
        self.expect(";")
        self.places[tok.text] = Place(tok.text, tuple(labels))

    def var_decl(self) -> None:
        tok = self.name("variable name")
        if tok.text in self.vars:
            raise ParseError(f"duplicate variable {tok.text!r}", tok.line, tok.column)
        self.expect(":")
        label = self.lookup_type(self.name("type name"))
        self.expect(";")
        self.vars[tok.text] = Variable(tok.text, label)

    def trans_decl(self) -> None:
        tok = self.name("transition name")
        if tok.text in self.transitions or tok.text in self.places:
            raise ParseError(f"duplicate name {tok.text!r}", tok.line, tok.column)
        t = tok.text
        self.transitions.append(t)
        self.expect("{")
        while not self.accept("}"):
            if self.accept("consume"):
                self.arc_entries(t, consume=True)
            elif self.accept("produce"):
                self.arc_entries(t, consume=False)
            else:
                raise self.error("expected 'consume' or 'produce'")

    def arc_entries(self, t: str, consume: bool) -> None:
        while True:
            ptok = self.name("place name")
            place = self.places.get(ptok.text)
            if place is None:
                raise ParseError(f"unknown place {ptok.text!r}", ptok.line, ptok.column)
            self.expect(":")
            vec, count = self.var_vector(place)
            key = (place.name, t) if consume else (t, place.name)
            arc = self.arcs.setdefault(key, {})
            arc[vec] = arc.get(vec, 0) + count
            if self.accept(","):
                continue
            self.expect(";")
            return

    def var_vector(self, place: Place) -> tuple[tuple[Variable, ...], int]:
        open_tok = self.expect("[")
        vec: list[Variable] = []
        if not self.accept("]"):
            while True:
                vtok = self.name("variable name")
                var = self.vars.get(vtok.text)
                if var is None:
                    raise ParseError(f"unknown variable {vtok.text!r}", vtok.line, vtok.column)
                vec.append(var)
                if self.accept(","):
                    continue
                self.expect("]")
                break
        count = self.number() if self.accept("^") else 1
        if count < 1:
            raise ParseError("multiplicity must be positive", open_tok.line, open_tok.column)
        types = tuple(v.type_label for v in vec)
        if types != place.place_type:
            raise ParseError(
                f"vector [{','.join(v.name for v in vec)}] does not match type of place "
                f"{place.name!r}",
                open_tok.line,
                open_tok.column,
            )
        return tuple(vec), count

    def identifier(self) -> Identifier:
        tok = self.name("type name")
        label = self.lookup_type(tok)
        self.expect("#")
        return Identifier(label, self.number())

    def marking_decl(self) -> None:
        self.expect("{")
        while not self.accept("}"):
            ptok = self.name("place name")
            place = self.places.get(ptok.text)
            if place is None:
                raise ParseError(f"unknown place {ptok.text!r}", ptok.line, ptok.column)
            self.expect(":")
            while True:
                open_tok = self.expect("[")
                vec: list[Identifier] = []
                if not self.accept("]"):
                    while True:
                        vec.append(self.identifier())
                        if self.accept(","):
                            continue
                        self.expect("]")
                        break
                count = self.number() if self.accept("^") else 1
                if count < 1:
                    raise ParseError("multiplicity must be positive", open_tok.line, open_tok.column)
                toks = self.marking.setdefault(place.name, {})
                key = tuple(vec)
                toks[key] = toks.get(key, 0) + count
                if self.accept(","):
                    continue
                self.expect(";")
                break

    def resources_decl(self) -> None:
        ptok = self.name("place name")
        place = self.places.get(ptok.text)
        if place is None:
            raise ParseError(f"unknown place {ptok.text!r}", ptok.line, ptok.column)
        self.expect(":")
        self.expect("{")
        ids: list[Identifier] = []
        if not self.accept("}"):
            while True:
                tok = self.cur
                ident = self.identifier()
                if ident in ids:
                    raise ParseError(
                        f"duplicate resource {ident} (a set, not a multiset, is required)",
                        tok.line,
                        tok.column,
                    )
                ids.append(ident)
                if self.accept(","):
                    continue
                self.expect("}")
                break
        self.expect(";")
        if place.name in self.resources:
            raise ParseError(f"duplicate resources clause for {place.name!r}", ptok.line, ptok.column)
        self.resources[place.name] = ids


def parse_net(text: str) -> NetDocument:
    """Parse a net document; raises :class:`ParseError` with a position."""
    return _NetParser(text).parse()


def serialize_net(doc: NetDocument) -> str:
    """Canonical, deterministic rendering; stable under reparsing."""
    net = doc.net
    out: list[str] = [f"net {net.name} {{"]

    labels = sorted(
        {l for p in net.places.values() for l in p.place_type}
        | {v.type_label for t in net.transitions for v in net.variables(t)},
    )
    for label in labels:
        prefix = "resource type" if label.kind == Kind.RESOURCE else "type"
        out.append(f"  {prefix} {label.name};")

    for p in sorted(net.places.values(), key=lambda p: p.name):
        inner = ", ".join(l.name for l in p.place_type)
        out.append(f"  place {p.name} : ({inner});")

    variables = sorted({v for t in net.transitions for v in net.variables(t)})
    for v in variables:
        out.append(f"  var {v.name} : {v.type_label.name};")

    def arc_entries(arcs) -> str:
        parts = []
        for place, ms in arcs:
            for vec, cnt in ms.items():
                body = "[" + ",".join(v.name for v in vec) + "]"
                parts.append(f"{place}: {body}" + (f"^{cnt}" if cnt > 1 else ""))
        return ", ".join(parts)

    for t in net.transitions:
        out.append(f"  trans {t} {{")
        ins = net.input_arcs(t)
        outs = net.output_arcs(t)
        if ins:
            out.append(f"    consume {arc_entries(ins)};")
        if outs:
            out.append(f"    produce {arc_entries(outs)};")
        out.append("  }")

    if doc.initial_marking:
        out.append("  marking {")
        for place, ms in doc.initial_marking.items():
            parts = []
            for vec, cnt in ms.items():
                body = "[" + ", ".join(str(i) for i in vec) + "]"
                parts.append(body + (f"^{cnt}" if cnt > 1 else ""))
            out.append(f"    {place}: {', '.join(parts)};")
        out.append("  }")

    for place in sorted(doc.resources):
        ids = ", ".join(str(i) for i in doc.resources[place])
        out.append(f"  resources {place}: {{ {ids} }};")

    out.append("}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Unsafety property files
# ---------------------------------------------------------------------------


class _FormulaParser(_Parser):
    def __init__(self, text: str, net: TypedNet):
        super().__init__(text)
        self.net = net
        self.type_by_name = {l.name: l for l in net.place_types()}
        self.bound: dict[str, FormulaVar] = {}

    def parse(self) -> UnsafetyFormula:
        self.expect("exists")
        order: list[FormulaVar] = []
        if not self.accept("."):
            while True:
                vtok = self.name("variable name")
                self.expect(":")
                ttok = self.name("type name")
                label = self.type_by_name.get(ttok.text)
                if label is None:
                    raise ParseError(f"unknown type {ttok.text!r}", ttok.line, ttok.column)
                if vtok.text in self.bound:
                    raise ParseError(f"duplicate variable {vtok.text!r}", vtok.line, vtok.column)
                var = FormulaVar(vtok.text, label)
                self.bound[vtok.text] = var
                order.append(var)
                if self.accept(","):
                    continue
                self.expect(".")
                break
        atoms = [self.atom()]
        while self.accept("&&"):
            atoms.append(self.atom())
        if not self.at_end():
            raise self.error("trailing input after formula")
        return UnsafetyFormula(bound=tuple(order), atoms=tuple(atoms))

    def term(self):
        tok = self.name("variable or identifier")
        if self.cur.text == "#":
            label = self.type_by_name.get(tok.text)
            if label is None:
                raise ParseError(f"unknown type {tok.text!r}", tok.line, tok.column)
            self.expect("#")
            return Identifier(label, self.number())
        var = self.bound.get(tok.text)
        if var is None:
            raise ParseError(f"untyped variable {tok.text!r} (not bound)", tok.line, tok.column)
        return var

    def atom(self):
        tok = self.cur
        if tok.kind != "name":
            raise self.error("expected an atom")
        # place atoms start with a place name followed by '(' or '>='
        place = self.net.places.get(tok.text)
        nxt = self.tokens[self.pos + 1].text if self.pos + 1 < len(self.tokens) else ""
        if nxt in ("(", ">="):
            if place is None:
                raise ParseError(f"unknown place {tok.text!r}", tok.line, tok.column)
            self.pos += 1
            if self.accept("("):
                args = []
                if not self.accept(")"):
                    while True:
                        args.append(self.term())
                        if self.accept(","):
                            continue
                        self.expect(")")
                        break
                if len(args) != len(place.place_type):
                    raise ParseError(
                        f"place {place.name!r} has arity {len(place.place_type)}, got {len(args)}",
                        tok.line,
                        tok.column,
                    )
                for i, (arg, want) in enumerate(zip(args, place.place_type)):
                    got = arg.type_label
                    if got != want:
                        raise ParseError(
                            f"argument {i + 1} of {place.name!r} has type {got.name!r}, "
                            f"expected {want.name!r}",
                            tok.line,
                            tok.column,
                        )
                self.expect(">=")
                return PlaceCount(place.name, tuple(args), self.number())
            self.expect(">=")
            return PlaceTotal(place.name, self.number())
        left = self.term()
        if self.accept("="):
            return Compare(left, self.term(), equal=True)
        if self.accept("!="):
            return Compare(left, self.term(), equal=False)
        raise self.error("expected '=', '!=' or a place atom")


def parse_formula(text: str, net: TypedNet) -> UnsafetyFormula:
    """Parse and type-check an unsafety property against a net."""
    return _FormulaParser(text, net).parse()


def serialize_formula(formula: UnsafetyFormula) -> str:
    def term(t) -> str:
        return t.name if isinstance(t, FormulaVar) else str(t)

    parts = []
    for atom in formula.atoms:
        if isinstance(atom, PlaceTotal):
            parts.append(f"{atom.place} >= {atom.threshold}")
        elif isinstance(atom, PlaceCount):
            args = ", ".join(term(a) for a in atom.args)
            parts.append(f"{atom.place}({args}) >= {atom.threshold}")
        else:
            op = "=" if atom.equal else "!="
            parts.append(f"{term(atom.left)} {op} {term(atom.right)}")
    bound = ", ".join(f"{v.name}:{v.type_label.name}" for v in formula.bound)
    head = f"exists {bound} ." if bound else "exists ."
    return f"{head} {' && '.join(parts)}" if parts else head
