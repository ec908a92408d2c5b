"""Command-line front end.

Exit codes are stable: 0 = ok / property holds, 1 = violated / unsafe,
2 = inconclusive (a bound got in the way), 3 = usage or parse error.
``--format machine`` renders line-oriented ``KEY<TAB>VALUE`` reports;
identical invocations produce byte-identical output. Every printed witness
is a firing script that replays via ``pnid simulate --script``.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from . import construct, logic, netformat, resources, soundness, statespace
from .core import (
    Binding,
    FiringEvent,
    Identifier,
    Marking,
    Multiset,
    NetError,
    Place as CorePlace,
    TypeLabel,
    TypedNet,
    Variable,
    fire_sequence,
    validate_net,
)
from .netformat import NetDocument, ParseError, parse_formula, parse_net, serialize_net
from .statespace import ExplorationBounds
from .verdict import Status, Verdict

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3

_STATUS_EXIT = {
    Status.HOLDS: EXIT_OK,
    Status.VIOLATED: EXIT_VIOLATED,
    Status.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}


class _Report:
    """Collects output lines in human or machine format."""

    def __init__(self, machine: bool):
        self.machine = machine
        self.lines: list[str] = []

    def kv(self, key: str, value) -> None:
        if self.machine:
            self.lines.append(f"{key}\t{value}")

    def text(self, line: str) -> None:
        if not self.machine:
            self.lines.append(line)

    def verdict(self, verdict: Verdict, prefix: str = "") -> None:
        key = f"{prefix}.verdict" if prefix else "verdict"
        self.kv(key, verdict.status.value)
        if verdict.reason:
            self.kv(f"{prefix}.reason" if prefix else "reason", verdict.reason)
        for k in sorted(verdict.detail):
            self.kv(f"{prefix}.{k}" if prefix else k, verdict.detail[k])
        label = f"{prefix}: " if prefix else ""
        self.text(f"{label}{verdict.status.value}" + (f" - {verdict.reason}" if verdict.reason else ""))
        if verdict.witness:
            self.text("witness (replayable firing script):")
            for ev in verdict.witness:
                self.text(f"  {ev}")
                self.kv(f"{prefix}.witness" if prefix else "witness", str(ev))

    def emit(self) -> None:
        for line in self.lines:
            print(line)


def _load_document(path: str) -> NetDocument:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path} is not valid UTF-8: {exc.reason}")
    return parse_net(text)


def _document_marking(doc: NetDocument) -> Marking:
    """Initial marking extended with one token per declared resource."""
    if not doc.resources:
        return doc.initial_marking
    return resources.mark_closure(doc.net, doc.initial_marking, doc.resources)


def _bounds(args) -> ExplorationBounds:
    env_states = os.environ.get("PNID_MAX_STATES")
    defaults = ExplorationBounds()
    max_states = args.max_states or (int(env_states) if env_states else defaults.max_states)
    return ExplorationBounds(
        max_states=max_states,
        max_tokens_per_place=args.max_tokens or defaults.max_tokens_per_place,
        max_identifiers_per_type=args.max_ids or defaults.max_identifiers_per_type,
        max_depth=args.max_depth,
    )


def _add_bounds_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-states", type=int, default=None)
    parser.add_argument("--max-tokens", type=int, default=None)
    parser.add_argument("--max-ids", type=int, default=None)
    parser.add_argument("--max-depth", type=int, default=None)
    parser.add_argument("--jobs", type=int, default=None, help="worker pool hint; output is deterministic regardless")
    parser.add_argument("--format", choices=("human", "machine"), default="human")


def _find_type(net: TypedNet, name: str):
    for label in sorted(net.place_types()):
        if label.name == name:
            return label
    raise NetError(f"type {name!r} not used in the net")


def _parse_event_line(net: TypedNet, line: str, lineno: int) -> FiringEvent:
    parts = line.split()
    t = parts[0]
    if t not in net.transitions:
        raise NetError(f"script line {lineno}: unknown transition {t!r}")
    by_name = {v.name: v for v in net.variables(t)}
    assignment = {}
    types = {l.name: l for l in net.place_types()} | {
        v.type_label.name: v.type_label for v in net.variables(t)
    }
    for chunk in parts[1:]:
        if "=" not in chunk:
            raise NetError(f"script line {lineno}: expected var=type#index, got {chunk!r}")
        vname, _, ident = chunk.partition("=")
        var = by_name.get(vname)
        if var is None:
            raise NetError(f"script line {lineno}: {t!r} has no variable {vname!r}")
        tname, _, idx = ident.partition("#")
        label = types.get(tname)
        if label is None or not idx.isdigit():
            raise NetError(f"script line {lineno}: bad identifier {ident!r}")
        assignment[var] = Identifier(label, int(idx))
    return FiringEvent(t, Binding(assignment))


def read_firing_script(net: TypedNet, text: str) -> list[FiringEvent]:
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//")[0].strip()
        if line:
            events.append(_parse_event_line(net, line, lineno))
    return events


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_validate(args) -> int:
    doc = _load_document(args.file)  # parse_net already validates
    report = _Report(args.format == "machine")
    diagnostics = validate_net(doc.net)
    report.kv("diagnostics", len(diagnostics))
    report.text(f"{args.file}: ok ({len(doc.net.places)} places, "
                f"{len(doc.net.transitions)} transitions)")
    for d in diagnostics:
        report.kv("diagnostic", str(d))
        report.text(str(d))
    report.emit()
    return EXIT_OK if not diagnostics else EXIT_VIOLATED


def _cmd_simulate(args) -> int:
    doc = _load_document(args.file)
    with open(args.script, "r", encoding="utf-8") as handle:
        events = read_firing_script(doc.net, handle.read())
    report = _Report(args.format == "machine")
    m = _document_marking(doc)
    try:
        final = fire_sequence(doc.net, m, events)
    except NetError as exc:
        report.kv("verdict", "violated")
        report.kv("reason", str(exc))
        report.text(f"replay failed: {exc}")
        report.emit()
        return EXIT_VIOLATED
    report.kv("verdict", "holds")
    report.kv("events", len(events))
    report.kv("marking", statespace.serialize_marking_line(final))
    report.text(f"replayed {len(events)} event(s)")
    report.text(f"final marking: {statespace.serialize_marking_line(final)}")
    report.emit()
    return EXIT_OK


def _cmd_explore(args) -> int:
    doc = _load_document(args.file)
    graph = statespace.explore(doc.net, _document_marking(doc), _bounds(args))
    report = _Report(args.format == "machine")
    report.kv("states", len(graph.states))
    report.kv("edges", len(graph.edges))
    report.kv("complete", str(graph.complete).lower())
    for hit in graph.bound_hits:
        report.kv("bound", f"{hit.kind} {hit.detail}".strip())
    report.text(
        f"{len(graph.states)} states, {len(graph.edges)} edges"
        + ("" if graph.complete else f" (bounds hit: "
           f"{', '.join(str(h) for h in graph.bound_hits)})")
    )
    report.emit()
    if args.dump:
        sys.stdout.write(statespace.dump_graph(graph))
    return EXIT_OK if graph.complete else EXIT_INCONCLUSIVE


def _cmd_check(args) -> int:
    doc = _load_document(args.file)
    net, m0 = doc.net, _document_marking(doc)
    bounds = _bounds(args)
    report = _Report(args.format == "machine")
    what = args.property

    if what in ("bounded", "width", "depth"):
        verdict = statespace.measure_boundedness(net, m0, what, bounds)
        report.verdict(verdict)
    elif what == "id-soundness":
        sr = soundness.check_identifier_soundness(net, m0, bounds)
        for label in sorted(sr.per_type):
            ts = sr.per_type[label]
            report.kv(f"type.{label.name}.completion", ts.proper_completion.status.value)
            report.kv(f"type.{label.name}.termination", ts.weak_termination.status.value)
            report.text(
                f"{label.name}: completion {ts.proper_completion.status.value}, "
                f"termination {ts.weak_termination.status.value}"
            )
        report.verdict(sr.overall)
        note = soundness.depth_bounded_note(sr)
        if note:
            report.kv("note", note)
            report.text(note)
        verdict = sr.overall
    elif what == "wf-soundness":
        wf = soundness.weighted_from_classical(net)
        if args.k_max:
            verdict = soundness.check_generalized_soundness(wf, args.k_max)
        else:
            verdict = soundness.check_wf_soundness(wf, args.k)
        report.verdict(verdict)
    elif what == "liveness":
        graph = statespace.explore(net, m0, bounds)
        verdict = soundness.check_liveness(graph)
        quasi = soundness.check_quasi_liveness(graph)
        report.kv("quasi_liveness", quasi.status.value)
        report.text(f"quasi-liveness: {quasi.status.value} - {quasi.reason}")
        report.verdict(verdict)
    elif what == "conservative":
        rr = resources.check_conservative(net, m0, bounds)
        report.verdict(rr.preservation, prefix="preservation")
        report.verdict(rr.exclusivity, prefix="exclusivity")
        verdict = rr.overall
        report.kv("verdict", verdict.status.value)
        report.text(f"overall: {verdict.status.value}")
    elif what == "unsafety":
        if not args.prop:
            raise ParseError("check unsafety requires --prop FILE")
        with open(args.prop, "r", encoding="utf-8") as handle:
            formula = parse_formula(handle.read(), net)
        verdict = logic.check_unsafety(net, m0, formula, bounds)
        if verdict.status is Status.VIOLATED:
            report.text("UNSAFE: the property is reachable")
        elif verdict.status is Status.HOLDS:
            report.text("SAFE: the property is unreachable")
        report.verdict(verdict)
    elif what == "generic":
        verdict = statespace.check_genericity(net, m0, samples=args.samples)
        report.verdict(verdict)
    else:  # pragma: no cover - argparse restricts choices
        raise ParseError(f"unknown property {what!r}")

    report.emit()
    return _STATUS_EXIT[verdict.status]


def _write_document(doc: NetDocument, out: Optional[str]) -> None:
    text = serialize_net(doc)
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _cmd_transform(args) -> int:
    if args.transformation == "script":
        with open(args.file, "r", encoding="utf-8") as handle:
            seed, apps = construct.parse_script(handle.read())
        net, marking = construct.resolve_script(seed, apps, name=args.name)
        _write_document(NetDocument(net, marking, {}), args.out)
        return EXIT_OK

    doc = _load_document(args.file)
    if args.transformation == "ec-close":
        wf = soundness.weighted_from_classical(doc.net)
        labels = tuple(
            TypeLabel(n.strip()) for n in args.types.split(",") if n.strip()
        ) if args.types else ()
        var_names = [n.strip() for n in args.vars.split(",") if n.strip()] if args.vars else []
        if len(var_names) != len(labels):
            raise ParseError("--types and --vars must have the same length")
        variables = tuple(
            Variable(n, l) for n, l in zip(var_names, labels)
        )
        net, marking = construct.ec_close(wf, labels, variables)
        _write_document(NetDocument(net, marking, {}), args.out)
        return EXIT_OK
    if args.transformation == "resource-close":
        net = doc.net
        if args.all_types:
            net = resources.full_resource_close(net)
        else:
            if not args.type:
                raise ParseError("resource-close requires --type (or --all-types)")
            label = _find_type(net, args.type)
            opts = resources.ClosureOptions(
                returning_collectors=frozenset(
                    t for t in (args.returning or "").split(",") if t
                ),
                synchronized_internals=frozenset(
                    t for t in (args.sync or "").split(",") if t
                ),
                resource_type=args.resource_type,
            )
            net = resources.resource_close(net, label, opts)
        decls = dict(doc.resources)
        if args.resources:
            for place, ids in resources.default_resources(net, args.resources).items():
                decls.setdefault(place, tuple(ids))
        _write_document(NetDocument(net, doc.initial_marking, decls), args.out)
        return EXIT_OK
    if args.transformation == "refine":
        host = doc.net
        wf_doc = _load_document(args.wf)
        wf = soundness.weighted_from_classical(wf_doc.net)
        place = host.places.get(args.place)
        if place is None:
            raise NetError(f"unknown place {args.place!r}")
        var_names = [n.strip() for n in args.vars.split(",") if n.strip()] if args.vars else []
        if len(var_names) != len(place.place_type):
            raise ParseError(f"--vars must list {len(place.place_type)} variables")
        variables = tuple(
            Variable(n, l) for n, l in zip(var_names, place.place_type)
        )
        net, marking = construct.refine(host, doc.initial_marking, args.place, wf, variables)
        _write_document(NetDocument(net, marking, doc.resources), args.out)
        return EXIT_OK
    raise ParseError(f"unknown transformation {args.transformation!r}")


def _cmd_reduce(args) -> int:
    doc = _load_document(args.file)
    result = construct.recognize(doc.net, _document_marking(doc), budget=args.budget)
    report = _Report(args.format == "machine")
    if isinstance(result, construct.ReductionWitness):
        report.kv("verdict", "holds")
        report.kv("steps", len(result.steps))
        report.text(f"constructible in {len(result.steps)} step(s):")
        report.kv("init", result.seed)
        report.text(f"init {result.seed}")
        for step in result.steps:
            report.kv("step", str(step))
            report.text(str(step))
        report.emit()
        return EXIT_OK
    report.kv("verdict", "violated" if result.reason in ("exhausted", "marked") else "inconclusive")
    report.kv("reason", result.reason)
    report.text(f"not constructible ({result.reason})")
    report.emit()
    return EXIT_VIOLATED if result.reason in ("exhausted", "marked") else EXIT_INCONCLUSIVE


def _cmd_project(args) -> int:
    doc = _load_document(args.file)
    label = _find_type(doc.net, args.type)
    if args.close:
        wf = soundness.projection_closure(doc.net, label)
    else:
        wf, _ = soundness.type_projection(doc.net, label, doc.initial_marking)
    places = [CorePlace(p) for p in wf.places]
    arcs = {key: Multiset({(): w}) for key, w in wf.weights.items()}
    net = TypedNet(places, wf.transitions, arcs, name=f"{doc.net.name}_{label.name}")
    _write_document(NetDocument(net, Marking.empty(), {}), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pnid",
        description="verification workbench for typed Petri nets with identifiers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and type-check a net file")
    p.add_argument("file")
    p.add_argument("--format", choices=("human", "machine"), default="human")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("simulate", help="replay a firing script")
    p.add_argument("file")
    p.add_argument("--script", required=True)
    p.add_argument("--format", choices=("human", "machine"), default="human")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("explore", help="build the symmetry-reduced state space")
    p.add_argument("file")
    p.add_argument("--dump", action="store_true")
    _add_bounds_flags(p)
    p.set_defaults(func=_cmd_explore)

    p = sub.add_parser("check", help="run a correctness check")
    p.add_argument(
        "property",
        choices=(
            "bounded",
            "width",
            "depth",
            "id-soundness",
            "wf-soundness",
            "liveness",
            "conservative",
            "unsafety",
            "generic",
        ),
    )
    p.add_argument("file")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--prop", default=None)
    p.add_argument("--samples", type=int, default=100)
    _add_bounds_flags(p)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("transform", help="apply a construction")
    p.add_argument(
        "transformation", choices=("ec-close", "resource-close", "refine", "script")
    )
    p.add_argument("file")
    p.add_argument("--types", default="")
    p.add_argument("--vars", default="")
    p.add_argument("--type", default=None)
    p.add_argument("--returning", "--return", dest="returning", default="")
    p.add_argument("--sync", default="")
    p.add_argument("--resource-type", default=None)
    p.add_argument("--resources", type=int, default=0)
    p.add_argument("--all-types", action="store_true")
    p.add_argument("--place", default=None)
    p.add_argument("--wf", default=None)
    p.add_argument("--name", default="tjn")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("reduce", help="recognize a constructible net")
    p.add_argument("what", choices=("tjn",))
    p.add_argument("file")
    p.add_argument("--budget", type=int, default=20_000)
    p.add_argument("--format", choices=("human", "machine"), default="human")
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("project", help="per-type weighted net")
    p.add_argument("file")
    p.add_argument("--type", required=True)
    p.add_argument("--close", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_project)

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ParseError, NetError, OSError) as exc:
        print(f"pnid: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
