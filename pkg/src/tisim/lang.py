"""Line-oriented scenario description language.

One directive per line, ``#`` starts a comment, tokens are separated by
whitespace::

    scenario NAME
    source NAME emits SECTOR
    dual-source NAME emits SECTOR SECTOR phase FLOAT
    beamsplitter NAME in SECTOR SECTOR out SECTOR SECTOR
    mirror NAME SECTOR -> SECTOR
    atom NAME id INT prep yminus blocks (z+|z-) in SECTOR out SECTOR
    detector NAME absorbs SECTOR
    spin-detector atom INT axis (z|y)
    universal-absorber
    stage NAME : NAME (NAME)*
    contingent on NAME silent : NAME

``contingent on C silent : D`` makes detector ``D`` part of the
configuration only in runs where ``C`` stays silent.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .amplitude import StateVector, atom_state, photon_state, tensor
from .elements import AtomInteraction, BeamSplitter, DualSource, Mirror
from .network import (
    AbsorberConfig,
    ContingentScenario,
    Scenario,
    ScenarioError,
    Stage,
    validate,
)

_NAME = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_'.\-]*\Z")
_SECTOR = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")
_INT = re.compile(r"[0-9]+\Z")
_FLOAT = re.compile(r"[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?\Z")
_ALLOWED = re.compile(r"[A-Za-z0-9_'+\-.:>\s]")

SLOTS = {
    "NAME": (_NAME, str),
    "SECTOR": (_SECTOR, str),
    "INT": (_INT, int),
    "FLOAT": (_FLOAT, float),
    "SPIN": (re.compile(r"z[+-]\Z"), str),
    "AXIS": (re.compile(r"[zy]\Z"), str),
}

GRAMMAR: dict[str, tuple[str, ...]] = {
    "scenario": ("NAME",),
    "source": ("NAME", "'emits", "SECTOR"),
    "dual-source": ("NAME", "'emits", "SECTOR", "SECTOR", "'phase", "FLOAT"),
    "beamsplitter": ("NAME", "'in", "SECTOR", "SECTOR", "'out", "SECTOR", "SECTOR"),
    "mirror": ("NAME", "SECTOR", "'->", "SECTOR"),
    "atom": ("NAME", "'id", "INT", "'prep", "'yminus", "'blocks", "SPIN", "'in", "SECTOR", "'out", "SECTOR"),
    "detector": ("NAME", "'absorbs", "SECTOR"),
    "spin-detector": ("'atom", "INT", "'axis", "AXIS"),
    "universal-absorber": (),
    "stage": ("NAME", "':", "NAME", "NAME*"),
    "contingent": ("'on", "NAME", "'silent", "':", "NAME"),
}

ELEMENT_KINDS = ("beamsplitter", "mirror", "atom")
NAMED_KINDS = ("source", "dual-source", "beamsplitter", "mirror", "atom", "detector")


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str
    expected: tuple[str, ...] = ()

    def __str__(self):
        exp = f" (expected {' | '.join(self.expected)})" if self.expected else ""
        return f"line {self.line}, column {self.column}: {self.message}{exp}"


class ParseError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = sorted(diagnostics, key=lambda d: (d.line, d.column))
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class Directive:
    kind: str
    args: tuple
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)

    @property
    def name(self) -> str | None:
        return self.args[0] if self.kind in NAMED_KINDS or self.kind == "stage" else None


@dataclass(frozen=True)
class ScenarioDoc:
    name: str
    directives: tuple[Directive, ...]

    def of_kind(self, *kinds: str) -> list[Directive]:
        return [d for d in self.directives if d.kind in kinds]


def _tokenize(line: str):
    """Split into ``(column, token)`` pairs, dropping comments."""
    line = line.split("#", 1)[0]
    return [(m.start() + 1, m.group()) for m in re.finditer(r"\S+", line)]


def _describe(slot: str) -> str:
    return repr(slot[1:]) if slot.startswith("'") else slot.rstrip("*")


def _parse_line(lineno: int, tokens) -> Directive:
    col, kind = tokens[0]
    if kind not in GRAMMAR:
        raise ParseError([ParseDiagnostic(lineno, col, f"unknown directive {kind!r}", tuple(GRAMMAR))])
    pattern = GRAMMAR[kind]
    rest = tokens[1:]
    values: list = []
    i = 0
    for slot in pattern:
        variadic = slot.endswith("*")
        while True:
            if i >= len(rest):
                if variadic:
                    break
                end = tokens[-1][0] + len(tokens[-1][1])
                raise ParseError([ParseDiagnostic(lineno, end, f"arity mismatch: {kind} expects {_arity(kind)}, got {len(rest)}", (_describe(slot),))])
            tcol, tok = rest[i]
            if slot.startswith("'"):
                if tok != slot[1:]:
                    raise ParseError([ParseDiagnostic(lineno, tcol, f"unexpected token {tok!r}", (_describe(slot),))])
            else:
                regex, conv = SLOTS[slot.rstrip("*")]
                if not regex.match(tok):
                    raise ParseError([ParseDiagnostic(lineno, tcol, f"malformed {slot.rstrip('*')} {tok!r}", (_describe(slot),))])
                values.append(conv(tok))
            i += 1
            if not variadic:
                break
    if i < len(rest):
        tcol, tok = rest[i]
        raise ParseError([ParseDiagnostic(lineno, tcol, f"arity mismatch: {kind} expects {_arity(kind)}, got extra token {tok!r}", ("end of line",))])
    if kind == "stage":
        values = [values[0], tuple(values[1:])]
    return Directive(kind, tuple(values), lineno, col)


def _arity(kind: str) -> str:
    n = sum(1 for s in GRAMMAR[kind] if not s.endswith("*"))
    return f"{n}+ tokens" if any(s.endswith("*") for s in GRAMMAR[kind]) else f"{n} tokens"


def parse_scenario(text: str) -> ScenarioDoc:
    """Parse scenario text; raises :class:`ParseError` listing every diagnostic found."""
    diags: list[ParseDiagnostic] = []
    directives: list[Directive] = []
    header: Directive | None = None
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    for lineno, raw in enumerate(lines, start=1):
        body = raw.split("#", 1)[0]
        bad = next((i for i, ch in enumerate(body) if not _ALLOWED.match(ch)), None)
        if bad is not None:
            diags.append(ParseDiagnostic(lineno, bad + 1, f"lexical error: unexpected character {body[bad]!r}"))
            continue
        tokens = _tokenize(raw)
        if not tokens:
            continue
        try:
            d = _parse_line(lineno, tokens)
        except ParseError as e:
            diags.extend(e.diagnostics)
            continue
        if d.kind == "scenario":
            if header is not None or directives:
                diags.append(ParseDiagnostic(lineno, d.column, "scenario header must appear once, before any directive"))
            header = d
        else:
            if header is None and not any(x.line < lineno for x in diags):
                diags.append(ParseDiagnostic(lineno, d.column, "missing scenario header", ("'scenario'",)))
            directives.append(d)
    if header is None and not diags:
        diags.append(ParseDiagnostic(1, 1, "empty scenario: no scenario header", ("'scenario'",)))
    if not diags:
        diags.extend(_check_references(directives))
    if diags:
        raise ParseError(diags)
    return ScenarioDoc(header.args[0], tuple(directives))


def _check_references(directives: list[Directive]) -> list[ParseDiagnostic]:
    diags = []
    names: dict[str, Directive] = {}
    stages: dict[str, Directive] = {}
    for d in directives:
        if d.kind in NAMED_KINDS:
            if d.args[0] in names:
                diags.append(ParseDiagnostic(d.line, d.column, f"duplicate element name {d.args[0]!r} (first on line {names[d.args[0]].line})"))
            else:
                names[d.args[0]] = d
        elif d.kind == "stage":
            if d.args[0] in stages:
                diags.append(ParseDiagnostic(d.line, d.column, f"duplicate stage name {d.args[0]!r}"))
            stages[d.args[0]] = d

    sources = [d for d in directives if d.kind in ("source", "dual-source")]
    if len(sources) != 1:
        line = sources[1].line if len(sources) > 1 else (directives[0].line if directives else 1)
        diags.append(ParseDiagnostic(line, 1, f"exactly one source or dual-source required, found {len(sources)}"))

    produced: set[str] = set()
    for d in sources:
        produced.update(d.args[1:2] if d.kind == "source" else d.args[1:3])
    for d in directives:
        if d.kind == "beamsplitter":
            produced.update(d.args[3:5])
        elif d.kind == "mirror":
            produced.add(d.args[2])
        elif d.kind == "atom":
            produced.add(d.args[4])

    def dangling(d, sector):
        diags.append(ParseDiagnostic(d.line, d.column, f"dangling sector reference {sector!r}: no source or element produces it"))

    atom_ids: dict[int, Directive] = {}
    spin_atoms: dict[int, Directive] = {}
    for d in directives:
        if d.kind == "beamsplitter" and not (set(d.args[1:3]) & produced):
            dangling(d, d.args[1])
        elif d.kind == "mirror" and d.args[1] not in produced:
            dangling(d, d.args[1])
        elif d.kind == "atom":
            if d.args[3] not in produced:
                dangling(d, d.args[3])
            if d.args[1] not in (1, 2):
                diags.append(ParseDiagnostic(d.line, d.column, f"atom id must be 1 or 2, got {d.args[1]}"))
            elif d.args[1] in atom_ids:
                diags.append(ParseDiagnostic(d.line, d.column, f"duplicate atom id {d.args[1]}"))
            atom_ids.setdefault(d.args[1], d)
        elif d.kind == "detector" and d.args[1] not in produced:
            dangling(d, d.args[1])
        elif d.kind == "spin-detector":
            if d.args[0] in spin_atoms:
                diags.append(ParseDiagnostic(d.line, d.column, f"duplicate spin detector for atom {d.args[0]}"))
            spin_atoms.setdefault(d.args[0], d)

    for k, d in spin_atoms.items():
        if k not in atom_ids:
            diags.append(ParseDiagnostic(d.line, d.column, f"spin detector refers to undeclared atom {k}"))
    for k, d in atom_ids.items():
        if k not in spin_atoms:
            diags.append(ParseDiagnostic(d.line, d.column, f"atom {k} has no spin-detector"))

    placed: dict[str, Directive] = {}
    for d in stages.values():
        for el in d.args[1]:
            target = names.get(el)
            if target is None or target.kind not in ELEMENT_KINDS:
                diags.append(ParseDiagnostic(d.line, d.column, f"stage {d.args[0]!r} refers to unknown element {el!r}"))
            elif el in placed:
                diags.append(ParseDiagnostic(d.line, d.column, f"element {el!r} already placed in stage {placed[el].args[0]!r}"))
            else:
                placed[el] = d
    for name, d in names.items():
        if d.kind in ELEMENT_KINDS and name not in placed:
            diags.append(ParseDiagnostic(d.line, d.column, f"element {name!r} is not placed in any stage"))

    ua = [d for d in directives if d.kind == "universal-absorber"]
    for d in ua[1:]:
        diags.append(ParseDiagnostic(d.line, d.column, "duplicate universal-absorber"))
    if atom_ids and not ua:
        d = next(iter(atom_ids.values()))
        diags.append(ParseDiagnostic(d.line, d.column, "unconfirmed Vacuum sector: atoms need a universal-absorber"))

    cont = [d for d in directives if d.kind == "contingent"]
    for d in cont[1:]:
        diags.append(ParseDiagnostic(d.line, d.column, "at most one contingent directive"))
    for d in cont[:1]:
        trig, block = d.args
        for ref in (trig, block):
            if ref not in names or names[ref].kind != "detector":
                diags.append(ParseDiagnostic(d.line, d.column, f"contingent refers to unknown detector {ref!r}"))
        if trig == block:
            diags.append(ParseDiagnostic(d.line, d.column, "contingent detector cannot be its own trigger"))

    # sector arity: one detector per sector
    bound: dict[str, Directive] = {}
    for d in directives:
        if d.kind == "detector":
            if d.args[1] in bound:
                diags.append(ParseDiagnostic(d.line, d.column, f"sector {d.args[1]!r} already absorbed by {bound[d.args[1]].args[0]!r}"))
            bound.setdefault(d.args[1], d)
    return diags


def _fmt_value(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def serialize_directive(d: Directive) -> str:
    args = list(d.args)
    if d.kind == "stage":
        args = [args[0], *args[1]]
    out = [d.kind]
    for slot in GRAMMAR[d.kind]:
        if slot.startswith("'"):
            out.append(slot[1:])
        elif slot.endswith("*"):
            out.extend(_fmt_value(a) for a in args)
            args = []
        else:
            out.append(_fmt_value(args.pop(0)))
    return " ".join(out)


def serialize(doc: ScenarioDoc) -> str:
    lines = [f"scenario {doc.name}"] + [serialize_directive(d) for d in doc.directives]
    return "\n".join(lines) + "\n"


def _initial(doc: ScenarioDoc) -> tuple[StateVector, tuple[str, ...]]:
    src = doc.of_kind("source", "dual-source")[0]
    if src.kind == "source":
        ket = photon_state({src.args[1]: 1.0})
        sectors = (src.args[1],)
    else:
        ds = DualSource(src.args[0], src.args[1], src.args[2], src.args[3])
        ket = ds.prepare()
        sectors = (src.args[1], src.args[2])
    for d in sorted(doc.of_kind("atom"), key=lambda d: d.args[1]):
        ket = tensor(ket, atom_state(d.args[1], {"y-": 1.0}))
    return ket, sectors


def _element(d: Directive):
    a = d.args
    if d.kind == "beamsplitter":
        return BeamSplitter(a[0], (a[1], a[2]), (a[3], a[4]))
    if d.kind == "mirror":
        return Mirror(a[0], a[1], a[2])
    return AtomInteraction(a[0], a[1], a[2], a[3], a[4])


def build(doc: ScenarioDoc) -> Scenario | ContingentScenario:
    """Turn a parsed document into a validated scenario (or contingent scenario)."""
    initial, sectors = _initial(doc)
    elements = {d.args[0]: _element(d) for d in doc.of_kind(*ELEMENT_KINDS)}
    stages = tuple(Stage(d.args[0], tuple(elements[n] for n in d.args[1])) for d in doc.of_kind("stage"))
    detectors = tuple((d.args[0], d.args[1]) for d in doc.of_kind("detector"))
    cfg = AbsorberConfig(
        detectors=detectors,
        spin_detectors=tuple((d.args[0], d.args[1]) for d in doc.of_kind("spin-detector")),
        universal=bool(doc.of_kind("universal-absorber")),
    )
    scenario = Scenario(doc.name, initial, sectors, stages, cfg)
    cont = doc.of_kind("contingent")
    if not cont:
        diags = validate(scenario)
        if diags:
            raise ScenarioError(diags)
        return scenario
    trigger, moved = cont[0].args
    cs = ContingentScenario(
        scenario,
        trigger,
        fired=cfg.without(moved),
        silent=cfg,
        fired_name=f"{trigger}-fires",
        silent_name=f"{trigger}-silent",
    )
    diags = validate(cs.branch("fired")) + validate(cs.branch("silent"))
    if diags:
        raise ScenarioError(diags)
    return cs


def load(text: str) -> Scenario | ContingentScenario:
    return build(parse_scenario(text))
