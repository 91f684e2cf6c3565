"""Scenario assembly, validation and staged propagation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Sequence

from .amplitude import (
    BRA,
    TOL,
    VACUUM,
    AtomState,
    BasisLabel,
    StateVector,
    spin_basis_transform,
)
from .elements import AtomInteraction, BeamSplitter, ElementMap, PropagationError

EMITTER = "emitter"
READOUT = "readout"
UNIVERSAL = "UA"


@dataclass(frozen=True)
class Stage:
    name: str
    elements: tuple[ElementMap, ...]


@dataclass(frozen=True)
class AbsorberConfig:
    """Terminal bindings.

    ``detectors`` are ``(name, sector)`` pairs in declaration order,
    ``spin_detectors`` are ``(atom, axis)`` pairs.  The universal absorber
    confirms the vacuum sector plus any photon sectors in ``ua_sectors``.
    """

    detectors: tuple[tuple[str, str], ...] = ()
    spin_detectors: tuple[tuple[int, str], ...] = ()
    universal: bool = False
    ua_sectors: tuple[str, ...] = ()

    def detector_for(self, sector: str) -> str | None:
        for name, sec in self.detectors:
            if sec == sector:
                return name
        if self.universal and (sector == VACUUM or sector in self.ua_sectors):
            return UNIVERSAL
        return None

    def axis(self, atom: int) -> str | None:
        for k, ax in self.spin_detectors:
            if k == atom:
                return ax
        return None

    def without(self, detector: str) -> AbsorberConfig:
        if detector == UNIVERSAL:
            return replace(self, universal=False)
        return replace(self, detectors=tuple(d for d in self.detectors if d[0] != detector))


@dataclass(frozen=True)
class Scenario:
    name: str
    initial: StateVector
    source_sectors: tuple[str, ...]
    stages: tuple[Stage, ...]
    absorbers: AbsorberConfig = field(default_factory=AbsorberConfig)

    @property
    def source_region(self) -> str:
        return "".join(self.source_sectors)

    def atoms(self) -> tuple[int, ...]:
        present = set()
        for lab in self.initial.amplitudes:
            present.update(k for k in (1, 2) if lab.atom(k) is not None)
        return tuple(sorted(present))

    def elements(self) -> list[ElementMap]:
        return [e for st in self.stages for e in st.elements]

    def atom_elements(self) -> list[AtomInteraction]:
        return [e for e in self.elements() if isinstance(e, AtomInteraction)]

    def terminal_sectors(self) -> list[str]:
        """Photon sectors left unconsumed after the last stage, in order of appearance."""
        live = list(self.source_sectors)
        for st in self.stages:
            for e in st.elements:
                live = [s for s in live if s not in e.inputs] + [o for o in e.outputs if o not in live]
        return live


@dataclass(frozen=True)
class ContingentScenario:
    """Absorber configuration that depends on whether ``trigger`` fires.

    ``fired`` holds when the trigger detector clicks, ``silent`` otherwise.
    Both branches share ``base.initial`` and ``base.stages``.
    """

    base: Scenario
    trigger: str
    fired: AbsorberConfig
    silent: AbsorberConfig
    fired_name: str = "fired"
    silent_name: str = "silent"

    @property
    def name(self):
        return self.base.name

    def branch(self, which: str) -> Scenario:
        cfg = self.fired if which == "fired" else self.silent
        return replace(self.base, absorbers=with_universal_completion(self.base, cfg))


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    message: str
    stage: str | None = None

    def __str__(self):
        where = f" [stage {self.stage}]" if self.stage else ""
        return f"{self.rule}: {self.message}{where}"


class ScenarioError(ValueError):
    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


def with_universal_completion(scenario: Scenario, cfg: AbsorberConfig) -> AbsorberConfig:
    """Bind every unbound terminal sector to the universal absorber.

    Every offer wave is eventually absorbed somewhere; a branch that leaves
    a sector without a detector gets it confirmed by the universal absorber.
    """
    bound = {sec for _, sec in cfg.detectors}
    loose = tuple(s for s in scenario.terminal_sectors() if s not in bound)
    return replace(cfg, universal=True, ua_sectors=tuple(dict.fromkeys(cfg.ua_sectors + loose)))


def validate(scenario: Scenario) -> list[Diagnostic]:
    """Structural checks; an empty list means the scenario is valid."""
    diags: list[Diagnostic] = []
    w = scenario.initial.weight()
    if abs(w - 1) > TOL:
        diags.append(Diagnostic("initial-norm", f"initial ket has squared norm {w:.15g}, expected 1"))
    if not scenario.source_sectors:
        diags.append(Diagnostic("no-source", "scenario has no photon source"))

    available = set(scenario.source_sectors)
    seen = set(available)
    atom_ids: dict[int, str] = {}
    element_names: set[str] = set()
    for st in scenario.stages:
        if not st.elements:
            diags.append(Diagnostic("empty-stage", "stage has no elements", st.name))
        for e in st.elements:
            if e.name in element_names:
                diags.append(Diagnostic("duplicate-element", f"element {e.name} placed twice", st.name))
            element_names.add(e.name)
            if isinstance(e, BeamSplitter):
                if not any(s in available for s in e.inputs):
                    diags.append(Diagnostic("undeclared-input", f"{e.name}: no input sector among {', '.join(e.inputs)} is populated", st.name))
            else:
                for s in e.inputs:
                    if s not in available:
                        diags.append(Diagnostic("undeclared-input", f"{e.name}: undeclared input sector {s}", st.name))
            for o in e.outputs:
                if o in seen or o == VACUUM:
                    diags.append(Diagnostic("reused-sector", f"{e.name}: output sector {o} is not fresh", st.name))
            if isinstance(e, AtomInteraction):
                if e.atom in atom_ids:
                    diags.append(Diagnostic("duplicate-atom", f"atom {e.atom} interacts in both {atom_ids[e.atom]} and {e.name}", st.name))
                atom_ids[e.atom] = e.name
                if e.atom not in scenario.atoms():
                    diags.append(Diagnostic("missing-atom", f"{e.name}: atom {e.atom} is not prepared by the emitter", st.name))
            available -= set(e.inputs)
            available |= set(e.outputs)
            seen |= set(e.inputs) | set(e.outputs)

    cfg = scenario.absorbers
    terminal = scenario.terminal_sectors()
    det_names = [n for n, _ in cfg.detectors]
    for n in set(det_names):
        if det_names.count(n) > 1 or n == UNIVERSAL:
            diags.append(Diagnostic("duplicate-detector", f"detector name {n} used more than once"))
    for name, sec in cfg.detectors:
        if sec not in terminal:
            diags.append(Diagnostic("detector-sector", f"detector {name} absorbs {sec}, which is not a terminal sector"))
    for sec in terminal:
        binders = [n for n, s in cfg.detectors if s == sec]
        if cfg.universal and sec in cfg.ua_sectors:
            binders.append(UNIVERSAL)
        if not binders:
            diags.append(Diagnostic("unbound-sector", f"terminal sector {sec} is bound to no absorber"))
        elif len(binders) > 1:
            diags.append(Diagnostic("unbound-sector", f"terminal sector {sec} bound to several absorbers: {', '.join(binders)}"))
    if scenario.atom_elements() and not cfg.universal:
        diags.append(Diagnostic("unconfirmed-vacuum", "unconfirmed Vacuum sector: atom interactions require a universal absorber"))
    for k in scenario.atoms():
        axes = [ax for a, ax in cfg.spin_detectors if a == k]
        if len(axes) != 1:
            diags.append(Diagnostic("spin-readout", f"atom {k} needs exactly one spin detector, found {len(axes)}"))
        elif axes[0] not in ("z", "y"):
            diags.append(Diagnostic("spin-readout", f"atom {k}: unknown spin axis {axes[0]}"))
    for k, _ in cfg.spin_detectors:
        if k not in scenario.atoms():
            diags.append(Diagnostic("spin-readout", f"spin detector for atom {k}, which the scenario does not prepare"))
    return diags


def require_valid(scenario: Scenario) -> Scenario:
    diags = validate(scenario)
    if diags:
        raise ScenarioError(diags)
    return scenario


def _y_atoms(state: StateVector) -> list[int]:
    out = set()
    for lab in state.amplitudes:
        out.update(k for k in (1, 2) if lab.atom(k) is not None and lab.atom(k).axis == "y")
    return sorted(out)


def _needs_readout(scenario: Scenario) -> list[int]:
    return [k for k, ax in scenario.absorbers.spin_detectors if ax == "y" and k in scenario.atoms()]


def propagate_offer(scenario: Scenario, *, strict: bool = True) -> list[tuple[str, StateVector]]:
    """Staged offer-wave kets: emitter, source region, one per stage, then readout if any atom is read along y.

    With ``strict`` every photon sector in the final ket must be bound to an absorber.
    """
    ket = scenario.initial
    regions = [(EMITTER, ket)]
    for k in _y_atoms(ket):
        ket = spin_basis_transform(ket, k, "z")
    regions.append((scenario.source_region, ket))
    for st in scenario.stages:
        for e in st.elements:
            ket = e.forward(ket)
        regions.append((st.name, ket))
    for k in _needs_readout(scenario):
        ket = spin_basis_transform(ket, k, "y", ground_only=True)
    if _needs_readout(scenario):
        regions.append((READOUT, ket))
    if strict:
        for sec in sorted(ket.photon_sectors()):
            if scenario.absorbers.detector_for(sec) is None:
                raise PropagationError(f"offer wave reaches unbound sector {sec!r}")
    return regions


def final_ket(scenario: Scenario, *, strict: bool = True) -> StateVector:
    return propagate_offer(scenario, strict=strict)[-1][1]


def propagate_confirmation(scenario: Scenario, seed: StateVector) -> list[tuple[str, StateVector]]:
    """Staged bras from the absorbers back to the emitter, last region first.

    Overflow accumulated on the way rides along in each bra's ``overflow``.
    Components on non-source sectors at the emitter (e.g. the dark port of
    the first splitter) are kept.
    """
    if seed.direction != BRA:
        raise PropagationError("confirmation seed must be a bra")
    bra = seed
    names = [scenario.source_region] + [st.name for st in scenario.stages]
    regions = []
    if _needs_readout(scenario):
        regions.append((READOUT, bra))
        for k in _needs_readout(scenario):
            bra = spin_basis_transform(bra, k, "z", ground_only=True)
    regions.append((names[-1], bra))
    for i in range(len(scenario.stages) - 1, -1, -1):
        for e in reversed(scenario.stages[i].elements):
            bra = e.backward(bra)
        regions.append((names[i], bra))
    for k in _y_atoms(scenario.initial):
        bra = spin_basis_transform(bra, k, "y", ground_only=True)
    regions.append((EMITTER, bra))
    return regions


def emitter_bra(scenario: Scenario, seed: StateVector) -> StateVector:
    return propagate_confirmation(scenario, seed)[-1][1]


def terminal_labels(scenario: Scenario) -> list[tuple[str, BasisLabel]]:
    """Every ``(absorber, label)`` pair of the outcome basis, bound or structurally possible.

    Photon detectors see every ground spin combination; the universal
    absorber sees one excited atom per atom interaction.
    """
    cfg = scenario.absorbers
    atoms = scenario.atoms()
    readout = {k: ("y+", "y-") if cfg.axis(k) == "y" else ("z+", "z-") for k in atoms}

    def combos(skip=None):
        pools = []
        for k in (1, 2):
            if k not in atoms or k == skip:
                pools.append([None])
            else:
                pools.append([AtomState(k, s) for s in readout[k]])
        return itertools.product(*pools)

    out = []
    for sec in scenario.terminal_sectors():
        name = cfg.detector_for(sec)
        if name is None:
            continue
        out.extend((name, BasisLabel(sec, a1, a2)) for a1, a2 in combos())
    if cfg.universal:
        for e in scenario.atom_elements():
            excited = AtomState(e.atom, e.blocking, True)
            for a1, a2 in combos(skip=e.atom):
                lab = BasisLabel(VACUUM, a1, a2).with_atom(excited)
                out.append((UNIVERSAL, lab))
    return out


def run_contingent(cs: ContingentScenario, *, tol: float = TOL):
    """Evaluate both absorber configurations as complete static scenarios.

    Returns an :class:`~tisim.engine.ContingentReport`; each branch records
    its own outcome probabilities and the probability that the trigger
    detector fires, which both branches must agree on.
    """
    from .engine import BranchReport, ContingentReport, transaction_report

    fired, silent = cs.branch("fired"), cs.branch("silent")
    trig = {name: sec for name, sec in cs.fired.detectors}.get(cs.trigger)
    if trig is None or trig != dict(cs.silent.detectors).get(cs.trigger):
        raise ScenarioError([Diagnostic("contingent-prefix", f"trigger {cs.trigger} must absorb the same sector in both branches")])
    diags = validate(fired) + validate(silent)
    if diags:
        raise ScenarioError(diags)
    branches = []
    for name, sc, fires in ((cs.fired_name, fired, True), (cs.silent_name, silent, False)):
        rep = transaction_report(sc, tol=tol)
        branches.append(BranchReport(name, fires, rep, rep.absorber_probability(cs.trigger)))
    return ContingentReport(cs.name, cs.trigger, tuple(branches))
