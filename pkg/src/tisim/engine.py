"""Transaction probabilities from confirmation waves, checked against the Born rule."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .amplitude import BRA, TOL, BasisLabel, StateVector, dagger, inner, max_abs_diff
from .network import (
    UNIVERSAL,
    Scenario,
    emitter_bra,
    final_ket,
    terminal_labels,
)


class ConsistencyError(ArithmeticError):
    """A transaction amplitude came out with a non-negligible imaginary part."""


class UnknownOutcome(KeyError):
    pass


@dataclass(frozen=True)
class Outcome:
    absorber: str
    spins: tuple[str, ...]
    labels: tuple[BasisLabel, ...] = field(compare=False)

    def __str__(self):
        return "(" + ", ".join((self.absorber, *self.spins)) + ")"

    def matches(self, spec: str) -> bool:
        toks = [t.strip() for t in spec.strip().strip("()").split(",") if t.strip()]
        return toks == [self.absorber, *self.spins]


def outcomes(scenario: Scenario) -> list[Outcome]:
    """Outcome basis: one entry per distinct (absorber, spin readouts) reading.

    An outcome may cover several terminal labels when the readings cannot
    tell them apart, e.g. the universal absorber with atom 1 excited in
    z1- versus atom 2 excited while atom 1 sits in z1-.
    """
    groups: dict[tuple[str, tuple[str, ...]], list[BasisLabel]] = {}
    for absorber, lab in terminal_labels(scenario):
        spins = tuple(a.readout() for a in (lab.atom1, lab.atom2) if a is not None)
        groups.setdefault((absorber, spins), []).append(lab)
    order = [n for n, _ in scenario.absorbers.detectors] + [UNIVERSAL]
    keys = sorted(groups, key=lambda k: (order.index(k[0]) if k[0] in order else len(order), k[1]))
    return [Outcome(a, s, tuple(groups[(a, s)])) for a, s in keys]


def find_outcome(scenario: Scenario, spec) -> Outcome:
    if isinstance(spec, Outcome):
        return spec
    for oc in outcomes(scenario):
        if oc.matches(spec):
            return oc
    raise UnknownOutcome(f"no outcome {spec!r} in scenario {scenario.name}")


def born_probability(scenario: Scenario, outcome, *, ket: StateVector | None = None) -> float:
    oc = find_outcome(scenario, outcome)
    ket = final_ket(scenario) if ket is None else ket
    return sum(abs(ket[lab]) ** 2 for lab in oc.labels)


def component_seed(scenario: Scenario, outcome, *, ket: StateVector | None = None) -> StateVector:
    """Confirmation wave sent by the absorbers of one outcome: the bra of its part of the final ket."""
    oc = find_outcome(scenario, outcome)
    ket = final_ket(scenario) if ket is None else ket
    return StateVector(BRA, {lab: ket[lab].conjugate() for lab in oc.labels})


def _emitter_split(scenario: Scenario, bra: StateVector):
    """Project an emitter bra onto dagger(initial); return (amplitude, orthogonal remainder)."""
    ref = dagger(scenario.initial)
    amp = inner(bra, scenario.initial)
    rest = bra - ref * amp
    return amp, StateVector(BRA, rest.amplitudes)


@dataclass(frozen=True)
class Component:
    outcome: Outcome
    amplitude: complex
    emitter: StateVector
    residual: float
    overflow: float


def confirmation_component(scenario: Scenario, outcome, *, ket: StateVector | None = None) -> Component:
    oc = find_outcome(scenario, outcome)
    ket = final_ket(scenario) if ket is None else ket
    bra = emitter_bra(scenario, component_seed(scenario, oc, ket=ket))
    amp, rest = _emitter_split(scenario, bra)
    return Component(oc, amp, bra, rest.norm(), bra.overflow_weight())


def ti_probability(scenario: Scenario, outcome, *, tol: float = TOL, ket: StateVector | None = None) -> float:
    """Amplitude at the emitter of the confirmation wave from this outcome's absorbers.

    Multi-photon overflow is excluded.  Raises :class:`ConsistencyError` if
    the amplitude is not real within ``tol``.
    """
    comp = confirmation_component(scenario, outcome, ket=ket)
    if abs(comp.amplitude.imag) > tol:
        raise ConsistencyError(f"{comp.outcome}: transaction amplitude {comp.amplitude} is not real")
    return comp.amplitude.real


@dataclass(frozen=True)
class FullCheck:
    emitter_distance: float
    r_sector: float
    overflow: float
    emitter: StateVector

    @property
    def total(self) -> float:
        """Combined residual; its square equals the forward weight of any missing absorbers."""
        return math.hypot(self.emitter_distance, self.overflow)

    def passed(self, tol: float = TOL) -> bool:
        return max(self.emitter_distance, self.r_sector, self.overflow) <= tol


def _residuals(scenario: Scenario, bra: StateVector) -> FullCheck:
    diff = bra - dagger(scenario.initial)
    off_source = [a for lab, a in bra.amplitudes.items() if lab.photon not in scenario.source_sectors]
    return FullCheck(
        emitter_distance=StateVector(BRA, diff.amplitudes).norm(),
        r_sector=math.sqrt(sum(abs(a) ** 2 for a in off_source)),
        overflow=math.sqrt(bra.overflow_weight()),
        emitter=bra,
    )


def full_confirmation_seed(scenario: Scenario) -> StateVector:
    """Bra of the final ket restricted to labels some present absorber confirms."""
    ket = final_ket(scenario, strict=False)
    confirmed = {lab for _, lab in terminal_labels(scenario)}
    return dagger(ket.restrict(lambda lab: lab in confirmed))


def full_confirmation_check(scenario: Scenario) -> FullCheck:
    """Send the full confirmation wave back and compare it with dagger(initial) at the emitter.

    Reports the distance, the weight left on non-source sectors and the
    overflow, each as a norm.  Works on incomplete absorber sets too, where
    the residual exposes the missing confirmations.
    """
    return _residuals(scenario, emitter_bra(scenario, full_confirmation_seed(scenario)))


@dataclass(frozen=True)
class ComponentCheck:
    components: tuple[Component, ...]
    sum_vs_full: float
    spurious: FullCheck

    def passed(self, tol: float = TOL) -> bool:
        return self.sum_vs_full <= tol and self.spurious.passed(tol)


def component_sum_check(scenario: Scenario) -> ComponentCheck:
    ket = final_ket(scenario)
    comps = tuple(confirmation_component(scenario, oc, ket=ket) for oc in outcomes(scenario))
    total = StateVector(BRA)
    for c in comps:
        total = total + c.emitter
    full = emitter_bra(scenario, full_confirmation_seed(scenario))
    return ComponentCheck(comps, max_abs_diff(total, full), _residuals(scenario, total))


@dataclass(frozen=True)
class OutcomeRow:
    outcome: Outcome
    ti_probability: float
    born_probability: float
    residual: float
    overflow: float

    @property
    def delta(self) -> float:
        return abs(self.ti_probability - self.born_probability)


@dataclass(frozen=True)
class TransactionReport:
    scenario: str
    rows: tuple[OutcomeRow, ...]
    full: FullCheck
    probability_sum: float
    seed: int | None = None

    def row(self, spec) -> OutcomeRow:
        for r in self.rows:
            if r.outcome.matches(spec) or r.outcome == spec:
                return r
        raise UnknownOutcome(spec)

    def absorber_probability(self, absorber: str) -> float:
        return sum(r.ti_probability for r in self.rows if r.outcome.absorber == absorber)

    def max_delta(self) -> float:
        return max((r.delta for r in self.rows), default=0.0)

    def passed(self, tol: float = TOL) -> bool:
        return self.max_delta() <= tol and abs(self.probability_sum - 1) <= tol and self.full.passed(tol)


def transaction_report(scenario: Scenario, *, tol: float = TOL, seed: int | None = None) -> TransactionReport:
    ket = final_ket(scenario)
    rows = []
    for oc in outcomes(scenario):
        comp = confirmation_component(scenario, oc, ket=ket)
        if abs(comp.amplitude.imag) > tol:
            raise ConsistencyError(f"{oc}: transaction amplitude {comp.amplitude} is not real")
        rows.append(OutcomeRow(oc, comp.amplitude.real, born_probability(scenario, oc, ket=ket), comp.residual, comp.overflow))
    return TransactionReport(
        scenario.name,
        tuple(rows),
        full_confirmation_check(scenario),
        sum(r.ti_probability for r in rows),
        seed,
    )


@dataclass(frozen=True)
class BranchReport:
    name: str
    trigger_fires: bool
    report: TransactionReport
    trigger_probability: float

    @property
    def realization(self) -> float:
        """Probability that this branch is the configuration the future holds."""
        return self.trigger_probability if self.trigger_fires else 1 - self.trigger_probability


@dataclass(frozen=True)
class ContingentReport:
    scenario: str
    trigger: str
    branches: tuple[BranchReport, BranchReport]

    @property
    def trigger_consistency(self) -> float:
        """Disagreement between branches on the trigger probability (shared prefix, so ideally 0)."""
        a, b = self.branches
        return abs(a.trigger_probability - b.trigger_probability)

    def passed(self, tol: float = TOL) -> bool:
        return self.trigger_consistency <= tol and all(b.report.passed(tol) for b in self.branches)
