"""Optical element maps.

Each element acts label by label.  ``forward`` drives offer waves (kets);
``backward`` drives confirmation waves (bras) with the *transpose* of the
forward matrix, not its adjoint.  A bra label that no one-photon label
maps onto forward has no preimage; its amplitude goes to the overflow
bucket of the returned bra.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .amplitude import (
    BRA,
    KET,
    VACUUM,
    AtomState,
    BasisLabel,
    StateVector,
    Z_SPINS,
)

_R2 = 1 / math.sqrt(2)

# columns are inputs, rows are outputs: in1 -> (i out1 + out2)/sqrt2, in2 -> (out1 + i out2)/sqrt2
BALANCED = ((1j * _R2, _R2), (_R2, 1j * _R2))


class PropagationError(RuntimeError):
    """A wave reached an element in a state the model does not cover."""


Terms = list[tuple[BasisLabel, complex]]


class ElementMap:
    name: str
    kind: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    # atom-interaction elements also carry an ``atom`` id

    def forward_label(self, lab: BasisLabel) -> Terms:
        raise NotImplementedError

    def backward_label(self, lab: BasisLabel) -> Terms | None:
        """Transpose action on one bra label; ``None`` means no preimage."""
        raise NotImplementedError

    def in_domain(self, lab: BasisLabel) -> bool:
        """Whether ``lab`` belongs to the declared input space (where F is an isometry)."""
        return lab.photon not in self.outputs

    def forward(self, ket: StateVector) -> StateVector:
        if ket.direction != KET:
            raise PropagationError(f"{self.name}: forward action needs a ket")
        pairs = []
        for lab, amp in ket.amplitudes.items():
            if lab.photon in self.outputs and lab.photon not in self.inputs:
                raise PropagationError(f"{self.name}: sector {lab.photon!r} already populated before the element")
            pairs.extend((out, amp * c) for out, c in self.forward_label(lab))
        return StateVector.from_pairs(KET, pairs)

    def backward(self, bra: StateVector) -> StateVector:
        if bra.direction != BRA:
            raise PropagationError(f"{self.name}: backward action needs a bra")
        pairs, lost = [], list(bra.overflow.items())
        for lab, amp in bra.amplitudes.items():
            pre = self.backward_label(lab)
            if pre is None:
                lost.append(((self.name, lab), amp))
            else:
                pairs.extend((src, amp * c) for src, c in pre)
        return StateVector.from_pairs(BRA, pairs, lost)

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


@dataclass(frozen=True, repr=False)
class BeamSplitter(ElementMap):
    """Two-port splitter; ``matrix[j][k]`` is the amplitude for input k -> output j."""

    name: str
    inputs: tuple[str, str]
    outputs: tuple[str, str]
    matrix: tuple[tuple[complex, complex], tuple[complex, complex]] = BALANCED
    kind: str = field(default="beamsplitter", init=False)

    def forward_label(self, lab):
        if lab.photon not in self.inputs:
            return [(lab, 1.0)]
        k = self.inputs.index(lab.photon)
        return [(lab.with_photon(out), self.matrix[j][k]) for j, out in enumerate(self.outputs) if self.matrix[j][k] != 0]

    def backward_label(self, lab):
        if lab.photon in self.outputs:
            j = self.outputs.index(lab.photon)
            return [(lab.with_photon(src), self.matrix[j][k]) for k, src in enumerate(self.inputs) if self.matrix[j][k] != 0]
        if lab.photon in self.inputs:
            return None
        return [(lab, 1.0)]


@dataclass(frozen=True, repr=False)
class Relabel(ElementMap):
    """Free evolution of one mode into another, with a constant phase factor."""

    name: str
    source: str
    target: str
    phase: complex = 1.0
    kind: str = field(default="relabel", init=False)

    def __post_init__(self):
        if not math.isclose(abs(self.phase), 1.0, abs_tol=1e-15):
            raise ValueError(f"{self.name}: relabel phase must have unit modulus")

    @property
    def inputs(self):
        return (self.source,)

    @property
    def outputs(self):
        return (self.target,)

    def forward_label(self, lab):
        if lab.photon == self.source:
            return [(lab.with_photon(self.target), self.phase)]
        return [(lab, 1.0)]

    def backward_label(self, lab):
        if lab.photon == self.target:
            return [(lab.with_photon(self.source), self.phase)]
        if lab.photon == self.source:
            return None
        return [(lab, 1.0)]


@dataclass(frozen=True, repr=False)
class Mirror(Relabel):
    # reflection phase is global to the stage and fixed to 1
    kind: str = field(default="mirror", init=False)


@dataclass(frozen=True, repr=False)
class AtomInteraction(ElementMap):
    """Hardy atom with one spin component sitting in a photon path.

    A photon in ``mode_in`` meeting the ``blocking`` component is absorbed
    with certainty and leaves the atom excited; meeting the other component
    it continues into ``mode_out``.  Excitation is permanent within a run.
    """

    name: str
    atom: int
    blocking: str
    mode_in: str
    mode_out: str
    kind: str = field(default="atom-interaction", init=False)

    def __post_init__(self):
        if self.blocking not in Z_SPINS:
            raise ValueError(f"{self.name}: blocking spin must be z+ or z-, got {self.blocking!r}")
        if self.atom not in (1, 2):
            raise ValueError(f"{self.name}: atom id must be 1 or 2")

    @property
    def inputs(self):
        return (self.mode_in,)

    @property
    def outputs(self):
        return (self.mode_out,)

    def _state(self, lab) -> AtomState:
        st = lab.atom(self.atom)
        if st is None:
            raise PropagationError(f"{self.name}: label {lab} carries no atom {self.atom}")
        if st.axis != "z":
            raise PropagationError(f"{self.name}: atom {self.atom} must be in the z basis inside the interferometer")
        return st

    def in_domain(self, lab):
        if lab.photon == self.mode_out:
            return False
        if lab.photon == VACUUM and self._state(lab).excited:
            return False
        if lab.photon == self.mode_in and self._state(lab).excited:
            return False
        return True

    def forward_label(self, lab):
        if lab.photon != self.mode_in:
            return [(lab, 1.0)]
        st = self._state(lab)
        if st.excited:
            raise PropagationError(f"{self.name}: photon meets already excited atom {self.atom}")
        if st.spin == self.blocking:
            return [(BasisLabel(VACUUM, lab.atom1, lab.atom2).with_atom(AtomState(self.atom, st.spin, True)), 1.0)]
        return [(lab.with_photon(self.mode_out), 1.0)]

    def backward_label(self, lab):
        if lab.photon == self.mode_out:
            st = self._state(lab)
            if st.spin == self.blocking or st.excited:
                return None
            return [(lab.with_photon(self.mode_in), 1.0)]
        if lab.photon == VACUUM:
            st = self._state(lab)
            if st.excited:
                if st.spin != self.blocking:
                    return None
                return [(lab.with_photon(self.mode_in).with_atom(AtomState(self.atom, st.spin)), 1.0)]
            return [(lab, 1.0)]
        if lab.photon == self.mode_in:
            return None
        return [(lab, 1.0)]

    def excited_label_spin(self) -> str:
        return self.blocking


@dataclass(frozen=True)
class DualSource:
    """Two coherent single-photon sources feeding ``out1`` and ``out2`` directly."""

    name: str
    out1: str
    out2: str
    relative_phase: float = 0.0
    kind: str = field(default="dual-source", init=False)

    def prepare(self) -> StateVector:
        return dual_source_prepare(self.out1, self.out2, self.relative_phase)


def dual_source_prepare(out1: str, out2: str, relative_phase: float = 0.0) -> StateVector:
    """One-photon ket ``(i|out1> + e^{i phase}|out2>)/sqrt2``."""
    return StateVector(
        KET,
        {BasisLabel(out1): 1j * _R2, BasisLabel(out2): cmath.exp(1j * relative_phase) * _R2},
    )


def random_unitary_2x2(rng: np.random.Generator):
    """Haar-ish 2x2 unitary ``[[a, -b* e^{ip}], [b, a* e^{ip}]]`` as nested tuples."""
    theta = rng.uniform(0, math.pi / 2)
    alpha, beta, phi = rng.uniform(0, 2 * math.pi, size=3)
    a = math.cos(theta) * cmath.exp(1j * alpha)
    b = math.sin(theta) * cmath.exp(1j * beta)
    e = cmath.exp(1j * phi)
    return ((a, -b.conjugate() * e), (b, a.conjugate() * e))


def label_universe(sectors: Sequence[str], atoms: Sequence[int] = ()) -> list[BasisLabel]:
    """All labels over ``sectors`` (plus vacuum) and z-basis atom states, excited included."""
    per_atom = {k: [AtomState(k, s, e) for s in Z_SPINS for e in (False, True)] for k in (1, 2)}
    slots = [per_atom[k] if k in atoms else [None] for k in (1, 2)]
    photons = list(dict.fromkeys([*sectors, VACUUM]))
    out = []
    for p in photons:
        for a1 in slots[0]:
            for a2 in slots[1]:
                if sum(bool(a and a.excited) for a in (a1, a2)) > 1:
                    continue
                if p != VACUUM and any(a and a.excited for a in (a1, a2)):
                    continue
                out.append(BasisLabel(p, a1, a2))
    return sorted(out)


def element_matrices(element: ElementMap, universe: Sequence[BasisLabel]):
    """Dense forward and backward matrices of ``element`` over ``universe``.

    Returns ``(rows, cols, F, B)``: ``cols`` are the domain labels, ``rows``
    every label; ``F[row, col]`` is the forward amplitude and ``B[col, row]``
    the backward amplitude, so the transpose rule reads ``B == F.T``.
    """
    rows = sorted(universe)
    cols = [lab for lab in rows if element.in_domain(lab)]
    r_idx = {lab: i for i, lab in enumerate(rows)}
    c_idx = {lab: j for j, lab in enumerate(cols)}
    F = np.zeros((len(rows), len(cols)), dtype=complex)
    B = np.zeros((len(cols), len(rows)), dtype=complex)
    for j, lab in enumerate(cols):
        for out, c in element.forward_label(lab):
            F[r_idx[out], j] += c
    for i, lab in enumerate(rows):
        pre = element.backward_label(lab)
        for src, c in pre or ():
            if src in c_idx:
                B[c_idx[src], i] += c
            else:
                raise PropagationError(f"{element.name}: backward image {src} outside the declared domain")
    return rows, cols, F, B
