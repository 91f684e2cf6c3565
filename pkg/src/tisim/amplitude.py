"""Sparse complex state vectors over photon x atom x atom basis labels.

Kets are offer waves, bras are confirmation waves.  A bra stores its
amplitudes already conjugated: the bra of ``c|x>`` holds ``c*`` on ``x``,
so ``inner`` is a plain sum of products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

PRUNE = 1e-14
TOL = 1e-12

VACUUM = "0"
KET = "ket"
BRA = "bra"

# canonical enumerations
PHOTON_ORDER = ("s", "r", "u", "v", "u'", "v'", "c", "d", VACUUM)
SPIN_LABELS = ("z+", "z-", "y+", "y-")
Z_SPINS = ("z+", "z-")
Y_SPINS = ("y+", "y-")

_R2 = 1 / math.sqrt(2)

# |sigma> = sum_tau C[sigma][tau] |tau>
_Y_IN_Z = {
    "y+": {"z+": _R2, "z-": 1j * _R2},
    "y-": {"z+": 1j * _R2, "z-": _R2},
}
_Z_IN_Y = {
    "z+": {"y+": _R2, "y-": -1j * _R2},
    "z-": {"y+": -1j * _R2, "y-": _R2},
}


class AmplitudeError(ValueError):
    pass


@dataclass(frozen=True)
class AtomState:
    atom: int
    spin: str
    excited: bool = False

    def __post_init__(self):
        if self.atom not in (1, 2):
            raise AmplitudeError(f"atom id must be 1 or 2, got {self.atom}")
        if self.spin not in SPIN_LABELS:
            raise AmplitudeError(f"unknown spin label {self.spin!r}")
        if self.excited and self.spin[0] != "z":
            raise AmplitudeError("excited atom states carry z-basis labels only")

    @property
    def axis(self) -> str:
        return self.spin[0]

    def readout(self) -> str:
        """Spin result as printed, e.g. ``z1+``."""
        return f"{self.spin[0]}{self.atom}{self.spin[1]}"

    def __str__(self):
        return self.readout() + ("*" if self.excited else "")

    def sort_key(self):
        return (SPIN_LABELS.index(self.spin), self.excited)


def _photon_key(photon: str):
    if photon in PHOTON_ORDER:
        return (0, PHOTON_ORDER.index(photon), "")
    return (1, 0, photon)


def _atom_key(state: AtomState | None):
    return (-1, False) if state is None else state.sort_key()


@dataclass(frozen=True)
class BasisLabel:
    photon: str
    atom1: AtomState | None = None
    atom2: AtomState | None = None

    def __post_init__(self):
        for k, st in ((1, self.atom1), (2, self.atom2)):
            if st is not None and st.atom != k:
                raise AmplitudeError(f"atom{k} slot holds state of atom {st.atom}")

    def atom(self, k: int) -> AtomState | None:
        return self.atom1 if k == 1 else self.atom2

    def with_atom(self, state: AtomState) -> BasisLabel:
        if state.atom == 1:
            return BasisLabel(self.photon, state, self.atom2)
        return BasisLabel(self.photon, self.atom1, state)

    def with_photon(self, photon: str) -> BasisLabel:
        return BasisLabel(photon, self.atom1, self.atom2)

    def sort_key(self):
        return (_photon_key(self.photon), _atom_key(self.atom1), _atom_key(self.atom2))

    def __lt__(self, other: BasisLabel):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        parts = [self.photon] + [str(a) for a in (self.atom1, self.atom2) if a is not None]
        return "(" + ", ".join(parts) + ")"


def label(photon: str, *spins: str) -> BasisLabel:
    """Shorthand: ``label("d", "z+", "z-*")`` is (d, z1+, z2-*).

    A trailing ``*`` marks an excited atom; ``None`` or ``""`` leaves the slot empty.
    """
    atoms: list[AtomState | None] = [None, None]
    for k, spin in enumerate(spins, start=1):
        if not spin:
            continue
        excited = spin.endswith("*")
        atoms[k - 1] = AtomState(k, spin.rstrip("*"), excited)
    return BasisLabel(photon, atoms[0], atoms[1])


def _pruned(amps: Mapping) -> dict:
    return {k: complex(v) for k, v in amps.items() if abs(v) >= PRUNE}


def _accumulate(pairs: Iterable[tuple[object, complex]]) -> dict:
    out: dict = {}
    for key, amp in pairs:
        out[key] = out.get(key, 0j) + amp
    return out


@dataclass(frozen=True, eq=False)
class StateVector:
    """Immutable sparse state.

    ``overflow`` holds bra terms with no one-photon preimage, keyed by
    ``(element name, label)``.  They are kept as amplitudes, not weights, so
    that confirmation waves stay linear and can cancel when summed.
    """

    direction: str
    amplitudes: Mapping[BasisLabel, complex] = field(default_factory=dict)
    overflow: Mapping[tuple[str, BasisLabel], complex] = field(default_factory=dict)

    def __post_init__(self):
        if self.direction not in (KET, BRA):
            raise AmplitudeError(f"direction must be ket or bra, got {self.direction!r}")
        object.__setattr__(self, "amplitudes", MappingProxyType(_pruned(self.amplitudes)))
        object.__setattr__(self, "overflow", MappingProxyType(_pruned(self.overflow)))

    @classmethod
    def from_pairs(cls, direction, pairs, overflow=()) -> StateVector:
        return cls(direction, _accumulate(pairs), _accumulate(overflow))

    @classmethod
    def basis(cls, lab: BasisLabel, amp: complex = 1.0, direction: str = KET) -> StateVector:
        return cls(direction, {lab: amp})

    @classmethod
    def empty(cls, direction: str = KET) -> StateVector:
        return cls(direction)

    def __len__(self):
        return len(self.amplitudes)

    def __getitem__(self, lab: BasisLabel) -> complex:
        return self.amplitudes.get(lab, 0j)

    def labels(self) -> list[BasisLabel]:
        return sorted(self.amplitudes)

    def items(self) -> list[tuple[BasisLabel, complex]]:
        return [(lab, self.amplitudes[lab]) for lab in self.labels()]

    def weight(self) -> float:
        return sum(abs(a) ** 2 for a in self.amplitudes.values())

    def norm(self) -> float:
        return math.sqrt(self.weight())

    def overflow_weight(self) -> float:
        return sum(abs(a) ** 2 for a in self.overflow.values())

    def photon_sectors(self) -> set[str]:
        return {lab.photon for lab in self.amplitudes}

    def restrict(self, keep) -> StateVector:
        """Keep only labels for which ``keep(label)`` holds; overflow is dropped."""
        return StateVector(self.direction, {k: v for k, v in self.amplitudes.items() if keep(k)})

    def _check_same(self, other: StateVector):
        if self.direction != other.direction:
            raise AmplitudeError(f"cannot combine a {self.direction} with a {other.direction}")

    def __add__(self, other: StateVector) -> StateVector:
        self._check_same(other)
        return StateVector.from_pairs(
            self.direction,
            [*self.amplitudes.items(), *other.amplitudes.items()],
            [*self.overflow.items(), *other.overflow.items()],
        )

    def __mul__(self, c: complex) -> StateVector:
        return StateVector(
            self.direction,
            {k: c * v for k, v in self.amplitudes.items()},
            {k: c * v for k, v in self.overflow.items()},
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __sub__(self, other: StateVector) -> StateVector:
        return self + (-other)

    def render(self) -> str:
        return render(self)

    def __repr__(self):
        return f"StateVector({self.direction}, {len(self)} terms)"


def fmt_amplitude(z: complex) -> str:
    re, im = z.real + 0.0, z.imag + 0.0
    return f"{re:+.12f}{im:+.12f}i"


def render(state: StateVector) -> str:
    """Canonical text: one ``+a+bi  (photon, atom1, atom2)`` line per label."""
    lines = [f"{fmt_amplitude(a)}  {lab}" for lab, a in state.items()]
    for (elem, lab), a in sorted(state.overflow.items(), key=lambda kv: (kv[0][0], kv[0][1].sort_key())):
        lines.append(f"{fmt_amplitude(a)}  overflow@{elem} {lab}")
    return "\n".join(lines)


def max_abs_diff(a: StateVector, b: StateVector) -> float:
    """Largest amplitude difference, overflow included."""
    d = a - b
    vals = [abs(v) for v in d.amplitudes.values()] + [abs(v) for v in d.overflow.values()]
    return max(vals, default=0.0)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    if a.direction != b.direction:
        raise AmplitudeError("tensor of a ket with a bra")
    out: dict[BasisLabel, complex] = {}
    for la, va in a.amplitudes.items():
        for lb, vb in b.amplitudes.items():
            out[_merge(la, lb)] = out.get(_merge(la, lb), 0j) + va * vb
    return StateVector(a.direction, out)


def _merge(la: BasisLabel, lb: BasisLabel) -> BasisLabel:
    if la.photon != VACUUM and lb.photon != VACUUM:
        raise AmplitudeError(f"overlapping photon subsystems in {la} and {lb}")
    photon = lb.photon if la.photon == VACUUM else la.photon
    atoms = []
    for k in (1, 2):
        x, y = la.atom(k), lb.atom(k)
        if x is not None and y is not None:
            raise AmplitudeError(f"atom {k} present in both factors")
        atoms.append(x if x is not None else y)
    return BasisLabel(photon, *atoms)


def photon_state(amps: Mapping[str, complex], direction: str = KET) -> StateVector:
    """One-photon factor with no atoms, e.g. ``photon_state({"u": 1j, "v": 1})``."""
    return StateVector(direction, {BasisLabel(k): v for k, v in amps.items()})


def atom_state(k: int, amps: Mapping[str, complex], direction: str = KET) -> StateVector:
    """Single-atom factor on the vacuum photon, e.g. ``atom_state(1, {"y-": 1})``."""
    return StateVector(
        direction,
        {BasisLabel(VACUUM).with_atom(AtomState(k, spin)): v for spin, v in amps.items()},
    )


def inner(bra: StateVector, ket: StateVector) -> complex:
    if bra.direction != BRA or ket.direction != KET:
        raise AmplitudeError("inner expects (bra, ket)")
    small, big = (bra, ket) if len(bra) <= len(ket) else (ket, bra)
    return sum((v * big[k] for k, v in small.amplitudes.items()), 0j)


def dagger(state: StateVector) -> StateVector:
    flipped = BRA if state.direction == KET else KET
    return StateVector(
        flipped,
        {k: v.conjugate() for k, v in state.amplitudes.items()},
        {k: v.conjugate() for k, v in state.overflow.items()},
    )


def spin_change_matrix(source: str, target: str):
    """2x2 numbers ``C[sigma][tau]`` with ``|sigma> = sum C |tau>``."""
    if (source, target) == ("y", "z"):
        return _Y_IN_Z
    if (source, target) == ("z", "y"):
        return _Z_IN_Y
    raise AmplitudeError(f"no basis change {source} -> {target}")


def spin_basis_transform(state: StateVector, atom: int, target: str, *, ground_only: bool = False) -> StateVector:
    """Rewrite one atom's spin in the ``target`` basis (``"z"`` or ``"y"``).

    With ``ground_only`` excited labels are left in place instead of raising;
    they span an invariant subspace so the map stays unitary.
    """
    if target not in ("z", "y"):
        raise AmplitudeError(f"target basis must be z or y, got {target!r}")
    source = "y" if target == "z" else "z"
    table = spin_change_matrix(source, target)
    pairs = []
    for lab, amp in state.amplitudes.items():
        st = lab.atom(atom)
        if st is None:
            raise AmplitudeError(f"label {lab} has no atom {atom}")
        if st.excited:
            if ground_only:
                pairs.append((lab, amp))
                continue
            raise AmplitudeError(f"cannot change basis of excited label {lab}")
        if st.axis == target:
            if ground_only:
                pairs.append((lab, amp))
                continue
            raise AmplitudeError(f"label {lab} is already in the {target} basis")
        for tau, c in table[st.spin].items():
            coef = c if state.direction == KET else complex(c).conjugate()
            pairs.append((lab.with_atom(AtomState(atom, tau)), amp * coef))
    return StateVector.from_pairs(state.direction, pairs, state.overflow.items())
