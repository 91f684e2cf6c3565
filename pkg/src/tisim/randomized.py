"""Random valid two-port networks for property checks."""

from __future__ import annotations

import cmath
import math

import numpy as np

from .amplitude import atom_state, photon_state, tensor
from .elements import AtomInteraction, BeamSplitter, Relabel, random_unitary_2x2
from .network import AbsorberConfig, Scenario, Stage

DEFAULT_SEED = 20240617


def random_two_port(rng: np.random.Generator, *, max_layers: int = 4, atoms: bool | None = None) -> Scenario:
    """A chain of random splitters and phase shifts on modes ``a{k}``/``b{k}``.

    The first layer is always a splitter fed on ``a0`` with ``b0`` dark.
    With ``atoms`` (random when ``None``) up to two Hardy atoms are placed on
    random arms after the first splitter, each with a random blocking spin.
    """
    if atoms is None:
        atoms = bool(rng.integers(0, 2))
    n_layers = int(rng.integers(1, max_layers + 1))
    kinds = ["bs"] + [("bs", "phase")[int(rng.integers(0, 2))] for _ in range(n_layers - 1)]
    n_atoms = int(rng.integers(1, 3)) if atoms else 0
    atom_layers = sorted(int(x) for x in rng.integers(1, n_layers + 1, size=n_atoms)) if n_layers >= 1 else []

    stages = []
    k = 0
    placed = 0
    for layer, kind in enumerate(kinds):
        a, b, a2, b2 = f"a{k}", f"b{k}", f"a{k + 1}", f"b{k + 1}"
        if kind == "bs":
            el = [BeamSplitter(f"BS{layer}", (a, b), (a2, b2), random_unitary_2x2(rng))]
        else:
            p, q = rng.uniform(0, 2 * math.pi, size=2)
            el = [Relabel(f"Pa{layer}", a, a2, cmath.exp(1j * p)), Relabel(f"Pb{layer}", b, b2, cmath.exp(1j * q))]
        stages.append(Stage(f"L{layer}", tuple(el)))
        k += 1
        while placed < n_atoms and atom_layers[placed] == layer + 1:
            atom_id = placed + 1
            arm = ("a", "b")[int(rng.integers(0, 2))]
            other = "b" if arm == "a" else "a"
            blocking = ("z+", "z-")[int(rng.integers(0, 2))]
            stages.append(
                Stage(
                    f"atom{atom_id}",
                    (
                        AtomInteraction(f"A{atom_id}", atom_id, blocking, f"{arm}{k}", f"{arm}{k + 1}"),
                        Relabel(f"F{atom_id}", f"{other}{k}", f"{other}{k + 1}"),
                    ),
                )
            )
            k += 1
            placed += 1

    initial = photon_state({"a0": 1.0})
    for atom_id in range(1, n_atoms + 1):
        initial = tensor(initial, atom_state(atom_id, {"y-": 1.0}))
    absorbers = AbsorberConfig(
        detectors=(("C", f"a{k}"), ("D", f"b{k}")),
        spin_detectors=tuple((i, ("z", "y")[int(rng.integers(0, 2))]) for i in range(1, n_atoms + 1)),
        universal=n_atoms > 0,
    )
    return Scenario("random-two-port", initial, ("a0",), tuple(stages), absorbers)
