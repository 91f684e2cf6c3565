"""Dense-matrix Born-rule oracle, independent of the sparse label machinery.

The compound space is photon modes x atom1 levels x atom2 levels, with
atom levels (z+, z-, z+*, z-*).  Every element becomes an explicit matrix
and the final ket is a plain matrix-vector product chain.
"""

import numpy as np

from tisim.elements import AtomInteraction, BeamSplitter, Relabel

LEVELS = ("z+", "z-", "z+*", "z-*")
R2 = 1 / np.sqrt(2)
# rows z+, z-; columns y+, y-  (|y-> = (i|z+> + |z->)/sqrt2)
Y_IN_Z = np.array([[1, 1j], [1j, 1]]) * R2


def modes_of(scenario):
    modes = list(scenario.source_sectors)
    for st in scenario.stages:
        for e in st.elements:
            for m in (*e.inputs, *e.outputs):
                if m not in modes:
                    modes.append(m)
    return modes + ["0"]


class DenseOracle:
    def __init__(self, scenario):
        self.sc = scenario
        self.modes = modes_of(scenario)
        self.n_atoms = len(scenario.atoms())
        self.dims = (len(self.modes),) + (4,) * self.n_atoms
        self.size = int(np.prod(self.dims))

    def index(self, mode, *levels):
        return int(np.ravel_multi_index((self.modes.index(mode), *(LEVELS.index(l) for l in levels)), self.dims))

    def basis_states(self):
        return list(np.ndindex(*self.dims))

    def initial(self):
        ymin = np.zeros(4, dtype=complex)
        ymin[:2] = Y_IN_Z[:, 1]
        photon = np.zeros(len(self.modes), dtype=complex)
        for lab, amp in self.sc.initial.amplitudes.items():
            photon[self.modes.index(lab.photon)] += amp
        vec = photon
        for _ in range(self.n_atoms):
            vec = np.kron(vec, ymin)
        return vec

    def _photon_op(self, m):
        op = m
        for _ in range(self.n_atoms):
            op = np.kron(op, np.eye(4))
        return op

    def matrix(self, e):
        n = len(self.modes)
        if isinstance(e, BeamSplitter):
            m = np.eye(n, dtype=complex)
            ins = [self.modes.index(x) for x in e.inputs]
            outs = [self.modes.index(x) for x in e.outputs]
            for k in ins:
                m[:, k] = 0
            for j, o in enumerate(outs):
                for k, i in enumerate(ins):
                    m[o, i] = e.matrix[j][k]
            return self._photon_op(m)
        if isinstance(e, AtomInteraction):
            m = np.eye(self.size, dtype=complex)
            for idx in self.basis_states():
                mode = self.modes[idx[0]]
                if mode != e.mode_in:
                    continue
                col = int(np.ravel_multi_index(idx, self.dims))
                m[:, col] = 0
                level = LEVELS[idx[e.atom]]
                new = list(idx)
                if level == e.blocking:
                    new[0] = self.modes.index("0")
                    new[e.atom] = LEVELS.index(level + "*")
                else:
                    new[0] = self.modes.index(e.mode_out)
                m[int(np.ravel_multi_index(tuple(new), self.dims)), col] = 1
            return m
        if isinstance(e, Relabel):
            m = np.eye(n, dtype=complex)
            i, o = self.modes.index(e.source), self.modes.index(e.target)
            m[:, i] = 0
            m[o, i] = e.phase
            return self._photon_op(m)
        raise TypeError(e)

    def readout(self):
        """Rotate ground levels of y-read atoms into (y+, y-) slots 0 and 1."""
        op = np.eye(1)
        for k in range(1, self.n_atoms + 1):
            a = np.eye(4, dtype=complex)
            if self.sc.absorbers.axis(k) == "y":
                a[:2, :2] = Y_IN_Z.conj().T
            op = np.kron(op, a)
        return np.kron(np.eye(len(self.modes)), op)

    def final(self):
        vec = self.initial()
        for st in self.sc.stages:
            for e in st.elements:
                vec = self.matrix(e) @ vec
        return self.readout() @ vec

    def born(self, outcome):
        """Probability of an engine Outcome, reading its labels through this oracle's own indexing."""
        vec = self.final()
        total = 0.0
        for lab in outcome.labels:
            levels = []
            for k in range(1, self.n_atoms + 1):
                st = lab.atom(k)
                lvl = {"y+": "z+", "y-": "z-"}.get(st.spin, st.spin) + ("*" if st.excited else "")
                levels.append(lvl)
            total += abs(vec[self.index(lab.photon, *levels)]) ** 2
        return total
