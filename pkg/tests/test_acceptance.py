"""Acceptance criteria 1-10, each at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL  detail`` line.  Run this
file directly (``python3 tests/test_acceptance.py``) for the summary alone.
"""

import json
import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from reference_values import KET_CD, as_state  # noqa: E402
from tisim.amplitude import BRA, KET, StateVector, label, max_abs_diff, spin_basis_transform  # noqa: E402
from tisim.builtins import BUILTINS, builtin_source, load_builtin  # noqa: E402
from tisim.cli import RunRequest, run  # noqa: E402
from tisim.elements import element_matrices, label_universe  # noqa: E402
from tisim.engine import born_probability, full_confirmation_check, outcomes, ti_probability, transaction_report  # noqa: E402
from tisim.lang import ParseError, parse_scenario, serialize  # noqa: E402
from tisim.network import EMITTER, final_ket, propagate_offer, run_contingent  # noqa: E402
from tisim.randomized import DEFAULT_SEED, random_two_port  # noqa: E402

TOL = 1e-12
FIXTURES = Path(__file__).parent / "fixtures" / "malformed"
R2 = 1 / math.sqrt(2)


def c1_golden_table():
    ket = final_ket(load_builtin("qle-single"))
    err = max_abs_diff(ket, as_state(KET_CD))
    q, h = 1 / 4, math.sqrt(2) / 4
    allowed = [q, -q, -1 / 2, 1j * q, -1j * q, h, -h, 1j * h, -1j * h]
    values_ok = all(min(abs(a - v) for v in allowed) <= TOL for a in ket.amplitudes.values())
    return len(ket) == 9 and err <= TOL and values_ok, f"9 terms, max error {err:.3g}"


def c2_p_d():
    p = transaction_report(load_builtin("qle-single")).absorber_probability("D")
    return abs(p - 0.125) <= TOL, f"P(D) = {p:.15f}"


def c3_single_transaction():
    sc = load_builtin("qle-single")
    ti, born = ti_probability(sc, "D,z1+,z2+"), born_probability(sc, "D,z1+,z2+")
    ok = abs(ti - 0.0625) <= TOL and abs(born - 0.0625) <= TOL
    return ok, f"ti {ti:.15f}, born {born:.15f}"


def c4_full_confirmation():
    fc = full_confirmation_check(load_builtin("qle-single"))
    target = StateVector(BRA, {label("s", "y-", "y-"): 1})
    dist = max_abs_diff(fc.emitter, target)
    ok = dist <= TOL and fc.emitter_distance <= TOL and fc.r_sector <= TOL and fc.overflow <= TOL
    return ok, f"distance {fc.emitter_distance:.3g}, r-sector {fc.r_sector:.3g}, overflow {fc.overflow:.3g}"


def c5_ifm():
    obj = transaction_report(load_builtin("ifm-with-object"))
    empty = transaction_report(load_builtin("ifm-no-object"))
    got = [obj.absorber_probability(n) for n in "OCD"] + [empty.absorber_probability(n) for n in "CD"]
    want = [0.5, 0.25, 0.25, 1.0, 0.0]
    ok = all(abs(g - w) <= TOL for g, w in zip(got, want))
    return ok, "O/C/D = {:.12f}/{:.12f}/{:.12f}; empty C/D = {:.12f}/{:.12f}".format(*got)


def c6_maudlin():
    rep = run_contingent(load_builtin("maudlin-contingent"))
    parts, ok = [], rep.passed(TOL)
    for b in rep.branches:
        probs = [r.ti_probability for r in b.report.rows if r.ti_probability > TOL]
        ok &= len(probs) == 2 and all(abs(p - 0.5) <= TOL for p in probs)
        ok &= abs(b.realization - 0.5) <= TOL
        parts.append(f"{b.name}: " + "/".join(f"{r.outcome.absorber} {r.ti_probability:.12f}" for r in b.report.rows))
    return ok, "; ".join(parts)


def c7_dual_source():
    single = dict(propagate_offer(load_builtin("qle-single")))
    dual = propagate_offer(load_builtin("qle-dual-source"))
    diffs = [max_abs_diff(single[name], ket) for name, ket in dual if name != EMITTER]
    ok = [n for n, _ in dual if n != EMITTER] == ["uv", "u'v'", "cd"] and max(diffs) <= TOL
    return ok, f"regions uv, u'v', cd; max difference {max(diffs):.3g}"


def c8_post_d_atoms():
    ket = final_ket(load_builtin("qle-single"))
    d = ket.restrict(lambda lab: lab.photon == "d")
    atoms = d * (1 / d.norm())
    eq11 = StateVector(KET, {label("d", "z+", "z+"): R2, label("d", "z-", "z-"): R2})
    y = spin_basis_transform(spin_basis_transform(atoms, 1, "y"), 2, "y")
    eq12 = StateVector(KET, {label("d", "y+", "y-"): -1j * R2, label("d", "y-", "y+"): -1j * R2})
    e1, e2 = max_abs_diff(atoms, eq11), max_abs_diff(y, eq12)
    return max(e1, e2) <= TOL, f"z-basis error {e1:.3g}, y-basis error {e2:.3g}"


def c9_property_suite(cases=250):
    rng = np.random.default_rng(DEFAULT_SEED)
    worst_sum = worst_delta = worst_iso = worst_transpose = 0.0
    n_elements = 0
    for _ in range(cases):
        sc = random_two_port(rng)
        ket = final_ket(sc)
        total = 0.0
        for oc in outcomes(sc):
            ti = ti_probability(sc, oc, ket=ket)
            worst_delta = max(worst_delta, abs(ti - born_probability(sc, oc, ket=ket)))
            total += ti
        worst_sum = max(worst_sum, abs(total - 1))
        sectors = sorted({s for e in sc.elements() for s in (*e.inputs, *e.outputs)})
        universe = label_universe(sectors, sc.atoms())
        for e in sc.elements():
            _, _, F, B = element_matrices(e, universe)
            worst_iso = max(worst_iso, np.abs(F.conj().T @ F - np.eye(F.shape[1])).max())
            worst_transpose = max(worst_transpose, np.abs(B - F.T).max())
            n_elements += 1
    ok = max(worst_sum, worst_delta, worst_iso, worst_transpose) <= TOL
    detail = f"{cases} networks, {n_elements} elements; |sum-1| {worst_sum:.3g}, |ti-born| {worst_delta:.3g}, F'F-I {worst_iso:.3g}, B-F^T {worst_transpose:.3g}"
    return ok, detail


def c10_parser():
    round_trip = all(parse_scenario(serialize(parse_scenario(builtin_source(n)))) == parse_scenario(builtin_source(n)) for n in BUILTINS)
    expected = json.loads((FIXTURES / "expected.json").read_text())
    good = 0
    for name, line in expected.items():
        res = run(RunRequest(str(FIXTURES / name)))
        try:
            parse_scenario((FIXTURES / name).read_text())
            first = None
        except ParseError as e:
            first = e.diagnostics[0].line
        good += res.status == 2 and first == line and f"line {line}," in res.output
    ok = round_trip and len(expected) == 10 and good == 10
    return ok, f"round trip on {len(BUILTINS)} built-ins {'ok' if round_trip else 'BROKEN'}; {good}/{len(expected)} fixtures diagnosed"


CRITERIA = [
    (1, "region-cd golden table", c1_golden_table),
    (2, "P(D fires) = 0.125", c2_p_d),
    (3, "single transaction (D, z1+, z2+) = 1/16", c3_single_transaction),
    (4, "full confirmation wave closes at the emitter", c4_full_confirmation),
    (5, "interaction-free measurement probabilities", c5_ifm),
    (6, "contingent absorber 0.5/0.5 in both branches", c6_maudlin),
    (7, "single/dual source equivalence", c7_dual_source),
    (8, "post-D atom state and its y-basis form", c8_post_d_atoms),
    (9, "randomized property suite", c9_property_suite),
    (10, "parser round trip and malformed fixtures", c10_parser),
]


def report(number, title, fn):
    ok, detail = fn()
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]"
    return ok, line


@pytest.mark.parametrize("number, title, fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, fn, capsys):
    ok, line = report(number, title, fn)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [report(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
