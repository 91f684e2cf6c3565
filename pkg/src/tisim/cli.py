"""Command-line runner: ``tisim run``, ``tisim check``, ``tisim list-builtin``.

Exit status: 0 when every check passes, 1 when a residual exceeds the
tolerance, 2 on usage, parse or validation errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .amplitude import TOL, dagger, render
from .builtins import builtin_source, list_builtins
from .elements import PropagationError
from .engine import (
    ConsistencyError,
    UnknownOutcome,
    component_sum_check,
    find_outcome,
    full_confirmation_check,
    transaction_report,
)
from .lang import ParseError, load
from .network import ContingentScenario, Scenario, ScenarioError, propagate_confirmation, propagate_offer, run_contingent

FORMAT_VERSION = 1
MODES = ("outcomes", "full-check", "components", "trace")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def prob(x: float) -> str:
    return f"{x + 0.0:.12f}"


def resid(x: float) -> str:
    return f"{x + 0.0:.12g}"


@dataclass(frozen=True)
class RunRequest:
    source: str
    builtin: bool = False
    mode: str = "outcomes"
    outcome: str | None = None
    tolerance: float = TOL
    format: str = "text"

    def __post_init__(self):
        if not 0 < self.tolerance <= 1e-6:
            raise ValueError(f"tolerance must lie in (0, 1e-6], got {self.tolerance}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.format not in ("text", "structured"):
            raise ValueError(f"unknown format {self.format!r}")


@dataclass(frozen=True)
class RunResult:
    output: str
    status: int


def _load(req: RunRequest):
    text = builtin_source(req.source) if req.builtin else Path(req.source).read_text(encoding="utf-8")
    return load(text)


def _outcome_section(sc: Scenario, req: RunRequest):
    rep = transaction_report(sc, tol=req.tolerance)
    rows = rep.rows
    if req.outcome:
        oc = find_outcome(sc, req.outcome)
        rows = tuple(r for r in rows if r.outcome == oc)
    data = {
        "rows": [
            {
                "outcome": str(r.outcome),
                "ti_probability": prob(r.ti_probability),
                "born_probability": prob(r.born_probability),
                "delta": resid(r.delta),
                "emitter_residual": resid(r.residual),
                "overflow": resid(r.overflow),
            }
            for r in rows
        ],
        "residuals": {"probability_sum": prob(rep.probability_sum)},
    }
    ok = all(r.delta <= req.tolerance for r in rows) and abs(rep.probability_sum - 1) <= req.tolerance
    return data, ok


def _full_section(sc: Scenario, req: RunRequest):
    fc = full_confirmation_check(sc)
    res = {
        "emitter_distance": resid(fc.emitter_distance),
        "r_sector": resid(fc.r_sector),
        "overflow": resid(fc.overflow),
    }
    return {"rows": [], "residuals": res}, fc.passed(req.tolerance)


def _components_section(sc: Scenario, req: RunRequest):
    cc = component_sum_check(sc)
    rows = [
        {
            "outcome": str(c.outcome),
            "emitter_amplitude": resid(c.amplitude.real),
            "emitter_residual": resid(c.residual),
            "overflow": resid(c.overflow),
        }
        for c in cc.components
    ]
    res = {
        "sum_vs_full": resid(cc.sum_vs_full),
        "emitter_distance": resid(cc.spurious.emitter_distance),
        "r_sector": resid(cc.spurious.r_sector),
        "overflow": resid(cc.spurious.overflow),
    }
    return {"rows": rows, "residuals": res}, cc.passed(req.tolerance)


def _trace_section(sc: Scenario, req: RunRequest):
    offer = propagate_offer(sc)
    back = propagate_confirmation(sc, dagger(offer[-1][1]))
    rows = [{"wave": "offer", "region": reg, "state": render(k)} for reg, k in offer]
    rows += [{"wave": "confirmation", "region": reg, "state": render(b)} for reg, b in back]
    return {"rows": rows, "residuals": {}}, True


SECTIONS = {
    "outcomes": _outcome_section,
    "full-check": _full_section,
    "components": _components_section,
    "trace": _trace_section,
}


def _sections(scenario, req: RunRequest):
    """``[(branch label or None, data, ok)]``; contingent scenarios yield one entry per branch."""
    if isinstance(scenario, ContingentScenario):
        report = run_contingent(scenario, tol=req.tolerance)
        out = []
        for b, which in zip(report.branches, ("fired", "silent")):
            data, ok = SECTIONS[req.mode](scenario.branch(which), req)
            data["residuals"]["branch_probability"] = prob(b.realization)
            data["residuals"]["trigger_probability"] = prob(b.trigger_probability)
            out.append((b.name, data, ok))
        out.append((None, {"rows": [], "residuals": {"trigger_consistency": resid(report.trigger_consistency)}}, report.trigger_consistency <= req.tolerance))
        return out
    data, ok = SECTIONS[req.mode](scenario, req)
    return [(None, data, ok)]


def _render_text(name: str, req: RunRequest, sections) -> str:
    lines = [f"scenario {name}  mode {req.mode}  tolerance {req.tolerance:g}"]
    for branch, data, ok in sections:
        if branch:
            lines.append(f"-- branch {branch}")
        rows = data["rows"]
        if req.mode == "outcomes" and rows:
            lines.append(f"{'outcome':<22}{'ti_probability':>18}{'born_probability':>18}{'|delta|':>22}{'emitter_residual':>22}{'overflow':>22}")
            lines += [
                f"{r['outcome']:<22}{r['ti_probability']:>18}{r['born_probability']:>18}{r['delta']:>22}{r['emitter_residual']:>22}{r['overflow']:>22}"
                for r in rows
            ]
        elif req.mode == "components" and rows:
            lines.append(f"{'outcome':<22}{'amplitude':>18}{'residual':>22}{'overflow':>22}")
            lines += [f"{r['outcome']:<22}{r['emitter_amplitude']:>18}{r['emitter_residual']:>22}{r['overflow']:>22}" for r in rows]
        elif req.mode == "trace":
            for r in rows:
                lines.append(f"[{r['wave']} {r['region']}]")
                lines.append(r["state"] or "(empty)")
        for key, val in data["residuals"].items():
            lines.append(f"{key}: {val}")
    status = "PASS" if all(ok for _, _, ok in sections) else "FAIL"
    lines.append(f"status: {status}")
    return "\n".join(lines) + "\n"


def _render_structured(name: str, req: RunRequest, sections) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "tool_version": __version__,
        "scenario": name,
        "mode": req.mode,
        "tolerance": req.tolerance,
        "passed": all(ok for _, _, ok in sections),
    }
    numeric = ("ti_probability", "born_probability", "delta", "emitter_residual", "overflow", "emitter_amplitude")

    def conv(row):
        return {k: float(v) if k in numeric else v for k, v in row.items()}

    if len(sections) == 1:
        doc["rows"] = [conv(r) for r in sections[0][1]["rows"]]
        doc["residuals"] = {k: float(v) for k, v in sections[0][1]["residuals"].items()}
    else:
        doc["branches"] = [
            {"branch": b, "rows": [conv(r) for r in d["rows"]], "residuals": {k: float(v) for k, v in d["residuals"].items()}}
            for b, d, _ in sections
            if b
        ]
        doc["residuals"] = {k: float(v) for b, d, _ in sections if not b for k, v in d["residuals"].items()}
    return json.dumps(doc, indent=2) + "\n"


def run(req: RunRequest) -> RunResult:
    """Execute one request; errors come back as a message with exit status 2."""
    try:
        scenario = _load(req)
        sections = _sections(scenario, req)
    except (ParseError, ScenarioError) as e:
        return RunResult(f"error: {e}\n", EXIT_USAGE)
    except (KeyError, UnknownOutcome, OSError, PropagationError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        return RunResult(f"error: {msg}\n", EXIT_USAGE)
    except ConsistencyError as e:
        return RunResult(f"consistency failure: {e}\n", EXIT_FAIL)
    render_fn = _render_structured if req.format == "structured" else _render_text
    status = EXIT_OK if all(ok for _, _, ok in sections) else EXIT_FAIL
    return RunResult(render_fn(scenario.name, req, sections), status)


def check(source: str, *, builtin: bool = False, tolerance: float = TOL) -> RunResult:
    """Validation plus every residual check, one summary line per check."""
    lines, status = [], EXIT_OK
    for mode in ("outcomes", "full-check", "components"):
        res = run(RunRequest(source, builtin=builtin, mode=mode, tolerance=tolerance))
        if res.status == EXIT_USAGE:
            return res
        lines.append(f"{mode}: {'PASS' if res.status == EXIT_OK else 'FAIL'}")
        status = max(status, res.status)
    return RunResult("\n".join(lines) + "\n", status)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tisim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"tisim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario file or built-in")
    r.add_argument("file", nargs="?")
    r.add_argument("--builtin", metavar="NAME")
    r.add_argument("--mode", choices=MODES, default="outcomes")
    r.add_argument("--outcome", metavar="SPEC", help="e.g. 'D,z1+,z2+'")
    r.add_argument("--tolerance", type=float, default=TOL)
    r.add_argument("--format", choices=("text", "structured"), default="text")

    c = sub.add_parser("check", help="validate and run all residual checks")
    c.add_argument("file", nargs="?")
    c.add_argument("--builtin", metavar="NAME")
    c.add_argument("--tolerance", type=float, default=TOL)

    sub.add_parser("list-builtin", help="list built-in scenarios")
    return p


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    if args.command == "list-builtin":
        for name, desc in list_builtins():
            print(f"{name:<20}{desc}")
        return EXIT_OK
    if (args.file is None) == (args.builtin is None):
        parser.error("give exactly one of FILE or --builtin NAME")
    source, builtin = (args.builtin, True) if args.builtin else (args.file, False)
    try:
        if args.command == "check":
            req = RunRequest(source, builtin=builtin, tolerance=args.tolerance)
            res = check(source, builtin=builtin, tolerance=req.tolerance)
        else:
            req = RunRequest(source, builtin, args.mode, args.outcome, args.tolerance, args.format)
            res = run(req)
    except ValueError as e:
        parser.error(str(e))
    stream = sys.stdout if res.status != EXIT_USAGE else sys.stderr
    stream.write(res.output)
    return res.status


if __name__ == "__main__":
    sys.exit(main())
