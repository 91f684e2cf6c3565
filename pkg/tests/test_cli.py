import json
import subprocess
import sys

import pytest

from tisim import __version__
from tisim.cli import RunRequest, check, main, run

FIXTURE_DIR = __import__("pathlib").Path(__file__).parent / "fixtures" / "malformed"


def builtin(name, **kw):
    return run(RunRequest(name, builtin=True, **kw))


def text_numbers(output):
    """Outcome rows of a text report as {outcome: [numbers...]}."""
    rows = {}
    for line in output.splitlines():
        if line.startswith("("):
            head, tail = line.split(")", 1)
            rows[head + ")"] = [float(x) for x in tail.split()]
    return rows


def text_residuals(output):
    return {k: float(v) for k, v in (l.split(": ") for l in output.splitlines() if ": " in l and not l.startswith("status"))}


class TestRun:
    def test_qle_outcomes(self):
        res = builtin("qle-single")
        assert res.status == 0
        rows = [l for l in res.output.splitlines() if l.startswith("(")]
        assert len(rows) == 11
        d = next(l for l in rows if l.startswith("(D, z1+, z2+)"))
        assert d.split()[3:5] == ["0.062500000000", "0.062500000000"]
        assert res.output.endswith("status: PASS\n")

    def test_ifm_with_object(self):
        rows = text_numbers(builtin("ifm-with-object").output)
        assert {k: v[0] for k, v in rows.items()} == {"(O)": 0.5, "(C)": 0.25, "(D)": 0.25}

    def test_outcome_filter(self):
        res = builtin("qle-single", outcome="D,z1+,z2+")
        assert list(text_numbers(res.output)) == ["(D, z1+, z2+)"]

    def test_unknown_outcome(self):
        res = builtin("qle-single", outcome="E,z1+")
        assert res.status == 2 and res.output.startswith("error:")

    def test_full_check(self):
        res = builtin("qle-single", mode="full-check")
        assert text_residuals(res.output) == {"emitter_distance": 0, "r_sector": 0, "overflow": 0}
        assert res.status == 0

    def test_components(self):
        res = builtin("qle-single", mode="components")
        assert res.status == 0
        assert text_residuals(res.output)["sum_vs_full"] <= 1e-12

    def test_trace(self):
        out = builtin("qle-single", mode="trace").output
        assert "[offer cd]" in out and "[confirmation emitter]" in out
        block = out.split("[confirmation emitter]\n")[1].splitlines()[0]
        assert block == "+1.000000000000+0.000000000000i  (s, y1-, y2-)"

    def test_contingent(self):
        res = builtin("maudlin-contingent")
        assert res.status == 0
        assert "-- branch C-fires" in res.output and "-- branch C-silent" in res.output
        assert res.output.count("branch_probability: 0.500000000000") == 2

    def test_empty_file(self, tmp_path):
        p = tmp_path / "empty.scn"
        p.write_text("")
        res = run(RunRequest(str(p)))
        assert res.status == 2
        assert "line 1" in res.output

    def test_missing_file(self, tmp_path):
        assert run(RunRequest(str(tmp_path / "nope.scn"))).status == 2

    def test_unknown_builtin(self):
        assert builtin("nope").status == 2


class TestStructured:
    @pytest.mark.parametrize("name", ["qle-single", "ifm-with-object", "ifm-no-object", "qle-dual-source"])
    def test_same_numbers_as_text(self, name):
        text = text_numbers(builtin(name).output)
        doc = json.loads(builtin(name, format="structured").output)
        keys = ("ti_probability", "born_probability", "delta", "emitter_residual", "overflow")
        assert {r["outcome"]: [r[k] for k in keys] for r in doc["rows"]} == text

    def test_residuals_match_text(self):
        text = text_residuals(builtin("qle-single", mode="components").output)
        doc = json.loads(builtin("qle-single", mode="components", format="structured").output)
        assert doc["residuals"] == text

    def test_schema(self):
        doc = json.loads(builtin("qle-single", format="structured").output)
        assert doc["format_version"] == 1
        assert doc["tool_version"] == __version__
        assert {"scenario", "mode", "tolerance", "rows", "residuals", "passed"} <= set(doc)

    def test_contingent_branches(self):
        doc = json.loads(builtin("maudlin-contingent", format="structured").output)
        assert [b["branch"] for b in doc["branches"]] == ["C-fires", "C-silent"]
        for b in doc["branches"]:
            assert sorted(r["ti_probability"] for r in b["rows"]) == [0.5, 0.5]
        assert doc["residuals"]["trigger_consistency"] == 0


class TestRequest:
    @pytest.mark.parametrize("tol", [0.0, -1e-12, 1e-5])
    def test_tolerance_bounds(self, tol):
        with pytest.raises(ValueError):
            RunRequest("qle-single", builtin=True, tolerance=tol)

    def test_loose_tolerance_accepted(self):
        assert builtin("qle-single", tolerance=1e-6).status == 0

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            RunRequest("x", mode="plot")


class TestMain:
    def test_exit_codes(self, capsys):
        assert main(["run", "--builtin", "qle-single"]) == 0
        assert main(["check", "--builtin", "ifm-with-object"]) == 0
        assert main(["run", str(FIXTURE_DIR / "lexical.scn")]) == 2
        err = capsys.readouterr().err
        assert "line 5" in err

    def test_check_summary(self):
        res = check("qle-single", builtin=True)
        assert res.output.splitlines() == ["outcomes: PASS", "full-check: PASS", "components: PASS"]

    def test_check_reports_parse_error(self):
        assert check(str(FIXTURE_DIR / "empty.scn")).status == 2

    def test_list_builtin(self, capsys):
        assert main(["list-builtin"]) == 0
        names = [l.split()[0] for l in capsys.readouterr().out.splitlines()]
        assert {"maudlin-contingent", "ifm-with-object", "ifm-no-object", "qle-single", "qle-dual-source"} <= set(names)

    @pytest.mark.parametrize("argv", [["run"], ["run", "f.scn", "--builtin", "qle-single"], ["run", "--builtin", "qle-single", "--tolerance", "1"]])
    def test_usage_errors(self, argv):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 2

    def test_module_entry(self):
        proc = subprocess.run([sys.executable, "-m", "tisim", "run", "--builtin", "ifm-no-object"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "status: PASS" in proc.stdout


def test_failed_check_exits_one(monkeypatch):
    import tisim.cli as cli
    from dataclasses import replace

    real = cli.full_confirmation_check
    monkeypatch.setattr(cli, "full_confirmation_check", lambda sc: replace(real(sc), overflow=1e-3))
    res = builtin("qle-single", mode="full-check")
    assert res.status == 1
    assert res.output.endswith("status: FAIL\n")
