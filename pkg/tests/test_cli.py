import json
import subprocess
import sys

import pytest

from siltkit import cli
from siltkit.context import make_context
from siltkit.errors import CertificateFailure, ParseError, ValidationError
from suites import golden_handles, linear, shifted

A2 = """
[quiver]
vertices = ["1", "2"]
arrows = [["a", "1", "2"]]
[algebra]
field = 2
[context]
kind = "{kind}"
dim_cap = {cap}
"""

A3 = """
[quiver]
vertices = ["1", "2", "3"]
arrows = [["a1", "1", "2"], ["a2", "2", "3"]]
[algebra]
field = 2
relations = {rels}
[context]
kind = "{kind}"
dim_cap = 6
"""


def write(tmp_path, text, name="p.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def invoke(capsys, *argv):
    status = cli.main(list(argv))
    return status, json.loads(capsys.readouterr().out)


# -- parsing --------------------------------------------------------------------------------


def test_demo_spec_parses():
    spec = cli.parse_spec_text(cli.DEMO_SPEC)
    assert len(spec.vertices) == 4 and len(spec.arrows) == 3
    assert spec.kind == "ftheta" and spec.shift_window == (-1, 2) and len(spec.theta) == 4


def test_unknown_vertex_is_named():
    bad = A2.format(kind="module", cap=4).replace('["a", "1", "2"]', '["a", "1", "7"]')
    with pytest.raises(ValidationError, match="'7'"):
        cli.parse_spec_text(bad)


def test_toml_errors_carry_the_line(tmp_path, capsys):
    with pytest.raises(ParseError, match="line 3") as err:
        cli.parse_spec_text('[quiver]\nvertices = ["1"]\narrows = = 2\n')
    assert err.value.line == 3
    status, rep = invoke(capsys, "enum-ind", write(tmp_path, '[quiver]\nvertices = = 1\n'))
    assert status == 2 and rep["error"] == "parse" and rep["line"] == 2


@pytest.mark.parametrize("text", [
    A2.format(kind="module", cap=4).replace("[context]", "[nothing]"),
    A2.format(kind="bogus", cap=4),
    A2.format(kind="ftheta", cap=4),
    A2.format(kind="derived", cap=4) + "shift_window = [0]\n",
])
def test_invalid_specs(text):
    with pytest.raises(ValidationError):
        cli.parse_spec_text(text)


def test_object_expressions_resolve():
    spec = cli.parse_spec_text(cli.DEMO_SPEC)
    ctx = cli.build_context(spec)
    D = ctx.parent
    assert cli.resolve_object(D, "shift(1, interval(1,3))") == (shifted(D, (1, 1, 1, 0), 1),)
    assert cli.resolve_object(D, "sum(proj(4), simple(1))") == (shifted(D, (0, 0, 0, 1)), shifted(D, (1, 0, 0, 0)))
    assert cli.resolve_object(D, "inj(3)") == (shifted(D, (1, 1, 1, 0)),)
    assert [ctx.theta[i] for i in range(4)] == [golden_handles()[k] for k in ("T1", "T2", "T3", "T4")]


@pytest.mark.parametrize("text, err", [
    ("proj(9)", ValidationError),
    ("shift(x, proj(1))", ValidationError),
    ("frob(1)", ValidationError),
    ("proj(1", ParseError),
    ("proj(1))", ParseError),
])
def test_bad_object_expressions(text, err):
    ctx = make_context("module", alg=linear(2), dim_cap=4)
    with pytest.raises(err):
        cli.resolve_object(ctx, text)


def test_shift_in_module_context_is_rejected():
    ctx = make_context("module", alg=linear(2), dim_cap=4)
    with pytest.raises(ValidationError):
        cli.resolve_object(ctx, "shift(1, proj(1))")


# -- commands ------------------------------------------------------------------------------------


def test_a4_demo(tmp_path, capsys):
    dot_path = tmp_path / "q.dot"
    status, rep = invoke(capsys, "a4-demo", "--dot", str(dot_path))
    assert status == 0 and rep["schema"] == 1
    res = rep["result"]
    assert len(res["vertices"]) == 9 and res["complete"] and res["hasse_equal"]
    assert len(res["arrows"]) == 11
    assert res["generator"] == ["0", "P1", "P2", "P4"]
    assert sorted(res["greatest"]) == ["P1", "P2", "P4"]
    assert sorted(res["least"]) == ["P1", "ΣI3", "ΣM[0,1,1,0]"]
    assert (res["k0_rank"], res["k0_torsion"], res["k0_basis"]) == (3, [], True)
    labels = cli.parse_dot_labels(dot_path.read_text(encoding="utf-8"))
    assert sorted(map(sorted, labels)) == sorted(map(sorted, res["vertices"]))


def test_reports_are_byte_stable(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        assert cli.main(["--out", str(out), "a4-demo"]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_tilting_a3(tmp_path, capsys):
    path = write(tmp_path, A3.format(rels="[]", kind="module"))
    status, rep = invoke(capsys, "tilting", path)
    assert status == 0
    assert rep["result"]["count"] == 5 and rep["result"]["agree"]


def test_mutate_not_good(tmp_path, capsys):
    path = write(tmp_path, A2.format(kind="module", cap=4))
    status, rep = invoke(capsys, "silt", "mutate", path, "--at", "proj(1)")
    assert status == 2 and rep["error"] == "not_good" and "offending" in rep


def test_mutate_good(tmp_path, capsys):
    path = write(tmp_path, A2.format(kind="module", cap=4))
    status, rep = invoke(capsys, "silt", "mutate", path, "--at", "proj(2)")
    assert status == 0 and sorted(rep["result"]["result"]) == ["P1", "S1"]


def test_module_commands_a2(tmp_path, capsys):
    path = write(tmp_path, A2.format(kind="module", cap=4))
    assert invoke(capsys, "enum-ind", path)[1]["result"]["count"] == 3
    rep = invoke(capsys, "silt", "check", path, "--set", "sum(proj(1), simple(1))")[1]["result"]
    assert rep["silting"] and rep["presilting"]
    rep = invoke(capsys, "silt", "enumerate", path)[1]["result"]
    assert rep["count"] == 2 and len(rep["arrows"]) == 1
    k0 = invoke(capsys, "k0", path)[1]["result"]
    assert (k0["rank"], k0["torsion"]) == (2, [])
    rep = invoke(capsys, "gamma", path, "--object", "simple(1)")[1]["result"]
    assert dict(zip(rep["basis"], rep["coords"])) == {"P2": -1, "P1": 1}
    rep = invoke(capsys, "cotorsion", path, "--silting", "sum(proj(1), simple(1))")[1]["result"]
    assert sorted(rep["Y"]) == ["P1", "S1"] and sorted(rep["G"]) == ["P1", "S1"]
    rep = invoke(capsys, "bongartz", path, "--presilting", "simple(1)")[1]["result"]
    assert sorted(rep["silting"]) == ["P1", "S1"]


def test_silt_quiver_dot(tmp_path, capsys):
    path = write(tmp_path, A3.format(rels="[]", kind="module"))
    dot_path = tmp_path / "a3.dot"
    status, rep = invoke(capsys, "silt", "quiver", path, "--dot", str(dot_path))
    res = rep["result"]
    assert status == 0 and len(res["vertices"]) == 5 and res["hasse_equal"]
    labels = cli.parse_dot_labels(dot_path.read_text(encoding="utf-8"))
    assert labels == res["vertices"]


def test_ar_verify_rad2(tmp_path, capsys):
    path = write(tmp_path, A3.format(rels='["a1*a2"]', kind="pinfty"))
    status, rep = invoke(capsys, "ar-verify", path)
    assert status == 0 and rep["result"]["ok"]


# -- exit status -----------------------------------------------------------------------------------


def test_exit_status_validation(tmp_path, capsys):
    path = write(tmp_path, A2.format(kind="bogus", cap=4))
    status, rep = invoke(capsys, "enum-ind", path)
    assert status == 2 and rep["error"] == "validation"
    status, rep = invoke(capsys, "enum-ind", str(tmp_path / "missing.toml"))
    assert status == 2


def test_exit_status_budget(tmp_path, capsys):
    path = write(tmp_path, A3.format(rels="[]", kind="module").replace("dim_cap = 6", "dim_cap = 2"))
    status, rep = invoke(capsys, "enum-ind", path)
    assert status == 3 and rep["error"] == "cap_too_small"


def test_exit_status_certificate(monkeypatch, capsys):
    def boom(args, spec):
        raise CertificateFailure("forced")

    monkeypatch.setattr(cli, "run", boom)
    status, rep = invoke(capsys, "a4-demo")
    assert status == 4 and rep["error"] == "certificate_failure"


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "siltkit.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip()
