import io
import json
import subprocess
import sys

import pytest
from helpers import fixture, fixture_names, fixture_path, input_path

from ultrashift import cli, kms
from ultrashift import dynamics as dy


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out=out)
    return code, out.getvalue()


def run_json(*argv):
    code, text = run(*argv)
    return code, json.loads(text)


def test_kms_solve_reports_exact_and_decimal():
    code, rep = run_json("kms", "solve", fixture_path("example_sink.json"), "--beta", "1")
    assert code == 0
    assert rep["verdict"] == "feasible"
    assert rep["tables"]["sets"]["r(e)"] == {"exact": "2/3", "decimal": "0.666666666666666667"}
    assert rep["tables"]["sets"]["{v0}"]["exact"] == "1/3"
    assert set(rep) == {"command", "inputs_digest", "verdict", "witnesses", "tables"}


def test_inexact_values_have_no_exact_field():
    code, rep = run_json("kms", "solve", "example_sink.json", "--beta", "0.5")
    assert code == 0
    assert "exact" not in rep["tables"]["sets"]["r(e)"]
    assert rep["tables"]["solution"]["exact"] is False


def test_reports_are_deterministic():
    a = run("analyze", "boundary_example.json")
    b = run("analyze", "boundary_example.json")
    assert a == b
    c = run("orbit-check", "bouquet.json", "--map", input_path("bouquet_identity.json"), "--seed", "4")
    d = run("orbit-check", "bouquet.json", "--map", input_path("bouquet_identity.json"), "--seed", "4")
    assert c == d


def test_digest_depends_on_flags():
    _, r1 = run_json("kms", "solve", "example_sink.json", "--beta", "1")
    _, r2 = run_json("kms", "solve", "example_sink.json", "--beta", "2")
    assert r1["inputs_digest"] != r2["inputs_digest"]


@pytest.mark.parametrize("name", fixture_names())
def test_exit_code_contract(name):
    ug = fixture(name)
    rfum2 = ug.check_rfum2().holds
    assert run("validate", name)[0] == 0
    assert run("analyze", name)[0] == (0 if rfum2 else 1)
    assert run("dynamics", "cycles", name)[0] == 0
    res = dy.check_condition_L(ug, 6)
    want = 3 if isinstance(res, dy.UnknownBeyondBound) else (0 if res.holds else 1)
    assert run("dynamics", "condition-l", name)[0] == want
    if not rfum2:
        assert run("kms", "solve", name)[0] == 1
        assert run("ground", name)[0] == 1
        return
    feasible = not isinstance(kms.solve(ug, 1), kms.Infeasible)
    code, rep = run_json("kms", "solve", name)
    assert code == (0 if feasible else 1)
    if not feasible:
        assert rep["witnesses"]
    assert run("sweep", name, "--betas", "1,2")[0] == 0


def test_condition_l_on_the_exitless_loop():
    code, rep = run_json("dynamics", "condition-l", "exitless_loop.json")
    assert code == 1
    assert rep["witnesses"] == [{"exitless_cycle": "(l,{v})"}]


def test_bound_limited_unknown():
    code, rep = run_json("dynamics", "condition-l", "example_sink.json")
    assert code == 3 and rep["verdict"] == "unknown-beyond-bound"


def test_usage_and_parse_errors():
    assert run()[0] == 2
    assert run("bogus")[0] == 2
    assert run("kms", "solve", "no_such_file.json")[0] == 2
    assert run("decompose", "example_sink.json", "--set", "FINITE([nope")[0] == 2
    assert run("dynamics", "stab", "stabilizer_example.json")[0] == 2
    assert run("cylinders", "intersect", "example_sink.json", "--c1", '{"path": ["e"]}')[0] == 2
    assert run("--help")[0] == 0


def test_verify_and_ground_commands():
    code, rep = run_json("kms", "verify", "example_sink.json", "--m", input_path("sink_geometric_m.json"),
                         "--tol", "1e-12")
    assert code == 0 and rep["verdict"] == "accepted"
    code, rep = run_json("kms", "verify", "example_sink.json", "--m", "sink_claimed_ground_m.json")
    assert code == 1
    assert rep["tables"]["violation_classes"] == ["m2 at {v0}"]
    code, rep = run_json("ground", "example_sink.json")
    assert code == 0
    assert rep["tables"]["sets"]["r(e)"]["exact"] == "1"
    assert all(v is not None for v in rep["tables"]["forced"].values())
    code, rep = run_json("kms", "ground", "example_sink.json", "--variant", "edge-zero")
    assert code == 0 and rep["tables"]["variant"] == "edge-zero"


def test_dynamics_commands():
    x = '{"prefix": ["a1", "a2", "a3"], "cycle": ["b", "c"]}'
    code, rep = run_json("dynamics", "stab", "stabilizer_example.json", "--point", x)
    assert code == 0
    assert rep["tables"]["stabilizers"]["stab"] == "2Z"
    assert rep["tables"]["stabilizers"]["stab_ess_min"] == "inf"
    code, rep = run_json("dynamics", "isolated", "isolated_example.json",
                         "--point", '{"ray": {"prefix": [], "family": "E", "start": 4}}')
    assert code == 0 and rep["verdict"] == "isolated"
    code, rep = run_json("dynamics", "isolated", "cycle_example.json", "--point", '{"cycle": ["e", "f1"]}')
    assert code == 1 and rep["witnesses"]


def test_set_and_cylinder_commands():
    code, rep = run_json("decompose", "boundary_example.json", "--set", "R(a[3])")
    assert code == 0
    code, rep = run_json("decompose", "nested_ranges.json", "--set", "R(x)")
    assert code == 1 and rep["verdict"] == "no-decomposition"
    c1 = '{"path": ["e"]}'
    c2 = '{"path": ["e"], "range": "FINITE([V[1]])"}'
    code, rep = run_json("cylinders", "diff", "example_sink.json", "--c1", c1, "--c2", c2)
    assert code == 0
    assert [p["S"] for p in rep["tables"]["pieces"]] == [["V[1]"]]
    code, rep = run_json("cylinders", "intersect", "example_sink.json", "--c1", c1, "--c2", c2)
    assert rep["verdict"] == "nonempty" and len(rep["tables"]["pieces"]) == 1
    code, rep = run_json("cylinders", "split", "emitter_fan.json", "--c1", '{"path": [], "range": "R(h)"}')
    assert code == 0 and rep["tables"]["pieces"]


def test_orbit_check_commands():
    assert run("orbit-check", "bouquet.json", "--map", "bouquet_relabel.json")[0] == 0
    code, rep = run_json("orbit-check", "two_cycle.json", "--map", "collapse_two_cycle.json")
    assert code == 1
    eq1 = [w for w in rep["witnesses"] if w.get("equation") == "1"]
    assert eq1 and eq1[0]["lhs"] == 2 and eq1[0]["rhs"] == 1


def test_text_format():
    code, text = run("kms", "solve", "example_sink.json", "--format", "text")
    assert code == 0
    assert "verdict: feasible" in text
    assert "r(e): 2/3" in text


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ultrashift", "validate", "example_sink.json"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdict"] == "valid"
