import json
import subprocess
import sys

import pytest

from boson_sculpting.cli import main
from boson_sculpting.entanglement import LogicalState, ghz_target, w_target
from boson_sculpting.schemes import bell_scheme, ghz_scheme


@pytest.fixture
def files(tmp_path):
    def write(name, doc):
        p = tmp_path / name
        p.write_text(json.dumps(doc))
        return str(p)

    return {
        "bell_graph": write("bell.json", bell_scheme().graph.to_json()),
        "ghz4_graph": write("ghz4.json", ghz_scheme(4).graph.to_json()),
        "ghz3": write("ghz3.json", ghz_target(3).to_json()),
        "w3": write("w3.json", w_target(3).to_json()),
        "bell_target": write("bell_t.json", {"target": ghz_target(2).to_json(), "K": 0}),
        "three_term": write("three.json", LogicalState.from_terms(2, 2, {"00": 1, "01": 1, "10": 1}).to_json()),
        "unnormalized": write("bad.json", {"N": 1, "K": 0, "d": 2, "dots": [
            {"mult": 1, "edges": [{"circle": 0, "re": 0.5, "im": 0.0, "color": "RED"}]}]}),
        "garbage": write("garbage.json", {"hello": 1}),
        "not_json": str(tmp_path / "x.txt"),
        "tmp": tmp_path,
    }


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    return code, json.loads(out)


# -- exit codes --------------------------------------------------------------------------------

def test_schemes_list_and_run(capsys):
    code, data = run_json(capsys, "schemes", "list")
    assert code == 0 and "ghz" in data["schemes"]
    code, data = run_json(capsys, "schemes", "run", "ghz", "--N", "4")
    assert code == 0
    assert data["success"] == pytest.approx(1 / 8) and data["fidelity"] == pytest.approx(1)
    code, out, _ = run(capsys, "schemes", "run", "w", "--N", "3")
    assert code == 0 and "fidelity" in out and "GENUINE" in out


def test_usage_errors_exit_2(capsys, files):
    assert run(capsys, "schemes", "run", "cluster")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "graph", "check-epm", files["not_json"])[0] == 2
    assert run(capsys, "graph", "check-epm", files["garbage"])[0] == 2
    assert run(capsys, "search", "--target", files["ghz3"], "--starts", "0")[0] == 2
    assert run(capsys, "selftest", "--seed", "-1")[0] == 2


def test_domain_errors_exit_1(capsys, files):
    code, _, err = run(capsys, "graph", "to-op", files["unnormalized"])
    assert code == 1 and "Normalization" in err
    code, _, _ = run(capsys, "schemes", "run", "w", "--alpha", "0.5", "--beta", "0.5")
    assert code == 1


def test_graph_commands(capsys, files):
    code, data = run_json(capsys, "graph", "check-epm", files["bell_graph"])
    assert code == 0 and data == {"epm": True, "pm_count": 2}
    code, data = run_json(capsys, "graph", "pm", files["ghz4_graph"])
    assert code == 0 and data["pm_count"] == 2
    code, data = run_json(capsys, "graph", "to-op", files["bell_graph"])
    assert code == 0 and len(data["factors"]) == 2
    code, out, _ = run(capsys, "graph", "dot", files["bell_graph"])
    assert code == 0 and out.startswith("graph")
    code, out, _ = run(capsys, "graph", "dot", files["bell_graph"], "--directed")
    assert code == 0 and out.startswith("digraph")


def test_state_commands(capsys, files):
    code, data = run_json(capsys, "state", "classify", files["w3"])
    assert code == 0 and data["class"] == "GENUINE"
    code, data = run_json(capsys, "state", "fidelity", files["ghz3"], files["w3"])
    assert code == 0 and data["fidelity"] == pytest.approx(0, abs=1e-15)
    code, out, _ = run(capsys, "state", "classify", files["ghz3"])
    assert code == 0 and "Schmidt rank 2" in out


def test_optics_bell(capsys):
    code, data = run_json(capsys, "optics", "bell")
    assert code == 0
    assert data["total_probability"] == pytest.approx(1 / 8)
    assert len(data["branches"]) == 4


def test_search_exit_codes(capsys, files):
    code, data = run_json(capsys, "search", "--target", files["bell_target"], "--starts", "8")
    assert code == 0 and data["status"] == "SOLVED"
    code, data = run_json(capsys, "search", "--target", files["three_term"], "--starts", "4",
                          "--retries", "0")
    assert code == 1 and data["status"] == "FAILED"


def test_selftest(capsys):
    code, data = run_json(capsys, "selftest")
    assert code == 0 and data["passed"]
    assert len(data["items"]) >= 15
    assert set(data["criteria"]) == {str(k) for k in range(1, 13)}
    code, data = run_json(capsys, "selftest", "--ghz-weight", "0.8", "--criteria", "2")
    assert code == 1 and not data["passed"]


# -- output discipline ---------------------------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["schemes", "run", "type5"],
    ["optics", "bell"],
    ["selftest", "--criteria", "1", "3", "5"],
])
def test_json_output_is_deterministic(capsys, argv):
    first = run(capsys, *argv, "--json")
    second = run(capsys, *argv, "--json")
    assert first[1] == second[1]
    json.loads(first[1])


def test_flags_accepted_before_subcommand(capsys):
    code, out, _ = run(capsys, "--json", "schemes", "list")
    assert code == 0 and json.loads(out)["schemes"]


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "boson_sculpting.cli", "graph", "check-epm",
                           files["bell_graph"], "--json"], capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout) == {"epm": True, "pm_count": 2}
