import json
import subprocess
import sys

import pytest

from thriftybp.bp import BranchingProgram
from thriftybp.cli import main
from thriftybp.dag import RootedDag, make_complete_binary_tree
from thriftybp.dageval import DagEvalInstance, decide, hard_input_from_values
from thriftybp.genprob import GenInstance


def call(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(path, obj):
    path.write_text(json.dumps(obj))
    return path


def test_pebble_t3_file(tmp_path, capsys):
    f = write(tmp_path / "t3.json", make_complete_binary_tree(3).to_json())
    code, out, _ = call(capsys, "pebble", "--dag", f, "--json")
    data = json.loads(out)
    assert code == 0 and data["p"] == 3
    assert data["witness"][0] == [] and 7 in data["witness"][-1]
    code, out, _ = call(capsys, "pebble", "--dag", f)
    assert out.startswith("p=3")


def test_make_dag_round_trip(tmp_path, capsys):
    out = tmp_path / "pyr.json"
    assert call(capsys, "make-dag", "--dag", "pyramid:3", "--out", out)[0] == 0
    assert RootedDag.from_json(json.loads(out.read_text())).n == 6


def test_reduce_then_decide_matches_evaluate(tmp_path, capsys):
    t2 = make_complete_binary_tree(2)
    inst = hard_input_from_values(t2, 2, [2, 1, 1])
    f = write(tmp_path / "i.json", inst.to_json())
    code, out, _ = call(capsys, "evaluate", "--in", f, "--json")
    assert code == 0 and json.loads(out)["answer"] == "YES" == decide(inst)
    gen, naming = tmp_path / "g.json", tmp_path / "names.json"
    assert call(capsys, "reduce", "--in", f, "--out", gen, "--naming", naming)[0] == 0
    assert GenInstance.from_json(json.loads(gen.read_text())).m == 22
    assert json.loads(naming.read_text())["elements"]["N(3,1)"] == 22
    code, out, _ = call(capsys, "gen-decide", "--in", gen, "--json")
    assert json.loads(out)["answer"] == "YES"


def test_pipeline(tmp_path, capsys):
    bp, big, back = tmp_path / "bp.json", tmp_path / "gen_bp.json", tmp_path / "back.json"
    assert call(capsys, "construct-thrifty", "--dag", "tree:2", "--k", 2, "--out", bp)[0] == 0
    BranchingProgram.from_json(json.loads(bp.read_text()))
    assert call(capsys, "check-thrifty", "--bp", bp, "--dag", "tree:2", "--k", 2, "--family", "all", "--lemma")[0] == 0

    code, out, _ = call(capsys, "verify-bound", "--bp", bp, "--dag", "tree:2", "--k", 2, "--json")
    data = json.loads(out)
    assert code == 0 and data["pass"] and data["groups"] >= 4 and data["|D|"] == 8

    assert call(capsys, "forward", "--bp", bp, "--dag", "tree:2", "--k", 2, "--out", big)[0] == 0
    assert call(capsys, "check-incremental", "--bp", big, "--dag", "tree:2", "--k", 2)[0] == 0
    code, out, _ = call(capsys, "transform", "--gen-bp", big, "--dag", "tree:2", "--k", 2, "--out", back, "--json")
    data = json.loads(out)
    assert code == 0 and data["size_out"] <= data["size_in"]
    assert call(capsys, "check-thrifty", "--bp", back, "--dag", "tree:2", "--k", 2)[0] == 0

    inst = tmp_path / "inst.json"
    assert call(capsys, "random-instance", "--dag", "tree:2", "--k", 2, "--seed", 4, "--out", inst)[0] == 0
    code, out, _ = call(capsys, "protocol", "--bp", bp, "--in", inst, "--json")
    assert code == 0 and json.loads(out)["ok"]
    code, out, _ = call(capsys, "run", "--bp", bp, "--in", inst, "--json")
    loaded = DagEvalInstance.from_json(json.loads(inst.read_text()))
    assert json.loads(out)["output"] == decide(loaded)


def test_violation_exit_code(tmp_path, capsys):
    prog = {"k": 2, "start": 0, "states": [
        {"id": 0, "var": ["f", 3, [1, 1]], "edges": {"1": 1, "2": 2}},
        {"id": 1, "output": "YES"}, {"id": 2, "output": "NO"}]}
    f = write(tmp_path / "bad.json", prog)
    code, out, _ = call(capsys, "check-thrifty", "--bp", f, "--dag", "tree:2", "--k", 2, "--json")
    data = json.loads(out)
    assert code == 1 and not data["ok"]
    assert data["violations"][0]["kind"] == "not thrifty"
    gen_prog = {"k": 3, "start": 0, "states": [
        {"id": 0, "var": [3, 1], "edges": {"1": 1, "2": 1, "3": 2}},
        {"id": 1, "output": "NO"}, {"id": 2, "output": "YES"}]}
    g = write(tmp_path / "g.json", gen_prog)
    assert call(capsys, "check-incremental", "--bp", g, "--exhaustive")[0] == 1


def test_usage_errors(tmp_path, capsys):
    assert call(capsys, "pebble", "--dag", tmp_path / "missing.json")[0] == 2
    junk = tmp_path / "junk.json"
    junk.write_text("{not json")
    assert call(capsys, "pebble", "--dag", junk)[0] == 2
    assert call(capsys, "pebble", "--dag", "tree:4", "--cap", 2)[0] == 2
    code, _, err = call(capsys, "check-thrifty", "--bp", junk, "--dag", "tree:2", "--k", 2)
    assert code == 2 and "error" in err
    with pytest.raises(SystemExit) as exc:
        main(["pebble"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["pebble", "--dag", "tree:2", "--cap", "0"])


def test_family_cap_is_usage_error(tmp_path, capsys):
    bp = tmp_path / "bp.json"
    call(capsys, "construct-thrifty", "--dag", "tree:3", "--k", 2, "--out", bp)
    code, _, err = call(capsys, "check-thrifty", "--bp", bp, "--dag", "tree:3", "--k", 2, "--family", "all", "--max-instances", 1000)
    assert code == 2 and "cap exceeded" in err


@pytest.mark.parametrize("argv", [
    ["pebble", "--dag", "pyramid:3", "--json"],
    ["construct-thrifty", "--dag", "tree:2", "--k", "2", "--out", "{tmp}/a.json", "--json"],
    ["random-instance", "--dag", "tree:3", "--k", "3", "--seed", "9", "--family", "all", "--out", "{tmp}/r.json"],
])
def test_byte_identical_outputs(tmp_path, capsys, argv):
    argv = [a.replace("{tmp}", str(tmp_path)) for a in argv]
    outputs = []
    for _ in range(2):
        main(argv)
        stdout = capsys.readouterr().out
        files = {p.name: p.read_bytes() for p in sorted(tmp_path.iterdir())}
        outputs.append((stdout, files))
    assert outputs[0] == outputs[1]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "thriftybp", "pebble", "--dag", "path:4", "--json"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["p"] == 1
