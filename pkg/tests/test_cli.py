import csv
import json

import numpy as np

from loewner_lab.cli import main
from loewner_lab.harness import gen_commuting_entropy_instance, gen_sandwiched_pair
from loewner_lab.linalg import matrix_to_json
from loewner_lab.phimap import PhiMap, random_isometry


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def read(path):
    return json.loads(path.read_text())


def test_sandwich_command(tmp_path):
    out = tmp_path / "s.json"
    assert main(["sandwich", "--f", "exp", "--m", "0", "--M", "1", "--epsilon", "1e-3", "--out", str(out)]) == 0
    js = read(out)
    assert js["schema"] == "loewner-lab/1" and js["kind"] == "sandwich"
    assert main(["sandwich", "--tsallis-q", "0.5", "--m", "2", "--M", "10", "--out", str(out)]) == 0
    assert main(["sandwich", "--f", "x^p", "--param", "p=0.5", "--m", "1", "--M", "2", "--epsilon", "1e-3", "--out", str(out)]) == 0


def test_sandwich_errors(tmp_path, capsys):
    assert main(["sandwich", "--m", "0", "--M", "1"]) == 2
    assert main(["sandwich", "--f", "exp", "--m", "0", "--M", "1", "--epsilon", "1e-3", "--param", "junk"]) == 2
    assert main(["sandwich", "--tsallis-q", "0.5", "--m", "1", "--M", "10"]) == 2
    assert main(["sandwich", "--tsallis-q", "0.5", "--m", "1", "--M", "10", "--relax", "--out", str(tmp_path / "r.json")]) == 0
    # a kink at epsilon 1e-12 exhausts the degree budget
    assert main(["sandwich", "--f", "abs(x - 0.3)", "--m", "0", "--M", "1", "--epsilon", "1e-12", "--max-degree", "8"]) == 3
    assert main(["no-such-command"]) == 2


def test_kantorovich_command(capsys):
    assert main(["kantorovich", "--m", "1", "--M", "4", "--r", "2"]) == 0
    js = json.loads(capsys.readouterr().out)
    assert abs(js["value"] - 25 / 16) <= 1e-12
    assert main(["kantorovich", "--m", "1", "--M", "2", "--f", "exp"]) == 0
    assert json.loads(capsys.readouterr().out)["value"] >= 1 - 1e-12
    assert main(["kantorovich", "--m", "1", "--M", "2"]) == 2
    assert main(["kantorovich", "--m", "1", "--M", "2", "--r", "1"]) == 2


def test_bound_command(tmp_path):
    rng = np.random.default_rng(1)
    a = write(tmp_path / "a.json", matrix_to_json(np.diag([0.5, 1.0, 1.5])))
    phi = write(tmp_path / "phi.json", PhiMap(random_isometry(3, 2, rng), (0.2, 0.6)).to_json())
    out, gaps = tmp_path / "r.json", tmp_path / "g.csv"
    code = main(["bound", "--A", a, "--phi", phi, "--f", "exp", "--out", str(out), "--csv", str(gaps)])
    js = read(out)
    assert code == (0 if js["verdict_lower"]["relation"] in ("LEQ", "EQUAL") and js["verdict_upper"]["relation"] in ("LEQ", "EQUAL") else 1)
    rows = list(csv.reader(gaps.open()))
    assert rows[0] == ["trial", "chain", "index", "gap"] and len(rows) == 1 + 4


def test_bound_bad_inputs(tmp_path):
    assert main(["bound", "--A", str(tmp_path / "missing.json"), "--phi", "x", "--f", "exp"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["bound", "--A", str(bad), "--phi", str(bad), "--f", "exp"]) == 2


def test_entropy_commands(tmp_path):
    inst = gen_commuting_entropy_instance(3, 2, 2, 10, (0.2, 0.3, 0.1), 4)
    a = write(tmp_path / "a.json", matrix_to_json(inst.a))
    b = write(tmp_path / "b.json", matrix_to_json(inst.b))
    phi = write(tmp_path / "phi.json", inst.phi.to_json())
    out = tmp_path / "o.json"
    assert main(["entropy", "tsallis", "--A", a, "--B", b, "--q", "0.5", "--out", str(out)]) == 0
    assert main(["entropy", "relent", "--A", a, "--B", b, "--out", str(out)]) == 0
    for which in ("lemma4", "lemma6", "lemma7"):
        assert main(["entropy", which, "--A", a, "--B", b, "--q", "0.5", "--m", "2", "--M", "10", "--phi", phi, "--out", str(out)]) in (0, 1)
        assert read(out)["kind"] == which
    assert main(["entropy", "lemma5", "--A", a, "--B", b, "--m", "2", "--M", "10", "--out", str(out)]) in (0, 1)
    code = main(["entropy", "theorem2", "--A", a, "--B", b, "--q", "0.5", "--m", "2", "--M", "10", "--phi", phi,
                 "--out", str(out), "--csv", str(tmp_path / "g.csv")])
    assert code in (0, 1) and "assumption_failures" in read(out)["meta"]
    assert main(["entropy", "lemma4", "--A", a, "--B", b, "--m", "2", "--M", "10"]) == 2
    assert main(["entropy", "lemma6", "--A", a, "--B", b, "--q", "0.5", "--m", "2", "--M", "10"]) == 2


def test_entropy_assumption_exit(tmp_path):
    a0, b0 = gen_sandwiched_pair(3, 2, 10, 21)
    a = write(tmp_path / "a.json", matrix_to_json(a0))
    b = write(tmp_path / "b.json", matrix_to_json(b0))
    phi = write(tmp_path / "phi.json", PhiMap(np.eye(3), (0.1, 0.2, 0.3)).to_json())
    assert main(["entropy", "lemma7", "--A", a, "--B", b, "--q", "0.5", "--m", "2", "--M", "10", "--phi", phi]) == 2


def test_verify_and_replay(tmp_path, capsys):
    out, gaps = tmp_path / "rep.json", tmp_path / "g.csv"
    assert main(["verify", "--scenario", "classical-cdj", "--trials", "20", "--seed", "3", "--no-time",
                 "--out", str(out), "--csv", str(gaps)]) == 0
    js = read(out)
    assert js["violation_count"] == 0 and "wall_time" not in js
    assert len(list(csv.reader(gaps.open()))) > 20
    cfg = write(tmp_path / "cfg.json", {"scenario": "theorem2", "q_values": [0.5], "trials": 20})
    assert main(["verify", "--config", cfg, "--out", str(out)]) == 1
    rec = write(tmp_path / "rec.json", read(out)["counterexamples"][0])
    assert main(["replay", rec, "--out", str(out)]) == 1
    assert read(out)["reproduced"] is True


def test_verify_usage_errors(tmp_path):
    assert main(["verify", "--scenario", "lemma4", "--trials", "0"]) == 2
    assert main(["verify"]) == 2
    cfg = write(tmp_path / "cfg.json", {"scenario": "lemma4", "colour": "red"})
    assert main(["verify", "--config", cfg]) == 2
    cfg = write(tmp_path / "list.json", [1, 2])
    assert main(["verify", "--config", cfg]) == 2


def test_verify_deterministic_bytes(tmp_path):
    outs = []
    for k in range(2):
        p = tmp_path / f"r{k}.json"
        main(["verify", "--scenario", "lemma7", "--trials", "5", "--seed", "9", "--no-time", "--out", str(p)])
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
