import json

import pytest
from hypothesis import given, settings

from helpers import fig3, instances
from maximin.cli import main
from maximin.instance import parse_instance, parse_solution, serialize_instance, serialize_solution
from maximin.solvers import solve_mms
from maximin.verify import verify_feasible


@pytest.fixture
def fig3_file(tmp_path):
    path = tmp_path / "fig3.json"
    path.write_text(serialize_instance(fig3()))
    return str(path)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_solve_verify(tmp_path, capsys, fig3_file):
    good, bad = tmp_path / "good.json", tmp_path / "bad.json"
    assert run(capsys, "--exact", "solve", "-i", fig3_file, "--algorithm", "balanced-phragmms", "-o", good)[0] == 0
    assert run(capsys, "solve", "--exact", "-i", fig3_file, "--algorithm", "seq-phragmen", "-o", bad)[0] == 0
    code, out, _ = run(capsys, "--exact", "verify", "-i", fig3_file, "-s", good, "--pjr-t", "hat")
    assert code == 0 and json.loads(out)["passed"] and json.loads(out)["pjr_condition"]
    code, out, _ = run(capsys, "--exact", "verify", "-i", fig3_file, "-s", bad)
    report = json.loads(out)
    assert code == 2 and report["balanced"] is False and report["witness"]["kind"]


@pytest.mark.parametrize("graph,value", [("k4", "2.5"), ("k33", "3")])
def test_oracle_opt_on_cubic_graphs(tmp_path, capsys, graph, value):
    inst = tmp_path / "g.json"
    assert run(capsys, "generate", "cubic-gap", "--graph", graph, "--k", 2, "-o", inst)[0] == 0
    code, out, _ = run(capsys, "oracle", "opt", "-i", inst)
    assert code == 0 and json.loads(out)["value"] == value


def test_oracle_pjr_and_score(tmp_path, capsys, fig3_file):
    sol = tmp_path / "sol.json"
    run(capsys, "--exact", "solve", "-i", fig3_file, "--algorithm", "mms", "-o", sol)
    code, out, _ = run(capsys, "oracle", "pjr", "-i", fig3_file, "-s", sol)
    assert code == 0 and json.loads(out)["pjr"] is True
    inst = parse_instance(open(fig3_file).read())
    outsider = next(name for i, name in enumerate(inst.candidate_names)
                    if i not in parse_solution(inst, sol.read_text()).committee)
    code, out, _ = run(capsys, "oracle", "score", "-i", fig3_file, "-s", sol, "--candidate", outsider)
    assert code == 0 and json.loads(out)["score"] > 0


def test_errors_are_json(tmp_path, capsys, fig3_file):
    code, _, err = run(capsys, "verify", "-i", tmp_path / "missing.json", "-s", tmp_path / "x.json")
    assert code == 1 and json.loads(err)["error"] == "io"
    code, _, err = run(capsys, "solve", "-i", fig3_file, "--algorithm", "nonsense")
    assert code == 1 and json.loads(err)["error"] == "usage"
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    code, _, err = run(capsys, "solve", "-i", broken, "--algorithm", "mms")
    assert code == 1 and "error" in json.loads(err)
    code, _, err = run(capsys, "solve", "-i", fig3_file, "--algorithm", "lazy-mms", "--threshold", 1000)
    assert code == 1 and json.loads(err)["error"] == "no_solution"


def test_postprocess_and_trim(tmp_path, capsys, fig3_file):
    seq, post, trimmed = tmp_path / "seq.json", tmp_path / "post.json", tmp_path / "trim.json"
    run(capsys, "--exact", "solve", "-i", fig3_file, "--algorithm", "seq-phragmen", "-o", seq)
    assert run(capsys, "--exact", "postprocess", "ls-pjr", "--eps", "inf", "-i", fig3_file, "-s", seq, "-o", post)[0] == 0
    assert run(capsys, "--exact", "trim", "-i", fig3_file, "-s", post, "-o", trimmed)[0] == 0
    code, out, _ = run(capsys, "--exact", "verify", "-i", fig3_file, "-s", trimmed, "--pjr-t", "hat")
    assert json.loads(out)["feasible"] and json.loads(out)["pjr_condition"]


def test_simulate_writes_log_and_winner(tmp_path, capsys, fig3_file):
    provers = tmp_path / "provers.json"
    provers.write_text(json.dumps([{"strategy": "seq_phragmen", "submit_block": 1},
                                   {"strategy": "balanced_phragmms", "submit_block": 2}]))
    winner = tmp_path / "winner.json"
    code, out, _ = run(capsys, "--exact", "simulate", "-i", fig3_file, "--provers", provers,
                       "--window", 4, "--winner-out", winner)
    assert code == 0
    events = [json.loads(line) for line in out.splitlines()]
    assert events[-2]["action"] == "declared_winner"
    assert json.loads(winner.read_text())


def test_bench_is_deterministic(capsys):
    argv = ["bench", "--sizes", "4,5", "--trials", 2, "--seed", 7, "--no-timing"]
    first = run(capsys, *argv)[1]
    second = run(capsys, *argv)[1]
    assert first == second
    lines = first.splitlines()
    assert lines[0] == "family,size,trial,algorithm,objective,opt,ratio,seconds"
    assert len(lines) == 1 + 2 * 2 * 3
    for line in lines[1:]:
        ratio = line.split(",")[6]
        assert float(ratio) >= 1 - 1e-9


@settings(max_examples=40, deadline=None)
@given(instances(exact=False))
def test_serialized_solutions_stay_feasible(inst):
    sol = solve_mms(inst)
    again = parse_instance(serialize_instance(inst))
    assert verify_feasible(again, parse_solution(again, serialize_solution(inst, sol))).feasible
