import json
import subprocess
import sys

import jsonschema
import networkx as nx
import pytest
from click.testing import CliRunner

from steiner_qubo.cli import RunConfig, bench, main, random_instance, resolve_config, run_seeds
from steiner_qubo.graph_io import Graph, parse_stp, serialize_stp
from steiner_qubo.qubo import build_model, read_model
from test_graph_io import SOLUTION_SCHEMA

FAST = ["--reads", "20", "--sweeps", "200"]


def run(args, **kw):
    return CliRunner().invoke(main, args, **kw)


def write(tmp_path, g: Graph, name="g.stp"):
    p = tmp_path / name
    p.write_text(serialize_stp(g))
    return str(p)


def entry(*args, cwd=None):
    code = "from steiner_qubo.cli import entry; entry()"
    return subprocess.run(
        [sys.executable, "-c", code, *args], capture_output=True, text=True, cwd=cwd
    )


def test_random_instance_properties():
    for seed in range(10):
        g = random_instance(seed=seed, m=3)
        assert g.n == 11 and g.m == 3 and g.terminals[0] == 0 and g.root == 0
        assert all(100 <= w <= 1000 for *_, w in g.edges)
        h = nx.Graph()
        h.add_nodes_from(range(g.n))
        h.add_edges_from((u, v) for u, v, _ in g.edges)
        assert nx.is_connected(h)
    assert random_instance(seed=4) == random_instance(seed=4)


def test_gen_command(tmp_path):
    out = tmp_path / "r.stp"
    res = run(["gen", "--n", "8", "--m", "3", "--seed", "2", "--out", str(out)])
    assert res.exit_code == 0
    g = parse_stp(out.read_text())
    assert g.n == 8 and g.m == 3 and g.terminals[0] == 0
    assert run(["gen", "--m", "20"]).exit_code != 0


def test_build_protocol_counts(tmp_path):
    g = random_instance(n=11, m=3, seed=0)
    out = tmp_path / "model.txt"
    # the protocol's lambda = 10000 sits below the (S+1) * max weight floor for these weights
    with pytest.warns(UserWarning, match="lambda"):
        res = run(["build", "--instance", write(tmp_path, g), "--out", str(out)])
    assert res.exit_code == 0, res.output
    assert "path=396" in res.stderr and "variables=802" in res.stderr
    with open(out) as fh:
        model, header = read_model(fh)
    assert header["path_vars"] == "396" and header["steps"] == "11"
    assert model.num_vars == 802


def test_build_single_edge(tmp_path):
    g = Graph(2, ((0, 1, 5),), (0,), 0, "edge")
    out = tmp_path / "m.txt"
    res = run(["build", "--instance", write(tmp_path, g), "--steps", "1", "--out", str(out)])
    assert res.exit_code == 0
    with open(out) as fh:
        model, _ = read_model(fh)
    expected, idx, _ = build_model(g, steps=1)
    assert model == expected and model.num_vars == 4
    x = idx.x
    assert expected.restrict("H_A").quadratic == {(x(0, 0, 0), x(0, 1, 1)): 5, (x(0, 0, 1), x(0, 1, 0)): 5}


def test_missing_instance_exits_1(tmp_path):
    r = entry("build", "--instance", str(tmp_path / "nope.stp"))
    assert r.returncode == 1
    assert r.stderr and not r.stdout
    r = entry("solve")
    assert r.returncode == 1


def test_bad_instance_exits_1(tmp_path):
    p = tmp_path / "bad.stp"
    p.write_text("SECTION Graph\nNodes 2\nE 0 0 1\nEND\nEOF\n")
    r = entry("solve", "--instance", str(p))
    assert r.returncode == 1 and "self-loop" in r.stderr


def test_solve_trivial_single_terminal(tmp_path):
    g = Graph(3, ((0, 1, 5), (1, 2, 7)), (0,), 0, "one")
    res = run(["solve", "--instance", write(tmp_path, g), "--steps", "2", *FAST])
    assert res.exit_code == 0, res.output
    rec = json.loads(res.stdout)
    jsonschema.validate(rec, SOLUTION_SCHEMA)
    assert rec["feasible"] and rec["tree_weight"] == 0 and rec["tree_edges"] == []


@pytest.mark.parametrize("sampler", ["sa", "sqa"])
def test_solve_path_graph(tmp_path, sampler):
    g = Graph(3, ((0, 1, 5), (1, 2, 7)), (0, 2), 0, "path3")
    res = run(["solve", "--instance", write(tmp_path, g), "--steps", "2", "--sampler", sampler, *FAST])
    assert res.exit_code == 0, res.output
    rec = json.loads(res.stdout)
    jsonschema.validate(rec, SOLUTION_SCHEMA)
    assert rec["feasible"] and rec["tree_weight"] == 12
    assert rec["config"]["sampler"] == sampler and rec["sampler_info"]["algorithm"] == sampler


def test_solve_infeasible_exits_2(tmp_path):
    g = Graph(3, ((0, 1, 5), (1, 2, 7)), (0, 2), 0, "path3")
    # one hot sweep cannot settle into a feasible assignment
    args = ["--steps", "2", "--reads", "1", "--sweeps", "1", "--beta", "0.001", "0.002", "--seed", "1"]
    res = run(["solve", "--instance", write(tmp_path, g), *args])
    assert res.exit_code == 2
    rec = json.loads(res.stdout)
    jsonschema.validate(rec, SOLUTION_SCHEMA)
    assert rec["feasible"] is False and sum(rec["violations"].values()) > 0


def test_solve_dot(tmp_path):
    g = Graph(3, ((0, 1, 5), (1, 2, 7)), (0, 2), 0, "path3")
    res = run(["solve", "--instance", write(tmp_path, g), "--steps", "2", "--format", "dot", *FAST])
    assert res.exit_code == 0
    assert res.stdout.startswith('graph "path3"')


def test_solve_deterministic_output(tmp_path):
    g = random_instance(n=5, m=2, seed=3)
    args = ["solve", "--instance", write(tmp_path, g), "--reads", "30", "--sweeps", "200", "--seed", "9"]
    a, b = json.loads(run(args).stdout), json.loads(run(args).stdout)
    a["sampler_info"].pop("wall_time")
    b["sampler_info"].pop("wall_time")
    assert a == b


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("reads: 7\nsweeps: 50\nlambda: 500\nsampler: sa\ngamma: [5, 0.1]\n")
    rc = resolve_config(str(cfg), {"reads": 9, "seed": None})
    assert rc.reads == 9 and rc.sweeps == 50 and rc.lam == 500 and rc.sampler == "sa"
    assert rc.gamma == (5.0, 0.1)
    assert rc.trotter == RunConfig().trotter
    cfg.write_text("bogus: 1\n")
    with pytest.raises(Exception, match="bogus"):
        resolve_config(str(cfg), {})


def test_config_echoed_into_output(tmp_path):
    g = Graph(3, ((0, 1, 5), (1, 2, 7)), (0, 2), 0, "path3")
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"sweeps": 150, "seed": 4}))
    res = run(["solve", "--instance", write(tmp_path, g), "--config", str(cfg), "--steps", "2", "--reads", "5"])
    rec = json.loads(res.stdout)
    assert rec["config"]["sweeps"] == 150 and rec["config"]["reads"] == 5 and rec["seed"] == 4


def test_invalid_config_values(tmp_path):
    g = Graph(3, ((0, 1, 5), (1, 2, 7)), (0, 2), 0, "path3")
    p = write(tmp_path, g)
    assert entry("solve", "--instance", p, "--reads", "0").returncode == 1
    assert entry("solve", "--instance", p, "--lambda", "0").returncode == 1
    assert entry("solve", "--instance", p, "--beta", "5", "1").returncode == 1


def test_verify(tmp_path):
    g = Graph(4, ((0, 1, 2), (0, 2, 3), (0, 3, 4)), (1, 2, 3), 1, "star")
    res = run(["verify", "--instance", write(tmp_path, g)])
    assert res.exit_code == 0
    rep = json.loads(res.stdout)
    assert rep["dreyfus_wagner"]["weight"] == 9 and rep["brute_force"]["weight"] == 9 and rep["agree"]


def test_bench_schema_and_determinism(tmp_path):
    g = random_instance(n=5, m=2, seed=1)
    args = ["bench", "--instance", write(tmp_path, g), "--runs", "3", "--reads", "20", "--sweeps", "200"]
    a = json.loads(run(args).stdout)
    b = json.loads(run(args).stdout)
    assert 0 <= a["optimality_rate"] <= 1 and 0 <= a["feasibility_rate"] <= 1
    assert len(a["runs"]) == 3
    for rec in (a, b):
        for r in rec["runs"]:
            r.pop("wall_time")
    assert a == b
    assert run(["bench", "--instance", write(tmp_path, g), "--runs", "0"]).exit_code != 0
    with pytest.raises(ValueError):
        bench(g, RunConfig(), 0)


def test_run_seeds_distinct_and_stable():
    s = run_seeds(0, 10)
    assert len(set(s)) == 10 and s == run_seeds(0, 10) and s[:4] == run_seeds(0, 4)
