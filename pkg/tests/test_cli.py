import json

import numpy as np

import pytest

from conftest import FIXTURE_EDGES
from exactsbm.cli import main, text_histogram


@pytest.fixture
def files(tmp_path):
    g = tmp_path / "g.txt"
    g.write_text("n=6\n" + "".join(f"{u} {v}\n" for u, v in FIXTURE_EDGES))
    b = tmp_path / "b.txt"
    b.write_text("1\n1\n2\n2\n2\n3\n")
    b2 = tmp_path / "b2.txt"
    b2.write_text("1\n1\n1\n2\n2\n2\n")
    g2 = tmp_path / "g2.txt"
    g2.write_text("1 2\n1 3\n1 4\n1 5\n1 6\n2 4\n2 5\n4 5\n4 6\n")
    return tmp_path


def run(capsys, *argv):
    code = main(list(map(str, argv)))
    out, err = capsys.readouterr()
    return code, out, err


def test_fiber_enum(files, capsys):
    code, out, _ = run(capsys, "fiber-enum", "--graph", files / "g.txt", "--blocks", files / "b.txt")
    assert code == 0 and json.loads(out)["size"] == 135


def test_test_known_nonexistence_exit_code(files, capsys):
    code, _, err = run(capsys, "test-known", "--graph", files / "g.txt", "--blocks", files / "b.txt")
    assert code == 3 and "does not exist" in err


def test_test_known_json_and_hist(files, capsys):
    code, out, err = run(capsys, "--seed", 1, "test-known", "--graph", files / "g2.txt",
                         "--blocks", files / "b2.txt", "--num-graphs", 200, "--text-hist",
                         "--samples-dir", files / "samples")
    assert code == 0
    report = json.loads(out)
    assert 0 < report["p_value"] <= 1 and report["seed"] is not None
    assert "observed" in err
    assert (files / "samples" / "fiber_0.csv").exists()


def test_usage_errors(files, capsys):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["test-known", "--graph", "x"])
    assert info.value.code == 1
    code, _, _ = run(capsys, "polytope-check")
    assert code == 1


def test_data_error(files, capsys):
    bad = files / "bad.txt"
    bad.write_text("1 x\n")
    code, _, err = run(capsys, "test-known", "--graph", bad, "--blocks", files / "b.txt")
    assert code == 2 and "integers" in err
    code, _, _ = run(capsys, "fiber-enum", "--graph", files / "missing.txt", "--blocks", files / "b.txt")
    assert code == 2


def test_polytope_check(files, capsys):
    code, out, _ = run(capsys, "polytope-check", "--model", "add", "--stat", "4,8,2", "--sizes", "2,3,1")
    assert code == 0 and json.loads(out)["verdict"] == "interior"
    code, out, _ = run(capsys, "polytope-check", "--graph", files / "g.txt", "--blocks", files / "b.txt",
                       "--format", "csv")
    assert code == 0 and out.splitlines()[1].startswith("boundary")


def test_simulate_and_estimate(files, capsys):
    g = files / "sim.txt"
    z = files / "sim_z.txt"
    code, _, _ = run(capsys, "simulate", "--n", 12, "--seed", 3, "--out", g, "--blocks-out", z)
    assert code == 0 and g.read_text().startswith("n=12")
    assert len(z.read_text().split()) == 12
    code, out, _ = run(capsys, "estimate-blocks", "--graph", g, "--k", 2, "--estimator", "spectral",
                       "--seed", 0)
    assert code == 0 and json.loads(out)[0]["weight"] == 1.0


def test_sample_fiber_audit(files, capsys):
    audit = files / "audit.jsonl"
    code, out, _ = run(capsys, "sample-fiber", "--model", "beta", "--graph", files / "g.txt",
                       "--blocks", files / "b.txt", "--num-graphs", 4, "--audit", audit, "--seed", 1)
    assert code == 0 and len(json.loads(out)["graphs"]) == 4
    assert all("remove" in json.loads(x) for x in audit.read_text().splitlines())


def test_test_latent_with_given_assignments(files, capsys):
    dist = files / "pi.json"
    dist.write_text(json.dumps([{"z": [1, 1, 1, 2, 2, 2], "weight": 1.0}]))
    code, out, _ = run(capsys, "test-latent", "--graph", files / "g2.txt", "--k", 2,
                       "--assignments", dist, "--num-graphs", 100, "--seed", 0, "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "fiber,weight,observed,p_value,flags"


def test_experiment_csv(files, capsys):
    cfg = files / "cfg.json"
    cfg.write_text(json.dumps({"n": 10, "replicates": 1, "num_graphs": 30, "gibbs_iterations": 50,
                               "gibbs_burn_in": 10, "max_fibers": 1}))
    code, out, _ = run(capsys, "experiment", "--config", cfg, "--format", "csv")
    assert code == 0 and out.splitlines()[1].startswith("er,10,dense")


def test_text_histogram():
    text = text_histogram([1, 2, 2, 3], observed=2.5)
    assert len(text.splitlines()) == 20 and "<- observed" in text
    assert text_histogram([]) == "(no samples)\n"
    assert "2 samples impossible" in text_histogram([1.0, np.inf, np.inf, 2.0])
