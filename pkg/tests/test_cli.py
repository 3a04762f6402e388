import csv
import json

import pytest

from pmlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_norm_uc_example(capsys):
    cfg = {"kind": "uc", "norm": {"dim": 1, "p": 1, "weights": [1]},
           "sequence": {"window": 1, "terms": {"-1": [1], "0": [-2], "1": [3]}}}
    code, out, _ = run(capsys, "norm", "--json", json.dumps(cfg))
    assert code == 0
    res = json.loads(out)
    assert res["value"] == 6.0 and res["kind"] == "exact"


def test_norm_j_discrete_single_term(capsys):
    cfg = {"kind": "j_discrete", "theta": 0.5, "r": 1.0,
           "couple": {"n0": {"dim": 1, "p": 1, "weights": [2]},
                      "n1": {"dim": 1, "p": 1, "weights": [3]}},
           "sequence": {"window": 0, "terms": {"0": [1]}}}
    code, out, _ = run(capsys, "norm", "--json", json.dumps(cfg))
    assert code == 0 and json.loads(out)["value"] == 3.0


def test_norm_config_file(capsys, tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"kind": "norm", "norm": {"dim": 2, "p": "inf", "weights": [1, 1]},
                                "vector": [-2, 1]}))
    code, out, _ = run(capsys, "norm", "--config", str(path))
    assert code == 0 and json.loads(out)["value"] == 2.0


@pytest.mark.parametrize("argv, code", [
    (["norm", "--json", "{not json"], 2),
    (["norm", "--json", "[1, 2]"], 2),
    (["norm", "--json", '{"kind": "nope", "couple": {}}'], 3),
    (["norm", "--json", '{"kind": "norm", "norm": {"dim": 2, "p": 2, "weights": [1, 1]},'
                        ' "vector": [1, 2, 3]}'], 3),
    (["norm", "--json", '{"kind": "reference", "theta": 1.5, "vector": [1],'
                        ' "couple": {"n0": {"dim": 1, "p": 1, "weights": [1]},'
                        ' "n1": {"dim": 1, "p": 1, "weights": [1]}}}'], 3),
    (["verify", "--json", '{"suite": "bogus"}'], 3),
    (["norm"], 2),
])
def test_exit_codes(capsys, tmp_path, argv, code):
    assert run(capsys, *argv, *(["--out", str(tmp_path)] if argv[0] != "norm" else []))[0] == code


def test_embed_unequal_p_exits_3(capsys, tmp_path):
    cfg = {"couple": {"n0": {"dim": 1, "p": 1, "weights": [1]},
                      "n1": {"dim": 1, "p": 2, "weights": [4]}}}
    code, _, err = run(capsys, "embed", "--json", json.dumps(cfg), "--out", str(tmp_path))
    assert code == 3 and "equal-p" in err


def test_failing_assertion_exits_4(capsys, tmp_path, monkeypatch):
    from pmlab import experiments
    orig = experiments.run_one

    def broken(cfg, i, rng):
        rec = orig(cfg, i, rng)
        rec["pass"] = i != 0
        return rec

    monkeypatch.setattr(experiments, "run_one", broken)
    cfg = {"suite": "equivalence", "instances": 2,
           "solver": {"window": 1, "iters": 50, "restarts": 1}}
    code, out, _ = run(capsys, "verify", "--json", json.dumps(cfg), "--out", str(tmp_path))
    assert code == 4 and "passed 1/2" in out
    assert (tmp_path / "equivalence_report.json").exists()


def test_verify_is_deterministic(capsys, tmp_path):
    cfg = json.dumps({"suite": "equivalence", "instances": 4,
                      "solver": {"window": 2, "iters": 200, "restarts": 2}})
    outs = []
    for k, threads in enumerate(("1", "2")):
        d = tmp_path / str(k)
        code, out, _ = run(capsys, "verify", "--json", cfg, "--seed", "7", "--out", str(d),
                           "--threads", threads)
        assert code == 0 and "passed 4/4" in out
        outs.append((d / "equivalence_report.json").read_bytes())
    assert outs[0] == outs[1]
    report = json.loads(outs[0])
    assert report["config"]["seed"] == 7 and report["config"]["solver"]["window"] == 2


def test_limit_scan_csv(capsys, tmp_path):
    cfg = json.dumps({"solver": {"iters": 200, "restarts": 2}, "cells_per_unit": 4})
    code, _, _ = run(capsys, "limit-scan", "--json", cfg, "--out", str(tmp_path))
    assert code == 0
    with open(tmp_path / "limit-scan_report.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["r"]) for r in rows] == [1.0, 0.5, 0.25, 0.125]
    widths = [float(r["width"]) for r in rows]
    assert widths == sorted(widths, reverse=True)
    assert all(r["contains"] == "True" for r in rows)
    code, out, _ = run(capsys, "report", str(tmp_path / "limit-scan_report.json"))
    assert code == 0 and json.loads(out)["failed"] == []
    code, out, _ = run(capsys, "report", str(tmp_path / "limit-scan_report.json"), "--format", "csv")
    assert code == 0 and out.count("\n") == 5


def test_report_missing_file_exits_2(capsys, tmp_path):
    assert run(capsys, "report", str(tmp_path / "missing.json"))[0] == 2
