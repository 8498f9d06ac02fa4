import json

import numpy as np
import pytest

from subspec.cli import RunConfig, main

ABELIAN_CFG = {
    "group": {"group": "abelian", "dim": 1},
    "domain": {"shape": "box", "lo": [-1.0], "hi": [1.0]},
    "h": 0.125,
    "s": 0.4,
    "p": 2.0,
    "seed": 0,
    "problem": {"delta": 0.5, "q": 1.3, "f": "const:1", "g": "const:1",
                "lambda": "auto"},
}


def write_cfg(tmp_path, payload, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_missing_config_file_exits_2(tmp_path):
    assert main(["eigen", "--config", str(tmp_path / "nope.json")]) == 2


def test_malformed_json_exits_2(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["eigen", "--config", str(path)]) == 2


def test_missing_key_exits_2(tmp_path):
    cfg = {k: v for k, v in ABELIAN_CFG.items() if k != "s"}
    assert main(["eigen", "--config", write_cfg(tmp_path, cfg)]) == 2


def test_run_config_load(tmp_path):
    cfg = RunConfig.load(write_cfg(tmp_path, ABELIAN_CFG))
    assert cfg.group.Q == 1
    assert cfg.fp.s == 0.4
    grid, K = cfg.build()
    assert K.n == grid.n_nodes == 16


def test_eigen_command_outputs(tmp_path):
    out = tmp_path / "out"
    rc = main(["eigen", "--config", write_cfg(tmp_path, ABELIAN_CFG),
               "--out", str(out)])
    assert rc == 0
    payload = json.loads((out / "eigen_result.json").read_text())
    assert payload["schema_version"] == 1
    assert "normalization" in payload
    assert payload["lambda1"] > 0
    assert payload["residual"] < 1e-9
    phi = np.loadtxt(out / "phi1.csv", delimiter=",", skiprows=1)
    assert phi.shape == (16, 2)
    assert np.all(phi[:, 1] > 0)
    trace = np.loadtxt(out / "trace.csv", skiprows=1)
    assert trace.ndim == 1 and len(trace) > 1


def test_nehari_command_outputs(tmp_path):
    out = tmp_path / "out"
    rc = main(["nehari", "--config", write_cfg(tmp_path, ABELIAN_CFG),
               "--out", str(out)])
    assert rc == 0
    payload = json.loads((out / "nehari_result.json").read_text())
    assert payload["I_plus"] < 0 < payload["I_minus"]
    assert payload["lambda"] > 0
    for name in ("u_plus.csv", "u_minus.csv", "fiber_report.json"):
        assert (out / name).exists()
    up = np.loadtxt(out / "u_plus.csv", delimiter=",", skiprows=1)
    assert np.all(up[:, 1] >= 0)


def test_nehari_without_problem_exits_2(tmp_path):
    cfg = {k: v for k, v in ABELIAN_CFG.items() if k != "problem"}
    assert main(["nehari", "--config", write_cfg(tmp_path, cfg)]) == 2


def test_explicit_lambda_too_large_exits_4(tmp_path):
    cfg = dict(ABELIAN_CFG)
    cfg["problem"] = dict(cfg["problem"], **{"lambda": 1e12})
    rc = main(["nehari", "--config", write_cfg(tmp_path, cfg),
               "--out", str(tmp_path / "o")])
    assert rc == 4


def test_sweep_command(tmp_path):
    out = tmp_path / "out"
    cfg = dict(ABELIAN_CFG)
    rc = main(["sweep", "--config", write_cfg(tmp_path, cfg),
               "--out", str(out), "--lambdas", "10,1e12"])
    assert rc == 0
    rows = np.loadtxt(out / "sweep.csv", delimiter=",", skiprows=1)
    assert rows.shape[0] == 2
    assert rows[0, 1] == 1.0 and rows[1, 1] == 0.0


def test_sweep_needs_lambdas(tmp_path):
    assert main(["sweep", "--config", write_cfg(tmp_path, ABELIAN_CFG)]) == 2


def test_bad_weight_spec_exits_2(tmp_path):
    cfg = dict(ABELIAN_CFG)
    cfg["problem"] = dict(cfg["problem"], f="nope.csv")
    assert main(["nehari", "--config", write_cfg(tmp_path, cfg)]) == 2


def test_verify_command(tmp_path):
    out = tmp_path / "out"
    cfg = {k: v for k, v in ABELIAN_CFG.items() if k != "problem"}
    rc = main(["verify", "--config", write_cfg(tmp_path, cfg),
               "--out", str(out)])
    assert rc == 0
    payload = json.loads((out / "verify_report.json").read_text())
    names = [c["name"] for c in payload["checks"]]
    assert "positivity_simplicity" in names
    assert "dilation_scaling" in names
    assert all(c["status"] == "pass" for c in payload["checks"])
