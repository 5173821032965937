from __future__ import annotations

import csv
import json

import pytest

from sobolev_cascade.cli import main, sha256


def _load(path):
    return json.loads(path.read_text())


@pytest.fixture()
def set3_file(tmp_path, set3):
    d = tmp_path / "s3"
    d.mkdir()
    (d / "set.json").write_text(set3.to_json() + "\n")
    return d / "set.json"


@pytest.fixture(scope="module")
def set7_file(tmp_path_factory, set7):
    d = tmp_path_factory.mktemp("s7")
    (d / "set.json").write_text(set7.to_json() + "\n")
    return d / "set.json"


def test_construct_rectangle(tmp_path):
    out = tmp_path / "c2"
    assert main(["construct", "--N", "2", "--d", "2", "--method", "paper", "--out", str(out)]) == 0
    assert _load(out / "report.json")["all_ok"] is True
    man = _load(out / "manifest.json")
    for name, digest in man["outputs"].items():
        assert sha256(out / name) == digest
    assert man["seed"] == 0 and "numpy" in man["versions"]


def test_construct_is_reproducible(tmp_path):
    for tag in ("a", "b"):
        main(["construct", "--N", "3", "--method", "search", "--height", "30",
              "--out", str(tmp_path / tag)])
    assert (tmp_path / "a/set.json").read_bytes() == (tmp_path / "b/set.json").read_bytes()


def test_construct_search_n4_has_32_modes(tmp_path):
    out = tmp_path / "c4"
    assert main(["construct", "--N", "4", "--method", "search", "--height", "100000",
                 "--out", str(out)]) == 0
    assert len(_load(out / "set.json")["modes"]) == 32


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"N": 2, "method": "search", "height": 50}))
    out = tmp_path / "o"
    assert main(["construct", "--config", str(cfg), "--method", "paper", "--out", str(out)]) == 0
    c = _load(out / "manifest.json")["config"]
    assert c["method"] == "paper" and c["height"] == 50


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"N": 2, "colour": "red"}))
    assert main(["construct", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["exit_code"] == 2 and "colour" in err["message"]
    assert _load(tmp_path / "o" / "error.json")["error"] == "InputError"


def test_invalid_range(tmp_path):
    assert main(["construct", "--N", "40", "--out", str(tmp_path)]) == 2


def test_missing_set_is_io_error(tmp_path):
    assert main(["simulate", "resonant", "--set", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path)]) == 5


def test_stale_set_detected(tmp_path):
    out = tmp_path / "c"
    main(["construct", "--N", "2", "--method", "paper", "--out", str(out)])
    # still valid JSON, but no longer the file the manifest recorded
    (out / "set.json").write_text((out / "set.json").read_text() + " ")
    assert main(["verify", "--set", str(out / "set.json"), "--out", str(tmp_path / "v")]) == 2


def test_thread_env_recorded(tmp_path, monkeypatch):
    monkeypatch.setenv("SOBOLEV_CASCADE_THREADS", "3")
    out = tmp_path / "c"
    main(["construct", "--N", "2", "--out", str(out)])
    assert _load(out / "manifest.json")["threads"] == 3


def test_simulate_toy_periodic_orbit(tmp_path):
    out = tmp_path / "t"
    assert main(["simulate", "toy", "--N", "7", "--b0", "unit:3", "--horizon", "5",
                 "--out", str(out)]) == 0
    rows = list(csv.DictReader((out / "trajectory.csv").open()))
    amps = [float(r["abs_b3_sq"]) for r in rows]
    assert max(amps) - min(amps) < 1e-10


def test_simulate_budget_breach(tmp_path, capsys):
    rc = main(["simulate", "toy", "--N", "4", "--b0", "0.9,0.3j,0.3,0.1", "--horizon", "5",
               "--tol", "1e-6", "--j-budget", "1e-30", "--out", str(tmp_path)])
    assert rc == 4
    assert "J_drift" in json.loads(capsys.readouterr().err)["message"]


def test_simulate_cascade_and_report(tmp_path, set7_file):
    out = tmp_path / "cas"
    assert main(["simulate", "cascade", "--set", str(set7_file), "--delta", "1e-3",
                 "--out", str(out)]) == 0
    diag = _load(out / "diagnostics.json")
    assert len(diag["runs"][0]["tau"]) == 7 - 4
    assert diag["growth"][0]["discrepancy"] < 8
    rep = tmp_path / "rep"
    assert main(["report", str(out / "manifest.json"), "--out", str(rep)]) == 0
    summary = _load(rep / "summary.json")
    assert len(summary["stages"]) == 7 - 4


def test_simulate_resonant(tmp_path, set3_file):
    out = tmp_path / "res"
    assert main(["simulate", "resonant", "--set", str(set3_file), "--horizon", "0.2",
                 "--samples", "51", "--cache", str(tmp_path / "cache"), "--out", str(out)]) == 0
    assert _load(out / "diagnostics.json")["monomials"] == 86
    assert list((tmp_path / "cache").glob("*.npz"))


def test_simulate_approx_and_report(tmp_path, set3_file):
    out = tmp_path / "ap"
    assert main(["simulate", "approx", "--set", str(set3_file), "--rho", "5", "20",
                 "--horizon", "0.2", "--samples", "41", "--out", str(out)]) == 0
    rows = list(csv.DictReader((out / "approx_rho20.csv").open()))
    env = [float(r["envelope"]) for r in rows]
    assert all(a <= b for a, b in zip(env, env[1:]))
    rep = tmp_path / "rep"
    main(["report", str(out / "manifest.json"), "--out", str(rep)])
    approx = _load(rep / "summary.json")["approx"]
    assert approx[1]["rho"] > approx[0]["rho"] and approx[1]["max_xi"] < approx[0]["max_xi"]


def test_report_scaled_set_same_ratio(tmp_path, set7, set7_file):
    from sobolev_cascade.genset import scale
    d = tmp_path / "scaled"
    d.mkdir()
    (d / "set.json").write_text(scale(set7, 5).to_json())
    mans = []
    for tag, path in (("a", set7_file), ("b", d / "set.json")):
        # the full verification of an N = 7 set is over budget; the ratio is still recorded
        assert main(["verify", "--set", str(path), "--budget", "1",
                     "--out", str(tmp_path / tag)]) == 3
        mans.append(str(tmp_path / tag / "manifest.json"))
    main(["report", *mans, "--out", str(tmp_path / "rep")])
    ex = _load(tmp_path / "rep" / "summary.json")["explosion"]
    assert ex[0]["ratio"] == ex[1]["ratio"] and ex[0]["exceeds"]


def test_report_needs_input(tmp_path):
    assert main(["report", "--out", str(tmp_path)]) == 2
