import json

import pytest

from holderlab.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, config_hash, main, rng_stream, run, RunConfig


def test_exponents_command(tmp_path):
    status, payload = run({"command": "exponents", "gamma": 0.75, "out": str(tmp_path)})
    assert status == EXIT_OK
    assert payload["result"]["exponents"]["beta"] == pytest.approx(0.5617, abs=1e-4)
    assert (tmp_path / payload["artifacts"][0]).exists()


def test_config_errors(tmp_path):
    status, payload = run({"out": str(tmp_path)})
    assert status == EXIT_CONFIG
    assert payload["details"][0]["field"] == "command"
    status, payload = run({"command": "exponents", "gamma": 2.0, "out": str(tmp_path)})
    assert status == EXIT_CONFIG
    status, payload = run({"command": "exponents", "bogus": 1, "out": str(tmp_path)})
    assert status == EXIT_CONFIG


def test_artifacts_are_byte_identical(tmp_path):
    cfg = {"command": "certify-example", "m": 10, "n": 1, "epsilon": 0.3, "gamma": 0.6, "rng_seed": 3}
    a, b = tmp_path / "a", tmp_path / "b"
    _, pa = run({**cfg, "out": str(a)})
    _, pb = run({**cfg, "out": str(b)})
    assert pa["artifacts"] == pb["artifacts"]
    for name in pa["artifacts"]:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_hash_ignores_out_only():
    c1 = RunConfig(command="exponents", out="x")
    c2 = RunConfig(command="exponents", out="y")
    c3 = RunConfig(command="exponents", gamma=0.8)
    assert config_hash(c1) == config_hash(c2) != config_hash(c3)


def test_rng_streams_independent():
    a = rng_stream(5, "probe").random(4)
    b = rng_stream(5, "holder").random(4)
    assert (a != b).all()
    assert (rng_stream(5, "probe").random(4) == a).all()


def test_main_flags_and_config_file(tmp_path, capsys):
    cfgfile = tmp_path / "c.json"
    cfgfile.write_text(json.dumps({"command": "count", "mesh_h": 0.0625, "sigma": 50.0}))
    assert main(["--config", str(cfgfile), "--mesh-h", "0.03125", "--out", str(tmp_path)]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    art = json.loads((tmp_path / summary["artifacts"][0]).read_text())
    assert art["config"]["mesh_h"] == 0.03125
    assert art["result"]["count"] == 8


def test_main_bad_config_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["--config", str(bad)]) == EXIT_CONFIG


@pytest.mark.parametrize("command,extra", [
    ("build-domain", {"domain": {"fractal": {"gamma": 0.6, "m": 10, "n_max": 1}}}),
    ("norms", {"potential": {"kind": "constant", "value": -1.0}, "p": 2.0}),
    ("cover", {"delta0": 0.125}),
    ("bracketing", {"potential": {"kind": "tent"}, "lambda": 200.0, "m_level": [2], "mesh_h": 0.0625}),
])
def test_commands_run(tmp_path, command, extra):
    status, payload = run({"command": command, "out": str(tmp_path), **extra})
    assert status == EXIT_OK, payload
    assert len(payload["artifacts"]) >= 1
