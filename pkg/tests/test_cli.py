import json
import math

import pytest
from click.testing import CliRunner

from hslab.cli import cli, resolve
from hslab.errors import ConfigError, InvariantViolation

ERODE_FAST = ["--mesh", "8", "--t-end", "0.3", "--seed", "3"]


@pytest.fixture
def run(tmp_path):
    runner = CliRunner()

    def invoke(*args, out="out"):
        res = runner.invoke(cli, [*args, "--out", str(tmp_path / out)])
        return res, tmp_path / out

    return invoke


def load(path):
    return json.loads(path.read_text())


def test_trace_qd(run):
    res, out = run("trace-qd", "--step", "0.002")
    assert res.exit_code == 0, res.output
    graph = load(out / "graph.json")
    assert graph["edges"]
    assert (out / "graph.svg").exists() and list(out.glob("edge_*.csv"))


def test_lemniscate_circle(run):
    res, out = run("lemniscate")
    assert res.exit_code == 0, res.output
    assert load(out / "curve.json")["closed"] is True
    lines = (out / "curve.csv").read_text().splitlines()[1:]
    radii = [abs(complex(float(r[1]), float(r[2]))) for r in (ln.split(",") for ln in lines)]
    assert max(abs(r - 1) for r in radii) < 1e-3


def test_lemniscate_no_level_set(run):
    # the seed sits on the pole, where R is not finite
    res, _ = run("lemniscate", "--pos", "[]", "--neg", "[[0,0,1]]", "--seed", "[0,0]")
    assert res.exit_code == 3


def test_four_droplet(run):
    res, out = run("four-droplet", "--step", "0.002")
    assert res.exit_code == 0, res.output
    files = load(out / "four-droplet.json")["files"]
    assert any(f.startswith("inner") for f in files) and any(f.startswith("outer") for f in files)
    assert all((out / f).exists() for f in files)


def test_energy(run):
    res, out = run("energy", "--domain", "disc", "--radius", "1", "--divisor", "[[0,0,1]]")
    assert res.exit_code == 0, res.output
    assert load(out / "energy.json")["energy"] == pytest.approx(0.0, abs=1e-9)
    res, out = run("energy", "--domain", "disc", "--radius", "2", "--divisor", "[[0,0,1]]", out="o2")
    assert load(out / "energy.json")["energy"] == pytest.approx(math.log(2), rel=1e-8)


def test_variation(run):
    res, out = run("variation", "--inner", "[[0,0,1]]", "--outer", '[["inf",0,1]]')
    assert res.exit_code == 0, res.output
    doc = load(out / "variation.json")
    # concentric configuration: every first variation vanishes
    for key in ("area", "perimeter", "energy_gradient"):
        assert abs(doc[key]) < 1e-9


def test_surface(run):
    res, out = run("surface", "--example", "slit-plane")
    assert res.exit_code == 0, res.output
    assert load(out / "validation.json")["valid"] is True
    assert (out / "layout.svg").exists()


def test_erode_outputs_and_determinism(run):
    res, a = run("erode", *ERODE_FAST, "--snapshots", "[0, 0.1]", out="a")
    assert res.exit_code == 0, res.output
    res, b = run("erode", *ERODE_FAST, "--snapshots", "[0, 0.1]", out="b")
    assert res.exit_code == 0
    for name in ("snapshots.json", "final.json", "events.csv", "summary.json", "final.svg",
                 "effective-config.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    assert len(load(a / "snapshots.json")["snapshots"]) == 2
    cfg = load(a / "effective-config.json")
    assert cfg["command"] == "erode" and cfg["parameters"]["mesh"] == 8


def test_erode_torus(run):
    res, out = run("erode", "--surface", "torus", "--mesh", "6", "--t-end", "0.2",
                   "--sources", "[[0,0,2],[1,0,1]]")
    assert res.exit_code == 0, res.output
    assert load(out / "summary.json")["schema"] == "hslab.run-summary/1"


def test_compare(run):
    res, out = run("compare", "--meshes", "[4]", "--seeds", "[0]", "--time", "0.2", "--target", "none",
                   "--stabilization", "[[0.1, 0.2]]")
    assert res.exit_code == 0, res.output
    rep = load(out / "report.json")
    assert rep["rows"][0]["mesh"] == 4
    assert (out / "report.csv").read_text().startswith("mesh,seed,hausdorff")


def test_config_overrides_flags(run, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"mesh": 6, "t_end": 0.1}))
    res, out = run("erode", "--mesh", "8", "--config", str(cfg))
    assert res.exit_code == 0, res.output
    params = load(out / "effective-config.json")["parameters"]
    assert params["mesh"] == 6 and params["t_end"] == 0.1


@pytest.mark.parametrize("doc", [{"bogus": 1}, [1, 2], {"mesh": -3}])
def test_bad_config_exit_2(run, tmp_path, doc):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(doc))
    res, _ = run("erode", "--config", str(cfg))
    assert res.exit_code == 2


def test_bad_flags_exit_2(run):
    assert run("erode", "--surface", "klein")[0].exit_code == 2
    assert run("erode", "--mesh", "0")[0].exit_code == 2
    assert run("energy", "--domain", "annulus")[0].exit_code == 2


def test_invariant_violation_exit_4(run, monkeypatch):
    def broken(state, replay=None):
        raise InvariantViolation("forced", {"clock": 0})

    monkeypatch.setattr("hslab.erosion.dynamics.check_invariants", broken)
    res, out = run("erode", *ERODE_FAST, "--check-every", "1")
    assert res.exit_code == 4
    assert load(out / "replay.json") == {"clock": 0}


def test_resolve():
    assert resolve({"a": 1, "b": [1]}, {"a": "2.5", "b": None}, None) == {"a": 2.5, "b": [1]}
    assert resolve({"m": "x"}, {"m": "plane"}, None) == {"m": "plane"}


def test_resolve_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"a": 3}')
    assert resolve({"a": 1}, {"a": "2"}, cfg) == {"a": 3}
    cfg.write_text('{"z": 3}')
    with pytest.raises(ConfigError):
        resolve({"a": 1}, {}, cfg)
