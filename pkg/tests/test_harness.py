import json
import os
import subprocess
import sys

import pytest

from hausdorff_h1 import cli, harness
from hausdorff_h1.errors import ConfigError

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def base(**over):
    cfg = {
        "group": {"family": "heisenberg", "n": 1},
        "kernel": {"expr": "1", "support": [[1, 2]], "resolution": 8, "id": "box"},
        "family": {"kind": "dilation", "lambda": "u", "id": "dil"},
        "samples": 10_000,
        "grid_resolution": 24,
        "atoms": 2,
    }
    cfg.update(over)
    return cfg


@pytest.mark.parametrize("bad", [
    {"extra": 1},
    {"kernel": {"expr": "1", "bogus": 2}},
    {"family": {"kind": "twist"}},
    {"group": {"family": "lie"}},
    {"suite": ["doubling", "nope"]},
    {"seed": -1},
    {"seed": 1.5},
    {"samples": 10},
    {"version": 2},
    {"tolerances": {"lemma9": 0.1}},
    {"kappa_rho": -1},
    {"kernel": {"expr": "1", "support": "group"}},
    {"kernel": {"expr": "1", "support": [[2, 1]]}},
    {"kernel": {"expr": "1 +"}},
    {"kernel": {"expr": "1", "rule": "simpson"}},
    {"function": {"expr": "x1"}},
    {"function": {"expr": "x1", "support": [[0, 1]] * 3, "l1": -1}},
])
def test_config_rejected(bad):
    with pytest.raises(ConfigError):
        harness.ExperimentConfig.from_dict(base(**bad))


def test_config_missing_section():
    cfg = base()
    del cfg["family"]
    with pytest.raises(ConfigError):
        harness.ExperimentConfig.from_dict(cfg)


def test_config_defaults_and_round_trip():
    cfg = harness.ExperimentConfig.from_dict(base())
    assert cfg.suite == harness.SUITES
    assert cfg.tolerances == harness.TOLERANCES
    assert cfg.function["l1"] == pytest.approx((16 / 15) ** 3)
    again = harness.ExperimentConfig.from_dict(cfg.to_dict())
    assert again.to_dict() == cfg.to_dict()


def test_load_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        harness.ExperimentConfig.load(str(p))
    with pytest.raises(ConfigError):
        harness.ExperimentConfig.load(str(tmp_path / "missing.json"))


def test_judge():
    assert harness.judge(1.0, 1.0, "le", 0.0) == "pass"
    assert harness.judge(1.02, 1.0, "le", 0.01) == "fail"
    assert harness.judge(1.0, 2.0, "eq_rel", 0.1) == "fail"
    assert harness.judge(2.0, 2.0 + 1e-13, "eq_abs", 1e-12) == "pass"
    assert harness.judge(1.1, 1.0, "z", 3.0, 0.05) == "pass"
    assert harness.judge(1.2, 1.0, "z", 3.0, 0.05) == "fail"
    assert harness.judge(1.0, 1.0, "z", 3.0, None) == "fail"
    assert harness.judge(None, None, "n/a", 0.0) == "skip"
    assert harness.judge(float("nan"), 1.0, "le", 0.0) == "fail"
    assert harness.judge(3.0, 2.0, "ge", 0.0) == "pass"
    with pytest.raises(ValueError):
        harness.judge(1.0, 1.0, "approx", 0.0)


def test_doubling_suite_on_plane():
    rep = harness.run(base(group={"family": "euclidean", "n": 2},
                           family={"kind": "matrix", "matrix": [["u", "0"], ["0", "1"]]}, suite=["doubling"]))
    assert rep.ok and rep.records
    ratios = [r for r in rep.records if r.name.startswith("doubling") and r.relation == "le"]
    assert ratios and all(r.lhs <= 4.0 for r in ratios if r.rhs == 4.0)


def test_star_suite_on_heisenberg():
    rep = harness.run(base(suite=["star"]))
    assert rep.ok
    viol = [r for r in rep.records if "violations" in r.name]
    assert viol and all(r.lhs == 0 for r in viol)


def test_empty_suite_echoes_config():
    rep = harness.run(base(suite=[]))
    assert rep.records == [] and rep.bounds is None
    assert rep.to_dict()["config"]["suite"] == []


def test_full_run_passes_and_is_reproducible():
    a = harness.emit(harness.run(base()))
    b = harness.emit(harness.run(base()))
    assert a == b
    data = json.loads(a)
    assert data["summary"]["fail"] == 0
    assert "runtime_ms" not in a
    assert data["environment"]["seed"] == 0


def test_records_can_be_rejudged_from_json():
    data = json.loads(harness.emit(harness.run(base(suite=["lemma1", "theorem1", "modulus"]))))
    for r in data["records"]:
        assert harness.judge(r["lhs"], r["rhs"], r["relation"], r["tolerance"], r["stderr"]) == r["verdict"]


def test_report_round_trip(tmp_path):
    rep = harness.run(base(suite=["theorem1"]))
    path = tmp_path / "r.json"
    harness.emit(rep, "json", str(path))
    assert harness.load_report(str(path)) == harness.rounded(rep.to_dict())
    text = harness.emit(rep, "csv")
    assert text.splitlines()[0] == ",".join(harness.CSV_REPORT_COLUMNS)
    assert len(text.splitlines()) == len(rep.records) + 1
    assert "runtime_ms" in harness.emit(rep, "csv", include_timing=True).splitlines()[0]
    with pytest.raises(ValueError):
        harness.emit(rep, "xml")


def test_suites_use_independent_streams():
    alone = harness.run(base(suite=["modulus"]))
    mixed = harness.run(base(suite=["doubling", "modulus"]))
    pick = lambda rep: [r.to_dict() for r in rep.records if r.name.startswith("modulus")]
    assert pick(alone) == pick(mixed)
    assert harness.suite_seed(0, "a") != harness.suite_seed(0, "b")
    assert harness.suite_seed(1, "a") != harness.suite_seed(0, "a")


def test_failures_are_recorded_not_raised():
    rep = harness.run(base(suite=["modulus", "theorem1"], tolerances={"modulus_z": 1e-9}))
    assert not rep.ok
    assert all(r.name.startswith("modulus") for r in rep.failed)
    assert any(r.name.startswith("theorem1") and r.verdict == "pass" for r in rep.records)


def test_halved_constant_is_caught():
    rep = harness.run(base(suite=["doubling"]), c_mu_scale=0.5)
    assert not rep.ok


def test_bound_report_and_apply():
    b = harness.bound_report(base())
    assert b.theorem1_bound == pytest.approx(14 / 3)
    vals = harness.apply_operator(base(), [[0.0, 0.0, 0.0], [5.0, 5.0, 5.0]])
    assert vals[1] == 0.0 and vals[0] > 0
    with pytest.raises(ConfigError):
        harness.apply_operator(base(), [[0.0, 0.0]])


def _sweep_configs():
    out = []
    for group, fam in ((("euclidean", 2), {"kind": "matrix", "matrix": [["u", "0"], ["0", "u"]]}),
                       (("heisenberg", 1), {"kind": "dilation", "lambda": "u"})):
        for i, expr in enumerate(("1", "u", "exp(-u)")):
            out.append(base(group={"family": group[0], "n": group[1]}, family=fam,
                            kernel={"expr": expr, "support": [[1, 2]], "resolution": 8, "id": f"k{i}"},
                            grid_resolution=20))
    return out


def test_sweep(tmp_path):
    cfgs = _sweep_configs()
    rows, text = harness.sweep(cfgs, str(tmp_path / "s.csv"))
    assert len(rows) == 6 and len(text.splitlines()) == 7
    assert text.splitlines()[0] == ",".join(harness.SWEEP_COLUMNS)
    assert (tmp_path / "s.csv").read_text() == text
    for row, cfg in zip(rows, cfgs):
        C = harness.ExperimentConfig.from_dict(cfg).group.doubling_constant
        assert row["theorem1_bound"] == pytest.approx(C * row["norm_L1_ks"], rel=1e-12)
        assert row["verdict"] == "pass"
    dup, _ = harness.sweep([cfgs[0], cfgs[0]], threads=2)
    assert dup[0] == dup[1] == rows[0]
    threaded, text2 = harness.sweep(cfgs, threads=3)
    assert text2 == text
    with pytest.raises(ConfigError):
        harness.sweep([])
    with pytest.raises(ConfigError, match="#1"):
        harness.sweep([cfgs[0], {"bogus": 1}])


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("HAUSDORFF_THREADS", "2")
    assert harness.thread_cap() == 2
    monkeypatch.setenv("HAUSDORFF_THREADS", "zero")
    with pytest.raises(ConfigError):
        harness.thread_cap()


def test_shipped_configs_parse():
    cfgs = harness.load_config_dir(CONFIG_DIR)
    assert len(cfgs) == 8
    assert {c.group.family for c in cfgs} == {"euclidean", "torus", "su2", "heisenberg", "upper_triangular"}


# ---------------------------------------------------------------- CLI


def write(tmp_path, cfg, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_cli_verify(tmp_path, capsys):
    path = write(tmp_path, base(suite=["theorem1", "lemma4"]))
    out = tmp_path / "r.json"
    assert cli.main(["verify", "--config", path, "--out", str(out)]) == 0
    assert json.loads(out.read_text())["summary"]["fail"] == 0
    assert cli.main(["verify", "--config", path, "--seed", "3", "--timing"]) == 0
    assert "runtime_ms" in capsys.readouterr().out


def test_cli_exit_codes(tmp_path):
    assert cli.main(["verify", "--config", write(tmp_path, base(extra=1))]) == 2
    assert cli.main(["verify", "--config", str(tmp_path / "none.json")]) == 2
    failing = write(tmp_path, base(suite=["modulus"], tolerances={"modulus_z": 1e-9}), "f.json")
    assert cli.main(["verify", "--config", failing]) == 1
    ok = write(tmp_path, base(suite=["theorem1"]), "ok.json")
    assert cli.main(["verify", "--config", ok, "--out", str(tmp_path / "no" / "dir.json")]) == 2


def test_cli_bound(tmp_path, capsys):
    assert cli.main(["bound", "--config", write(tmp_path, base())]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["theorem1_bound"] == pytest.approx(14 / 3)


def test_cli_apply(tmp_path):
    cfg = write(tmp_path, base())
    pts = tmp_path / "p.csv"
    pts.write_text("x1,x2,x3\n0,0,0\n0.5,0,0.1\n")
    out = tmp_path / "o.csv"
    assert cli.main(["apply", "--config", cfg, "--points", str(pts), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x1,x2,x3,value" and len(lines) == 3
    pts.write_text("0,0\n")
    assert cli.main(["apply", "--config", cfg, "--points", str(pts), "--out", str(out)]) == 2
    pts.write_text("0,0,0\n1,a,0\n")
    assert cli.main(["apply", "--config", cfg, "--points", str(pts), "--out", str(out)]) == 2


def test_cli_sweep(tmp_path, capsys):
    for i, cfg in enumerate(_sweep_configs()[:3]):
        write(tmp_path, cfg, f"c{i}.json")
    assert cli.main(["sweep", "--dir", str(tmp_path)]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 4
    empty = tmp_path / "empty"
    empty.mkdir()
    assert cli.main(["sweep", "--dir", str(empty)]) == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "hausdorff_h1", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip()
