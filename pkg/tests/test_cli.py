"""End-to-end runs of the command line entry point."""

from __future__ import annotations

import hashlib
import json

import pytest

from horolab import cli
from horolab.density import MaximalInequalityResult


def write_toml(tmp_path, text):
    p = tmp_path / "cfg.toml"
    p.write_text(text, encoding="utf-8")
    return str(p)


def run(args):
    return cli.main([str(a) for a in args])


def load_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_orbit_csv_and_manifest_digests(tmp_path):
    cfg = write_toml(tmp_path, "n_max = 25\nrate = 0.2\ntheta = 0.4\n")
    out = tmp_path / "run"
    assert run(["orbit", "--config", cfg, "--out", out]) == 0
    lines = (out / "orbit.csv").read_text().strip().split("\n")
    assert lines[0] == "n,t_n,x,y,theta,word_length"
    assert len(lines) == 26
    cols = lines[1].split(",")
    assert int(cols[0]) == 1
    assert all(float(c) is not None for c in cols[1:5])
    manifest = load_json(out / "manifest.json")
    assert manifest["subcommand"] == "orbit"
    assert manifest["config"]["n_max"] == 25
    digest = hashlib.sha256((out / "orbit.csv").read_bytes()).hexdigest()
    assert manifest["outputs"]["orbit.csv"] == digest


def test_discrepancy_reruns_are_byte_identical(tmp_path):
    cfg = write_toml(tmp_path, "n_max = 30\nhaar_samples = 2000\n")
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run(["discrepancy", "--config", cfg, "--seed", 5, "--out", out1]) == 0
    assert run(["discrepancy", "--config", cfg, "--seed", 5, "--out", out2]) == 0
    for name in ("discrepancy.csv", "extraction.json", "manifest.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    manifest = load_json(out1 / "manifest.json")
    assert "dictionary_sha256" in manifest
    report = load_json(out1 / "extraction.json")
    assert 0.0 <= report["upper_density"] <= 1.0
    assert report["good_lengths"]["horizon"] == 30
    for lo, hi in report["good_lengths"]["runs"]:
        assert 1 <= lo <= hi <= 30


def test_discrepancy_fixed_theta_recorded(tmp_path):
    cfg = write_toml(tmp_path, "n_max = 10\nhaar_samples = 2000\ntheta = 0.3\n")
    out = tmp_path / "run"
    assert run(["discrepancy", "--config", cfg, "--out", out]) == 0
    assert load_json(out / "extraction.json")["theta"] == 0.3


def test_translated_report(tmp_path):
    cfg = write_toml(tmp_path, "n_max = 15\nm_theta = 20\nhaar_samples = 2000\n")
    out = tmp_path / "run"
    assert run(["translated", "--config", cfg, "--out", out]) == 0
    report = load_json(out / "translated.json")
    assert set(report) >= {"final_discrepancy", "first_discrepancy", "decreased"}
    header = (out / "translated.csv").read_text().split("\n")[0]
    assert header.startswith("N,D_N,dev_f01")


def test_maximal_doubling_passes(tmp_path):
    cfg = write_toml(tmp_path, 'n_samples = 100\nn_avg = 64\n')
    out = tmp_path / "run"
    assert run(["maximal", "--config", cfg, "--out", out]) == 0
    report = load_json(out / "maximal.json")
    assert report["ok"] is True
    assert report["nu_mass"] <= report["bound"] + report["sampling_slack"]


def test_maximal_horocycle_passes(tmp_path):
    cfg = write_toml(
        tmp_path,
        'source = "horocycle"\nn_samples = 8\nn_avg = 24\nhaar_samples = 2000\n',
    )
    out = tmp_path / "run"
    assert run(["maximal", "--config", cfg, "--out", out]) == 0
    assert load_json(out / "maximal.json")["source"] == "horocycle"


def test_maximal_bad_source_exits_2(tmp_path):
    cfg = write_toml(tmp_path, 'source = "triple"\n')
    assert run(["maximal", "--config", cfg, "--out", tmp_path / "r"]) == 2


def test_verifier_failure_writes_witness(tmp_path, monkeypatch):
    failed = MaximalInequalityResult(0, 0.9, 0.1, 0.01, False)
    monkeypatch.setattr(cli, "maximal_inequality_check", lambda *a, **k: failed)
    cfg = write_toml(tmp_path, "n_samples = 20\nn_avg = 16\n")
    out = tmp_path / "run"
    assert run(["maximal", "--config", cfg, "--out", out]) == 4
    witness = load_json(out / "witness.json")
    assert witness["nu_mass"] == 0.9
    assert witness["ok"] is False


def test_shift_maximal_fuzz_all_ok(tmp_path):
    cfg = write_toml(tmp_path, "count = 60\n")
    out = tmp_path / "run"
    assert run(["shift-maximal", "--config", cfg, "--out", out]) == 0
    report = load_json(out / "shift_maximal.json")
    assert report["all_ok"] is True
    assert report["worst_lhs_over_rhs"] <= 1.0


def test_merge_blocks_meet_guarantee(tmp_path):
    cfg = write_toml(tmp_path, "horizon = 40000\nj_count = 4\n")
    out = tmp_path / "run"
    assert run(["merge", "--config", cfg, "--out", out]) == 0
    report = load_json(out / "merge.json")
    assert report["complete"] is True
    lines = (out / "merge.csv").read_text().strip().split("\n")
    assert lines[0] == "j,M_j,block_density"
    assert len(lines) == 1 + report["blocks"]
    last = lines[-1].split(",")
    j = int(last[0])
    assert float(last[2]) >= 1.0 - 2.0**-j - 3.0 / j


def test_conjugate_example_flag_overrides(tmp_path):
    out = tmp_path / "run"
    assert run(["conjugate", "--mode", "example", "--alpha", "0.5", "--out", out]) == 0
    report = load_json(out / "conjugate.json")
    assert report["mode"] == "example"
    assert report["final_error"] < 1e-6
    last = (out / "conjugate.csv").read_text().strip().split("\n")[-1].split(",")
    assert abs(float(last[1]) - 1.0) < 1e-6
    assert abs(float(last[2]) - 0.5) < 1e-6
    assert abs(float(last[3])) < 1e-6
    assert abs(float(last[4]) - 1.0) < 1e-6


def test_conjugate_jm_short_run(tmp_path):
    cfg = write_toml(tmp_path, 'mode = "jm"\nn_count = 6\n')
    out = tmp_path / "run"
    assert run(["conjugate", "--config", cfg, "--out", out]) == 0
    report = load_json(out / "conjugate.json")
    assert report["degree"] == 2
    assert report["converged_at"] is None
    assert report["limit"] is None


def test_conjugate_appendix(tmp_path):
    cfg = write_toml(tmp_path, 'mode = "appendix"\nn_count = 8\n')
    out = tmp_path / "run"
    assert run(["conjugate", "--config", cfg, "--out", out]) == 0
    report = load_json(out / "conjugate.json")
    assert report["scaling_mode"] == "ad_norm"
    assert report["unipotent_ok"] is True


def test_correlations_smoke(tmp_path):
    cfg = write_toml(tmp_path, "base_index = 4\ngaps = [3]\nm_theta = 16\n")
    out = tmp_path / "run"
    assert run(["correlations", "--config", cfg, "--out", out]) == 0
    lines = (out / "correlations.csv").read_text().strip().split("\n")
    assert lines[0] == "n,m,estimate,std_error,ratio,discarded"
    assert len(lines) == 3
    assert "slope" in load_json(out / "fit.json")


def test_lln_smoke(tmp_path):
    cfg = write_toml(tmp_path, "k_max = 3\nm_theta = 9\n")
    out = tmp_path / "run"
    assert run(["lln", "--config", cfg, "--out", out]) == 0
    report = load_json(out / "lln.json")
    assert report["n_grid"] == [1, 16, 81]
    assert len(report["median_abs"]) == 3


def test_jm_trivial_triple(tmp_path):
    out = tmp_path / "run"
    assert run(["jm", "--out", out]) == 0
    report = load_json(out / "jm.json")
    assert report["triple"]["X"] == [["0", "1"], ["0", "0"]]
    assert report["triple"]["H"] == [["1", "0"], ["0", "-1"]]
    assert report["triple"]["Y"] == [["0", "0"], ["1", "0"]]
    assert report["verified"] is True
    assert report["d_h_so2"] == 2


def test_jm_sl3_regular(tmp_path):
    cfg = write_toml(tmp_path, "matrix = [[0, 1, 0], [0, 0, 1], [0, 0, 0]]\n")
    out = tmp_path / "run"
    assert run(["jm", "--config", cfg, "--out", out]) == 0
    report = load_json(out / "jm.json")
    assert report["dimension_total"] == 8
    assert "d_h_so2" not in report


def test_ball_overlap_circle_exact(tmp_path):
    cfg = write_toml(tmp_path, 'group = "circle"\nradius = 0.1\ndisplacement = 0.02\n')
    out = tmp_path / "run"
    assert run(["ball-overlap", "--config", cfg, "--out", out]) == 0
    report = load_json(out / "overlap.json")
    assert report["ratio"] == 0.02 / 0.1
    assert report["std_error"] == 0.0


def test_unknown_config_key_exits_2(tmp_path):
    cfg = write_toml(tmp_path, "n_max = 10\nbanana = 3\n")
    assert run(["orbit", "--config", cfg, "--out", tmp_path / "r"]) == 2


def test_malformed_toml_exits_2(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("n_max = [unclosed\n", encoding="utf-8")
    assert run(["orbit", "--config", str(cfg), "--out", tmp_path / "r"]) == 2


def test_precision_exhaustion_exits_3(tmp_path):
    cfg = write_toml(tmp_path, 'times_kind = "explicit"\nvalues = [1e30]\nn_max = 1\n')
    code = run(
        ["orbit", "--config", cfg, "--precision-bits", 64, "--out", tmp_path / "r"]
    )
    assert code == 3


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as info:
        cli.main(["frobnicate"])
    assert info.value.code == 2
