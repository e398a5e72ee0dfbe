import json

import pytest

from halfspace_lpp import cli


def run(args):
    return cli.main(args)


def test_config_resolution(tmp_path, monkeypatch):
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(json.dumps({"q": 0.4, "samples": 7}))
    monkeypatch.setenv("HSLPP_C", "0.9")
    cfg = cli.load_config(str(cfgfile), ["samples=9", "tag=hello"])
    assert cfg["q"] == 0.4
    assert cfg["c"] == 0.9      # env beats file default
    assert cfg["samples"] == 9  # flag beats env and file
    assert cfg["tag"] == "hello"
    h1 = cli.config_hash(cfg)
    assert h1 == cli.config_hash(dict(cfg))


def test_zero_sample_config_clean_exit(tmp_path):
    rc = run([
        "simulate-lpp", "--out", str(tmp_path), "--set", "samples=0",
        "--set", "N=6", "--set", "M=3",
    ])
    assert rc == 0
    assert (tmp_path / "lpp_curves.csv").exists()
    assert (tmp_path / "simulate_lpp_manifest.json").exists()


def test_fixed_seed_byte_identical_archives(tmp_path):
    a1 = tmp_path / "a"
    a2 = tmp_path / "b"
    for out in (a1, a2):
        rc = run([
            "simulate-lpp", "--out", str(out), "--seed", "77",
            "--set", "N=8", "--set", "M=4", "--set", "samples=5",
            "--set", "q=0.5", "--set", "c=1.2",
        ])
        assert rc == 0
    b1 = (a1 / "lpp_curves.csv").read_bytes()
    b2 = (a2 / "lpp_curves.csv").read_bytes()
    assert b1 == b2


def test_simulate_schur_and_manifest(tmp_path):
    rc = run([
        "simulate-schur", "--out", str(tmp_path), "--seed", "3",
        "--set", "N=3", "--set", "M=2", "--set", "samples=20",
    ])
    assert rc == 0
    man = json.loads((tmp_path / "simulate_schur_manifest.json").read_text())
    assert man["seed"] == 3
    assert man["config_hash"]
    assert man["wall_clock_s"] >= 0.0


def test_partition_fn_command(tmp_path):
    rc = run([
        "partition-fn", "--out", str(tmp_path), "--set", "q=0.5",
        "--set", "c=0.8", "--set", "T1=1", "--set", "gap=1",
    ])
    assert rc == 0
    rec = json.loads((tmp_path / "partition_fn.json").read_text())
    assert rec["series"] == pytest.approx(13.0 / 6.0, abs=1e-8)
    assert rec["rel_dev"] < 1e-8


def test_kernel_eval_records(tmp_path):
    rc = run([
        "kernel-eval", "--out", str(tmp_path),
        "--set", "regime=hs_limit",
        "--set", "points=[[1.0, 0.0, 1.0, 0.0]]",
    ])
    assert rc == 0
    recs = json.loads((tmp_path / "kernel_values.json").read_text())
    assert {r["entry"] for r in recs} == {"k11", "k12", "k21", "k22"}
    for r in recs:
        assert set(r) >= {"regime", "params", "points", "tol", "value_re",
                          "value_im", "err"}


def test_gibbs_verify_command(tmp_path):
    rc = run([
        "gibbs-verify", "--out", str(tmp_path), "--seed", "11",
        "--set", "q=0.3", "--set", "c=0.6", "--set", "N=2", "--set", "M=1",
        "--set", "samples=40000",
    ])
    assert rc == 0


def test_pinned_origin_command(tmp_path):
    rc = run([
        "pinned-origin", "--out", str(tmp_path), "--seed", "5",
        "--set", "q=0.5", "--set", "c=0.3", "--set", "samples=20000",
        "--set", "T_sweep=[50,200]",
    ])
    assert rc == 0
    man = json.loads((tmp_path / "pinned_origin_manifest.json").read_text())
    assert "gap_tv" in man["checks"]


def test_kernel_converge_table(tmp_path):
    rc = run([
        "kernel-converge", "--out", str(tmp_path), "--set", "regime=bulk",
        "--set", "q=0.5", "--set", "c=0.8", "--set", "N_sweep=[30,60]",
        "--set", "points=[[1.0, 0.0, 1.5, 0.3]]", "--tol", "1e-6",
    ])
    assert rc == 0
    rows = json.loads((tmp_path / "kernel_converge.json").read_text())
    assert len(rows) == 2
    assert {"err_I11", "err_I12", "err_I22", "err_R12", "err_R22"} <= set(rows[0])


def test_verify_all_filtered(tmp_path):
    rc = run([
        "verify-all", "--out", str(tmp_path), "--set",
        'checks=["rsk_oracle", "phase_diagnostics"]',
    ])
    assert rc == 0
    man = json.loads((tmp_path / "verify_all_manifest.json").read_text())
    assert set(man["checks"]) == {"rsk_oracle", "phase_diagnostics"}
    assert all(v["passed"] for v in man["checks"].values())


def test_brownian_limit_small_run(tmp_path):
    rc = run([
        "brownian-limit", "--out", str(tmp_path), "--seed", "9",
        "--set", "q=0.5", "--set", "c=1.4", "--set", "N=64",
        "--set", "samples=400", "--set", "t_grid=[0.0, 1.0, 9.5]",
    ])
    man = json.loads((tmp_path / "brownian_limit_manifest.json").read_text())
    # t = 9.5 >= kappa_bar = 8 must be flagged out of window
    assert man["checks"]["skipped_out_of_window"] == [9.5]
    assert "var_ratio_t0" in man["checks"]
