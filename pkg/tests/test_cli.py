import json
import subprocess
import sys
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parents[1]
FIXTURES = REPO / "tests" / "fixtures"


def run_cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "prewet.cli", *args],
                          capture_output=True, text=True, cwd=cwd or REPO)


def write_cfg(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


CANONICAL = {
    "seed": 2024,
    "step": {"name": "lazy_srw"},
    "potential": {"kind": "linear"},
    "bridge": {"lambda": 0.3, "N": 6, "a": 0, "b": 1, "K": 6,
               "tail_tolerance": 1e-06, "delta": 0.9,
               "covariance_pairs": [[2, 4]]},
}


class TestConfigErrors:
    def test_unknown_top_key(self, tmp_path):
        cfg = write_cfg(tmp_path, {"bogus": 1})
        res = run_cli("exact", "--config", str(cfg), "--out", str(tmp_path / "o"))
        assert res.returncode == 3
        assert "bogus" in res.stderr

    def test_negative_lambda_names_field(self, tmp_path):
        cfg = write_cfg(tmp_path, {"bridge": {"lambda": -0.5, "N": 6}})
        res = run_cli("exact", "--config", str(cfg), "--out", str(tmp_path / "o"))
        assert res.returncode == 3
        assert "bridge.lambda" in res.stderr

    def test_unknown_section_key(self, tmp_path):
        bad = dict(CANONICAL)
        bad["bridge"] = dict(CANONICAL["bridge"], typo=1)
        cfg = write_cfg(tmp_path, bad)
        res = run_cli("exact", "--config", str(cfg), "--out", str(tmp_path / "o"))
        assert res.returncode == 3
        assert "bridge.typo" in res.stderr

    def test_invalid_json(self, tmp_path):
        cfg = tmp_path / "broken.json"
        cfg.write_text("{nope")
        res = run_cli("exact", "--config", str(cfg), "--out", str(tmp_path / "o"))
        assert res.returncode == 3


class TestExact:
    def test_matches_versioned_fixture_byte_for_byte(self, tmp_path):
        cfg = write_cfg(tmp_path, CANONICAL)
        out = tmp_path / "out"
        res = run_cli("exact", "--config", str(cfg), "--out", str(out), "--quiet")
        assert res.returncode == 0, res.stderr
        for name in ("marginals.csv", "covariance.csv", "summary.json"):
            got = (out / name).read_bytes()
            want = (FIXTURES / "exact_canonical" / name).read_bytes()
            assert got == want, f"{name} differs from versioned fixture"

    def test_repeat_runs_identical(self, tmp_path):
        cfg = write_cfg(tmp_path, CANONICAL)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run_cli("exact", "--config", str(cfg), "--out", str(out1),
                       "--quiet").returncode == 0
        assert run_cli("exact", "--config", str(cfg), "--out", str(out2),
                       "--quiet").returncode == 0
        for name in ("marginals.csv", "covariance.csv", "summary.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


class TestOracleCheck:
    def test_exit_zero_and_summary(self, tmp_path):
        out = tmp_path / "o"
        res = run_cli("oracle-check", "--out", str(out), "--quiet")
        assert res.returncode == 0, res.stderr
        summary = json.loads((out / "summary.json").read_text())
        checks = summary["results"]["checks"]
        assert checks and all(c["passed"] for c in checks.values())
        assert (out / "oracle.csv").exists()


class TestSample:
    def test_seed_controls_output(self, tmp_path):
        cfg = write_cfg(tmp_path, {**CANONICAL, "sample": {"count": 50}})
        outs = []
        for seed, name in ((7, "s7"), (7, "s7b"), (8, "s8")):
            out = tmp_path / name
            res = run_cli("sample", "--config", str(cfg), "--out", str(out),
                          "--seed", str(seed), "--quiet")
            assert res.returncode == 0, res.stderr
            outs.append((out / "paths.csv").read_bytes())
        assert outs[0] == outs[1]
        assert outs[0] != outs[2]


class TestSweepCommands:
    def test_relaxation_csv_schema_and_jobs_invariance(self, tmp_path):
        cfg = write_cfg(tmp_path, {
            "seed": 1,
            "sweep": {"lambdas": [1e-2, 3.16e-3]},
        })
        out1, out2 = tmp_path / "j1", tmp_path / "j2"
        assert run_cli("relaxation", "--config", str(cfg), "--out", str(out1),
                       "--jobs", "1", "--quiet").returncode == 0
        assert run_cli("relaxation", "--config", str(cfg), "--out", str(out2),
                       "--jobs", "4", "--quiet").returncode == 0
        body1 = (out1 / "tv.csv").read_bytes()
        assert body1 == (out2 / "tv.csv").read_bytes()
        header = next(l for l in body1.decode().splitlines()
                      if not l.startswith("#"))
        assert header == "lambda,N,tv"

    def test_scaling_summary_has_fit(self, tmp_path):
        cfg = write_cfg(tmp_path, {
            "seed": 1,
            "sweep": {"lambdas": [1e-2, 3.16e-3, 1e-3, 3.16e-4], "n_multiplier": 10},
        })
        out = tmp_path / "o"
        assert run_cli("scaling", "--config", str(cfg), "--out", str(out),
                       "--quiet").returncode == 0
        summary = json.loads((out / "summary.json").read_text())
        fit = summary["results"]["fits"]["linear"]
        assert -0.45 < fit["exponent"] < -0.25
        lines = (out / "scaling.csv").read_text().splitlines()
        header = next(l for l in lines if not l.startswith("#"))
        assert header == "lambda,H,quantity,value,stderr"

    def test_metadata_embedded(self, tmp_path):
        cfg = write_cfg(tmp_path, {
            "seed": 9,
            "sweep": {"lambdas": [1e-2]},
        })
        out = tmp_path / "o"
        assert run_cli("relaxation", "--config", str(cfg), "--out", str(out),
                       "--quiet").returncode == 0
        text = (out / "tv.csv").read_text()
        assert "# prewet" in text and "# config_sha256=" in text
        assert "# seed=9" in text
        summary = json.loads((out / "summary.json").read_text())
        assert summary["seed"] == 9
        assert len(summary["config_sha256"]) == 64
