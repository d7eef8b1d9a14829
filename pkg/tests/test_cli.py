import json

import numpy as np
import pytest

from kvdelay.cli import run_command
from kvdelay.model import config_to_dict
from kvdelay.timestepper import EnergySeries
from tests.conftest import make_config


def cfg_file(tmp_config, **overrides):
    return tmp_config(config_to_dict(make_config(**overrides)))


def test_check_exit_codes(tmp_config, capsys):
    good = cfg_file(tmp_config)
    assert run_command(["check", str(good)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["holds"] is True

    violated = cfg_file(tmp_config, delta2=5.0)
    assert run_command(["check", str(violated)]) == 2
    report = json.loads(capsys.readouterr().out)
    assert report["holds"] is False
    assert report["failed_clauses"]


def test_invalid_config_exits_1_with_error_prefix(tmp_config, capsys):
    bad = cfg_file(tmp_config, alpha=0.9, beta=0.2)
    assert run_command(["check", str(bad)]) == 1
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert "alpha" in err


def test_missing_file_exits_1(capsys):
    assert run_command(["check", "/nonexistent/config.json"]) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_malformed_json_exits_1(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert run_command(["check", str(p)]) == 1
    assert "invalid JSON" in capsys.readouterr().err


def test_simulate_writes_energy_and_manifest(tmp_config, tmp_path):
    cfg_p = cfg_file(tmp_config, tau=0.5)
    out = tmp_path / "run"
    rc = run_command(
        ["simulate", str(cfg_p), "--n", "24", "--T", "1.0", "--out", str(out)]
    )
    assert rc == 0
    series = EnergySeries.from_csv(out / "energy.csv")
    assert series.times[0] == 0.0
    assert series.E[-1] < series.E[0]
    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["config_hash"]) == 64
    assert manifest["resolution"]["n_elements"] == 24
    assert manifest["resolution"]["dt"] == pytest.approx(0.5 / 32)
    assert str(out / "energy.csv") in manifest["outputs"]
    # no stray temp files from the atomic writes
    assert not list(out.glob("*.tmp"))


def test_simulate_output_is_deterministic(tmp_config, tmp_path):
    cfg_p = cfg_file(tmp_config)
    texts = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        run_command(["simulate", str(cfg_p), "--n", "16", "--T", "0.5", "--out", str(out)])
        texts.append((out / "energy.csv").read_bytes())
    assert texts[0] == texts[1]


def test_spectrum_outputs(tmp_config, tmp_path):
    cfg_p = cfg_file(tmp_config)
    out = tmp_path / "spec"
    assert run_command(["spectrum", str(cfg_p), "--n", "20", "--n-rho", "4", "--out", str(out)]) == 0
    rows = (out / "spectrum.csv").read_text().splitlines()
    assert rows[0] == "re,im"
    meta = json.loads((out / "spectrum.json").read_text())
    assert meta["spectral_abscissa"] < 0
    assert meta["n_unstable"] == 0


def test_sweep_outputs(tmp_config, tmp_path):
    cfg_p = cfg_file(tmp_config)
    out = tmp_path / "sw"
    rc = run_command(
        ["sweep", str(cfg_p), "--n", "24", "--n-rho", "6",
         "--lmin", "5", "--lmax", "20", "--points", "6", "--out", str(out)]
    )
    assert rc == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert rows[0] == "lambda,resolvent_norm"
    assert len(rows) == 7
    meta = json.loads((out / "sweep.json").read_text())
    assert "slope" in meta and "lambda_cut" in meta


def test_verdict_end_to_end(tmp_config, tmp_path):
    cfg_p = cfg_file(tmp_config, tau=0.5)
    out = tmp_path / "verdict"
    rc = run_command(
        ["verdict", str(cfg_p), "--n", "32", "--n-rho", "8",
         "--sweep-n-rho", "8", "--spectrum-n", "24", "--points", "8",
         "--out", str(out)]
    )
    assert rc == 0
    expected = {
        "energy.csv", "spectrum.csv", "spectrum.json",
        "sweep.csv", "sweep.json", "verdict.json", "manifest.json",
    }
    assert expected <= {p.name for p in out.iterdir()}
    v = json.loads((out / "verdict.json").read_text())
    assert v["scenario"] == "interior_kv_boundary_delay"
    assert v["expected_regime"] == "polynomial"
    assert isinstance(v["agreement"], bool)
    assert v["sweep_slope"] == pytest.approx(
        json.loads((out / "sweep.json").read_text())["slope"]
    )


def test_corpus_check_passes(config_dir):
    for p in sorted(config_dir.glob("*_[1-5].json")):
        assert run_command(["check", str(p)]) == 0, p.name
    assert run_command(["check", str(config_dir / "violating_boundary_delay.json")]) == 2
    assert run_command(["check", str(config_dir / "invalid_alpha_beta.json")]) == 1
