import sys
from pathlib import Path

import pytest

# allow running straight from the repo checkout without an editable install
SRC = Path(__file__).resolve().parents[1] / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

# the primary suite must stay runnable when this package is not built
pytest.importorskip("matplotlib")
pytest.importorskip("figures")


@pytest.fixture
def energy_csv(tmp_path):
    p = tmp_path / "energy.csv"
    header = "t,E,E_wave,E_delay,flux_kv,flux_bnd_ut,flux_bnd_eta,flux_cross"
    rows = [f"{0.1 * k},{2.0 * 0.8 ** k},{1.5 * 0.8 ** k},{0.5 * 0.8 ** k},-0.1,-0.2,-0.05,0.01"
            for k in range(20)]
    p.write_text(header + "\n" + "\n".join(rows) + "\n")
    return p


@pytest.fixture
def spectrum_csv(tmp_path):
    p = tmp_path / "spectrum.csv"
    rows = [f"{-0.1 * (k + 1)},{3.0 * k}" for k in range(10)]
    p.write_text("re,im\n" + "\n".join(rows) + "\n")
    return p


@pytest.fixture
def sweep_csv(tmp_path):
    p = tmp_path / "sweep.csv"
    rows = [f"{lam},{2.0 * lam ** 0.5}" for lam in (5, 10, 20, 40, 80)]
    p.write_text("lambda,resolvent_norm\n" + "\n".join(rows) + "\n")
    return p


@pytest.fixture
def sweep_json(tmp_path):
    p = tmp_path / "sweep.json"
    p.write_text(
        '{"slope": 0.5, "intercept": 0.693, "r2": 1.0,'
        ' "window_lo": 20.0, "window_hi": 80.0, "lambda_cut": 100.0}'
    )
    return p
