import json
from pathlib import Path

import pytest

from kvdelay.model import InitialData, Scenario, Selector, WaveConfig

REPO_ROOT = Path(__file__).resolve().parents[1]
CONFIG_DIR = REPO_ROOT / "configs"


def make_config(scenario=Scenario.INTERIOR_KV_BOUNDARY_DELAY, **overrides):
    """Admissible baseline config; override any field."""
    kw = dict(
        L=1.0,
        alpha=0.3,
        beta=0.7,
        kappa1=1.0,
        kappa2=1.0,
        kappa3=1.0,
        delta1=1.0,
        delta2=0.5,
        delta3=1.0,
        tau=1.0,
        scenario=scenario,
        initial=InitialData(displacement=Selector("sine", {"mode": 1})),
    )
    if scenario is Scenario.BOUNDARY_KV_BOUNDARY_DELAY:
        kw.update(alpha=0.0, beta=0.5)
    kw.update(overrides)
    return WaveConfig(**kw)


@pytest.fixture
def config_dir():
    return CONFIG_DIR


@pytest.fixture
def tmp_config(tmp_path):
    """Write a config dict to a JSON file and return the path."""

    def write(d, name="config.json"):
        p = tmp_path / name
        p.write_text(json.dumps(d))
        return p

    return write
