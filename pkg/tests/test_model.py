import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kvdelay.model import (
    ConfigError,
    InitialData,
    Scenario,
    ScenarioMismatchError,
    Selector,
    WaveConfig,
    check_hypothesis,
    check_hypothesis_H,
    check_hypothesis_H1,
    config_from_dict,
    config_hash,
    config_to_dict,
    load_config,
    validate_config,
)
from tests.conftest import make_config

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
positive = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)


# ---------------------------------------------------------------------------
# hypothesis (H): boundary-delay admissibility


def test_H_holds_on_reference_parameters():
    # kappa3=1, delta3=1: bound sqrt(2*1-1)/1 = 1, so any 0<|delta2|<1 works
    cfg = make_config(delta2=0.5)
    rep = check_hypothesis_H(cfg)
    assert rep.holds
    assert rep.failed_clauses == ()
    lo, hi = rep.p_interval
    assert lo == pytest.approx(0.5)
    assert hi == pytest.approx(2.0)
    assert lo < hi


def test_H_clause_names_on_violations():
    rep = check_hypothesis_H(make_config(delta2=0.0))
    assert "delta2_nonzero" in rep.failed_clauses
    rep = check_hypothesis_H(make_config(delta2=1.5))
    assert "delta2_within_bound" in rep.failed_clauses
    rep = check_hypothesis_H(make_config(delta3=0.2))
    assert "delta3_gt_inv_2kappa3" in rep.failed_clauses
    rep = check_hypothesis_H(make_config(delta1=0.0))
    assert rep.failed_clauses == ("delta1_positive",)
    assert not rep.holds


@given(
    kappa3=positive,
    delta2=st.floats(min_value=-3, max_value=3, allow_nan=False),
    delta3=st.floats(min_value=0, max_value=3, allow_nan=False),
)
@settings(max_examples=300, deadline=None)
def test_H_holds_iff_p_interval_nonempty(kappa3, delta2, delta3):
    """holds <=> the balancing-weight interval (Eq. for p) is nonempty.

    Independent oracle: the interval (k3|d2|, 2(k3 d3 - 1/2)/(k3|d2|)) is
    nonempty exactly when k3^2 d2^2 < 2 k3 d3 - 1 (and d2 != 0, d3 > 0).
    """
    cfg = make_config(kappa3=kappa3, delta2=delta2, delta3=delta3)
    rep = check_hypothesis_H(cfg)
    oracle = (
        delta2 != 0
        and delta3 > 0
        and (kappa3 * delta2) ** 2 < 2.0 * kappa3 * delta3 - 1.0
    )
    assert rep.holds == oracle
    if rep.holds:
        lo, hi = rep.p_interval
        assert lo < hi
        # interval endpoints per the closed form
        assert lo == pytest.approx(kappa3 * abs(delta2))
        assert hi == pytest.approx(2.0 / (kappa3 * abs(delta2)) * (kappa3 * delta3 - 0.5))
    else:
        assert rep.p_interval is None


def test_H1_strictness():
    mk = lambda d1, d2: make_config(
        Scenario.INTERIOR_KV_INTERIOR_DELAY, delta1=d1, delta2=d2
    )
    assert check_hypothesis_H1(mk(1.0, 0.5)).holds
    assert not check_hypothesis_H1(mk(1.0, 1.0)).holds  # strict inequality
    assert not check_hypothesis_H1(mk(1.0, 0.0)).holds
    assert not check_hypothesis_H1(mk(0.0, 0.0)).holds
    assert check_hypothesis_H1(mk(0.15, -0.1)).holds  # sign of delta2 is free


def test_hypothesis_dispatch_and_mismatch():
    cfg_b = make_config()
    cfg_i = make_config(Scenario.INTERIOR_KV_INTERIOR_DELAY)
    assert check_hypothesis(cfg_b).holds
    assert check_hypothesis(cfg_i).holds
    with pytest.raises(ScenarioMismatchError):
        check_hypothesis_H(cfg_i)
    with pytest.raises(ScenarioMismatchError):
        check_hypothesis_H1(cfg_b)


# ---------------------------------------------------------------------------
# structural validation


@pytest.mark.parametrize(
    "overrides,needle",
    [
        (dict(alpha=0.8, beta=0.7), "alpha must be < beta"),
        (dict(L=-1.0), "L must be > 0"),
        (dict(tau=0.0), "tau must be > 0"),
        (dict(kappa2=0.0), "kappa2 must be > 0"),
        (dict(delta1=-0.5), "delta1 must be >= 0"),
        (dict(beta=1.2), "beta must be <= L"),
    ],
)
def test_validate_rejects(overrides, needle):
    with pytest.raises(ConfigError, match=needle):
        validate_config(make_config(**overrides))


def test_scenario_geometry_constraints():
    with pytest.raises(ConfigError):
        validate_config(make_config(alpha=0.0))  # interior scenario needs alpha>0
    with pytest.raises(ConfigError):
        validate_config(
            make_config(Scenario.BOUNDARY_KV_BOUNDARY_DELAY, alpha=0.1)
        )
    # interior-delay scenario admits a patch touching either end
    validate_config(make_config(Scenario.INTERIOR_KV_INTERIOR_DELAY, alpha=0.0))
    validate_config(make_config(Scenario.INTERIOR_KV_INTERIOR_DELAY, beta=1.0))


def test_conservative_limit_is_structurally_valid():
    cfg = make_config(
        Scenario.INTERIOR_KV_INTERIOR_DELAY, delta1=0.0, delta2=0.0, delta3=0.0
    )
    validate_config(cfg)
    assert not check_hypothesis(cfg).holds


# ---------------------------------------------------------------------------
# selectors


def test_selector_functions():
    cfg = make_config(
        initial=InitialData(
            displacement=Selector("sine", {"mode": 2, "amplitude": 3.0}),
            velocity=Selector("bump", {"a": 0.25, "b": 0.75, "amplitude": 2.0}),
        )
    )
    x = np.linspace(0, 1, 11)
    d = cfg.displacement_fn()(x)
    assert d[0] == pytest.approx(0.0)
    assert d[5] == pytest.approx(3.0 * math.sin(2 * math.pi * 0.5), abs=1e-12)
    v = cfg.velocity_fn()(x)
    assert v[0] == 0.0 and v[-1] == 0.0
    assert v[5] == pytest.approx(2.0)  # bump peak normalized to amplitude
    assert np.all(v >= 0)


def test_history_selector_constant_and_sine():
    cfg = make_config(initial=InitialData(history=Selector("constant", {"value": 2.5})))
    f = cfg.history_fn()
    assert float(f(cfg.L, -0.3)[()] if hasattr(f(cfg.L, -0.3), "__len__") else f(cfg.L, -0.3)) == pytest.approx(2.5)
    cfg2 = make_config(
        initial=InitialData(history=Selector("sine", {"amplitude": 2.0, "omega": 3.0}))
    )
    g = cfg2.history_fn()
    assert float(np.asarray(g(1.0, -0.5))) == pytest.approx(2.0 * math.sin(-1.5))


def test_unknown_selector_kind_rejected():
    cfg = make_config(initial=InitialData(displacement=Selector("gaussian")))
    with pytest.raises(ConfigError, match="gaussian"):
        validate_config(cfg)


# ---------------------------------------------------------------------------
# JSON round trip and hashing


def test_round_trip(tmp_path):
    cfg = make_config(delta2=-0.3, tau=0.5)
    d = config_to_dict(cfg)
    cfg2 = config_from_dict(json.loads(json.dumps(d)))
    assert cfg2 == cfg
    p = tmp_path / "c.json"
    p.write_text(json.dumps(d))
    assert load_config(p) == cfg


def test_from_dict_errors():
    d = config_to_dict(make_config())
    del d["tau"]
    with pytest.raises(ConfigError, match="tau"):
        config_from_dict(d)
    d2 = config_to_dict(make_config())
    d2["scenario"] = "nonsense"
    with pytest.raises(ConfigError, match="nonsense"):
        config_from_dict(d2)
    d3 = config_to_dict(make_config())
    d3["kappa1"] = "abc"
    with pytest.raises(ConfigError, match="kappa1"):
        config_from_dict(d3)


def test_config_hash_stability_and_sensitivity():
    a = config_hash(make_config())
    b = config_hash(make_config())
    assert a == b and len(a) == 64
    assert config_hash(make_config(delta2=0.5000001)) != a


def test_corpus_configs_load(config_dir):
    names = sorted(p.name for p in config_dir.glob("*_[1-5].json"))
    assert len(names) == 15
    for p in config_dir.glob("*_[1-5].json"):
        cfg = load_config(p)
        assert check_hypothesis(cfg).holds, p.name
