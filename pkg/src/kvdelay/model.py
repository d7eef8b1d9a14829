"""Configuration data model, scenario selection and admissibility checks.

A run is fully described by a WaveConfig: geometry (0, alpha, beta, L),
piecewise wave coefficients kappa1..kappa3, the Kelvin-Voigt coefficient
delta1, the delayed-feedback weight delta2, the undelayed boundary gain
delta3, the delay tau, a scenario selector and closed-form initial data.
Configs are JSON-serializable so every run is reproducible from a file.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Scenario",
    "Selector",
    "InitialData",
    "WaveConfig",
    "HypothesisReport",
    "ConfigError",
    "ScenarioMismatchError",
    "check_hypothesis",
    "check_hypothesis_H",
    "check_hypothesis_H1",
    "validate_config",
    "load_config",
    "config_to_dict",
    "config_from_dict",
    "config_hash",
]


class ConfigError(ValueError):
    """A structural invariant of the configuration is violated."""


class ScenarioMismatchError(ConfigError):
    """A hypothesis check was invoked on the wrong scenario."""


class Scenario(str, enum.Enum):
    # Interior KV patch, delayed feedback at the boundary point L (alpha > 0).
    INTERIOR_KV_BOUNDARY_DELAY = "interior_kv_boundary_delay"
    # KV patch touching the left boundary (alpha = 0), delay at L.
    BOUNDARY_KV_BOUNDARY_DELAY = "boundary_kv_boundary_delay"
    # KV patch and distributed delayed feedback both on (alpha, beta),
    # Dirichlet conditions at both ends.
    INTERIOR_KV_INTERIOR_DELAY = "interior_kv_interior_delay"

    @property
    def boundary_delay(self) -> bool:
        return self is not Scenario.INTERIOR_KV_INTERIOR_DELAY


DISPLACEMENT_KINDS = ("zero", "sine", "bump")
HISTORY_KINDS = ("zero", "constant", "sine")


@dataclass(frozen=True)
class Selector:
    """Closed-form data selector, e.g. {"kind": "sine", "params": {"mode": 1}}."""

    kind: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}

    @staticmethod
    def from_dict(d: dict) -> "Selector":
        if not isinstance(d, dict) or "kind" not in d:
            raise ConfigError("selector must be an object with a 'kind' key")
        return Selector(kind=str(d["kind"]), params=dict(d.get("params", {})))


ZERO = Selector("zero")


@dataclass(frozen=True)
class InitialData:
    displacement: Selector = ZERO
    velocity: Selector = ZERO
    history: Selector = ZERO

    def to_dict(self) -> dict:
        return {
            "displacement": self.displacement.to_dict(),
            "velocity": self.velocity.to_dict(),
            "history": self.history.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "InitialData":
        return InitialData(
            displacement=Selector.from_dict(d.get("displacement", {"kind": "zero"})),
            velocity=Selector.from_dict(d.get("velocity", {"kind": "zero"})),
            history=Selector.from_dict(d.get("history", {"kind": "zero"})),
        )


@dataclass(frozen=True)
class WaveConfig:
    L: float
    alpha: float
    beta: float
    kappa1: float
    kappa2: float
    kappa3: float
    delta1: float
    delta2: float
    delta3: float
    tau: float
    scenario: Scenario
    initial: InitialData = field(default_factory=InitialData)

    @property
    def kappas(self):
        return (self.kappa1, self.kappa2, self.kappa3)

    def displacement_fn(self):
        return _space_selector_fn(self.initial.displacement, self)

    def velocity_fn(self):
        return _space_selector_fn(self.initial.velocity, self)

    def history_fn(self):
        """History f0 as a function of (x, t) with t in (-tau, 0]."""
        return _history_selector_fn(self.initial.history, self)


def _space_selector_fn(sel: Selector, cfg: WaveConfig):
    if sel.kind == "zero":
        return lambda x: np.zeros_like(np.asarray(x, dtype=float))
    if sel.kind == "sine":
        k = int(sel.params.get("mode", 1))
        amp = float(sel.params.get("amplitude", 1.0))
        L = cfg.L
        return lambda x: amp * np.sin(k * np.pi * np.asarray(x, dtype=float) / L)
    if sel.kind == "bump":
        a = float(sel.params.get("a", 0.25 * cfg.L))
        b = float(sel.params.get("b", 0.75 * cfg.L))
        amp = float(sel.params.get("amplitude", 1.0))

        def bump(x):
            x = np.asarray(x, dtype=float)
            s = 2.0 * (x - a) / (b - a) - 1.0
            out = np.zeros_like(s)
            inside = np.abs(s) < 1.0
            # normalized so the peak value is `amp`
            out[inside] = amp * np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
            return out

        return bump
    raise ConfigError(f"unknown displacement/velocity selector kind '{sel.kind}'")


def _history_selector_fn(sel: Selector, cfg: WaveConfig):
    if sel.kind == "zero":
        return lambda x, t: np.zeros_like(np.asarray(x, dtype=float))
    if sel.kind == "constant":
        c = float(sel.params.get("value", 1.0))
        return lambda x, t: np.full_like(np.asarray(x, dtype=float), c)
    if sel.kind == "sine":
        amp = float(sel.params.get("amplitude", 1.0))
        omega = float(sel.params.get("omega", 1.0))
        k = sel.params.get("spatial_mode")
        if k is None:
            return lambda x, t: amp * math.sin(omega * t) * np.ones_like(
                np.asarray(x, dtype=float)
            )
        k = int(k)
        a, b = cfg.alpha, cfg.beta

        def f(x, t):
            x = np.asarray(x, dtype=float)
            return amp * math.sin(omega * t) * np.sin(k * np.pi * (x - a) / (b - a))

        return f
    raise ConfigError(f"unknown history selector kind '{sel.kind}'")


@dataclass(frozen=True)
class HypothesisReport:
    holds: bool
    failed_clauses: tuple
    p_interval: tuple | None = None

    def to_dict(self) -> dict:
        d = {"holds": self.holds, "failed_clauses": list(self.failed_clauses)}
        d["p_interval"] = list(self.p_interval) if self.p_interval is not None else None
        return d


def check_hypothesis_H(cfg: WaveConfig) -> HypothesisReport:
    """Admissibility of the boundary-delay configurations.

    Clauses: kappa3 > 0, delta1 > 0, delta3 > 0, delta2 != 0,
    delta3 > 1/(2 kappa3) and |delta2| < sqrt(2 kappa3 delta3 - 1)/kappa3.
    When all hold, a feedback-balancing weight p exists in the open interval
    (kappa3 |delta2|, 2 (kappa3 delta3 - 1/2)/(kappa3 |delta2|)).
    """
    if not cfg.scenario.boundary_delay:
        raise ScenarioMismatchError(
            "hypothesis H applies to boundary-delay scenarios only"
        )
    failed = []
    if not cfg.kappa3 > 0:
        failed.append("kappa3_positive")
    if not cfg.delta1 > 0:
        failed.append("delta1_positive")
    if not cfg.delta3 > 0:
        failed.append("delta3_positive")
    if cfg.delta2 == 0:
        failed.append("delta2_nonzero")
    if cfg.kappa3 > 0:
        if not cfg.delta3 > 1.0 / (2.0 * cfg.kappa3):
            failed.append("delta3_gt_inv_2kappa3")
        disc = 2.0 * cfg.kappa3 * cfg.delta3 - 1.0
        if disc <= 0 or not abs(cfg.delta2) < math.sqrt(disc) / cfg.kappa3:
            failed.append("delta2_within_bound")
    holds = not failed
    p_interval = None
    if holds:
        lo = cfg.kappa3 * abs(cfg.delta2)
        hi = 2.0 / (cfg.kappa3 * abs(cfg.delta2)) * (cfg.kappa3 * cfg.delta3 - 0.5)
        p_interval = (lo, hi)
    return HypothesisReport(holds=holds, failed_clauses=tuple(failed), p_interval=p_interval)


def check_hypothesis_H1(cfg: WaveConfig) -> HypothesisReport:
    """Admissibility of the interior-delay configuration.

    Clauses: delta1 > 0, delta2 != 0, |delta2| < delta1 (strict).
    """
    if cfg.scenario is not Scenario.INTERIOR_KV_INTERIOR_DELAY:
        raise ScenarioMismatchError(
            "hypothesis H1 applies to the interior-delay scenario only"
        )
    failed = []
    if not cfg.delta1 > 0:
        failed.append("delta1_positive")
    if cfg.delta2 == 0:
        failed.append("delta2_nonzero")
    if not abs(cfg.delta2) < cfg.delta1:
        failed.append("delta2_lt_delta1")
    return HypothesisReport(holds=not failed, failed_clauses=tuple(failed))


def check_hypothesis(cfg: WaveConfig) -> HypothesisReport:
    """Dispatch to H or H1 depending on the scenario."""
    if cfg.scenario.boundary_delay:
        return check_hypothesis_H(cfg)
    return check_hypothesis_H1(cfg)


def validate_config(cfg: WaveConfig) -> WaveConfig:
    """Check structural invariants; admissibility (H)/(H1) is NOT required.

    Hypothesis-violating configs (including the conservative limit
    delta1 = delta2 = delta3 = 0) are accepted for exploratory runs.
    """
    if not cfg.L > 0:
        raise ConfigError("L must be > 0")
    if cfg.alpha < 0:
        raise ConfigError("alpha must be >= 0")
    if not cfg.alpha < cfg.beta:
        raise ConfigError("alpha must be < beta")
    if cfg.beta > cfg.L:
        raise ConfigError("beta must be <= L")
    for name in ("kappa1", "kappa2", "kappa3"):
        if not getattr(cfg, name) > 0:
            raise ConfigError(f"{name} must be > 0")
    if not cfg.tau > 0:
        raise ConfigError("tau must be > 0")
    if cfg.delta1 < 0:
        raise ConfigError("delta1 must be >= 0")
    if cfg.delta3 < 0:
        raise ConfigError("delta3 must be >= 0")
    sc = cfg.scenario
    if sc is Scenario.INTERIOR_KV_BOUNDARY_DELAY:
        if not cfg.alpha > 0:
            raise ConfigError("alpha must be > 0 in the interior-KV boundary-delay scenario")
        if not cfg.beta < cfg.L:
            raise ConfigError("beta must be < L in the interior-KV boundary-delay scenario")
    elif sc is Scenario.BOUNDARY_KV_BOUNDARY_DELAY:
        if cfg.alpha != 0:
            raise ConfigError("alpha must be = 0 in the boundary-KV scenario")
        if not cfg.beta < cfg.L:
            raise ConfigError("beta must be < L in the boundary-KV scenario")
    # interior-delay scenario admits alpha = 0 or beta = L
    for which in ("displacement", "velocity"):
        sel = getattr(cfg.initial, which)
        if sel.kind not in DISPLACEMENT_KINDS:
            raise ConfigError(f"unknown {which} selector kind '{sel.kind}'")
        if sel.kind == "bump":
            a = float(sel.params.get("a", 0.25 * cfg.L))
            b = float(sel.params.get("b", 0.75 * cfg.L))
            if not (0 <= a < b <= cfg.L):
                raise ConfigError(f"{which} bump interval must satisfy 0 <= a < b <= L")
    if cfg.initial.history.kind not in HISTORY_KINDS:
        raise ConfigError(
            f"unknown history selector kind '{cfg.initial.history.kind}'"
        )
    return cfg


# ---------------------------------------------------------------------------
# JSON round trip

_SCALAR_KEYS = (
    "L",
    "alpha",
    "beta",
    "kappa1",
    "kappa2",
    "kappa3",
    "delta1",
    "delta2",
    "delta3",
    "tau",
)


def config_to_dict(cfg: WaveConfig) -> dict:
    d = {k: float(getattr(cfg, k)) for k in _SCALAR_KEYS}
    d["scenario"] = cfg.scenario.value
    d["initial"] = cfg.initial.to_dict()
    return d


def config_from_dict(d: dict) -> WaveConfig:
    missing = [k for k in _SCALAR_KEYS + ("scenario",) if k not in d]
    if missing:
        raise ConfigError(f"config missing keys: {', '.join(missing)}")
    try:
        scenario = Scenario(d["scenario"])
    except ValueError:
        raise ConfigError(f"unknown scenario '{d['scenario']}'") from None
    kwargs = {}
    for k in _SCALAR_KEYS:
        try:
            kwargs[k] = float(d[k])
        except (TypeError, ValueError):
            raise ConfigError(f"config key '{k}' must be a number") from None
    cfg = WaveConfig(
        scenario=scenario,
        initial=InitialData.from_dict(d.get("initial", {})),
        **kwargs,
    )
    return validate_config(cfg)


def load_config(path) -> WaveConfig:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return config_from_dict(d)


def config_hash(cfg: WaveConfig) -> str:
    payload = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()
