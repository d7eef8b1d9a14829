"""Decay-rate fits and scenario verdicts.

Time-domain fits are diagnostic only: a finite-dimensional semi-
discretization is eventually exponentially stable, so the polynomial
envelope is visible only transiently.  The acceptance-bearing observable
is the resolvent growth exponent, classified against two declared
thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    Scenario,
    WaveConfig,
    check_hypothesis,
)
from .spectral import ResolventSweep, SpectrumReport
from .timestepper import EnergySeries

__all__ = [
    "DecayFit",
    "fit_exponential",
    "fit_polynomial",
    "scenario_verdict",
    "EXPONENTIAL_SLOPE_MAX",
    "POLYNOMIAL_SLOPE_WINDOW",
]

# classification thresholds for the resolvent growth exponent
EXPONENTIAL_SLOPE_MAX = 0.15
POLYNOMIAL_SLOPE_WINDOW = (0.3, 0.7)


@dataclass
class DecayFit:
    model: str          # "exponential" | "polynomial"
    rate: float         # omega in C*exp(-omega t), or p in C*t^-p
    amplitude: float
    r2: float
    window: tuple

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "rate": self.rate,
            "amplitude": self.amplitude,
            "r2": self.r2,
            "window": list(self.window),
        }


def _window_mask(series: EnergySeries, window) -> np.ndarray:
    t_lo, t_hi = window
    mask = (series.times >= t_lo) & (series.times <= t_hi)
    if mask.sum() < 2:
        raise ValueError("fit window contains fewer than two samples")
    return mask


def _fit(x: np.ndarray, y: np.ndarray):
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), min(max(r2, 0.0), 1.0)


def fit_exponential(series: EnergySeries, window) -> DecayFit:
    """Least squares of log E against t; rate is the decay constant."""
    mask = _window_mask(series, window)
    E = series.E[mask]
    if np.any(E <= 0):
        raise ValueError("nonpositive energy inside the fit window")
    slope, intercept, r2 = _fit(series.times[mask], np.log(E))
    return DecayFit(
        model="exponential",
        rate=-slope,
        amplitude=float(np.exp(intercept)),
        r2=r2,
        window=tuple(window),
    )


def fit_polynomial(series: EnergySeries, window) -> DecayFit:
    """Least squares of log E against log t; t^-4 reports rate 4."""
    if window[0] <= 0:
        raise ValueError("polynomial fit window must start at t > 0")
    mask = _window_mask(series, window)
    E = series.E[mask]
    if np.any(E <= 0):
        raise ValueError("nonpositive energy inside the fit window")
    slope, intercept, r2 = _fit(np.log(series.times[mask]), np.log(E))
    return DecayFit(
        model="polynomial",
        rate=-slope,
        amplitude=float(np.exp(intercept)),
        r2=r2,
        window=tuple(window),
    )


def expected_regime(cfg: WaveConfig) -> str:
    """Decay regime predicted for the scenario under its hypothesis.

    Boundary-touching KV patch with boundary delay decays exponentially;
    the interior-patch variants decay polynomially like t^-4 (resolvent
    growth exponent 1/2).  Hypothesis-violating configs carry no
    prediction.
    """
    report = check_hypothesis(cfg)
    if not report.holds:
        return "none"
    if cfg.scenario is Scenario.BOUNDARY_KV_BOUNDARY_DELAY:
        return "exponential"
    return "polynomial"


def classify_slope(slope: float) -> str:
    if abs(slope) <= EXPONENTIAL_SLOPE_MAX:
        return "exponential"
    lo, hi = POLYNOMIAL_SLOPE_WINDOW
    if lo <= slope <= hi:
        return "polynomial"
    return "unclassified"


def scenario_verdict(
    cfg: WaveConfig,
    series: EnergySeries,
    sweep: ResolventSweep,
    spectrum_report: SpectrumReport,
    fit_window: tuple | None = None,
) -> dict:
    """Assemble the machine-readable verdict for one configuration."""
    hyp = check_hypothesis(cfg)
    boundary = cfg.scenario.boundary_delay
    expected = expected_regime(cfg)
    slope = sweep.exponent_fit["slope"]
    observed = classify_slope(slope)

    # diagnostic fits on the tail of the energy series
    if fit_window is None:
        t_hi = float(series.times[-1])
        fit_window = (max(0.25 * t_hi, series.times[1]), t_hi)
    positive = np.all(series.E[_window_mask(series, fit_window)] > 0)
    exp_fit = fit_exponential(series, fit_window).to_dict() if positive else None
    poly_fit = fit_polynomial(series, fit_window).to_dict() if positive else None

    return {
        "scenario": cfg.scenario.value,
        "hypotheses": {
            "H": hyp.to_dict() if boundary else None,
            "H1": hyp.to_dict() if not boundary else None,
        },
        "expected_regime": expected,
        "observed_regime": observed,
        "sweep_slope": slope,
        "slope_thresholds": {
            "exponential_max": EXPONENTIAL_SLOPE_MAX,
            "polynomial_window": list(POLYNOMIAL_SLOPE_WINDOW),
        },
        "spectral_abscissa": spectrum_report.spectral_abscissa,
        "exp_fit": exp_fit,
        "poly_fit": poly_fit,
        "agreement": (expected != "none" and expected == observed),
    }
