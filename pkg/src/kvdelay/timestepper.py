"""Time integration of the semi-discrete delayed system.

Two paths share one interface:

* "history" -- implicit midpoint on (U, V) with the delayed term taken
  explicitly from a method-of-steps ring buffer.  Instantaneous damping and
  boundary feedback are implicit, so the per-step solve is symmetric
  positive definite and its factorization is reused.
* "rhogrid" -- implicit midpoint (Cayley transform) on the full augmented
  generator, everything implicit.  This path is contractive in the energy
  norm to roundoff and serves as the strict-dissipation reference.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import GeneratorMatrix, SemiDiscreteSystem, assemble, assemble_generator
from .delay_line import (
    HistoryBuffer,
    RhoGrid,
    delay_energy,
    delayed_value,
    init_history,
    init_rho_grid,
)
from .mesh import build_mesh
from .model import WaveConfig, validate_config

__all__ = [
    "SimState",
    "EnergySeries",
    "FluxRecord",
    "StepError",
    "step",
    "simulate",
    "dissipation_rate",
    "initial_state",
]

ENERGY_CSV_COLUMNS = (
    "t",
    "E",
    "E_wave",
    "E_delay",
    "flux_kv",
    "flux_bnd_ut",
    "flux_bnd_eta",
    "flux_cross",
)


class StepError(RuntimeError):
    pass


@dataclass
class SimState:
    t: float
    U: np.ndarray
    V: np.ndarray
    line: HistoryBuffer | RhoGrid


@dataclass
class FluxRecord:
    flux_kv: float
    flux_bnd_ut: float
    flux_bnd_eta: float
    flux_cross: float
    p_weighted_bound: float | None = None

    @property
    def total(self) -> float:
        return self.flux_kv + self.flux_bnd_ut + self.flux_bnd_eta + self.flux_cross


@dataclass
class EnergySeries:
    times: np.ndarray
    E: np.ndarray
    E_wave: np.ndarray
    E_delay: np.ndarray
    flux_kv: np.ndarray
    flux_bnd_ut: np.ndarray
    flux_bnd_eta: np.ndarray
    flux_cross: np.ndarray

    def columns(self):
        return (
            self.times,
            self.E,
            self.E_wave,
            self.E_delay,
            self.flux_kv,
            self.flux_bnd_ut,
            self.flux_bnd_eta,
            self.flux_cross,
        )

    def to_csv(self, path_or_buf) -> None:
        cols = self.columns()
        lines = [",".join(ENERGY_CSV_COLUMNS)]
        for i in range(len(self.times)):
            lines.append(",".join(format(float(c[i]), ".17g") for c in cols))
        text = "\n".join(lines) + "\n"
        if isinstance(path_or_buf, io.TextIOBase):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w", newline="\n") as fh:
                fh.write(text)

    @staticmethod
    def from_csv(path) -> "EnergySeries":
        data = np.genfromtxt(path, delimiter=",", names=True)
        missing = [c for c in ENERGY_CSV_COLUMNS if c not in (data.dtype.names or ())]
        if missing:
            raise ValueError(f"energy CSV missing columns: {', '.join(missing)}")
        data = np.atleast_1d(data)
        return EnergySeries(*(np.asarray(data[c], dtype=float) for c in ENERGY_CSV_COLUMNS))


def initial_state(
    cfg: WaveConfig, sysm: SemiDiscreteSystem, dt: float | None = None, n_rho: int | None = None
) -> SimState:
    """Interpolate initial data onto active dofs and fill the delay line."""
    x = sysm.mesh.nodes[sysm.dof_map]
    U = np.asarray(cfg.displacement_fn()(x), dtype=float)
    V = np.asarray(cfg.velocity_fn()(x), dtype=float)
    if dt is not None:
        line = init_history(cfg, sysm, dt)
    elif n_rho is not None:
        line = init_rho_grid(cfg, sysm, n_rho)
    else:
        raise ValueError("provide dt (history path) or n_rho (rho-grid path)")
    return SimState(t=0.0, U=U, V=V, line=line)


def _step_factorization(sysm: SemiDiscreteSystem, dt: float):
    key = ("step", dt)
    if key not in sysm._cache:
        cfg = sysm.cfg
        damp = cfg.delta1 * sysm.D.toarray()
        if sysm.boundary_coupling is not None:
            bc = sysm.boundary_coupling
            damp[sysm.trace_L, sysm.trace_L] += bc.kappa3 * bc.delta3
        K = sysm.K.toarray()
        S = sysm.M.toarray() + (dt * dt / 4.0) * K + (dt / 2.0) * damp
        try:
            factor = sla.cho_factor(S)
        except np.linalg.LinAlgError as exc:
            raise StepError(
                f"singular step matrix (condition estimate {np.linalg.cond(S):.3e})"
            ) from exc
        sysm._cache[key] = (factor, K, damp, sysm.delayed_coupling_matrix().toarray())
    return sysm._cache[key]


def step(sysm: SemiDiscreteSystem, state: SimState, dt: float) -> SimState:
    """One implicit midpoint step of the history-buffer path."""
    buf = state.line
    if not isinstance(buf, HistoryBuffer):
        raise TypeError("step() advances history-buffer states; use simulate() for rhogrid")
    cfg = sysm.cfg
    factor, K, damp, C = _step_factorization(sysm, dt)
    if cfg.delta2 != 0.0:
        # delayed quantity at the midpoint time t + dt/2 - tau
        d_mid = delayed_value(buf, cfg.tau - dt / 2.0)
        c_mid = C @ d_mid
    else:
        c_mid = np.zeros(len(state.V))
    rhs = dt * (
        -(sysm.K @ state.U) - (damp + (dt / 2.0) * K) @ state.V - c_mid
    )
    dV = sla.cho_solve(factor, rhs)
    V1 = state.V + dV
    U1 = state.U + dt * 0.5 * (state.V + V1)
    R = sysm.inflow_matrix()
    buf.push(np.asarray(R @ V1).ravel())
    return SimState(t=state.t + dt, U=U1, V=V1, line=buf)


def wave_energy(sysm: SemiDiscreteSystem, U: np.ndarray, V: np.ndarray) -> float:
    return 0.5 * (float(V @ (sysm.M @ V)) + float(U @ (sysm.K @ U)))


def _eta_last(sysm: SemiDiscreteSystem, line) -> np.ndarray:
    """Delayed quantity at rho = 1 (lag tau)."""
    if isinstance(line, HistoryBuffer):
        return line.oldest
    return line.values[-1]


def dissipation_rate(sysm: SemiDiscreteSystem, state: SimState) -> FluxRecord:
    """Named terms of the dissipation identity on the current state.

    Their sum approximates dE/dt.  The raw cross term carries no definite
    sign; when the admissibility hypothesis holds, the balanced (Young-
    inequality) upper bound is reported alongside.
    """
    cfg = sysm.cfg
    V = state.V
    e = _eta_last(sysm, state.line)
    if sysm.delay_coupling == "boundary_trace_at_L":
        a = float(V[sysm.trace_L])
        e = float(e[0])
        k3 = cfg.kappa3
        rec = FluxRecord(
            flux_kv=-cfg.delta1 * float(V @ (sysm.D @ V)),
            flux_bnd_ut=-(k3 * cfg.delta3 - 0.5) * a * a,
            flux_bnd_eta=-0.5 * e * e,
            flux_cross=-k3 * cfg.delta2 * e * a,
        )
        disc = 2.0 * k3 * cfg.delta3 - 1.0
        if cfg.delta2 != 0 and disc > 0 and abs(cfg.delta2) < np.sqrt(disc) / k3:
            lo = k3 * abs(cfg.delta2)
            hi = 2.0 / lo * (k3 * cfg.delta3 - 0.5)
            p = 0.5 * (lo + hi)
            rec.p_weighted_bound = rec.flux_kv - (0.5 - lo / (2 * p)) * e * e - (
                k3 * cfg.delta3 - 0.5 - lo * p / 2.0
            ) * a * a
        return rec
    g = np.asarray(sysm.G @ V).ravel()
    w = sysm.W
    half_d2 = 0.5 * abs(cfg.delta2)
    return FluxRecord(
        flux_kv=-cfg.delta1 * float(np.sum(w * g * g)),
        flux_bnd_ut=half_d2 * float(np.sum(w * g * g)),
        flux_bnd_eta=-half_d2 * float(np.sum(w * e * e)),
        flux_cross=-cfg.delta2 * float(np.sum(w * g * e)),
    )


class _RhoGridStepper:
    """Cayley-transform stepping of the full augmented generator."""

    def __init__(self, gen: GeneratorMatrix, dt: float):
        self.gen = gen
        self.dt = dt
        dim = gen.layout.dim
        eye = sp.identity(dim, format="csc")
        self.lhs = spla.splu((eye - (dt / 2.0) * gen.A).tocsc())
        self.rhs = (eye + (dt / 2.0) * gen.A).tocsr()

    def advance(self, X: np.ndarray) -> np.ndarray:
        return self.lhs.solve(self.rhs @ X)


def _series_from_records(records) -> EnergySeries:
    arr = np.array(records, dtype=float)
    return EnergySeries(*(arr[:, i].copy() for i in range(arr.shape[1])))


def simulate(
    cfg: WaveConfig,
    n_elements: int,
    dt: float,
    T: float,
    path: str = "history",
    n_rho: int = 32,
    quadrature: str = "rectangle",
    record_every: int = 1,
    lumped: bool = False,
) -> EnergySeries:
    """Run a full trajectory and record energies and dissipation terms.

    dt is snapped to tau / m with integer m (tau itself is never altered);
    deterministic given identical arguments.
    """
    validate_config(cfg)
    if T <= 0:
        raise ValueError("T must be > 0")
    if dt <= 0:
        raise ValueError("dt must be > 0")
    m = max(1, round(cfg.tau / dt))
    dt = cfg.tau / m
    n_steps = max(1, int(round(T / dt)))
    mesh = build_mesh(cfg, n_elements)
    sysm = assemble(cfg, mesh, lumped=lumped)

    records = []

    def record(state: SimState):
        ew = wave_energy(sysm, state.U, state.V)
        ed = delay_energy(state.line, cfg, sysm, quadrature=quadrature)
        fx = dissipation_rate(sysm, state)
        records.append(
            (state.t, ew + ed, ew, ed, fx.flux_kv, fx.flux_bnd_ut, fx.flux_bnd_eta, fx.flux_cross)
        )

    if path == "history":
        state = initial_state(cfg, sysm, dt=dt)
        record(state)
        for i in range(n_steps):
            try:
                state = step(sysm, state, dt)
            except StepError as exc:
                raise StepError(f"step failed at t={state.t + dt:g}: {exc}") from exc
            if (i + 1) % record_every == 0 or i == n_steps - 1:
                record(state)
    elif path == "rhogrid":
        gen = assemble_generator(cfg, mesh, n_rho, quadrature=quadrature, lumped=lumped)
        lay = gen.layout
        state = initial_state(cfg, sysm, n_rho=n_rho)
        X = np.concatenate([state.U, state.V, state.line.values.ravel()])
        stepper = _RhoGridStepper(gen, dt)
        record(state)
        for i in range(n_steps):
            X = stepper.advance(X)
            state = SimState(
                t=(i + 1) * dt,
                U=X[lay.sl_u],
                V=X[lay.sl_v],
                line=RhoGrid(
                    n_rho=n_rho,
                    values=X[lay.sl_eta].reshape(n_rho, lay.eta_block),
                ),
            )
            if (i + 1) % record_every == 0 or i == n_steps - 1:
                record(state)
    else:
        raise ValueError(f"unknown path '{path}'")
    return _series_from_records(records)
