"""Two realizations of the delayed signal.

HistoryBuffer implements the method of steps: a ring of snapshots of the
delayed quantity (boundary velocity trace, or element gradients of the
velocity on the KV patch) at step resolution, with the delay an exact
integer multiple of the stride.  RhoGrid mirrors the transported block of
the augmented generator.  Both expose the delay contribution to the energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import SemiDiscreteSystem
from .model import WaveConfig

__all__ = [
    "HistoryBuffer",
    "RhoGrid",
    "init_history",
    "init_rho_grid",
    "delayed_value",
    "delay_energy",
]


@dataclass
class HistoryBuffer:
    stride: float                 # dt
    depth: int                    # m = tau / dt, exact integer
    samples: np.ndarray           # (m+1, width); row k holds the snapshot k steps old
    cursor: int = 0               # ring index of the newest snapshot

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    def push(self, snapshot: np.ndarray) -> None:
        snapshot = np.atleast_1d(np.asarray(snapshot, dtype=float))
        if snapshot.shape != (self.width,):
            raise ValueError(
                f"snapshot shape {snapshot.shape} != buffer width ({self.width},)"
            )
        self.cursor = (self.cursor - 1) % (self.depth + 1)
        self.samples[self.cursor] = snapshot

    def snapshot(self, k: int) -> np.ndarray:
        """Stored snapshot from k steps ago, 0 <= k <= depth."""
        if not 0 <= k <= self.depth:
            raise ValueError(f"snapshot index {k} outside [0, {self.depth}]")
        return self.samples[(self.cursor + k) % (self.depth + 1)]

    @property
    def newest(self) -> np.ndarray:
        return self.snapshot(0)

    @property
    def oldest(self) -> np.ndarray:
        return self.snapshot(self.depth)


@dataclass
class RhoGrid:
    n_rho: int
    values: np.ndarray            # (n_rho, width); row j-1 holds eta at rho=j/n_rho
    inflow: np.ndarray = field(default=None)  # current eta at rho=0 (velocity trace)

    @property
    def width(self) -> int:
        return self.values.shape[1]


def _delayed_snapshot_fn(cfg: WaveConfig, sysm: SemiDiscreteSystem):
    """Evaluate the delayed quantity from the history selector at time t <= 0."""
    f0 = cfg.history_fn()
    if sysm.delay_coupling == "boundary_trace_at_L":
        return lambda t: np.atleast_1d(float(np.asarray(f0(cfg.L, t))))
    x = sysm.mesh.nodes

    def snap(t):
        nodal = np.asarray(f0(x, t), dtype=float)
        if nodal.shape != x.shape:
            nodal = np.full(x.shape, float(nodal))
        # element gradients on the KV patch
        grads = np.diff(nodal) / sysm.mesh.element_sizes
        return grads[sysm.sub_elements]

    return snap


def init_history(cfg: WaveConfig, sysm: SemiDiscreteSystem, dt: float) -> HistoryBuffer:
    """Fill a buffer from the history selector at lags 0, dt, ..., tau."""
    m_exact = cfg.tau / dt
    m = round(m_exact)
    if m < 1 or abs(m_exact - m) > 1e-12 * m_exact:
        raise ValueError(
            f"dt={dt} does not divide tau={cfg.tau} into an integer number of steps"
        )
    snap = _delayed_snapshot_fn(cfg, sysm)
    rows = [snap(-k * dt) for k in range(m + 1)]
    return HistoryBuffer(stride=dt, depth=m, samples=np.array(rows, dtype=float))


def init_rho_grid(cfg: WaveConfig, sysm: SemiDiscreteSystem, n_rho: int) -> RhoGrid:
    """Transport state sampled at rho = j/n_rho from the history selector."""
    snap = _delayed_snapshot_fn(cfg, sysm)
    rows = [snap(-(j / n_rho) * cfg.tau) for j in range(1, n_rho + 1)]
    values = np.array(rows, dtype=float)
    return RhoGrid(n_rho=n_rho, values=values, inflow=snap(0.0))


def delayed_value(buffer: HistoryBuffer, lag: float) -> np.ndarray:
    """Delayed snapshot at the given lag.

    Integer multiples of the stride reproduce stored snapshots exactly;
    half-integer multiples return the average of the two bracketing
    snapshots, matching the implicit-midpoint staging.
    """
    tau = buffer.depth * buffer.stride
    if lag < 0 or lag > tau * (1 + 1e-12):
        raise ValueError(f"lag {lag} outside the delay window [0, {tau}]")
    steps = lag / buffer.stride
    k = round(steps)
    if abs(steps - k) <= 1e-9:
        return buffer.snapshot(min(k, buffer.depth))
    k2 = round(steps - 0.5)
    if abs(steps - 0.5 - k2) <= 1e-9:
        return 0.5 * (buffer.snapshot(k2) + buffer.snapshot(k2 + 1))
    raise ValueError(
        f"lag {lag} is neither an integer nor half-integer multiple of dt={buffer.stride}"
    )


def delay_energy(
    line, cfg: WaveConfig, sysm: SemiDiscreteSystem, quadrature: str = "rectangle"
) -> float:
    """Delay contribution to the total energy.

    Boundary delay: tau/2 * integral over rho of |eta|^2.
    Interior delay: tau*|delta2|/2 * integral over rho of the gradient
    energy of eta on the KV patch.

    HistoryBuffer uses cell-midpoint samples (staggered to the implicit
    midpoint staging, which makes the per-step energy identity exact);
    RhoGrid uses the rectangle rule matched to the upwind stencil, or the
    trapezoid variant behind the flag.
    """
    boundary = sysm.delay_coupling == "boundary_trace_at_L"
    if boundary:
        weigh = lambda s: float(s[0] ** 2)
    else:
        w = sysm.W
        weigh = lambda s: float(np.sum(w * s**2))

    if isinstance(line, HistoryBuffer):
        m = line.depth
        total = 0.0
        for k in range(m):
            mid = 0.5 * (line.snapshot(k) + line.snapshot(k + 1))
            total += weigh(mid)
        total /= m
    elif isinstance(line, RhoGrid):
        n = line.n_rho
        if line.width != (1 if boundary else len(sysm.sub_elements)):
            raise ValueError("rho-grid width does not match the system")
        weights = np.full(n, 1.0 / n)
        if quadrature == "trapezoid":
            weights[-1] = 0.5 / n
        elif quadrature != "rectangle":
            raise ValueError(f"unknown quadrature '{quadrature}'")
        total = float(sum(wt * weigh(line.values[j]) for j, wt in enumerate(weights)))
    else:
        raise TypeError(f"unsupported delay line type {type(line)!r}")

    scale = cfg.tau / 2.0 if boundary else cfg.tau * abs(cfg.delta2) / 2.0
    return scale * total
