"""P1 assembly of the semi-discrete operators and the augmented generator.

Displacement is discretized with continuous piecewise-linear elements on an
interface-aligned mesh; the delayed signal is carried by an auxiliary
transport variable on a uniform grid over the unit delay interval,
discretized by first-order upwinding.  The energy-weight matrix P is chosen
so that the discrete energy E(X) = X' P X / 2 reproduces the continuous
energy with a quadrature matched to the upwind stencil, which makes the
symmetric part of P A negative semidefinite for admissible configurations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.io import mmwrite

from .mesh import Mesh
from .model import Scenario, WaveConfig, validate_config

__all__ = [
    "RobinAtL",
    "SemiDiscreteSystem",
    "GeneratorLayout",
    "GeneratorMatrix",
    "assemble",
    "assemble_generator",
    "upwind_transport_block",
    "dump_matrices",
]

DEFAULT_DIM_CAP = 20000


@dataclass(frozen=True)
class RobinAtL:
    """Boundary feedback at x = L: flux = -kappa3*(delta3*V_L + delta2*eta(1))."""

    kappa3: float
    delta3: float
    delta2: float


@dataclass
class SemiDiscreteSystem:
    cfg: WaveConfig
    mesh: Mesh
    M: sp.csr_matrix                 # consistent (or lumped) mass, active dofs
    K: sp.csr_matrix                 # kappa-weighted stiffness
    D: sp.csr_matrix                 # unit-coefficient stiffness on (alpha, beta)
    boundary_coupling: RobinAtL | None
    delay_coupling: str              # "boundary_trace_at_L" | "distributed_gradient"
    dof_map: np.ndarray              # active dof -> mesh node index
    node_to_dof: np.ndarray          # mesh node index -> active dof (-1 if essential)
    trace_L: int | None              # active dof index of the node at L, if any
    sub_elements: np.ndarray         # element indices with support in (alpha, beta)
    G: sp.csr_matrix                 # element gradients on the KV patch (n_sub x n_dof)
    W: np.ndarray                    # element lengths on the KV patch
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_dof(self) -> int:
        return self.M.shape[0]

    def delayed_coupling_matrix(self) -> sp.csr_matrix:
        """C such that the delayed force on V is -C @ eta(rho=1).

        Boundary delay: C = kappa3*delta2 * e_L (n_dof x 1).
        Interior delay: C = delta2 * G' W (n_dof x n_sub), eta stored as
        element gradients.
        """
        cfg = self.cfg
        if self.delay_coupling == "boundary_trace_at_L":
            col = np.zeros((self.n_dof, 1))
            col[self.trace_L, 0] = cfg.kappa3 * cfg.delta2
            return sp.csr_matrix(col)
        return sp.csr_matrix(cfg.delta2 * (self.G.T @ sp.diags(self.W)))

    def inflow_matrix(self) -> sp.csr_matrix:
        """R mapping the velocity vector to the delayed-quantity snapshot."""
        if self.delay_coupling == "boundary_trace_at_L":
            row = np.zeros((1, self.n_dof))
            row[0, self.trace_L] = 1.0
            return sp.csr_matrix(row)
        return self.G


def _essential_nodes(cfg: WaveConfig, mesh: Mesh) -> list:
    if cfg.scenario is Scenario.INTERIOR_KV_INTERIOR_DELAY:
        return [0, mesh.n_nodes - 1]
    return [0]


def assemble(cfg: WaveConfig, mesh: Mesh, lumped: bool = False) -> SemiDiscreteSystem:
    """Assemble mass, stiffness and KV-damping matrices on active dofs."""
    validate_config(cfg)
    nodes = mesh.nodes
    n_nodes = mesh.n_nodes
    h = mesh.element_sizes
    if abs(nodes[mesh.interface_indices[0]] - cfg.alpha) > 0 or abs(
        nodes[mesh.interface_indices[1]] - cfg.beta
    ) > 0:
        raise ValueError("mesh interfaces do not match the configuration")

    mids = 0.5 * (nodes[:-1] + nodes[1:])
    kappa = np.where(
        mids < cfg.alpha, cfg.kappa1, np.where(mids < cfg.beta, cfg.kappa2, cfg.kappa3)
    )
    in_patch = (mids > cfg.alpha) & (mids < cfg.beta)

    M = sp.lil_matrix((n_nodes, n_nodes))
    K = sp.lil_matrix((n_nodes, n_nodes))
    Dmat = sp.lil_matrix((n_nodes, n_nodes))
    for e in range(mesh.n_elements):
        he = h[e]
        i, j = e, e + 1
        ke = np.array([[1.0, -1.0], [-1.0, 1.0]]) / he
        if lumped:
            me = np.array([[he / 2.0, 0.0], [0.0, he / 2.0]])
        else:
            me = he / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])
        for a, ia in enumerate((i, j)):
            for b, ib in enumerate((i, j)):
                M[ia, ib] += me[a, b]
                K[ia, ib] += kappa[e] * ke[a, b]
                if in_patch[e]:
                    Dmat[ia, ib] += ke[a, b]

    essential = _essential_nodes(cfg, mesh)
    keep = np.array([i for i in range(n_nodes) if i not in essential])
    node_to_dof = -np.ones(n_nodes, dtype=int)
    node_to_dof[keep] = np.arange(len(keep))

    def restrict(A):
        return sp.csr_matrix(A.tocsr()[keep][:, keep])

    sub_elements = np.nonzero(in_patch)[0]
    # element gradient operator on the KV patch, acting on active dofs
    rows, cols, vals = [], [], []
    for r, e in enumerate(sub_elements):
        for node, sign in ((e, -1.0), (e + 1, 1.0)):
            d = node_to_dof[node]
            if d >= 0:
                rows.append(r)
                cols.append(d)
                vals.append(sign / h[e])
    G = sp.csr_matrix(
        (vals, (rows, cols)), shape=(len(sub_elements), len(keep))
    )

    boundary = cfg.scenario.boundary_delay
    trace_L = int(node_to_dof[n_nodes - 1]) if boundary else None
    return SemiDiscreteSystem(
        cfg=cfg,
        mesh=mesh,
        M=restrict(M),
        K=restrict(K),
        D=restrict(Dmat),
        boundary_coupling=RobinAtL(cfg.kappa3, cfg.delta3, cfg.delta2)
        if boundary
        else None,
        delay_coupling="boundary_trace_at_L" if boundary else "distributed_gradient",
        dof_map=keep,
        node_to_dof=node_to_dof,
        trace_L=trace_L,
        sub_elements=sub_elements,
        G=G,
        W=h[sub_elements].copy(),
    )


@dataclass(frozen=True)
class GeneratorLayout:
    n_dof: int
    n_rho: int
    n_eta: int            # total transported unknowns
    eta_block: int        # unknowns per rho level (1 or n_sub_elements)

    @property
    def dim(self) -> int:
        return 2 * self.n_dof + self.n_eta

    @property
    def sl_u(self):
        return slice(0, self.n_dof)

    @property
    def sl_v(self):
        return slice(self.n_dof, 2 * self.n_dof)

    @property
    def sl_eta(self):
        return slice(2 * self.n_dof, self.dim)

    def eta_level(self, j: int) -> slice:
        """Slice of the full state holding eta at rho = (j+1)/n_rho."""
        start = 2 * self.n_dof + j * self.eta_block
        return slice(start, start + self.eta_block)


@dataclass
class GeneratorMatrix:
    A: sp.csr_matrix
    P: sp.csr_matrix
    layout: GeneratorLayout
    system: SemiDiscreteSystem
    quadrature: str
    _cache: dict = field(default_factory=dict, repr=False)


def upwind_transport_block(tau: float, n_rho: int) -> sp.csr_matrix:
    """Upwind discretization of eta_t = -eta_rho / tau on n_rho cells.

    Lower-bidiagonal; inflow enters separately through the first row.
    """
    c = n_rho / tau
    main = -c * np.ones(n_rho)
    lower = c * np.ones(n_rho - 1)
    return sp.diags([lower, main], offsets=[-1, 0]).tocsr()


def _eta_weights(cfg: WaveConfig, sysm: SemiDiscreteSystem, n_rho: int, quadrature: str):
    """Per-state energy weights of the transported block."""
    drho = 1.0 / n_rho
    if quadrature == "rectangle":
        rho_w = np.full(n_rho, drho)
    elif quadrature == "trapezoid":
        rho_w = np.full(n_rho, drho)
        rho_w[-1] = 0.5 * drho
    else:
        raise ValueError(f"unknown quadrature '{quadrature}'")
    if sysm.delay_coupling == "boundary_trace_at_L":
        return cfg.tau * rho_w
    # gradient-weighted block; |delta2| = 0 (conservative limit) falls back
    # to a unit weight so P stays positive definite
    wd = cfg.tau * (abs(cfg.delta2) if cfg.delta2 != 0 else 1.0)
    return wd * np.kron(rho_w, sysm.W)


def assemble_generator(
    cfg: WaveConfig,
    mesh: Mesh,
    n_rho: int,
    quadrature: str = "rectangle",
    lumped: bool = False,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> GeneratorMatrix:
    """Augmented first-order generator A and energy weight P.

    State layout: displacement dofs, velocity dofs, then the transported
    delayed quantity at rho = j/n_rho for j = 1..n_rho (newest first).
    """
    if n_rho < 2:
        raise ValueError("n_rho must be >= 2")
    sysm = assemble(cfg, mesh, lumped=lumped)
    n = sysm.n_dof
    blk = 1 if sysm.delay_coupling == "boundary_trace_at_L" else len(sysm.sub_elements)
    layout = GeneratorLayout(n_dof=n, n_rho=n_rho, n_eta=blk * n_rho, eta_block=blk)
    if layout.dim > dim_cap:
        raise ValueError(
            f"generator dimension {layout.dim} exceeds the cap {dim_cap}"
        )

    Minv = np.linalg.inv(sysm.M.toarray())
    damp = cfg.delta1 * sysm.D.toarray()
    if sysm.boundary_coupling is not None:
        bc = sysm.boundary_coupling
        damp[sysm.trace_L, sysm.trace_L] += bc.kappa3 * bc.delta3
    A_vu = -Minv @ sysm.K.toarray()
    A_vv = -Minv @ damp
    C = sysm.delayed_coupling_matrix().toarray()      # n x blk
    A_v_eta_last = -Minv @ C

    # transport rows: d(eta_j)/dt = -(eta_j - eta_{j-1}) * n_rho / tau,
    # with eta_0 taken from the velocity trace
    c = n_rho / cfg.tau
    T = sp.kron(upwind_transport_block(cfg.tau, n_rho), sp.eye(blk))
    inflow = sp.lil_matrix((layout.n_eta, n))
    R = sysm.inflow_matrix()
    inflow[:blk, :] = c * R

    A = sp.lil_matrix((layout.dim, layout.dim))
    A[layout.sl_u, layout.sl_v] = sp.eye(n)
    A[layout.sl_v, layout.sl_u] = A_vu
    A[layout.sl_v, layout.sl_v] = A_vv
    A[layout.sl_v, layout.eta_level(n_rho - 1)] = A_v_eta_last
    A[layout.sl_eta, layout.sl_eta] = T
    A[layout.sl_eta, layout.sl_v] = inflow

    P = sp.block_diag(
        [sysm.K, sysm.M, sp.diags(_eta_weights(cfg, sysm, n_rho, quadrature))]
    )
    return GeneratorMatrix(
        A=A.tocsr(), P=P.tocsr(), layout=layout, system=sysm, quadrature=quadrature
    )


def dump_matrices(sysm: SemiDiscreteSystem, out_dir, gen: GeneratorMatrix | None = None):
    """Write M, K, D (and optionally A) in Matrix Market coordinate format."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, mat in (("M", sysm.M), ("K", sysm.K), ("D", sysm.D)):
        p = out / f"{name}.mtx"
        mmwrite(p, sp.coo_matrix(mat))
        paths.append(p)
    if gen is not None:
        p = out / "A.mtx"
        mmwrite(p, sp.coo_matrix(gen.A))
        paths.append(p)
    return paths
