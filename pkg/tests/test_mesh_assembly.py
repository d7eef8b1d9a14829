import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kvdelay.assembly import (
    assemble,
    assemble_generator,
    dump_matrices,
    upwind_transport_block,
)
from kvdelay.mesh import build_mesh
from kvdelay.model import Scenario
from tests.conftest import make_config


def test_mesh_contains_interfaces_exactly():
    cfg = make_config(alpha=0.31, beta=0.69)
    mesh = build_mesh(cfg, 50)
    ia, ib = mesh.interface_indices
    assert mesh.nodes[ia] == 0.31
    assert mesh.nodes[ib] == 0.69
    assert mesh.nodes[0] == 0.0 and mesh.nodes[-1] == cfg.L
    assert np.all(np.diff(mesh.nodes) > 0)
    assert abs(mesh.n_elements - 50) <= 3


def test_mesh_hint_too_small():
    with pytest.raises(ValueError):
        build_mesh(make_config(), 3)


def test_mass_and_stiffness_are_spd():
    cfg = make_config()
    sysm = assemble(cfg, build_mesh(cfg, 40))
    M = sysm.M.toarray()
    K = sysm.K.toarray()
    assert np.allclose(M, M.T)
    assert np.allclose(K, K.T)
    assert np.linalg.eigvalsh(M).min() > 0
    assert np.linalg.eigvalsh(K).min() > 0
    # D is PSD and supported only on the KV patch
    D = sysm.D.toarray()
    assert np.linalg.eigvalsh(D).min() > -1e-12
    mesh = sysm.mesh
    outside = [
        i
        for i, node in enumerate(mesh.nodes)
        if (node < cfg.alpha or node > cfg.beta) and sysm.node_to_dof[i] >= 0
    ]
    rows = [sysm.node_to_dof[i] for i in outside if not (cfg.alpha <= mesh.nodes[i] <= cfg.beta)]
    sub = D[np.ix_(rows, rows)]
    assert np.abs(sub).max() == 0.0


def test_row_sums_of_mass_reproduce_length():
    # partition of unity: sum_ij M_ij over ALL nodes = L; with one essential
    # node removed the defect is the mass coupled to it
    cfg = make_config()
    sysm = assemble(cfg, build_mesh(cfg, 64), lumped=True)
    h0 = sysm.mesh.element_sizes[0]
    assert sysm.M.sum() == pytest.approx(cfg.L - h0 / 2.0)


def test_essential_dofs_per_scenario():
    for scn, expect_removed in (
        (Scenario.INTERIOR_KV_BOUNDARY_DELAY, 1),
        (Scenario.BOUNDARY_KV_BOUNDARY_DELAY, 1),
        (Scenario.INTERIOR_KV_INTERIOR_DELAY, 2),
    ):
        cfg = make_config(scn)
        sysm = assemble(cfg, build_mesh(cfg, 30))
        assert sysm.n_dof == sysm.mesh.n_nodes - expect_removed
        if scn.boundary_delay:
            assert sysm.trace_L == sysm.n_dof - 1
        else:
            assert sysm.trace_L is None


def test_upwind_block_eigenvalues():
    """All transport eigenvalues sit at -n_rho/tau (lower bidiagonal)."""
    T = upwind_transport_block(0.5, 8).toarray()
    eigs = np.linalg.eigvals(T)
    assert np.allclose(eigs, -16.0)
    assert np.allclose(np.triu(T, 1), 0.0)


def test_generator_layout_slices():
    cfg = make_config(Scenario.INTERIOR_KV_INTERIOR_DELAY)
    gen = assemble_generator(cfg, build_mesh(cfg, 20), 4)
    lay = gen.layout
    assert lay.dim == 2 * lay.n_dof + lay.n_eta
    assert lay.n_eta == 4 * lay.eta_block
    assert lay.eta_block == len(gen.system.sub_elements)
    assert lay.eta_level(3).stop == lay.dim
    assert gen.A.shape == (lay.dim, lay.dim)
    assert gen.P.shape == (lay.dim, lay.dim)


def test_generator_dim_cap():
    cfg = make_config()
    with pytest.raises(ValueError, match="cap"):
        assemble_generator(cfg, build_mesh(cfg, 200), 8, dim_cap=100)


def test_energy_weight_spd():
    for scn in Scenario:
        cfg = make_config(scn)
        gen = assemble_generator(cfg, build_mesh(cfg, 24), 6)
        evals = np.linalg.eigvalsh(gen.P.toarray())
        assert evals.min() > 0, scn


def test_energy_weight_spd_in_conservative_limit():
    # delta2 = 0 zeroes the natural eta weight; the fallback keeps P SPD
    cfg = make_config(
        Scenario.INTERIOR_KV_INTERIOR_DELAY, delta1=0.0, delta2=0.0, delta3=0.0
    )
    gen = assemble_generator(cfg, build_mesh(cfg, 24), 6)
    assert np.linalg.eigvalsh(gen.P.toarray()).min() > 0


admissible_boundary = st.tuples(
    st.sampled_from([Scenario.INTERIOR_KV_BOUNDARY_DELAY, Scenario.BOUNDARY_KV_BOUNDARY_DELAY]),
    st.floats(min_value=0.1, max_value=2.0),   # delta1
    st.floats(min_value=0.05, max_value=0.95),  # |delta2| < 1 at kappa3=delta3=1
    st.floats(min_value=0.7, max_value=2.0),   # delta3
)


@given(admissible_boundary, st.floats(min_value=0.25, max_value=2.0))
@settings(max_examples=25, deadline=None)
def test_generator_is_dissipative_under_H(params, tau):
    """Sym(P A) negative semidefinite for admissible boundary-delay configs."""
    scn, d1, d2, d3 = params
    cfg = make_config(scn, delta1=d1, delta2=d2, delta3=d3, tau=tau)
    gen = assemble_generator(cfg, build_mesh(cfg, 16), 4)
    PA = (gen.P @ gen.A).toarray()
    S = 0.5 * (PA + PA.T)
    top = np.linalg.eigvalsh(S).max()
    assert top <= 1e-10 * np.abs(S).max()


@given(
    st.floats(min_value=0.1, max_value=2.0),
    st.floats(min_value=0.05, max_value=0.95),
    st.floats(min_value=0.25, max_value=2.0),
)
@settings(max_examples=25, deadline=None)
def test_generator_is_dissipative_under_H1(d1, ratio, tau):
    d2 = ratio * d1  # |delta2| < delta1
    cfg = make_config(Scenario.INTERIOR_KV_INTERIOR_DELAY, delta1=d1, delta2=d2, tau=tau)
    gen = assemble_generator(cfg, build_mesh(cfg, 16), 4)
    PA = (gen.P @ gen.A).toarray()
    S = 0.5 * (PA + PA.T)
    assert np.linalg.eigvalsh(S).max() <= 1e-10 * np.abs(S).max()


def test_conservative_wave_block_is_energy_neutral():
    """With all damping off, Sym(PA) vanishes on the (U, V) block."""
    cfg = make_config(
        Scenario.INTERIOR_KV_INTERIOR_DELAY, delta1=0.0, delta2=0.0, delta3=0.0
    )
    gen = assemble_generator(cfg, build_mesh(cfg, 24), 6)
    n = gen.layout.n_dof
    PA = (gen.P @ gen.A).toarray()[: 2 * n, : 2 * n]
    assert np.abs(PA + PA.T).max() <= 1e-10 * np.abs(PA).max()


def test_delayed_coupling_shapes():
    cfg = make_config()
    sysm = assemble(cfg, build_mesh(cfg, 30))
    C = sysm.delayed_coupling_matrix()
    R = sysm.inflow_matrix()
    assert C.shape == (sysm.n_dof, 1)
    assert R.shape == (1, sysm.n_dof)
    assert C[sysm.trace_L, 0] == cfg.kappa3 * cfg.delta2

    cfg_i = make_config(Scenario.INTERIOR_KV_INTERIOR_DELAY)
    sysm_i = assemble(cfg_i, build_mesh(cfg_i, 30))
    n_sub = len(sysm_i.sub_elements)
    assert sysm_i.delayed_coupling_matrix().shape == (sysm_i.n_dof, n_sub)
    assert sysm_i.inflow_matrix().shape == (n_sub, sysm_i.n_dof)


def test_dump_matrices(tmp_path):
    cfg = make_config()
    sysm = assemble(cfg, build_mesh(cfg, 16))
    gen = assemble_generator(cfg, build_mesh(cfg, 16), 4)
    paths = dump_matrices(sysm, tmp_path, gen=gen)
    assert sorted(p.name for p in paths) == ["A.mtx", "D.mtx", "K.mtx", "M.mtx"]
    for p in paths:
        assert p.stat().st_size > 0
