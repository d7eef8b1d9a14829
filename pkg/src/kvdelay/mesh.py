"""Interface-aligned 1-D meshes.

The wave coefficient and the Kelvin-Voigt indicator jump at alpha and beta,
so both points must coincide exactly with mesh nodes; elements never
straddle a coefficient discontinuity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import WaveConfig, validate_config

__all__ = ["Mesh", "build_mesh"]


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray          # strictly increasing, nodes[0]=0, nodes[-1]=L
    interface_indices: tuple   # (index of alpha, index of beta)
    element_sizes: np.ndarray

    @property
    def n_elements(self) -> int:
        return len(self.element_sizes)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)


def build_mesh(cfg: WaveConfig, n_elements_hint: int) -> Mesh:
    """Quasi-uniform mesh whose node set contains {0, alpha, beta, L}.

    Element counts per subdomain are proportional to subdomain lengths, at
    least one element per nonempty subdomain; the total lands within a few
    elements of the hint.
    """
    validate_config(cfg)
    if n_elements_hint < 4:
        raise ValueError("n_elements_hint must be >= 4")
    breakpoints = [0.0, cfg.alpha, cfg.beta, cfg.L]
    nodes = [0.0]
    for lo, hi in zip(breakpoints[:-1], breakpoints[1:]):
        length = hi - lo
        if length <= 0:
            continue
        n_sub = max(1, round(n_elements_hint * length / cfg.L))
        nodes.extend(np.linspace(lo, hi, n_sub + 1)[1:])
    nodes = np.asarray(nodes)
    i_alpha = int(np.argmin(np.abs(nodes - cfg.alpha)))
    i_beta = int(np.argmin(np.abs(nodes - cfg.beta)))
    # interface positions are exact by construction
    nodes[i_alpha] = cfg.alpha
    nodes[i_beta] = cfg.beta
    return Mesh(
        nodes=nodes,
        interface_indices=(i_alpha, i_beta),
        element_sizes=np.diff(nodes),
    )
