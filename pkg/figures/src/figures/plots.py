"""The four figure kinds, each a function (inputs, out_path) -> None."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import (
    ENERGY_COLUMNS,
    SPECTRUM_COLUMNS,
    SWEEP_COLUMNS,
    FormatError,
    read_json,
    read_table,
    sniff_kind,
)

__all__ = ["KINDS", "energy_decay", "spectrum_scatter", "resolvent_loglog",
           "regime_panel"]


def _split_inputs(inputs):
    """Partition input paths into CSVs (classified by header) and JSON dicts."""
    tables = {"energy": [], "spectrum": [], "sweep": []}
    meta = []
    for p in inputs:
        p = Path(p)
        if p.suffix == ".json":
            meta.append((p, read_json(p)))
        else:
            kind = sniff_kind(p)
            cols = {"energy": ENERGY_COLUMNS, "spectrum": SPECTRUM_COLUMNS,
                    "sweep": SWEEP_COLUMNS}[kind]
            tables[kind].append((p, read_table(p, cols)))
    return tables, meta


def _label(path: Path) -> str:
    # runs are usually out-dir/energy.csv, so the directory is the best name
    return path.parent.name or path.stem


def _require(tables, kind, figure):
    if not tables[kind]:
        raise FormatError(f"{figure} needs at least one {kind} CSV input")
    return tables[kind]


def _save(fig, out_path):
    out = Path(out_path)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)


def _plot_energy(ax, entries):
    for path, tab in entries:
        ax.semilogy(tab["t"], tab["E"], label=_label(path))
    ax.set_xlabel("t")
    ax.set_ylabel("E(t)")
    ax.set_title("energy decay")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize="small")


def _plot_spectrum(ax, entries):
    for path, tab in entries:
        ax.scatter(tab["re"], tab["im"], s=8, alpha=0.7, label=_label(path))
    ax.axvline(0.0, color="k", lw=0.8)
    ax.set_xlabel("Re λ")
    ax.set_ylabel("Im λ")
    ax.set_title("spectrum")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize="small")


def _plot_sweep(ax, entries, meta):
    for path, tab in entries:
        ax.loglog(tab["lambda"], tab["resolvent_norm"], "o-", ms=3,
                  label=_label(path))
    for path, payload in meta:
        if not {"slope", "intercept", "window_lo", "window_hi"} <= set(payload):
            continue
        lams = np.geomspace(payload["window_lo"], payload["window_hi"], 50)
        ax.loglog(
            lams, np.exp(payload["intercept"]) * lams ** payload["slope"],
            "--", lw=1.2,
            label=f"fit slope {payload['slope']:.2f} ({_label(path)})",
        )
    ax.set_xlabel("λ")
    ax.set_ylabel("‖(iλ − A)⁻¹‖")
    ax.set_title("resolvent growth")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize="small")


def energy_decay(inputs, out_path):
    """Semilog energy history, one curve per energy.csv."""
    tables, _ = _split_inputs(inputs)
    entries = _require(tables, "energy", "energy_decay")
    fig, ax = plt.subplots(figsize=(6, 4))
    _plot_energy(ax, entries)
    _save(fig, out_path)


def spectrum_scatter(inputs, out_path):
    """Eigenvalues in the complex plane, one marker set per spectrum.csv."""
    tables, meta = _split_inputs(inputs)
    entries = _require(tables, "spectrum", "spectrum_scatter")
    fig, ax = plt.subplots(figsize=(5, 5))
    _plot_spectrum(ax, entries)
    for path, payload in meta:
        if "spectral_abscissa" in payload:
            ax.axvline(payload["spectral_abscissa"], color="C3", lw=0.8,
                       ls=":", label=f"abscissa {payload['spectral_abscissa']:.2e}")
    ax.legend(fontsize="small")
    _save(fig, out_path)


def resolvent_loglog(inputs, out_path):
    """Log-log resolvent-norm sweep; sweep.json inputs add the fitted line."""
    tables, meta = _split_inputs(inputs)
    entries = _require(tables, "sweep", "resolvent_loglog")
    fig, ax = plt.subplots(figsize=(6, 4))
    _plot_sweep(ax, entries, meta)
    _save(fig, out_path)


def regime_panel(inputs, out_path):
    """Side-by-side energy / spectrum / sweep panel for one or more runs."""
    tables, meta = _split_inputs(inputs)
    _require(tables, "energy", "regime_panel")
    _require(tables, "spectrum", "regime_panel")
    _require(tables, "sweep", "regime_panel")
    fig, axes = plt.subplots(1, 3, figsize=(15, 4), layout="constrained")
    _plot_energy(axes[0], tables["energy"])
    _plot_spectrum(axes[1], tables["spectrum"])
    _plot_sweep(axes[2], tables["sweep"], meta)
    _save(fig, out_path)


KINDS = {
    "energy_decay": energy_decay,
    "spectrum_scatter": spectrum_scatter,
    "resolvent_loglog": resolvent_loglog,
    "regime_panel": regime_panel,
}
