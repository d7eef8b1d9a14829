#!/usr/bin/env python3
"""Run the full verdict pipeline for one canonical config per scenario.

Writes results/<config-stem>/{energy.csv, spectrum.csv, spectrum.json,
sweep.csv, sweep.json, verdict.json, manifest.json} and prints a summary
table.  The default resolution matches the acceptance gate (about a minute
for the interior-delay scenario); --quick trades fidelity for speed and is
expected to leave the polynomial slopes underresolved.
"""

import argparse
import json
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from kvdelay.cli import run_command  # noqa: E402

CANONICAL = [
    "interior_kv_boundary_delay_2.json",
    "boundary_kv_boundary_delay_2.json",
    "interior_kv_interior_delay_1.json",
]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(REPO / "results"))
    ap.add_argument("--quick", action="store_true",
                    help="coarse smoke run (underresolves the polynomial slopes)")
    args = ap.parse_args()

    n, sweep_n_rho, spectrum_n = (80, 16, 48) if args.quick else (200, 48, 100)
    rows = []
    for name in CANONICAL:
        cfg = REPO / "configs" / name
        out = Path(args.out) / cfg.stem
        rc = run_command([
            "verdict", str(cfg),
            "--n", str(n), "--sweep-n-rho", str(sweep_n_rho),
            "--spectrum-n", str(spectrum_n), "--out", str(out),
        ])
        if rc != 0:
            print(f"verdict failed for {name} (exit {rc})", file=sys.stderr)
            return rc
        v = json.loads((out / "verdict.json").read_text())
        rows.append((cfg.stem, v))

    print(f"{'config':<34}{'expected':<14}{'observed':<14}{'slope':>8}{'abscissa':>12}  agree")
    for stem, v in rows:
        print(
            f"{stem:<34}{v['expected_regime']:<14}{v['observed_regime']:<14}"
            f"{v['sweep_slope']:>8.3f}{v['spectral_abscissa']:>12.3e}  {v['agreement']}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
