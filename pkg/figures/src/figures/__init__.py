"""Plotting front-end for the wave-equation toolkit's CSV/JSON outputs.

Consumes only the documented file contracts (energy.csv, spectrum.csv,
spectrum.json, sweep.csv, sweep.json); it never imports the simulation
package itself.
"""

__version__ = "0.1.0"

from .io import FormatError  # noqa: F401

__all__ = ["FormatError", "__version__"]
