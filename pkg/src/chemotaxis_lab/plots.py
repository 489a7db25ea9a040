"""SVG figure emission for run series.

Plots are a convenience on top of the CSV contract.  Figures are rendered
with a non-interactive backend and without embedded timestamps, so reruns
of the same config produce identical files.
"""

from __future__ import annotations

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

logger = logging.getLogger(__name__)

matplotlib.rcParams["svg.hashsalt"] = "chemotaxis-lab"

#: column -> axis label for the default figure set
DEFAULT_PANELS = {
    "linf": "sup norm of the density",
    "phi_p": "energy (1/p) int (u+1)^p",
    "moment_phi": "moment functional",
}


def render_series_plots(outdir, times, series: dict, log_scale: bool = True,
                        panels: dict = None) -> list:
    """One SVG per tracked panel column present in the series."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    panels = DEFAULT_PANELS if panels is None else panels
    times = np.asarray(times, dtype=float)
    written = []
    for column, label in panels.items():
        if column not in series:
            continue
        values = np.asarray(series[column], dtype=float)
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        ax.plot(times, values, lw=1.2)
        if log_scale and np.nanmin(values) > 0:
            ax.set_yscale("log")
        ax.set_xlabel("t")
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        path = outdir / f"{column}.svg"
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        written.append(path)
    return written
