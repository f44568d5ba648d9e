"""SVG figures of the benchmark run."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

logger = logging.getLogger(__name__)

STRUCTURES = ("ARX", "ARMAX", "OE", "BJ")


def _save(fig, path: Path) -> None:
    # Fixed ids and no date keep the SVG bytes identical across runs.
    with matplotlib.rc_context({"svg.hashsalt": "lpvkit", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.debug(f"Wrote {path}")


def plot_datasets(t: np.ndarray, u: np.ndarray, series: Mapping[str, np.ndarray], path: Path) -> None:
    """Input on top, every output series below."""
    fig, axs = plt.subplots(nrows=2, ncols=1, sharex=True, figsize=(8, 5))
    axs[0].plot(t, u, color="black", linewidth=0.8)
    axs[0].set_ylabel("u [V]")
    axs[0].grid(True)
    for label, y in series.items():
        axs[1].plot(t[: len(y)], y, linewidth=0.8, label=label)
    axs[1].set_xlabel("t [s]")
    axs[1].set_ylabel("theta [rad]")
    axs[1].grid(True)
    axs[1].legend(loc="upper right")
    _save(fig, path)


def plot_bfr(table: pd.DataFrame, path: Path) -> None:
    """Grouped bars of validation BFR per SNR and model structure."""
    snrs = sorted(table["snr_db"].unique())
    width = 0.8 / len(STRUCTURES)
    fig, ax = plt.subplots(figsize=(8, 4))
    x = np.arange(len(snrs))
    for i, structure in enumerate(STRUCTURES):
        rows = table[table["structure"] == structure].set_index("snr_db")
        heights = [float(rows["bfr"].get(s, np.nan)) for s in snrs]
        ax.bar(x + (i - (len(STRUCTURES) - 1) / 2) * width, np.nan_to_num(heights), width, label=structure)
    ax.set_xticks(x)
    ax.set_xticklabels([f"{s:g} dB" for s in snrs])
    ax.set_ylabel("validation BFR [%]")
    ax.set_ylim(0, 100)
    ax.grid(True, axis="y")
    ax.legend(loc="lower right")
    _save(fig, path)


def plot_validation(t: np.ndarray, reference: np.ndarray, outputs: Mapping[str, np.ndarray], path: Path) -> None:
    """Model outputs against the reference output on the validation data."""
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(t, reference, color="black", linewidth=1.2, label="nonlinear system")
    for label, y in outputs.items():
        ax.plot(t, y, linewidth=0.8, linestyle="--", label=label)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("theta [rad]")
    ax.grid(True)
    ax.legend(loc="upper right")
    _save(fig, path)
