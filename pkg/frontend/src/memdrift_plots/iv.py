"""Current-voltage hysteresis figure from iv.csv."""

import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .csvdata import IV_COLUMNS, load_columns

PINCH_FRACTION = 0.01


@dataclass
class IvPlotResult:
    path: str
    n_loops: int
    pinched: bool
    peak_current: float


def _period_starts(voltage):
    """Indices of upward voltage zero crossings (loop closure points)."""
    starts = [0]
    for j in range(1, voltage.size - 1):
        if voltage[j - 1] < 0.0 <= voltage[j] and voltage[j + 1] > voltage[j]:
            starts.append(j)
    return starts


def _current_at_zero_crossings(voltage, current):
    values = []
    for j in range(voltage.size - 1):
        v0, v1 = voltage[j], voltage[j + 1]
        if v0 == 0.0:
            values.append(abs(current[j]))
        elif v0 * v1 < 0.0:
            w = -v0 / (v1 - v0)
            values.append(abs(current[j] + w * (current[j + 1] - current[j])))
    return values


def plot_iv(iv_csv, out_path) -> IvPlotResult:
    """Current (A/cm^2) versus applied voltage; one closed curve per period,
    with a pinch marker at the origin when the loop passes through it."""
    data = load_columns(iv_csv, IV_COLUMNS)
    volts = data["voltage_volts"]
    amps = data["current_Acm2"]
    peak = float(np.max(np.abs(amps))) if amps.size else 0.0

    starts = _period_starts(volts)
    bounds = starts[1:] + [volts.size - 1]
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    n_loops = 0
    for lo, hi in zip(starts, bounds):
        if hi <= lo:
            continue
        ax.plot(volts[lo:hi + 1], amps[lo:hi + 1],
                label=f"period {n_loops + 1}", alpha=0.8)
        n_loops += 1

    crossing_currents = _current_at_zero_crossings(volts, amps)
    pinched = (peak > 0.0 and len(crossing_currents) > 0
               and max(crossing_currents) <= PINCH_FRACTION * peak)
    if pinched:
        ax.plot([0.0], [0.0], "k*", markersize=14, label="pinched at origin")

    ax.set_xlabel("applied voltage U_L - U_0 [V]")
    ax.set_ylabel("terminal current [A/cm^2]")
    ax.grid(ls=":")
    ax.legend(fontsize=8)
    parent = os.path.dirname(os.fspath(out_path))
    if parent:
        os.makedirs(parent, exist_ok=True)
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return IvPlotResult(path=os.fspath(out_path), n_loops=n_loops,
                        pinched=pinched, peak_current=peak)
