"""Figures for the fast-relaxation limit study: overlaid density profiles per
eps and the log-log convergence plot with the fitted slope annotation."""

import glob
import os
import re
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .csvdata import LIMIT_COLUMNS, PROFILE_COLUMNS, SchemaError, load_columns

# profiles are shown away from the contacts to keep the boundary layers
# from dominating the axes
PROFILE_X_RANGE = (0.1, 0.9)


@dataclass
class LimitPlotResult:
    profiles_path: str
    convergence_path: str
    n_curves: int
    slope: float
    x_range: tuple


def discover_profile_files(directory, when="tfinal"):
    """Map curve label -> profile CSV for one snapshot time ("tmid"/"tfinal")."""
    out = {}
    for path in sorted(glob.glob(os.path.join(directory, f"profile_*_{when}.csv"))):
        name = os.path.basename(path)
        m = re.match(rf"profile_(.+)_{when}\.csv", name)
        label = m.group(1)
        out["reduced" if label == "reduced" else f"eps={label.replace('eps_', '')}"] = path
    return out


def plot_limit_study(profile_files, limit_csv, out_dir,
                     when_label="t = T_f") -> LimitPlotResult:
    """Render the two limit-study figures.

    profile_files: mapping label -> profile CSV path (one per eps plus the
    reduced reference). limit_csv: the (eps, l1_distance, slope) table.
    Returns paths and the slope annotation value (taken from the CSV).
    """
    os.makedirs(out_dir, exist_ok=True)
    lo, hi = PROFILE_X_RANGE

    fig, axes = plt.subplots(3, 1, figsize=(7.0, 9.0), sharex=True)
    fields = ("D", "n", "p")
    titles = ("oxygen vacancy density", "electron density", "hole density")
    n_curves = 0
    for label in sorted(profile_files):
        data = load_columns(profile_files[label], PROFILE_COLUMNS)
        mask = (data["x"] >= lo) & (data["x"] <= hi)
        style = dict(lw=2.0, color="black", ls="--") if label == "reduced" else {}
        for ax, field in zip(axes, fields):
            ax.plot(data["x"][mask], data[field][mask], label=label, **style)
        n_curves += 1
    for ax, title in zip(axes, titles):
        ax.set_ylabel(title)
        ax.grid(ls=":")
    axes[0].legend(fontsize=8)
    axes[0].set_title(f"densities at {when_label}, x in [{lo}, {hi}]")
    axes[-1].set_xlabel("x (scaled)")
    axes[-1].set_xlim(lo, hi)
    profiles_path = os.path.join(out_dir, "limit_profiles.png")
    fig.savefig(profiles_path, dpi=150, bbox_inches="tight")
    plt.close(fig)

    table = load_columns(limit_csv, LIMIT_COLUMNS)
    slopes = set(table["slope"].tolist())
    if len(slopes) != 1:
        raise SchemaError(f"{limit_csv}: slope column must be constant, got {slopes}")
    slope = table["slope"][0]

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.loglog(table["eps"], table["l1_distance"], "o-", label="measured")
    anchor = table["l1_distance"][0] / table["eps"][0] ** slope
    ax.loglog(table["eps"], anchor * table["eps"] ** slope, "--",
              label=f"slope = {slope:.3f}")
    ax.set_xlabel("eps")
    ax.set_ylabel("L1 distance of vacancy densities")
    ax.grid(ls=":", which="both")
    ax.legend()
    ax.annotate(f"fitted slope = {slope:.3f}", xy=(0.05, 0.9),
                xycoords="axes fraction")
    convergence_path = os.path.join(out_dir, "limit_convergence.png")
    fig.savefig(convergence_path, dpi=150, bbox_inches="tight")
    plt.close(fig)

    return LimitPlotResult(profiles_path=profiles_path,
                           convergence_path=convergence_path,
                           n_curves=n_curves, slope=float(slope),
                           x_range=PROFILE_X_RANGE)


def plot_limit_study_dir(directory, out_dir=None) -> LimitPlotResult:
    """Convenience wrapper over a limit-study output directory."""
    files = discover_profile_files(directory)
    if not files:
        raise SchemaError(f"no profile_*_tfinal.csv files under {directory}")
    return plot_limit_study(files, os.path.join(directory, "limit.csv"),
                            out_dir or directory)
