"""Synthetic CSV fixtures matching the simulator's output schemas."""

import numpy as np
import pytest

PROFILE_HEADER = "x,n,p,D,V,phi_n,phi_p,phi_D"
IV_HEADER = "t,voltage_UT,voltage_volts,current_scaled,current_Acm2"
U_T = 0.026
J0 = 400.0


def write_profile(path, n_nodes=51, scale=1.0):
    x = np.linspace(0.0, 1.0, n_nodes)
    d = scale * (2.5 - 2.0 * np.exp(-((x - 0.5) / 0.2) ** 2))
    n = np.exp(1.0 - x)
    p = np.exp(x - 1.0)
    v = 3.2 - 2.0 * np.sin(np.pi * x)
    lines = [PROFILE_HEADER]
    for k in range(n_nodes):
        lines.append(",".join(f"{val:.17g}" for val in
                              (x[k], n[k], p[k], d[k], v[k], 0.0, 0.0,
                               np.log(d[k]) + v[k])))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_limit_table(path, eps=(1e-1, 1e-2, 1e-3, 1e-4), slope=0.997):
    lines = ["eps,l1_distance,slope"]
    for e in eps:
        lines.append(f"{e:.17g},{3e-4 * e ** slope:.17g},{slope:.17g}")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_iv(path, periods=3, steps_per_period=200, amplitude_ut=100.0,
             constant=None):
    """Memristor-like synthetic trace: I = G(t) U with a smoothly drifting
    conductance, so the loop is exactly pinched at U = 0."""
    lines = [IV_HEADER]
    m = periods * steps_per_period
    for j in range(m + 1):
        t = 0.03 * j / m
        if constant is None:
            u = amplitude_ut * np.sin(2 * np.pi * periods * j / m)
        else:
            u = constant
        g = 1.0 + 0.5 * np.sin(2 * np.pi * periods * j / m - 0.9)
        i = g * u
        lines.append(",".join(f"{val:.17g}" for val in
                              (t, u, u * U_T, i, i * J0)))
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def limit_dir(tmp_path):
    d = tmp_path / "limit"
    d.mkdir()
    for tag, scale in (("eps_1e-01", 1.08), ("eps_1e-02", 1.008),
                       ("reduced", 1.0)):
        write_profile(d / f"profile_{tag}_tfinal.csv", scale=scale)
        write_profile(d / f"profile_{tag}_tmid.csv", scale=scale * 1.1)
    write_limit_table(d / "limit.csv")
    return d


@pytest.fixture
def iv_csv(tmp_path):
    return write_iv(tmp_path / "iv.csv")
