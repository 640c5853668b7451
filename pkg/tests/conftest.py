"""Shared fixtures. The expensive standard-configuration runs are session
scoped so the unit suite and the acceptance suite reuse them."""

from dataclasses import replace

import numpy as np
import pytest

import memdrift as md

STANDARD_N = 501
STANDARD_TF = 0.1
STANDARD_M = 200


@pytest.fixture(scope="session")
def grid501():
    return md.build_uniform_grid(STANDARD_N)


@pytest.fixture(scope="session")
def device_default(grid501):
    return md.DeviceConfig.with_constant_doping(grid501)


@pytest.fixture(scope="session")
def zero_bias():
    return md.BiasProgram.constant(0.0, 0.0)


@pytest.fixture(scope="session")
def timegrid_default():
    return md.TimeGrid(STANDARD_TF, STANDARD_M)


@pytest.fixture(scope="session")
def reduced_equilibrium_run(grid501, device_default, zero_bias, timegrid_default):
    """Reduced model, standard device, zero bias, N=501, M=200, T_f=0.1."""
    return md.run(md.REDUCED, grid501, device_default, zero_bias, timegrid_default)


@pytest.fixture(scope="session")
def full_equilibrium_run(grid501, device_default, zero_bias, timegrid_default):
    """Full model at eps = 1e-2, otherwise the standard configuration."""
    return md.run(md.FULL, grid501, device_default.with_eps(1e-2), zero_bias,
                  timegrid_default)


@pytest.fixture(scope="session")
def limit_study_runs(grid501, device_default, zero_bias, timegrid_default):
    """Full-model runs for eps in {1e-1 ... 1e-4} on the standard grid."""
    eps_values = (1e-1, 1e-2, 1e-3, 1e-4)
    return {eps: md.run(md.FULL, grid501, device_default.with_eps(eps),
                        zero_bias, timegrid_default)
            for eps in eps_values}


@pytest.fixture(scope="session")
def steady_states_by_ratio(grid501, zero_bias):
    """Zero-bias steady profiles for D_e/D_init in {0.1, 10}."""
    out = {}
    for ratio in (0.1, 10.0):
        dev = md.DeviceConfig.with_constant_doping(grid501, d_e=2.5 * ratio)
        out[ratio] = (dev, md.solve_stationary(md.REDUCED, grid501, dev, zero_bias))
    return out


@pytest.fixture(scope="session")
def bias_sweep_runs(grid501, device_default, timegrid_default):
    """Reduced runs at applied voltages {0, 10, 20, 40} thermal units."""
    out = {}
    for ul in (0.0, 10.0, 20.0, 40.0):
        bias = md.BiasProgram.constant(0.0, ul)
        out[ul] = md.run(md.REDUCED, grid501, device_default, bias, timegrid_default)
    return out


@pytest.fixture(scope="session")
def hysteresis_run(grid501, device_default):
    """Sinusoidal drive, amplitude 100, three periods, T_f = 0.03, M = 600."""
    bias = md.BiasProgram.sinusoidal(100.0, 3.0, 0.03)
    return md.run(md.REDUCED, grid501, device_default, bias, md.TimeGrid(0.03, 600))


@pytest.fixture(scope="session")
def wsu_pair(grid501, zero_bias):
    """Two reduced runs from D profiles perturbed by +-20% (equal mass)."""
    x = grid501.nodes
    trajs = []
    for sign in (1.0, -1.0):
        dev = md.DeviceConfig.with_constant_doping(grid501)
        dev = replace(dev, D_init=2.5 * (1.0 + sign * 0.2 * np.cos(2 * np.pi * x)))
        trajs.append(md.run(md.REDUCED, grid501, dev, zero_bias,
                            md.TimeGrid(0.2, 200)))
    return trajs


def acceptance_check(name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"[acceptance] {status} — {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"
