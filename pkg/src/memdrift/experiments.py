"""Named experiments behind the CLI: transients, steady profiles, the
relaxation-limit study, electrode-doping and bias sweeps, the sinusoidal
current-voltage sweep, and the lemma verification report."""

import os

import numpy as np

from . import analysis
from .assembly import FULL, REDUCED, State
from .config import ExperimentConfig
from .csvio import write_csv
from .device import BiasProgram, BoundaryData
from .diagnostics import DiagnosticsRecord, l1_trajectory_distance
from .errors import MemdriftError
from .solver import TimeGrid, run, solve_stationary

PROFILE_SCHEMA = ("x", "n", "p", "D", "V", "phi_n", "phi_p", "phi_D")
LIMIT_SCHEMA = ("eps", "l1_distance", "slope")
IV_SCHEMA = ("t", "voltage_UT", "voltage_volts", "current_scaled", "current_Acm2")

LIMIT_EPS = (1e-1, 1e-2, 1e-3, 1e-4)
DE_RATIOS = (0.1, 0.5, 1.0, 2.0, 10.0)
BIAS_VOLTAGES = (0.0, 10.0, 20.0, 40.0)
IV_T_FINAL = 0.03
IV_STEPS = 600


def _profile_rows(state: State, grid):
    n, p, d = state.n, state.p, state.D
    for k in range(grid.n_nodes):
        yield (grid.nodes[k], n[k], p[k], d[k], state.V[k],
               state.phi_n[k], state.phi_p[k], state.phi_D[k])


def _write_profile(state, grid, path):
    return write_csv(_profile_rows(state, grid), PROFILE_SCHEMA, path)


def _write_diagnostics(records, path):
    return write_csv((r.row() for r in records), DiagnosticsRecord.COLUMNS, path)


def _out(cfg, name):
    return os.path.join(cfg.output.dir, name)


def run_transient(cfg: ExperimentConfig, model: str):
    grid = cfg.build_grid()
    device = cfg.build_device(grid)
    bias = cfg.build_bias()
    traj = run(model, grid, device, bias, cfg.build_timegrid(),
               snapshot_stride=cfg.output.stride)
    return [
        _write_profile(traj.final_state, grid, _out(cfg, "profile.csv")),
        _write_diagnostics(traj.records, _out(cfg, "diagnostics.csv")),
    ]


def run_steady(cfg: ExperimentConfig):
    grid = cfg.build_grid()
    device = cfg.build_device(grid)
    state = solve_stationary(REDUCED, grid, device, cfg.build_bias())
    return [_write_profile(state, grid, _out(cfg, "profile.csv"))]


def run_limit_study(cfg: ExperimentConfig):
    grid = cfg.build_grid()
    bias = cfg.build_bias()
    timegrid = cfg.build_timegrid()
    mid = timegrid.steps // 10

    written = []
    reduced = run(REDUCED, grid, cfg.build_device(grid), bias, timegrid)
    written.append(_write_profile(reduced.states[mid], grid,
                                  _out(cfg, "profile_reduced_tmid.csv")))
    written.append(_write_profile(reduced.final_state, grid,
                                  _out(cfg, "profile_reduced_tfinal.csv")))

    distances = []
    for eps in LIMIT_EPS:
        traj = run(FULL, grid, cfg.build_device(grid, eps=eps), bias, timegrid)
        distances.append(l1_trajectory_distance(traj, reduced, "D"))
        tag = f"{eps:.0e}"
        written.append(_write_profile(traj.states[mid], grid,
                                      _out(cfg, f"profile_eps_{tag}_tmid.csv")))
        written.append(_write_profile(traj.final_state, grid,
                                      _out(cfg, f"profile_eps_{tag}_tfinal.csv")))

    slope = float(np.polyfit(np.log(LIMIT_EPS), np.log(distances), 1)[0])
    rows = [(eps, dist, slope) for eps, dist in zip(LIMIT_EPS, distances)]
    written.append(write_csv(rows, LIMIT_SCHEMA, _out(cfg, "limit.csv")))
    return written


def run_de_sweep(cfg: ExperimentConfig):
    grid = cfg.build_grid()
    bias = cfg.build_bias()
    timegrid = cfg.build_timegrid()
    written = []
    rescaled = [np.asarray(grid.nodes)]
    labels = ["x"]
    for ratio in DE_RATIOS:
        d_e = ratio * cfg.device.D_init
        device = cfg.build_device(grid, d_e=d_e)
        traj = run(REDUCED, grid, device, bias, timegrid)
        state = traj.final_state
        written.append(_write_profile(state, grid,
                                      _out(cfg, f"profile_ratio_{ratio:g}.csv")))
        rescaled.append(state.D / d_e)
        labels.append(f"ratio_{ratio:g}")
    rows = np.column_stack(rescaled)
    written.append(write_csv(rows, labels, _out(cfg, "desweep.csv")))
    return written


def run_bias_sweep(cfg: ExperimentConfig):
    grid = cfg.build_grid()
    timegrid = cfg.build_timegrid()
    device = cfg.build_device(grid)
    x = np.asarray(grid.nodes)
    written = []
    potentials = [x]
    densities = [x]
    labels = ["x"]
    for u in BIAS_VOLTAGES:
        bias = BiasProgram.constant(0.0, u)
        traj = run(REDUCED, grid, device, bias, timegrid)
        state = traj.final_state
        v_applied = u * (x - x[0]) / grid.length
        potentials.append(state.V - device.v_bi - v_applied)
        densities.append(state.D)
        labels.append(f"u{u:g}")
        written.append(_write_profile(state, grid,
                                      _out(cfg, f"profile_u{u:g}.csv")))
    written.append(write_csv(np.column_stack(potentials), labels,
                             _out(cfg, "bias_potential.csv")))
    written.append(write_csv(np.column_stack(densities), labels,
                             _out(cfg, "bias_density.csv")))
    return written


def run_iv_sweep(cfg: ExperimentConfig):
    grid = cfg.build_grid()
    device = cfg.build_device(grid)
    t_final = cfg.time.T_f if cfg.is_explicit("time", "T_f") else IV_T_FINAL
    steps = cfg.time.M if cfg.is_explicit("time", "M") else IV_STEPS
    timegrid = TimeGrid(t_final, steps, cfg.time.max_halvings)
    bias = BiasProgram.sinusoidal(cfg.bias.amplitude, cfg.bias.periods,
                                  t_final, u0=cfg.bias.U0)
    traj = run(REDUCED, grid, device, bias, timegrid)
    u_t = device.scaling.U_T
    j0 = device.scaling.J0
    rows = [(r.t, r.applied_voltage, r.applied_voltage * u_t,
             r.current, r.current * j0) for r in traj.records]
    return [
        write_csv(rows, IV_SCHEMA, _out(cfg, "iv.csv")),
        _write_diagnostics(traj.records, _out(cfg, "diagnostics.csv")),
    ]


def run_verify_lemmas(cfg: ExperimentConfig):
    report = analysis.verify_truncation_lemmas()
    conj_gap, conj_samples = analysis.verify_conjugate_bound()
    rows = list(report.rows())
    rows.append(("conjugate_upper_bound", conj_samples, conj_gap, 0.0,
                 "pass" if conj_gap <= 1e-10 else "FAIL"))
    schema = ("check", "samples", "statistic", "reference", "status")
    return [write_csv(rows, schema, _out(cfg, "lemma_report.csv"))]


_RUNNERS = {
    "transient-full": lambda cfg: run_transient(cfg, FULL),
    "transient-reduced": lambda cfg: run_transient(cfg, REDUCED),
    "steady": run_steady,
    "limit-study": run_limit_study,
    "de-sweep": run_de_sweep,
    "bias-sweep": run_bias_sweep,
    "iv-sweep": run_iv_sweep,
    "verify-lemmas": run_verify_lemmas,
}


def run_experiment(cfg: ExperimentConfig):
    """Execute the configured experiment; returns (exit_status, written paths).

    Solver failures are reported with the failing simulation time and a
    nonzero status instead of raising.
    """
    if cfg.experiment not in _RUNNERS:
        raise MemdriftError(f"unknown experiment {cfg.experiment!r}")
    os.makedirs(cfg.output.dir, exist_ok=True)
    try:
        written = _RUNNERS[cfg.experiment](cfg)
    except MemdriftError as exc:
        t = getattr(exc, "t_target", None)
        where = f" at t={t:g}" if t is not None else ""
        print(f"error: {cfg.experiment} failed{where}: {exc}")
        return 1, []
    return 0, written
