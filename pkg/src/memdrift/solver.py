"""Implicit Euler time stepping, stationary solves, trajectory management."""

from dataclasses import dataclass, field

import numpy as np

from . import diagnostics
from .assembly import (FULL, REDUCED, State, StepContext, jacobian, residual)
from .device import BiasProgram, BoundaryData, DeviceConfig, Grid, initial_potential
from .errors import (InvalidConfigError, LinearSolveError, NewtonError,
                     StationarySolveError, StepError)
from .numerics import NewtonOptions, newton_solve

# clamp Newton updates to +-40 thermal voltages per iteration: keeps the
# exponentials representable while a depleted species' quasi-Fermi level
# is effectively undetermined
_DEFAULT_OPTS = NewtonOptions(step_clamp=40.0)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid on [0, T_f] with a halving budget for failed steps."""

    t_final: float
    steps: int
    max_halvings: int = 10

    def __post_init__(self):
        if self.t_final < 0:
            raise InvalidConfigError("t_final must be nonnegative")
        if self.steps < 1:
            raise InvalidConfigError("need at least one step")
        if self.max_halvings < 0:
            raise InvalidConfigError("max_halvings must be nonnegative")

    @property
    def dt(self) -> float:
        return self.t_final / self.steps

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_final, self.steps + 1)


@dataclass
class Trajectory:
    """Snapshots, per-field density histories and per-step diagnostics."""

    grid: Grid
    times: np.ndarray
    snapshot_times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    records: list = field(default_factory=list)
    _hist: dict = field(default_factory=dict)

    def history(self, field_name: str) -> np.ndarray:
        return self._hist[field_name]

    @property
    def final_state(self) -> State:
        return self.states[-1]


def initial_state(grid: Grid, device: DeviceConfig, bias: BiasProgram,
                  t: float = 0.0, newton_opts: NewtonOptions = None) -> State:
    """Initial data: V from the nonlinear Poisson solve, D from the device
    profile, and quasi-Fermi potentials interpolating the contact values
    (identically zero at zero bias, matching n = exp(V), p = exp(-V))."""
    if np.any(device.D_init <= 0):
        raise InvalidConfigError(
            "quasi-Fermi parametrization needs strictly positive D_init")
    v = initial_potential(grid, device, bias, t, newton_opts)
    bd = BoundaryData.at_time(device, bias, t)
    x = grid.nodes
    phi = bd.phi_left + (bd.phi_right - bd.phi_left) * (x - x[0]) / grid.length
    return State(phi_n=phi.copy(), phi_p=phi.copy(),
                 phi_D=np.log(device.D_init) + v, V=v)


def _preset_boundary(vec: np.ndarray, boundary: BoundaryData) -> np.ndarray:
    """Pin the Dirichlet entries of the initial iterate so those rows stay
    exactly zero along every damped Newton direction."""
    v = vec.copy()
    v[0] = boundary.phi_left
    v[1] = boundary.phi_left
    v[3] = boundary.v_left
    v[-4] = boundary.phi_right
    v[-3] = boundary.phi_right
    v[-1] = boundary.v_right
    return v


def _newton_step(state: State, ctx: StepContext, grid: Grid, device: DeviceConfig,
                 opts: NewtonOptions):
    def res(vec):
        return residual(State.from_vector(vec), ctx, grid, device)

    def jac(vec):
        return jacobian(State.from_vector(vec), ctx, grid, device)

    x0 = _preset_boundary(state.as_vector(), ctx.boundary)
    result = newton_solve(res, jac, x0, opts)
    return State.from_vector(result.x), result.iterations


def step(state: State, ctx: StepContext, grid: Grid, device: DeviceConfig,
         bias: BiasProgram = None, newton_opts: NewtonOptions = None,
         max_halvings: int = 10):
    """Advance one implicit Euler step; on Newton failure the step is halved
    (recombining sub-steps) up to max_halvings. Returns (state, newton_iters).

    The reported time grid is unaffected by sub-stepping. When no bias
    program is supplied, sub-steps reuse the context's boundary values.
    """
    opts = newton_opts or _DEFAULT_OPTS
    try:
        return _newton_step(state, ctx, grid, device, opts)
    except (NewtonError, LinearSolveError) as exc:
        if max_halvings <= 0:
            raise StepError(
                f"step to t={ctx.t_new} failed with dt={ctx.dt}: {exc}",
                t_target=ctx.t_new, dt=ctx.dt,
                residual_norm=getattr(exc, "residual_norm", None)) from exc
    half = 0.5 * ctx.dt
    t_mid = ctx.t_new - half
    if bias is not None:
        bd_mid = BoundaryData.at_time(device, bias, t_mid)
    else:
        bd_mid = ctx.boundary
    ctx1 = StepContext(prev=ctx.prev, dt=half, t_new=t_mid,
                       boundary=bd_mid, model=ctx.model)
    mid_state, it1 = step(state, ctx1, grid, device, bias, newton_opts,
                          max_halvings - 1)
    ctx2 = StepContext(prev=mid_state, dt=half, t_new=ctx.t_new,
                       boundary=ctx.boundary, model=ctx.model)
    new_state, it2 = step(mid_state, ctx2, grid, device, bias, newton_opts,
                          max_halvings - 1)
    return new_state, it1 + it2


def run(model: str, grid: Grid, device: DeviceConfig, bias: BiasProgram,
        timegrid: TimeGrid, snapshot_stride: int = 1,
        newton_opts: NewtonOptions = None, start: State = None) -> Trajectory:
    """Integrate from the constructed initial state to T_f, collecting a
    DiagnosticsRecord each step. T_f = 0 yields the single initial snapshot."""
    state = start if start is not None else initial_state(grid, device, bias)
    times = timegrid.times() if timegrid.t_final > 0 else np.array([0.0])
    n_steps = times.size - 1

    hist = {name: np.empty((times.size, grid.n_nodes)) for name in ("n", "p", "D")}
    traj = Trajectory(grid=grid, times=times, _hist=hist)

    bd0 = BoundaryData.at_time(device, bias, 0.0)
    traj.records.append(diagnostics.compute_record(state, grid, device, bd0, 0.0))
    traj.snapshot_times.append(0.0)
    traj.states.append(state.copy())
    for name in ("n", "p", "D"):
        hist[name][0] = getattr(state, name)

    for m in range(1, n_steps + 1):
        t_new = times[m]
        bd = BoundaryData.at_time(device, bias, t_new)
        ctx = StepContext(prev=state, dt=times[m] - times[m - 1], t_new=t_new,
                          boundary=bd, model=model)
        try:
            state, iters = step(state, ctx, grid, device, bias, newton_opts,
                                timegrid.max_halvings)
        except StepError as exc:
            raise StepError(f"run failed at t={t_new}: {exc}",
                            t_target=t_new, dt=ctx.dt,
                            residual_norm=exc.residual_norm) from exc
        traj.records.append(
            diagnostics.compute_record(state, grid, device, bd, t_new, iters))
        for name in ("n", "p", "D"):
            hist[name][m] = getattr(state, name)
        if m % snapshot_stride == 0 or m == n_steps:
            traj.snapshot_times.append(t_new)
            traj.states.append(state.copy())
    return traj


_STATIONARY_DT0 = 1e-3
_STATIONARY_DT_MAX = 1e2
_STATIONARY_STATE_TOL = 1e-12
_STATIONARY_RES_TOL = 1e-8


def solve_stationary(model: str, grid: Grid, device: DeviceConfig,
                     bias: BiasProgram, t: float = 0.0, start: State = None,
                     newton_opts: NewtonOptions = None,
                     max_rounds: int = 120) -> State:
    """Steady state via implicit Euler with a geometrically growing step.

    The stationary system alone determines D only up to its total mass; each
    implicit step conserves mass exactly, so the ramp converges to the steady
    state carrying the initial D mass. Results are eps-independent.
    """
    opts = newton_opts or _DEFAULT_OPTS
    state = start if start is not None else initial_state(grid, device, bias, t)
    bd = BoundaryData.at_time(device, bias, t)
    dt = _STATIONARY_DT0
    last_failure = None
    for _ in range(max_rounds):
        ctx = StepContext(prev=state, dt=dt, t_new=t, boundary=bd, model=model)
        try:
            new_state, _ = _newton_step(state, ctx, grid, device, opts)
        except (NewtonError, LinearSolveError) as exc:
            last_failure = exc
            dt *= 0.25
            if dt < 1e-12:
                raise StationarySolveError(
                    f"stationary continuation stalled: {exc}") from exc
            continue
        delta = float(np.max(np.abs(new_state.as_vector() - state.as_vector())))
        state = new_state
        if delta <= _STATIONARY_STATE_TOL and dt >= _STATIONARY_DT_MAX:
            ctx_inf = StepContext(prev=state, dt=np.inf, t_new=t, boundary=bd,
                                  model=model)
            res_norm = float(np.max(np.abs(residual(state, ctx_inf, grid, device))))
            if res_norm > _STATIONARY_RES_TOL:
                raise StationarySolveError(
                    f"stationary residual {res_norm:.3e} above tolerance")
            return state
        dt = min(dt * 10.0, _STATIONARY_DT_MAX)
    raise StationarySolveError(
        f"no stationary convergence after {max_rounds} rounds"
        + (f" (last failure: {last_failure})" if last_failure else ""))
