"""Discrete free energies, entropy production, relative free energy, masses,
terminal current, and trajectory-distance functionals.

Reference profiles (V-bar and the contact densities) are the affine-in-x
interpolants of the Dirichlet contact values; gradient terms use edge
differences weighted by edge lengths, matching the finite-volume stencil.
"""

from dataclasses import dataclass

import numpy as np

from .assembly import State
from .device import BoundaryData, DeviceConfig, Grid
from .errors import ComparisonError, DiagnosticError
from .numerics import sg_flux_n, sg_flux_pD


@dataclass
class DiagnosticsRecord:
    t: float
    H_full: float
    H_reduced: float
    entropy_production_D: float
    mass_D: float
    current: float
    applied_voltage: float
    newton_iters: int

    COLUMNS = ("t", "H_full", "H_reduced", "entropy_production_D",
               "mass_D", "current", "applied_voltage", "newton_iters")

    def row(self):
        return [self.t, self.H_full, self.H_reduced, self.entropy_production_D,
                self.mass_D, self.current, self.applied_voltage, self.newton_iters]


def f0(s):
    """f0(s) = (s-1) e^s + 1, the convex nonnegative weight of the reduced
    free energy; series near 0 keeps tiny values exactly nonnegative."""
    s = np.asarray(s, dtype=float)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    out = np.empty_like(s)
    small = np.abs(s) < 1e-3
    ss = s[small]
    # sum_{k>=2} s^k (k-1)/k!
    out[small] = ss * ss * (0.5 + ss * (1.0 / 3.0 + ss * (0.125 + ss / 30.0)))
    rest = ~small
    with np.errstate(over="ignore"):
        out[rest] = (s[rest] - 1.0) * np.exp(s[rest]) + 1.0
    return float(out[0]) if scalar else out


def kl_term(x, y):
    """x log(x/y) - x + y >= 0 elementwise, stable (and nonnegative) near x = y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0) or np.any(x < 0):
        raise DiagnosticError("kl_term needs x >= 0, y > 0")
    r = x / y
    out = np.empty_like(r)
    u = r - 1.0
    small = np.abs(u) < 1e-3
    uu = u[small]
    # (1+u)log(1+u) - u = u^2/2 - u^3/6 + u^4/12 - u^5/20
    out[small] = uu * uu * (0.5 + uu * (-1.0 / 6.0 + uu * (1.0 / 12.0 - uu / 20.0)))
    rest = ~small
    rr = r[rest]
    with np.errstate(divide="ignore", invalid="ignore"):
        val = rr * np.log(rr) - rr + 1.0
    val = np.where(rr == 0.0, 1.0, val)
    out[rest] = val
    return y * out


def _affine_reference(grid: Grid, boundary: BoundaryData):
    """V-bar, n-bar, p-bar as affine interpolants of the contact values."""
    x = grid.nodes
    frac = (x - x[0]) / grid.length
    v_bar = boundary.v_left + (boundary.v_right - boundary.v_left) * frac
    n_left = np.exp(boundary.v_left - boundary.phi_left)
    n_right = np.exp(boundary.v_right - boundary.phi_right)
    p_left = np.exp(boundary.phi_left - boundary.v_left)
    p_right = np.exp(boundary.phi_right - boundary.v_right)
    n_bar = n_left + (n_right - n_left) * frac
    p_bar = p_left + (p_right - p_left) * frac
    return v_bar, n_bar, p_bar


def _gradient_energy(grid: Grid, lam2: float, dv):
    h = grid.edge_lengths
    return 0.5 * lam2 * float(np.sum(h * (dv / h) ** 2))


def free_energy_full(state: State, boundary: BoundaryData, grid: Grid,
                     device: DeviceConfig) -> float:
    """H = int n(log(n/n-bar)-1) + p(log(p/p-bar)-1) + D(log D - 1 + V-bar)
    + (lambda^2/2)|grad(V - V-bar)|^2, midpoint quadrature on cells."""
    n, p, d = state.n, state.p, state.D
    if np.any(n <= 0) or np.any(p <= 0) or np.any(d <= 0):
        raise DiagnosticError("free energy needs positive densities")
    v_bar, n_bar, p_bar = _affine_reference(grid, boundary)
    w = grid.cell_widths
    entropy = np.sum(w * (n * (np.log(n / n_bar) - 1.0)
                          + p * (np.log(p / p_bar) - 1.0)
                          + d * (np.log(d) - 1.0 + v_bar)))
    dv = np.diff(state.V - v_bar)
    return float(entropy) + _gradient_energy(grid, device.lambda2, dv)


def free_energy_reduced(state: State, boundary: BoundaryData, grid: Grid,
                        device: DeviceConfig) -> float:
    """H0 = int D log(D/D-bar) - D + n-bar f0(V-V-bar) + p-bar f0(V-bar-V)
    + (lambda^2/2)|grad(V - V-bar)|^2, with D-bar = exp(-V-bar)."""
    d = state.D
    if np.any(d <= 0):
        raise DiagnosticError("free energy needs positive densities")
    v_bar, n_bar, p_bar = _affine_reference(grid, boundary)
    w = grid.cell_widths
    d_bar = np.exp(-v_bar)
    s = state.V - v_bar
    entropy = np.sum(w * (d * np.log(d / d_bar) - d
                          + n_bar * f0(s) + p_bar * f0(-s)))
    dv = np.diff(s)
    return float(entropy) + _gradient_energy(grid, device.lambda2, dv)


def relative_free_energy(state: State, reference: State, grid: Grid,
                         device: DeviceConfig) -> float:
    """H[(D,V)|(D0,V0)] = int D log(D/D0) - D + D0
    + (lambda^2/2)|grad(V-V0)|^2 + n0 f0(V-V0) + p0 f0(V0-V) >= 0."""
    d, d0 = state.D, reference.D
    if np.any(d <= 0) or np.any(d0 <= 0):
        raise DiagnosticError("relative free energy needs positive densities")
    w = grid.cell_widths
    h1 = np.sum(w * kl_term(d, d0))
    s = state.V - reference.V
    n0, p0 = reference.n, reference.p
    h2 = np.sum(w * (n0 * f0(s) + p0 * f0(-s)))
    dv = np.diff(s)
    return float(h1 + h2) + _gradient_energy(grid, device.lambda2, dv)


def entropy_production_D(state: State, grid: Grid) -> float:
    """Discrete int D |grad(log D + V)|^2 with harmonic-mean density weights;
    log D + V is the vacancy quasi-Fermi potential."""
    d = state.D
    h = grid.edge_lengths
    d_harm = 2.0 * d[:-1] * d[1:] / (d[:-1] + d[1:])
    dphi = np.diff(state.phi_D)
    return float(np.sum(h * d_harm * (dphi / h) ** 2))


def edge_fluxes(state: State, grid: Grid):
    """Electron, hole and vacancy edge-flux arrays over all edges."""
    from .numerics import edge_fluxes_n, edge_fluxes_pD

    h = grid.edge_lengths
    jn = edge_fluxes_n(state.V, state.phi_n, h)
    jp = edge_fluxes_pD(state.V, state.phi_p, h)
    jd = edge_fluxes_pD(state.V, state.phi_D, h)
    return jn, jp, jd


def terminal_current(state: State, grid: Grid, device: DeviceConfig) -> float:
    """Scaled contact current J_n(0) + J_p(0); multiply by scaling.J0 for A/cm^2."""
    h = float(grid.edge_lengths[0])
    jn = sg_flux_n(state.V[0], state.V[1], state.phi_n[0], state.phi_n[1], h)
    jp = sg_flux_pD(state.V[0], state.V[1], state.phi_p[0], state.phi_p[1], h)
    return float(jn + jp)


def mass_D(state: State, grid: Grid) -> float:
    return float(np.sum(grid.cell_widths * state.D))


def lambda_eps(boundary: BoundaryData, grid: Grid, eps: float) -> float:
    """(1/2 eps)(|grad(log n-bar - V-bar)|^2 + |grad(log p-bar + V-bar)|^2),
    sup norms over the affine reference; zero for equilibrium contact data."""
    v_bar, n_bar, p_bar = _affine_reference(grid, boundary)
    h = grid.edge_lengths
    g_n = np.diff(np.log(n_bar) - v_bar) / h
    g_p = np.diff(np.log(p_bar) + v_bar) / h
    return 0.5 / eps * (float(np.max(np.abs(g_n))) ** 2
                        + float(np.max(np.abs(g_p))) ** 2)


def compute_record(state: State, grid: Grid, device: DeviceConfig,
                   boundary: BoundaryData, t: float,
                   newton_iters: int = 0) -> DiagnosticsRecord:
    rec = DiagnosticsRecord(
        t=t,
        H_full=free_energy_full(state, boundary, grid, device),
        H_reduced=free_energy_reduced(state, boundary, grid, device),
        entropy_production_D=entropy_production_D(state, grid),
        mass_D=mass_D(state, grid),
        current=terminal_current(state, grid, device),
        applied_voltage=boundary.phi_right - boundary.phi_left,
        newton_iters=newton_iters,
    )
    if rec.mass_D <= 0 or not all(np.isfinite(v) for v in rec.row()):
        raise DiagnosticError("diagnostics record has non-finite or nonpositive mass")
    return rec


def l1_trajectory_distance(traj_a, traj_b, field: str = "D") -> float:
    """L1(Omega x (0, T_f)) distance between two trajectories of identical
    grids and time grids: sum_m dt sum_k |w_k| |u_A - u_B|."""
    if field not in ("n", "p", "D"):
        raise ComparisonError(f"unknown field {field!r}")
    ga, gb = traj_a.grid, traj_b.grid
    if ga.n_nodes != gb.n_nodes or not np.allclose(ga.nodes, gb.nodes, atol=0, rtol=0):
        raise ComparisonError("trajectories use different grids")
    ta, tb = np.asarray(traj_a.times), np.asarray(traj_b.times)
    if ta.shape != tb.shape or not np.array_equal(ta, tb):
        raise ComparisonError("trajectories use different time grids")
    ha = traj_a.history(field)
    hb = traj_b.history(field)
    dts = np.diff(ta)
    w = ga.cell_widths
    space = np.abs(ha[1:] - hb[1:]) @ w
    return float(np.sum(dts * space))
