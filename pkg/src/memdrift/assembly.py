"""Residual vectors and analytic Jacobians for the reduced and full
three-species systems in quasi-Fermi variables.

Unknowns are interleaved per node as (phi_n, phi_p, phi_D, V), giving an
exactly block-tridiagonal Jacobian with 4x4 blocks. Row order per interior
node: electron continuity, hole continuity, vacancy continuity (implicit
Euler), Poisson. Boundary nodes carry Dirichlet rows for phi_n, phi_p, V and
the conservative no-flux vacancy row.
"""

from dataclasses import dataclass

import numpy as np

from .device import BoundaryData, DeviceConfig, Grid
from .errors import AssemblyError
from .numerics import BlockTridiagonalSystem, bernoulli, dbernoulli

REDUCED = "reduced"
FULL = "full"

# per-node unknown slots
IN, IP, ID, IV = 0, 1, 2, 3


@dataclass
class State:
    """Per-node quasi-Fermi potentials and electric potential.

    Densities are the derived exponentials n = e^{V-phi_n}, p = e^{phi_p-V},
    D = e^{phi_D-V}, strictly positive by construction.
    """

    phi_n: np.ndarray
    phi_p: np.ndarray
    phi_D: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        self.phi_n = np.asarray(self.phi_n, dtype=float)
        self.phi_p = np.asarray(self.phi_p, dtype=float)
        self.phi_D = np.asarray(self.phi_D, dtype=float)
        self.V = np.asarray(self.V, dtype=float)

    @property
    def n(self):
        return np.exp(self.V - self.phi_n)

    @property
    def p(self):
        return np.exp(self.phi_p - self.V)

    @property
    def D(self):
        return np.exp(self.phi_D - self.V)

    def as_vector(self) -> np.ndarray:
        return np.column_stack([self.phi_n, self.phi_p, self.phi_D, self.V]).ravel()

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "State":
        m = np.asarray(vec, dtype=float).reshape(-1, 4)
        return cls(phi_n=m[:, IN].copy(), phi_p=m[:, IP].copy(),
                   phi_D=m[:, ID].copy(), V=m[:, IV].copy())

    def copy(self) -> "State":
        return State(self.phi_n.copy(), self.phi_p.copy(),
                     self.phi_D.copy(), self.V.copy())


@dataclass
class StepContext:
    """One implicit Euler step: previous state, step size, bias at the new time.

    dt = inf gives the time-independent (stationary) residual.
    model is "reduced" or "full"; the full model reads eps from the device.
    """

    prev: State
    dt: float
    t_new: float
    boundary: BoundaryData
    model: str = REDUCED

    def __post_init__(self):
        if not self.dt > 0:
            raise AssemblyError(f"dt must be positive, got {self.dt}")
        if self.model not in (REDUCED, FULL):
            raise AssemblyError(f"unknown model {self.model!r}")

    @property
    def inv_dt(self) -> float:
        return 0.0 if np.isinf(self.dt) else 1.0 / self.dt


def _check_finite(state: State):
    for arr in (state.phi_n, state.phi_p, state.phi_D, state.V):
        if not np.all(np.isfinite(arr)):
            raise AssemblyError("state contains non-finite entries")


def _densities(state: State):
    with np.errstate(over="ignore"):
        return state.n, state.p, state.D


def _edge_data(state: State, h):
    """Bernoulli factors and density-weighted flux terms on all edges."""
    v = state.V
    dv = v[1:] - v[:-1]
    bp = bernoulli(dv)       # B(V_{k+1} - V_k)
    bm = bernoulli(-dv)      # B(V_k - V_{k+1})
    return dv, bp, bm


def _assemble_residual(x: State, ctx: StepContext, grid: Grid,
                       device: DeviceConfig, full: bool) -> np.ndarray:
    _check_finite(x)
    n_nodes = grid.n_nodes
    w = grid.cell_widths
    h = grid.edge_lengths
    bd = ctx.boundary
    inv_dt = ctx.inv_dt
    eps = device.eps

    with np.errstate(over="ignore"):
        n, p, d = _densities(x)
        dv, bp, bm = _edge_data(x, h)
        jn = (bm * n[:-1] - bp * n[1:]) / h
        jp = (bp * p[:-1] - bm * p[1:]) / h
        jd = (bp * d[:-1] - bm * d[1:]) / h

        n_prev, p_prev, d_prev = _densities(ctx.prev)

        r = np.zeros((n_nodes, 4))
        # continuity rows, interior nodes
        r[1:-1, IN] = jn[1:] - jn[:-1]
        r[1:-1, IP] = jp[1:] - jp[:-1]
        if full:
            r[1:-1, IN] += eps * w[1:-1] * (n[1:-1] - n_prev[1:-1]) * inv_dt
            r[1:-1, IP] += eps * w[1:-1] * (p[1:-1] - p_prev[1:-1]) * inv_dt
        # vacancy rows: implicit Euler everywhere, zero flux through the contacts
        r[1:-1, ID] = w[1:-1] * (d[1:-1] - d_prev[1:-1]) * inv_dt + (jd[1:] - jd[:-1])
        r[0, ID] = w[0] * (d[0] - d_prev[0]) * inv_dt + jd[0]
        r[-1, ID] = w[-1] * (d[-1] - d_prev[-1]) * inv_dt - jd[-1]
        # Poisson rows
        flux_v = device.lambda2 * dv / h
        r[1:-1, IV] = (flux_v[1:] - flux_v[:-1]
                       - w[1:-1] * (n[1:-1] - p[1:-1] - d[1:-1] + device.A[1:-1]))
        # Dirichlet rows
        r[0, IN] = x.phi_n[0] - bd.phi_left
        r[0, IP] = x.phi_p[0] - bd.phi_left
        r[0, IV] = x.V[0] - bd.v_left
        r[-1, IN] = x.phi_n[-1] - bd.phi_right
        r[-1, IP] = x.phi_p[-1] - bd.phi_right
        r[-1, IV] = x.V[-1] - bd.v_right

    return r.ravel()


def residual_reduced(x: State, ctx: StepContext, grid: Grid,
                     device: DeviceConfig) -> np.ndarray:
    """Stationary n/p continuity, implicit-Euler vacancy transport, Poisson."""
    return _assemble_residual(x, ctx, grid, device, full=False)


def residual_full(x: State, ctx: StepContext, grid: Grid,
                  device: DeviceConfig) -> np.ndarray:
    """Full eps-scaled transient system; all three species step implicitly."""
    return _assemble_residual(x, ctx, grid, device, full=True)


def residual(x: State, ctx: StepContext, grid: Grid, device: DeviceConfig) -> np.ndarray:
    return _assemble_residual(x, ctx, grid, device, full=(ctx.model == FULL))


def jacobian(x: State, ctx: StepContext, grid: Grid,
             device: DeviceConfig) -> BlockTridiagonalSystem:
    """Analytic linearization of residual() at x, block-tridiagonal in the
    interleaved (phi_n, phi_p, phi_D, V) ordering."""
    _check_finite(x)
    full = ctx.model == FULL
    n_nodes = grid.n_nodes
    w = grid.cell_widths
    h = grid.edge_lengths
    lam2 = device.lambda2
    inv_dt = ctx.inv_dt
    eps = device.eps

    with np.errstate(over="ignore"):
        n, p, d = _densities(x)
        dv, bp, bm = _edge_data(x, h)
        dbp = dbernoulli(dv)
        dbm = dbernoulli(-dv)

        # electron edge flux jn = (bm*n_l - bp*n_r)/h derivatives
        jn_dphi_l = -bm * n[:-1] / h
        jn_dphi_r = bp * n[1:] / h
        jn_dv_l = (dbm * n[:-1] + bm * n[:-1] + dbp * n[1:]) / h
        jn_dv_r = (-dbm * n[:-1] - dbp * n[1:] - bp * n[1:]) / h

        def _pd_flux_derivs(u):
            # ju = (bp*u_l - bm*u_r)/h for u in {p, D}
            dphi_l = bp * u[:-1] / h
            dphi_r = -bm * u[1:] / h
            dv_l = (-dbp * u[:-1] - bp * u[:-1] - dbm * u[1:]) / h
            dv_r = (dbp * u[:-1] + dbm * u[1:] + bm * u[1:]) / h
            return dphi_l, dphi_r, dv_l, dv_r

        jp_dphi_l, jp_dphi_r, jp_dv_l, jp_dv_r = _pd_flux_derivs(p)
        jd_dphi_l, jd_dphi_r, jd_dv_l, jd_dv_r = _pd_flux_derivs(d)

    diag = np.zeros((n_nodes, 4, 4))
    lower = np.zeros((n_nodes - 1, 4, 4))
    upper = np.zeros((n_nodes - 1, 4, 4))

    # continuity row of node k is j[k] - j[k-1]; edge e couples nodes e, e+1
    def _fill_continuity(row, col, dphi_l, dphi_r, dv_l, dv_r):
        diag[1:-1, row, col] = dphi_l[1:] - dphi_r[:-1]
        diag[1:-1, row, IV] += dv_l[1:] - dv_r[:-1]
        upper[1:, row, col] = dphi_r[1:]
        upper[1:, row, IV] += dv_r[1:]
        lower[:-1, row, col] = -dphi_l[:-1]
        lower[:-1, row, IV] += -dv_l[:-1]

    _fill_continuity(IN, IN, jn_dphi_l, jn_dphi_r, jn_dv_l, jn_dv_r)
    _fill_continuity(IP, IP, jp_dphi_l, jp_dphi_r, jp_dv_l, jp_dv_r)
    _fill_continuity(ID, ID, jd_dphi_l, jd_dphi_r, jd_dv_l, jd_dv_r)

    # implicit Euler terms: dD/dphi_D = D, dD/dV = -D (likewise n, p)
    diag[1:-1, ID, ID] += w[1:-1] * inv_dt * d[1:-1]
    diag[1:-1, ID, IV] += -w[1:-1] * inv_dt * d[1:-1]
    if full:
        diag[1:-1, IN, IN] += -eps * w[1:-1] * inv_dt * n[1:-1]
        diag[1:-1, IN, IV] += eps * w[1:-1] * inv_dt * n[1:-1]
        diag[1:-1, IP, IP] += eps * w[1:-1] * inv_dt * p[1:-1]
        diag[1:-1, IP, IV] += -eps * w[1:-1] * inv_dt * p[1:-1]

    # Poisson rows
    diag[1:-1, IV, IV] = (-lam2 * (1.0 / h[1:] + 1.0 / h[:-1])
                          - w[1:-1] * (n[1:-1] + p[1:-1] + d[1:-1]))
    diag[1:-1, IV, IN] = w[1:-1] * n[1:-1]
    diag[1:-1, IV, IP] = w[1:-1] * p[1:-1]
    diag[1:-1, IV, ID] = w[1:-1] * d[1:-1]
    upper[1:, IV, IV] = lam2 / h[1:]
    lower[:-1, IV, IV] = lam2 / h[:-1]

    # boundary vacancy rows: w (D - D_prev)/dt +/- j_d at the contact edge
    diag[0, ID, ID] = w[0] * inv_dt * d[0] + jd_dphi_l[0]
    diag[0, ID, IV] = -w[0] * inv_dt * d[0] + jd_dv_l[0]
    upper[0, ID, ID] = jd_dphi_r[0]
    upper[0, ID, IV] = jd_dv_r[0]
    diag[-1, ID, ID] = w[-1] * inv_dt * d[-1] - jd_dphi_r[-1]
    diag[-1, ID, IV] = -w[-1] * inv_dt * d[-1] - jd_dv_r[-1]
    lower[-1, ID, ID] = -jd_dphi_l[-1]
    lower[-1, ID, IV] = -jd_dv_l[-1]

    # Dirichlet rows: identity diagonal, zero couplings
    for idx in (0, n_nodes - 1):
        for row in (IN, IP, IV):
            diag[idx, row, :] = 0.0
            diag[idx, row, row] = 1.0
    upper[0, IN, :] = 0.0
    upper[0, IP, :] = 0.0
    upper[0, IV, :] = 0.0
    lower[-1, IN, :] = 0.0
    lower[-1, IP, :] = 0.0
    lower[-1, IV, :] = 0.0

    return BlockTridiagonalSystem(diag, lower, upper, np.zeros(4 * n_nodes))


def equilibrium_state(grid: Grid, device: DeviceConfig, v_bi: float = None) -> State:
    """Spatially constant thermal-equilibrium state with exact charge
    neutrality (requires constant doping with D_init = D_e)."""
    v_bi = device.v_bi if v_bi is None else v_bi
    n_nodes = grid.n_nodes
    v = np.full(n_nodes, v_bi)
    d = device.D_init.copy()
    return State(phi_n=np.zeros(n_nodes), phi_p=np.zeros(n_nodes),
                 phi_D=np.log(d) + v, V=v)
