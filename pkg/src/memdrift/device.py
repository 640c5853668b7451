"""Grids, device configuration, scaling, built-in potential, boundary and
initial data for the scaled 1D memristor model."""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidConfigError, InvalidGridError
from .numerics import NewtonOptions, newton_solve, BlockTridiagonalSystem

_WIDTH_TOL = 1e-14


@dataclass(frozen=True)
class Grid:
    """1D node positions and control-volume widths on a scaled domain.

    Control volume of node k is ((x_{k-1}+x_k)/2, (x_k+x_{k+1})/2); the
    boundary cells are the half-intervals next to the contacts.
    """

    nodes: np.ndarray
    cell_widths: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        w = np.asarray(self.cell_widths, dtype=float)
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "cell_widths", w)
        if x.size < 3:
            raise InvalidGridError(f"need at least 3 nodes, got {x.size}")
        if np.any(np.diff(x) <= 0):
            raise InvalidGridError("node positions must be strictly increasing")
        if w.shape != x.shape:
            raise InvalidGridError("cell_widths must match nodes")
        length = x[-1] - x[0]
        if abs(w.sum() - length) > _WIDTH_TOL * max(1.0, length):
            raise InvalidGridError("cell widths do not sum to the domain length")

    @classmethod
    def from_nodes(cls, nodes):
        x = np.asarray(nodes, dtype=float)
        if x.size < 3:
            raise InvalidGridError(f"need at least 3 nodes, got {x.size}")
        mid = 0.5 * (x[1:] + x[:-1])
        edges = np.concatenate([[x[0]], mid, [x[-1]]])
        return cls(nodes=x, cell_widths=np.diff(edges))

    @property
    def n_nodes(self):
        return self.nodes.size

    @property
    def edge_lengths(self):
        return np.diff(self.nodes)

    @property
    def length(self):
        return float(self.nodes[-1] - self.nodes[0])


def build_uniform_grid(n: int, length: float = 1.0) -> Grid:
    """Equispaced grid on [0, length]; boundary cells have half the interior width."""
    if n < 3:
        raise InvalidGridError(f"need at least 3 nodes, got {n}")
    if length <= 0:
        raise InvalidGridError("length must be positive")
    return Grid.from_nodes(np.linspace(0.0, length, n))


@dataclass(frozen=True)
class ScalingBlock:
    """Physical parameters used to scale to/from dimensionless variables.

    eps_s [As/Vcm], U_T [V], q [As], L [cm], n_i [cm^-3], J0 [A/cm^2].
    """

    eps_s: float = 8.85e-13
    U_T: float = 0.026
    q: float = 1.6e-19
    L: float = 5e-6
    n_i: float = 2e19
    J0: float = 400.0

    def __post_init__(self):
        for name in ("eps_s", "U_T", "q", "L", "n_i", "J0"):
            if getattr(self, name) <= 0:
                raise InvalidConfigError(f"scaling parameter {name} must be positive")


def scaled_debye_length(s: ScalingBlock) -> float:
    """lambda^2 = eps_s * U_T / (q * L^2 * n_i)."""
    return s.eps_s * s.U_T / (s.q * s.L**2 * s.n_i)


def built_in_potential(d_e: float, a: float) -> float:
    """V_bi = log((D_e - A + sqrt((D_e - A)^2 + 4)) / 2), in thermal-voltage units.

    Evaluated as asinh((D_e - A)/2), the same function without cancellation,
    so that exp(V_bi) - exp(-V_bi) = D_e - A holds to machine precision.
    """
    return float(np.arcsinh(0.5 * (d_e - a)))


def constant_profile(grid: Grid, value: float) -> np.ndarray:
    if value < 0:
        raise InvalidConfigError(f"density profile must be nonnegative, got {value}")
    return np.full(grid.n_nodes, float(value))


def piecewise_profile(grid: Grid, breakpoints, values) -> np.ndarray:
    """Step profile: values[i] on [breakpoints[i], breakpoints[i+1])."""
    bp = np.asarray(breakpoints, dtype=float)
    vals = np.asarray(values, dtype=float)
    if bp.size != vals.size + 1:
        raise InvalidConfigError("need one more breakpoint than values")
    if np.any(np.diff(bp) <= 0):
        raise InvalidConfigError("breakpoints must be strictly increasing")
    if np.any(vals < 0):
        raise InvalidConfigError("density profile must be nonnegative")
    idx = np.clip(np.searchsorted(bp, grid.nodes, side="right") - 1, 0, vals.size - 1)
    return vals[idx]


@dataclass(frozen=True)
class DeviceConfig:
    """Scaled device parameters plus the physical scaling block.

    A and D_init are per-node arrays (scaled by n_i); D_e enters only via the
    built-in potential.
    """

    lambda2: float
    eps: float
    A: np.ndarray
    D_init: np.ndarray
    D_e: float
    scaling: ScalingBlock = field(default_factory=ScalingBlock)

    def __post_init__(self):
        object.__setattr__(self, "A", np.asarray(self.A, dtype=float))
        object.__setattr__(self, "D_init", np.asarray(self.D_init, dtype=float))
        if self.lambda2 <= 0:
            raise InvalidConfigError("lambda2 must be positive")
        if self.eps <= 0:
            raise InvalidConfigError("eps must be positive")
        if np.any(self.D_init < 0):
            raise InvalidConfigError("D_init must be nonnegative nodewise")

    @classmethod
    def with_constant_doping(cls, grid: Grid, *, d_init=2.5, a=0.25, d_e=25.0,
                             eps=1e-2, lambda2=None, scaling=None):
        """Constant-profile device; lambda2 defaults to the scaled Debye length."""
        scaling = scaling or ScalingBlock()
        if lambda2 is None:
            lambda2 = scaled_debye_length(scaling)
        return cls(lambda2=lambda2, eps=eps,
                   A=constant_profile(grid, a),
                   D_init=constant_profile(grid, d_init),
                   D_e=d_e, scaling=scaling)

    @property
    def v_bi(self) -> float:
        """Built-in potential for the electrode dopant concentration."""
        a_contact = 0.5 * (float(self.A[0]) + float(self.A[-1]))
        return built_in_potential(self.D_e, a_contact)

    def with_eps(self, eps: float) -> "DeviceConfig":
        return replace(self, eps=eps)


@dataclass(frozen=True)
class BiasProgram:
    """Applied contact potentials U0(t), UL(t) in thermal-voltage units.

    kinds: constant (u0, ul), ramp (ul from ul to ul_end over [0, t_final]),
    sinusoidal (ul = amplitude * sin(2 pi periods t / t_final)).
    """

    kind: str = "constant"
    u0: float = 0.0
    ul: float = 0.0
    ul_end: float = 0.0
    amplitude: float = 0.0
    periods: float = 0.0
    t_final: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "ramp", "sinusoidal"):
            raise InvalidConfigError(f"unknown bias kind {self.kind!r}")
        if self.kind in ("ramp", "sinusoidal") and self.t_final <= 0:
            raise InvalidConfigError("time-dependent bias needs t_final > 0")

    @classmethod
    def constant(cls, u0=0.0, ul=0.0):
        return cls(kind="constant", u0=u0, ul=ul)

    @classmethod
    def ramp(cls, u0, ul_start, ul_end, t_final):
        return cls(kind="ramp", u0=u0, ul=ul_start, ul_end=ul_end, t_final=t_final)

    @classmethod
    def sinusoidal(cls, amplitude, periods, t_final, u0=0.0):
        return cls(kind="sinusoidal", u0=u0, amplitude=amplitude,
                   periods=periods, t_final=t_final)

    def u0_at(self, t: float) -> float:
        return self.u0

    def ul_at(self, t: float) -> float:
        if self.kind == "constant":
            return self.ul
        if self.kind == "ramp":
            frac = min(max(t / self.t_final, 0.0), 1.0)
            return self.ul + (self.ul_end - self.ul) * frac
        return self.amplitude * math.sin(2.0 * math.pi * self.periods * t / self.t_final)


@dataclass(frozen=True)
class BoundaryData:
    """Dirichlet data at the two contacts at a fixed time."""

    v_left: float
    v_right: float
    phi_left: float
    phi_right: float
    c_n: float
    c_p: float

    @classmethod
    def at_time(cls, device: DeviceConfig, bias: BiasProgram, t: float):
        u0 = bias.u0_at(t)
        ul = bias.ul_at(t)
        v_bi = device.v_bi
        # contact densities n = exp(V_bi), p = exp(-V_bi); c_n = n exp(-V),
        # c_p = p exp(V) at the left contact (both equal 1 at zero bias)
        return cls(v_left=v_bi + u0, v_right=v_bi + ul,
                   phi_left=u0, phi_right=ul,
                   c_n=math.exp(-u0), c_p=math.exp(u0))


def initial_potential(grid: Grid, device: DeviceConfig, bias: BiasProgram,
                      t: float = 0.0, newton_opts: NewtonOptions = None) -> np.ndarray:
    """Solve lambda^2 V'' = exp(V) - exp(-V) - D_init + A with Dirichlet data
    V_bi + U at both contacts (finite-volume form on the grid)."""
    bd = BoundaryData.at_time(device, bias, t)
    w = grid.cell_widths
    h = grid.edge_lengths
    lam2 = device.lambda2
    rho0 = device.D_init - device.A  # fixed part of the space charge
    n = grid.n_nodes

    def res(v):
        r = np.empty(n)
        dv = np.diff(v)
        flux = lam2 * dv / h
        with np.errstate(over="ignore"):
            r[1:-1] = (flux[1:] - flux[:-1]
                       - w[1:-1] * (np.exp(v[1:-1]) - np.exp(-v[1:-1]) - rho0[1:-1]))
        r[0] = v[0] - bd.v_left
        r[-1] = v[-1] - bd.v_right
        return r

    def jac(v):
        diag = np.zeros((n, 1, 1))
        lower = np.zeros((n - 1, 1, 1))
        upper = np.zeros((n - 1, 1, 1))
        with np.errstate(over="ignore"):
            diag[1:-1, 0, 0] = (-lam2 * (1.0 / h[1:] + 1.0 / h[:-1])
                                - w[1:-1] * (np.exp(v[1:-1]) + np.exp(-v[1:-1])))
        lower[:-1, 0, 0] = lam2 / h[:-1]
        upper[1:, 0, 0] = lam2 / h[1:]
        diag[0, 0, 0] = 1.0
        diag[-1, 0, 0] = 1.0
        return BlockTridiagonalSystem(diag, lower, upper, np.zeros(n))

    # affine initial guess satisfies the boundary rows exactly, and Newton
    # directions keep them exact
    x = grid.nodes
    v0 = bd.v_left + (bd.v_right - bd.v_left) * (x - x[0]) / grid.length
    result = newton_solve(res, jac, v0, newton_opts or NewtonOptions())
    return result.x
