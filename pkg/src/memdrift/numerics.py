"""Numerical kernels: Bernoulli function, Scharfetter-Gummel edge fluxes in
quasi-Fermi variables, block-tridiagonal direct solver, damped Newton."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidEdgeError, LinearSolveError, NewtonError

# Branch switch for the Bernoulli function: below this, the Taylor polynomial
# 1 - s/2 + s^2/12 - s^4/720 agrees with s/expm1(s) to <= 1e-15.
_BERN_TAYLOR = 1e-5
# expm1 overflows past ~709; B(s) ~ s*exp(-s) there.
_BERN_OVERFLOW = 700.0

_DBERN_TAYLOR = 1e-4


def bernoulli(s):
    """B(s) = s/(e^s - 1), continuously extended with B(0) = 1.

    Accepts scalars or arrays; overflow-safe on the whole real line
    (B(s) -> 0 as s -> +inf, B(s) ~ -s as s -> -inf).
    """
    s = np.asarray(s, dtype=float)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    out = np.empty_like(s)

    small = np.abs(s) < _BERN_TAYLOR
    huge = s > _BERN_OVERFLOW
    mid = ~small & ~huge

    ss = s[small]
    out[small] = 1.0 - ss / 2.0 + ss * ss / 12.0 - ss**4 / 720.0
    out[mid] = s[mid] / np.expm1(s[mid])
    # (1 - e^-s) = 1 to machine precision for s > 700
    out[huge] = s[huge] * np.exp(-s[huge])

    return float(out[0]) if scalar else out


def dbernoulli(s):
    """Derivative B'(s), sharing the branch structure of bernoulli()."""
    s = np.asarray(s, dtype=float)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    out = np.empty_like(s)

    small = np.abs(s) < _DBERN_TAYLOR
    ss = s[small]
    out[small] = -0.5 + ss / 6.0 - ss**3 / 180.0

    rest = ~small
    b = bernoulli(s[rest])
    # B'(s) = B(s) (1 - B(-s)) / s with B(-s) = B(s) + s
    out[rest] = b * (1.0 - b - s[rest]) / s[rest]

    return float(out[0]) if scalar else out


def sg_flux_n(v_k, v_k1, phi_k, phi_k1, h):
    """Electron edge flux (1/h)(B(V_k-V_{k+1}) e^{V_k-phi_k} - B(V_{k+1}-V_k) e^{V_{k+1}-phi_{k+1}}).

    Exponentials are taken of the potential differences directly so large V
    and phi of similar size do not overflow.
    """
    if h <= 0:
        raise InvalidEdgeError(f"edge length must be positive, got {h}")
    dv = v_k1 - v_k
    return (bernoulli(-dv) * np.exp(v_k - phi_k)
            - bernoulli(dv) * np.exp(v_k1 - phi_k1)) / h


def sg_flux_pD(v_k, v_k1, phi_k, phi_k1, h):
    """Hole/vacancy edge flux (1/h)(B(V_{k+1}-V_k) e^{phi_k-V_k} - B(V_k-V_{k+1}) e^{phi_{k+1}-V_{k+1}}).

    Shared by both species with flux -(grad u + u grad V), u = e^{phi-V}.
    """
    if h <= 0:
        raise InvalidEdgeError(f"edge length must be positive, got {h}")
    dv = v_k1 - v_k
    return (bernoulli(dv) * np.exp(phi_k - v_k)
            - bernoulli(-dv) * np.exp(phi_k1 - v_k1)) / h


def edge_fluxes_n(v, phi, h):
    """Vectorized sg_flux_n over all edges of a grid (arrays of nodes)."""
    dv = v[1:] - v[:-1]
    return (bernoulli(-dv) * np.exp(v[:-1] - phi[:-1])
            - bernoulli(dv) * np.exp(v[1:] - phi[1:])) / h


def edge_fluxes_pD(v, phi, h):
    """Vectorized sg_flux_pD over all edges of a grid."""
    dv = v[1:] - v[:-1]
    return (bernoulli(dv) * np.exp(phi[:-1] - v[:-1])
            - bernoulli(-dv) * np.exp(phi[1:] - v[1:])) / h


@dataclass
class BlockTridiagonalSystem:
    """Block-tridiagonal linear system with m x m blocks on N nodes.

    diag:  (N, m, m) diagonal blocks
    lower: (N-1, m, m), lower[e] couples rows of node e+1 to vars of node e
    upper: (N-1, m, m), upper[e] couples rows of node e to vars of node e+1
    rhs:   (N*m,)
    """

    diag: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        n, m, m2 = self.diag.shape
        if m != m2:
            raise LinearSolveError("diagonal blocks must be square")
        if self.lower.shape != (n - 1, m, m) or self.upper.shape != (n - 1, m, m):
            raise LinearSolveError("off-diagonal block shapes inconsistent with diagonal")
        if self.rhs.shape != (n * m,):
            raise LinearSolveError("rhs length inconsistent with block count")

    @property
    def n_nodes(self):
        return self.diag.shape[0]

    @property
    def block_size(self):
        return self.diag.shape[1]

    def to_dense(self):
        n, m = self.n_nodes, self.block_size
        a = np.zeros((n * m, n * m))
        for k in range(n):
            a[k * m:(k + 1) * m, k * m:(k + 1) * m] = self.diag[k]
            if k < n - 1:
                a[k * m:(k + 1) * m, (k + 1) * m:(k + 2) * m] = self.upper[k]
                a[(k + 1) * m:(k + 2) * m, k * m:(k + 1) * m] = self.lower[k]
        return a

    def row_scales(self) -> np.ndarray:
        """Row 1-norms, for equilibration and scale-aware residual tests.

        Rows of a depleted species can be many orders below the rest; they
        are floored relative to the largest row so that degenerate rows count
        as satisfied rather than dominating the scaled residual.
        """
        n, m = self.n_nodes, self.block_size
        s = np.abs(self.diag).sum(axis=2)
        s[:-1] += np.abs(self.upper).sum(axis=2)
        s[1:] += np.abs(self.lower).sum(axis=2)
        s = s.reshape(n * m)
        return np.maximum(s, 1e-13 * s.max() + 1e-300)


def factor_solve_block_tridiagonal(sys: BlockTridiagonalSystem) -> np.ndarray:
    """Solve the block system by block-Thomas elimination.

    Rows are equilibrated by their 1-norms first (the species rows span many
    orders of magnitude). Raises LinearSolveError on singular pivot blocks.
    """
    n, m = sys.n_nodes, sys.block_size
    inv_s = (1.0 / sys.row_scales()).reshape(n, m)
    sys = BlockTridiagonalSystem(
        diag=sys.diag * inv_s[:, :, None],
        lower=sys.lower * inv_s[1:, :, None],
        upper=sys.upper * inv_s[:-1, :, None],
        rhs=(sys.rhs.reshape(n, m) * inv_s).reshape(n * m))
    b = sys.rhs.reshape(n, m)

    w = np.empty((n - 1, m, m)) if n > 1 else np.empty((0, m, m))
    g = np.empty((n, m))

    pivot = sys.diag[0]
    try:
        if n > 1:
            sol = np.linalg.solve(pivot, np.concatenate([sys.upper[0], b[0, :, None]], axis=1))
            w[0] = sol[:, :m]
            g[0] = sol[:, m]
        else:
            g[0] = np.linalg.solve(pivot, b[0])
        for k in range(1, n):
            pivot = sys.diag[k] - sys.lower[k - 1] @ w[k - 1]
            rhs_k = b[k] - sys.lower[k - 1] @ g[k - 1]
            if k < n - 1:
                sol = np.linalg.solve(pivot, np.concatenate([sys.upper[k], rhs_k[:, None]], axis=1))
                w[k] = sol[:, :m]
                g[k] = sol[:, m]
            else:
                g[k] = np.linalg.solve(pivot, rhs_k)
    except np.linalg.LinAlgError as exc:
        raise LinearSolveError(f"singular pivot block during elimination: {exc}") from exc

    x = np.empty((n, m))
    x[n - 1] = g[n - 1]
    for k in range(n - 2, -1, -1):
        x[k] = g[k] - w[k] @ x[k + 1]
    x = x.reshape(n * m)
    if not np.all(np.isfinite(x)):
        raise LinearSolveError("non-finite solution; pivot blocks ill-conditioned")
    return x


@dataclass
class NewtonOptions:
    tol_residual: float = 1e-11
    tol_step: float = 1e-12
    max_iter: int = 50
    damping_factor: float = 0.5
    min_step_fraction: float = 1.0 / 64.0
    # cap on each update component; None disables (potential update limiting)
    step_clamp: float = None

    def __post_init__(self):
        if self.tol_residual <= 0 or self.tol_step <= 0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.damping_factor < 1.0:
            raise ValueError("damping factor must lie in (0, 1)")
        if self.step_clamp is not None and self.step_clamp <= 0:
            raise ValueError("step_clamp must be positive")


@dataclass
class NewtonResult:
    x: np.ndarray
    iterations: int
    residual_norm: float


def _norm(r):
    r = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(r)):
        return np.inf
    return float(np.max(np.abs(r))) if r.size else 0.0


def _solve_linear(jac, rhs):
    if isinstance(jac, BlockTridiagonalSystem):
        sys = BlockTridiagonalSystem(jac.diag, jac.lower, jac.upper, rhs)
        return factor_solve_block_tridiagonal(sys)
    a = np.atleast_2d(np.asarray(jac, dtype=float))
    try:
        return np.linalg.solve(a, rhs)
    except np.linalg.LinAlgError as exc:
        raise LinearSolveError(str(exc)) from exc


def newton_solve(residual, jacobian, x0, opts: NewtonOptions = None) -> NewtonResult:
    """Damped Newton iteration with residual-monotone backtracking.

    `jacobian(x)` may return a BlockTridiagonalSystem (its rhs is ignored)
    or a dense matrix. The step is backtracked by the damping factor while
    the residual max-norm does not decrease, floored at the minimum step
    fraction. Convergence: residual max-norm at or below tol_residual, or a
    full (undamped) Newton step below tol_step * (1 + |x|_inf) — the iterate
    then sits at the residual's rounding floor. Raises NewtonError when
    max_iter is exhausted.
    """
    opts = opts or NewtonOptions()
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    r = np.atleast_1d(residual(x))
    rn = _norm(r)
    if not np.isfinite(rn):
        raise NewtonError("initial residual is not finite", residual_norm=rn, iterations=0)

    iterations = 0
    last_pass = False
    while rn > opts.tol_residual:
        if iterations >= opts.max_iter:
            raise NewtonError(
                f"no convergence after {iterations} iterations (residual {rn:.3e})",
                residual_norm=rn, iterations=iterations)
        jac = jacobian(x)
        step_tol = opts.tol_step * (1.0 + _norm(x))
        if not last_pass and isinstance(jac, BlockTridiagonalSystem):
            # rows at their rounding floor: residual small relative to the
            # Jacobian row magnitudes even when the raw norm is not; one
            # more (polishing) iteration then settles every row
            if float(np.max(np.abs(r) / jac.row_scales())) <= step_tol:
                last_pass = True
        dx = _solve_linear(jac, -r)
        if opts.step_clamp is not None:
            np.clip(dx, -opts.step_clamp, opts.step_clamp, out=dx)
        alpha = 1.0
        while True:
            x_new = x + alpha * dx
            r_new = np.atleast_1d(residual(x_new))
            rn_new = _norm(r_new)
            if rn_new < rn or alpha <= opts.min_step_fraction:
                break
            alpha *= opts.damping_factor
        if not np.isfinite(rn_new):
            raise NewtonError("residual not finite at minimum damping",
                              residual_norm=rn, iterations=iterations)
        step_norm = alpha * _norm(dx)
        x, r, rn = x_new, r_new, rn_new
        iterations += 1
        if last_pass:
            break
        if step_norm <= opts.tol_step * (1.0 + _norm(x)):
            last_pass = True

    return NewtonResult(x=x, iterations=iterations, residual_norm=rn)
