import mpmath as mp
import numpy as np
import pytest

from memdrift.errors import InvalidEdgeError, LinearSolveError, NewtonError
from memdrift.numerics import (BlockTridiagonalSystem, NewtonOptions, bernoulli,
                               dbernoulli, factor_solve_block_tridiagonal,
                               newton_solve, sg_flux_n, sg_flux_pD)

mp.mp.dps = 40

# frozen extended-precision values (s/expm1 evaluated at 40 digits)
B1 = 0.58197670686932642439
SG_N_EXAMPLE = 0.62245933120185456464


class TestBernoulli:
    def test_value_at_zero(self):
        assert bernoulli(0.0) == 1.0

    def test_value_at_one(self):
        assert abs(bernoulli(1.0) - B1) <= 1e-15

    def test_identity_large_sample(self):
        rng = np.random.default_rng(7)
        s = rng.uniform(-500.0, 500.0, 100_000)
        diff = bernoulli(-s) - bernoulli(s)
        assert np.max(np.abs(diff - s) / np.maximum(1.0, np.abs(s))) <= 1e-13

    def test_relative_error_against_mpmath(self):
        s = np.concatenate([
            np.geomspace(1e-12, 700.0, 80),
            -np.geomspace(1e-12, 700.0, 80),
            np.linspace(-5.0, 5.0, 41),
        ])
        got = bernoulli(s)
        eps = np.finfo(float).eps
        for si, gi in zip(s, got):
            exact = float(mp.mpf(si) / mp.expm1(mp.mpf(si))) if si != 0 else 1.0
            assert abs(gi - exact) <= 4 * eps * abs(exact), f"s={si}"

    def test_overflow_safe(self):
        assert bernoulli(1e4) == 0.0
        assert bernoulli(800.0) >= 0.0
        assert bernoulli(-1e4) == 1e4
        assert np.isfinite(bernoulli(np.array([-1e8, -750.0, 750.0, 1e8]))).all()

    def test_branch_agreement_at_threshold(self):
        for s in (1e-5, -1e-5, 9.9e-6, -9.9e-6):
            assert abs(bernoulli(s) - s / np.expm1(s)) <= 1e-15

    def test_derivative_against_mpmath(self):
        s = np.concatenate([np.linspace(-30, 30, 61), [1e-5, -1e-5, 2e-4, -2e-4]])
        for si in s:
            exact = float(mp.diff(lambda z: z / mp.expm1(z) if z != 0 else mp.mpf(1),
                                  mp.mpf(si)))
            assert abs(dbernoulli(si) - exact) <= 1e-12 * max(1.0, abs(exact)), f"s={si}"


class TestSGFluxes:
    def test_equilibrium_flux_vanishes_n(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            v0, v1 = rng.uniform(-8, 8, 2)
            phi = rng.uniform(-3, 3)
            h = rng.uniform(0.01, 1.0)
            n_max = max(np.exp(v0 - phi), np.exp(v1 - phi))
            assert abs(sg_flux_n(v0, v1, phi, phi, h)) <= 1e-13 * n_max / h

    def test_equilibrium_flux_vanishes_pD(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            v0, v1 = rng.uniform(-8, 8, 2)
            phi = rng.uniform(-3, 3)
            h = rng.uniform(0.01, 1.0)
            u_max = max(np.exp(phi - v0), np.exp(phi - v1))
            assert abs(sg_flux_pD(v0, v1, phi, phi, h)) <= 1e-13 * u_max / h

    def test_pure_diffusion_n(self):
        v, h = 0.7, 0.25
        phi0, phi1 = 0.2, -0.4
        n0, n1 = np.exp(v - phi0), np.exp(v - phi1)
        assert sg_flux_n(v, v, phi0, phi1, h) == pytest.approx((n0 - n1) / h, rel=1e-14)

    def test_pure_diffusion_pD(self):
        v, h = -0.3, 0.5
        phi0, phi1 = 0.9, 0.1
        u0, u1 = np.exp(phi0 - v), np.exp(phi1 - v)
        assert sg_flux_pD(v, v, phi0, phi1, h) == pytest.approx((u0 - u1) / h, rel=1e-14)

    def test_frozen_example(self):
        val = sg_flux_n(0.0, 1.0, 0.0, 0.5, 1.0)
        assert val == pytest.approx(SG_N_EXAMPLE, abs=1e-15)

    def test_invalid_edge(self):
        with pytest.raises(InvalidEdgeError):
            sg_flux_n(0, 1, 0, 0, 0.0)
        with pytest.raises(InvalidEdgeError):
            sg_flux_pD(0, 1, 0, 0, -1.0)

    def test_consistency_first_order(self):
        # flux of u = e^{phi-V} for smooth phi, V approaches -(u' + u V')
        # at the left node with O(h) error; halving h halves the error
        phi = lambda x: np.sin(1.3 * x)
        v = lambda x: np.cos(0.7 * x) + 0.4 * x
        x0 = 0.3
        u = np.exp(phi(x0) - v(x0))
        du = u * (1.3 * np.cos(1.3 * x0) - (-0.7 * np.sin(0.7 * x0) + 0.4))
        dv = -0.7 * np.sin(0.7 * x0) + 0.4
        exact = -(du + u * dv)

        def err(h):
            got = sg_flux_pD(v(x0), v(x0 + h), phi(x0), phi(x0 + h), h)
            return abs(got - exact)

        e1, e2 = err(1e-3), err(5e-4)
        assert e1 / e2 == pytest.approx(2.0, abs=0.2)


def _random_block_system(rng, n, m):
    diag = rng.normal(size=(n, m, m)) + 4.0 * np.eye(m)
    lower = rng.normal(size=(n - 1, m, m))
    upper = rng.normal(size=(n - 1, m, m))
    rhs = rng.normal(size=n * m)
    return BlockTridiagonalSystem(diag, lower, upper, rhs)


class TestBlockTridiagonal:
    def test_identity_blocks(self):
        n, m = 5, 3
        sys = BlockTridiagonalSystem(
            np.tile(np.eye(m), (n, 1, 1)), np.zeros((n - 1, m, m)),
            np.zeros((n - 1, m, m)), np.arange(float(n * m)))
        assert np.array_equal(factor_solve_block_tridiagonal(sys), np.arange(float(n * m)))

    def test_single_block_dense(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(1, 4, 4)) + 4 * np.eye(4)
        b = rng.normal(size=4)
        sys = BlockTridiagonalSystem(a, np.zeros((0, 4, 4)), np.zeros((0, 4, 4)), b)
        assert np.allclose(factor_solve_block_tridiagonal(sys),
                           np.linalg.solve(a[0], b), atol=1e-12)

    def test_dense_oracle_6_nodes(self):
        rng = np.random.default_rng(11)
        sys = _random_block_system(rng, 6, 4)
        x = factor_solve_block_tridiagonal(sys)
        x_ref = np.linalg.solve(sys.to_dense(), sys.rhs)
        assert np.max(np.abs(x - x_ref)) <= 1e-10 * max(1.0, np.max(np.abs(x_ref)))

    def test_dense_oracle_randomized(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            n = int(rng.integers(2, 9))
            m = int(rng.integers(1, 5))
            sys = _random_block_system(rng, n, m)
            x = factor_solve_block_tridiagonal(sys)
            residual = sys.to_dense() @ x - sys.rhs
            bound = 1e-10 * (np.abs(sys.to_dense()).sum(axis=1).max()
                             * np.max(np.abs(x)) + np.max(np.abs(sys.rhs)))
            assert np.max(np.abs(residual)) <= bound

    def test_singular_pivot_raises(self):
        n, m = 3, 2
        diag = np.zeros((n, m, m))
        sys = BlockTridiagonalSystem(diag, np.zeros((n - 1, m, m)),
                                     np.zeros((n - 1, m, m)), np.ones(n * m))
        with pytest.raises(LinearSolveError):
            factor_solve_block_tridiagonal(sys)

    def test_shape_validation(self):
        with pytest.raises(LinearSolveError):
            BlockTridiagonalSystem(np.zeros((3, 2, 2)), np.zeros((1, 2, 2)),
                                   np.zeros((2, 2, 2)), np.zeros(6))


class TestNewton:
    def test_scalar_quadratic(self):
        res = lambda x: np.array([x[0] ** 2 - 4.0])
        jac = lambda x: np.array([[2.0 * x[0]]])
        result = newton_solve(res, jac, np.array([3.0]), NewtonOptions(tol_residual=1e-12))
        assert abs(result.x[0] - 2.0) <= 1e-12
        assert result.iterations <= 6

    def test_affine_single_iteration(self):
        rng = np.random.default_rng(5)
        a = rng.normal(size=(6, 6)) + 5 * np.eye(6)
        b = rng.normal(size=6)
        res = lambda x: a @ x - b
        jac = lambda x: a
        result = newton_solve(res, jac, np.zeros(6))
        assert result.iterations == 1
        assert result.residual_norm <= 1e-11

    def test_converged_input_untouched(self):
        res = lambda x: np.zeros_like(x)
        jac = lambda x: np.eye(x.size)
        x0 = np.array([1.5, -2.5])
        result = newton_solve(res, jac, x0)
        assert result.iterations == 0
        assert np.array_equal(result.x, x0)

    def test_no_convergence_error(self):
        res = lambda x: np.array([x[0] ** 2 - 4.0])
        jac = lambda x: np.array([[2.0 * x[0]]])
        with pytest.raises(NewtonError) as exc_info:
            newton_solve(res, jac, np.array([1e6]), NewtonOptions(max_iter=3))
        assert exc_info.value.residual_norm is not None
        assert exc_info.value.iterations == 3

    def test_damping_reaches_hard_root(self):
        # steep arctan: undamped Newton overshoots and diverges from x0=3
        res = lambda x: np.array([np.arctan(5.0 * x[0])])
        jac = lambda x: np.array([[5.0 / (1.0 + 25.0 * x[0] ** 2)]])
        result = newton_solve(res, jac, np.array([3.0]),
                              NewtonOptions(tol_residual=1e-12, max_iter=60))
        assert abs(result.x[0]) <= 1e-10

    def test_step_clamp_validation(self):
        with pytest.raises(ValueError):
            NewtonOptions(step_clamp=-1.0)
        with pytest.raises(ValueError):
            NewtonOptions(damping_factor=1.5)
