import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbdnode import numerics


class TestLuSolve:
    def test_identity(self):
        b = np.array([3.0, -1.0, 2.0])
        assert np.array_equal(numerics.lu_solve(np.eye(3), b), b)

    def test_diagonal(self):
        x = numerics.lu_solve(np.diag([2.0, 4.0]), [2.0, 8.0])
        assert np.allclose(x, [1.0, 2.0], atol=1e-15)

    def test_random_17x17_residual(self):
        rng = np.random.default_rng(17)
        A = rng.normal(size=(17, 17)) + 17 * np.eye(17)
        b = rng.normal(size=17)
        x = numerics.lu_solve(A, b)
        resid = np.max(np.abs(A @ x - b))
        assert resid <= 1e-8 * (1.0 + np.max(np.abs(b)))

    def test_singular_detected(self):
        A = np.array([[1.0, 2.0], [2.0, 4.0]])
        with pytest.raises(numerics.SingularMatrixError):
            numerics.lu_solve(A, [1.0, 1.0])

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            numerics.lu_solve(np.zeros((2, 3)), [1.0, 2.0])

    @given(seed=st.integers(0, 10**6))
    @settings(max_examples=40, deadline=None)
    def test_recovers_known_solution(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 12))
        # diagonally dominated => condition number well under 1e6
        A = rng.normal(size=(n, n)) + n * np.eye(n)
        x = rng.normal(size=n)
        got = numerics.lu_solve(A, A @ x)
        assert np.max(np.abs(got - x)) < 1e-9 * max(1.0, np.max(np.abs(x)))

    @given(seed=st.integers(0, 10**6))
    @settings(max_examples=25, deadline=None)
    def test_row_permutation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        n = 6
        A = rng.normal(size=(n, n)) + n * np.eye(n)
        b = rng.normal(size=n)
        p = rng.permutation(n)
        x = numerics.lu_solve(A, b)
        xp = numerics.lu_solve(A[p], b[p])
        assert np.allclose(x, xp, rtol=1e-9, atol=1e-12)


class TestConvergenceOrder:
    # scalar decay z' = -z, z(0)=1, integrated to t=1
    @staticmethod
    def _run_decay(stepper):
        def integrate(h):
            n = round(1.0 / h)
            z = 1.0
            for _ in range(n):
                z = stepper(z, h)
            return np.array([z])
        return integrate

    def test_forward_euler_is_first_order(self):
        integrate = self._run_decay(lambda z, h: z + h * (-z))
        order = numerics.convergence_order(
            integrate, np.array([np.exp(-1.0)]), [0.1 / 2**i for i in range(4)])
        assert abs(order - 1.0) < 0.3

    def test_rk4_is_fourth_order(self):
        def rk4(z, h):
            f = lambda v: -v
            k1 = f(z)
            k2 = f(z + 0.5 * h * k1)
            k3 = f(z + 0.5 * h * k2)
            k4 = f(z + h * k3)
            return z + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

        order = numerics.convergence_order(
            self._run_decay(rk4), np.array([np.exp(-1.0)]),
            [0.2 / 2**i for i in range(4)])
        assert abs(order - 4.0) < 0.3

    def test_midpoint_on_oscillator_is_second_order(self):
        # q'' = -q from (1, 0), integrated to t=1
        def integrate(h):
            n = round(1.0 / h)
            z = np.array([1.0, 0.0])
            f = lambda v: np.array([v[1], -v[0]])
            for _ in range(n):
                mid = z + 0.5 * h * f(z)
                z = z + h * f(mid)
            return z

        exact = np.array([np.cos(1.0), -np.sin(1.0)])
        order = numerics.convergence_order(integrate, exact,
                                           [0.1 / 2**i for i in range(4)])
        assert abs(order - 2.0) < 0.3

    def test_exact_integration_reported(self):
        # Euler integrates z' = 0 exactly at any h
        integrate = self._run_decay(lambda z, h: z + h * 0.0)
        result = numerics.convergence_order(
            integrate, np.array([1.0]), [0.1, 0.05, 0.025])
        assert result == numerics.EXACT

    def test_too_few_steps_rejected(self):
        with pytest.raises(ValueError):
            numerics.convergence_order(lambda h: np.zeros(1), np.zeros(1), [0.1, 0.05])
