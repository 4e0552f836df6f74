"""Slider-crank mechanism as a three-body DAE with eight position constraints.

Bodies: crank (pinned to ground), connecting rod, slider on the x axis; all
in the horizontal plane, no gravity.  Generalized coordinates are the planar
poses q = (x1, y1, th1, x2, y2, th2, x3, y3, th3) of the three centers of
mass.  Accelerations come from the saddle-point (KKT) system

    [ M   Phi_q^T ] [ qdd ]   [ F_e    ]
    [ Phi_q   0   ] [ lam ] = [ gamma_c ]

with M the block-diagonal mass matrix, Phi_q the constraint Jacobian and
gamma_c the acceleration-level right-hand side.  The mechanism has one
degree of freedom; (th1, th1') are the minimal coordinates and everything
else follows from the constraint map (branch with cos(th2) > 0, which the
geometry b > a never leaves).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics

N_COORDS = 9
N_CONSTRAINTS = 8


@dataclass(frozen=True)
class SliderCrank:
    m1: float = 3.0
    m2: float = 6.0
    m3: float = 1.0
    I1: float = 4.0
    I2: float = 32.0
    I3: float = 1.0
    crank_length: float = 2.0
    rod_length: float = 4.0

    name = "slider_crank"
    state_width = 2    # minimal coordinates (th1, th1')
    n_u = 2            # (F on the slider, T on the crank)

    @property
    def a(self) -> float:
        """Crank half-length (pivot to center of mass)."""
        return 0.5 * self.crank_length

    @property
    def b(self) -> float:
        """Rod half-length."""
        return 0.5 * self.rod_length

    # -- DAE ingredients -------------------------------------------------

    def mass_matrix(self) -> np.ndarray:
        return np.diag([self.m1, self.m1, self.I1,
                        self.m2, self.m2, self.I2,
                        self.m3, self.m3, self.I3])

    def phi(self, q) -> np.ndarray:
        """Position constraints, zero on any admissible configuration."""
        q = np.asarray(q, dtype=float)
        x1, y1, th1 = q[..., 0], q[..., 1], q[..., 2]
        x2, y2, th2 = q[..., 3], q[..., 4], q[..., 5]
        x3, y3, th3 = q[..., 6], q[..., 7], q[..., 8]
        a, b = self.a, self.b
        return np.stack([
            x1 - a * np.cos(th1),
            y1 - a * np.sin(th1),
            x1 + a * np.cos(th1) - x2 + b * np.cos(th2),
            y1 + a * np.sin(th1) - y2 + b * np.sin(th2),
            x2 + b * np.cos(th2) - x3,
            y2 + b * np.sin(th2) - y3,
            y3,
            th3,
        ], axis=-1)

    def phi_q(self, q) -> np.ndarray:
        """Constraint Jacobian, shape (..., 8, 9)."""
        q = np.asarray(q, dtype=float)
        th1, th2 = q[..., 2], q[..., 5]
        a, b = self.a, self.b
        s1, c1 = np.sin(th1), np.cos(th1)
        s2, c2 = np.sin(th2), np.cos(th2)
        J = np.zeros(q.shape[:-1] + (N_CONSTRAINTS, N_COORDS))
        J[..., 0, 0] = 1.0
        J[..., 0, 2] = a * s1
        J[..., 1, 1] = 1.0
        J[..., 1, 2] = -a * c1
        J[..., 2, 0] = 1.0
        J[..., 2, 2] = -a * s1
        J[..., 2, 3] = -1.0
        J[..., 2, 5] = -b * s2
        J[..., 3, 1] = 1.0
        J[..., 3, 2] = a * c1
        J[..., 3, 4] = -1.0
        J[..., 3, 5] = b * c2
        J[..., 4, 3] = 1.0
        J[..., 4, 5] = -b * s2
        J[..., 4, 6] = -1.0
        J[..., 5, 4] = 1.0
        J[..., 5, 5] = b * c2
        J[..., 5, 7] = -1.0
        J[..., 6, 7] = 1.0
        J[..., 7, 8] = 1.0
        return J

    def gamma_c(self, q, qdot) -> np.ndarray:
        """Acceleration-level right-hand side: Phi_q qdd = gamma_c."""
        q = np.asarray(q, dtype=float)
        qdot = np.asarray(qdot, dtype=float)
        th1, th2 = q[..., 2], q[..., 5]
        w1, w2 = qdot[..., 2], qdot[..., 5]
        a, b = self.a, self.b
        s1, c1 = np.sin(th1), np.cos(th1)
        s2, c2 = np.sin(th2), np.cos(th2)
        zeros = np.zeros_like(th1)
        return np.stack([
            -a * w1**2 * c1,
            -a * w1**2 * s1,
            a * w1**2 * c1 + b * w2**2 * c2,
            a * w1**2 * s1 + b * w2**2 * s2,
            b * w2**2 * c2,
            b * w2**2 * s2,
            zeros,
            zeros,
        ], axis=-1)

    def external_force(self, F, T) -> np.ndarray:
        """Generalized force: torque T on the crank, force F on the slider."""
        F = np.asarray(F, dtype=float)
        T = np.asarray(T, dtype=float)
        out = np.zeros(np.broadcast(F, T).shape + (N_COORDS,))
        out[..., 2] = T
        out[..., 6] = F
        return out

    # -- minimal-coordinate kinematics ------------------------------------

    def recover(self, th1, w1):
        """Full (q, qdot) from the minimal coordinates (th1, th1').

        Positions are closed-form on the cos(th2) > 0 branch; velocities
        solve the homogeneous system Phi_q qdot = 0 with qdot[2] = th1'.
        """
        q = self._positions(float(th1))
        J = self.phi_q(q)
        cols = [i for i in range(N_COORDS) if i != 2]
        rhs = -float(w1) * J[:, 2]
        qdot = np.zeros(N_COORDS)
        qdot[2] = float(w1)
        qdot[cols] = numerics.lu_solve(J[:, cols], rhs)
        return q, qdot

    def _positions(self, th1):
        a, b = self.a, self.b
        th1 = np.asarray(th1, dtype=float)
        s1, c1 = np.sin(th1), np.cos(th1)
        s2 = -(a / b) * s1
        th2 = np.arcsin(s2)
        c2 = np.cos(th2)
        zeros = np.zeros_like(th1)
        return np.stack([
            a * c1, a * s1, th1,
            2.0 * a * c1 + b * c2, 2.0 * a * s1 + b * s2, th2,
            2.0 * a * c1 + 2.0 * b * c2, zeros, zeros,
        ], axis=-1)

    def _velocities(self, th1, w1):
        a, b = self.a, self.b
        th1 = np.asarray(th1, dtype=float)
        w1 = np.asarray(w1, dtype=float)
        s1, c1 = np.sin(th1), np.cos(th1)
        th2 = np.arcsin(-(a / b) * s1)
        s2, c2 = np.sin(th2), np.cos(th2)
        w2 = -(a / b) * c1 * w1 / c2
        zeros = np.zeros_like(th1)
        return np.stack([
            -a * s1 * w1, a * c1 * w1, w1,
            -2.0 * a * s1 * w1 - b * s2 * w2, 2.0 * a * c1 * w1 + b * c2 * w2, w2,
            -2.0 * a * s1 * w1 - 2.0 * b * s2 * w2, zeros, zeros,
        ], axis=-1)

    def recover_batch(self, th1, w1):
        """Vectorized closed-form recovery; agrees with :meth:`recover` to
        round-off (covered by tests)."""
        return self._positions(th1), self._velocities(th1, w1)

    # -- dynamics ---------------------------------------------------------

    def accel(self, th1, w1, F=0.0, T=0.0):
        """Constrained accelerations at a minimal state under (F, T).

        Returns (alpha, qdd, lam): the crank angular acceleration, the full
        generalized acceleration and the Lagrange multipliers, from one
        partial-pivot LU solve of the 17x17 saddle-point system.
        """
        q, qdot = self.recover(th1, w1)
        K, rhs = self._kkt(q[None], qdot[None],
                           np.asarray([F], dtype=float), np.asarray([T], dtype=float))
        sol = numerics.lu_solve(K[0], rhs[0])
        qdd, lam = sol[:N_COORDS], sol[N_COORDS:]
        return qdd[2], qdd, lam

    def _kkt(self, q, qdot, F, T):
        J = self.phi_q(q)
        n = N_COORDS + N_CONSTRAINTS
        K = np.zeros(q.shape[:-1] + (n, n))
        K[..., :N_COORDS, :N_COORDS] = self.mass_matrix()
        K[..., :N_COORDS, N_COORDS:] = np.swapaxes(J, -1, -2)
        K[..., N_COORDS:, :N_COORDS] = J
        rhs = np.concatenate([self.external_force(F, T), self.gamma_c(q, qdot)], axis=-1)
        return K, rhs

    def accel_batch(self, th1, w1, F, T) -> np.ndarray:
        """Crank angular acceleration for arrays of minimal states/inputs."""
        th1 = np.atleast_1d(np.asarray(th1, dtype=float))
        q, qdot = self.recover_batch(th1, np.broadcast_to(w1, th1.shape))
        K, rhs = self._kkt(q, qdot,
                           np.broadcast_to(F, th1.shape), np.broadcast_to(T, th1.shape))
        sol = np.linalg.solve(K, rhs[..., None])[..., 0]
        return sol[..., 2]

    def rhs(self, t, state, u=None, mu=None):
        """Minimal-coordinate field d(th1, w1)/dt = (w1, alpha)."""
        s = np.asarray(state, dtype=float)
        th1, w1 = s[..., 0], s[..., 1]
        if u is None:
            F = T = np.zeros_like(th1)
        else:
            u = np.asarray(u, dtype=float)
            F, T = u[..., 0], u[..., 1]
        alpha = self.accel_batch(th1, w1, F, T)
        alpha = alpha.reshape(np.shape(th1)) if np.ndim(th1) else float(alpha[0])
        return np.stack([w1, alpha], axis=-1)

    def constraint_residual(self, q) -> float:
        """Max-norm of the position constraints (0 on admissible states)."""
        return float(np.max(np.abs(self.phi(q))))
