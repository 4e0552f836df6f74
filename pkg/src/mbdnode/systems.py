"""Benchmark dynamics: analytic right-hand sides, energies, closed forms.

Seven desk-scale mechanical systems.  Each is a frozen dataclass holding its
physical constants with an ``rhs(t, state, u)`` method (vectorized over a
leading batch axis) plus, where meaningful, an energy function.  State
conventions:

- mass-spring / mass-spring-damper:  (x, v)
- triple mass-spring-damper:         (x1, x2, x3, v1, v2, v3)
- damped pendulum:                   (theta, omega); input u is a force on
  the bob, entering as torque u*L/(m*L^2)
- double pendulum:                   (theta1, theta2, p1, p2), Hamilton form
- cart-pole:                         (theta, x, omega, v); input u is the
  horizontal force on the cart, theta measured from the upright position

The slider-crank plant lives in :mod:`mbdnode.slider_crank`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GRAVITY = 9.81


def _split4(state):
    s = np.asarray(state, dtype=float)
    return s[..., 0], s[..., 1], s[..., 2], s[..., 3]


@dataclass(frozen=True)
class MassSpring:
    """Undamped oscillator x'' = -(k/m) x; conserves H = p^2/2m + k x^2/2."""

    k: float = 50.0
    m: float = 10.0

    name = "sms"
    state_width = 2
    n_u = 0

    def rhs(self, t, state, u=None, mu=None):
        s = np.asarray(state, dtype=float)
        x, v = s[..., 0], s[..., 1]
        return np.stack([v, -(self.k / self.m) * x], axis=-1)

    def analytic(self, x0: float, v0: float, t):
        """Closed-form trajectory x(t), v(t) from (x0, v0)."""
        w = np.sqrt(self.k / self.m)
        t = np.asarray(t, dtype=float)
        x = x0 * np.cos(w * t) + (v0 / w) * np.sin(w * t)
        v = -x0 * w * np.sin(w * t) + v0 * np.cos(w * t)
        return np.stack([x, v], axis=-1)

    def energy(self, state):
        s = np.asarray(state, dtype=float)
        x, v = s[..., 0], s[..., 1]
        p = self.m * v
        return p**2 / (2.0 * self.m) + 0.5 * self.k * x**2


@dataclass(frozen=True)
class MassSpringDamper:
    """x'' = -(k/m) x - (d/m) x'."""

    k: float = 50.0
    m: float = 10.0
    d: float = 2.0

    name = "smsd"
    state_width = 2
    n_u = 0

    def rhs(self, t, state, u=None, mu=None):
        s = np.asarray(state, dtype=float)
        x, v = s[..., 0], s[..., 1]
        return np.stack([v, -(self.k / self.m) * x - (self.d / self.m) * v], axis=-1)

    def energy(self, state):
        s = np.asarray(state, dtype=float)
        x, v = s[..., 0], s[..., 1]
        return 0.5 * self.m * v**2 + 0.5 * self.k * x**2


@dataclass(frozen=True)
class TripleMassSpringDamper:
    """Three masses in a chain, wall - m1 - m2 - m3, each link a spring and
    a viscous damper.  m1 is 100x heavier than m3 (multiscale).

    The damper between the wall and m1 acts on v1 alone; a one-sided
    (v1 - v2) wall-damper variant is not dissipative and breaks the
    energy-monotonicity requirement, so the physical form is used.
    """

    m: tuple = (100.0, 10.0, 1.0)
    k: tuple = (50.0, 50.0, 50.0)
    d: tuple = (2.0, 2.0, 2.0)

    name = "tmsd"
    state_width = 6
    n_u = 0

    def rhs(self, t, state, u=None, mu=None):
        s = np.asarray(state, dtype=float)
        x1, x2, x3 = s[..., 0], s[..., 1], s[..., 2]
        v1, v2, v3 = s[..., 3], s[..., 4], s[..., 5]
        m1, m2, m3 = self.m
        k1, k2, k3 = self.k
        d1, d2, d3 = self.d
        a1 = (-k1 * x1 - d1 * v1 + k2 * (x2 - x1) + d2 * (v2 - v1)) / m1
        a2 = (-k2 * (x2 - x1) - d2 * (v2 - v1) + k3 * (x3 - x2) + d3 * (v3 - v2)) / m2
        a3 = (-k3 * (x3 - x2) - d3 * (v3 - v2)) / m3
        return np.stack([v1, v2, v3, a1, a2, a3], axis=-1)

    def energy(self, state):
        s = np.asarray(state, dtype=float)
        x1, x2, x3 = s[..., 0], s[..., 1], s[..., 2]
        v1, v2, v3 = s[..., 3], s[..., 4], s[..., 5]
        m1, m2, m3 = self.m
        k1, k2, k3 = self.k
        kinetic = 0.5 * (m1 * v1**2 + m2 * v2**2 + m3 * v3**2)
        potential = 0.5 * (k1 * x1**2 + k2 * (x2 - x1) ** 2 + k3 * (x3 - x2) ** 2)
        return kinetic + potential


@dataclass(frozen=True)
class Pendulum:
    """Damped pendulum theta'' + (g/L) sin(theta) + (c/(m L)) theta' = 0.

    An external force u on the bob is a torque u*L, so it adds
    u*L/(m*L^2) = u/(m*L) to the angular acceleration.
    """

    L: float = 1.0
    c: float = 0.1
    m: float = 1.0
    g: float = GRAVITY

    name = "pendulum"
    state_width = 2
    n_u = 1

    def rhs(self, t, state, u=None, mu=None):
        s = np.asarray(state, dtype=float)
        th, om = s[..., 0], s[..., 1]
        acc = -(self.g / self.L) * np.sin(th) - (self.c / (self.m * self.L)) * om
        if u is not None:
            acc = acc + self.force_accel(u)
        return np.stack([om, acc], axis=-1)

    def force_accel(self, u):
        """Angular acceleration produced by a bob force u (additive channel)."""
        u = np.asarray(u, dtype=float)
        return u[..., 0] / (self.m * self.L) if u.ndim else u / (self.m * self.L)


@dataclass(frozen=True)
class DoublePendulum:
    """Planar double pendulum in Hamilton form (theta1, theta2, p1, p2)."""

    l1: float = 1.0
    l2: float = 1.0
    m1: float = 1.0
    m2: float = 1.0
    g: float = GRAVITY

    name = "double_pendulum"
    state_width = 4
    n_u = 0

    def _denominator(self, th1, th2):
        return self.m1 + self.m2 * np.sin(th1 - th2) ** 2

    def rhs(self, t, state, u=None, mu=None):
        th1, th2, p1, p2 = _split4(state)
        l1, l2, m1, m2, g = self.l1, self.l2, self.m1, self.m2, self.g
        dth = th1 - th2
        den = self._denominator(th1, th2)
        dth1 = (l2 * p1 - l1 * p2 * np.cos(dth)) / (l1**2 * l2 * den)
        dth2 = (-m2 * l2 * p1 * np.cos(dth) + (m1 + m2) * l1 * p2) / (m2 * l1 * l2**2 * den)
        h1 = p1 * p2 * np.sin(dth) / (l1 * l2 * den)
        h2 = (m2 * l2**2 * p1**2 + (m1 + m2) * l1**2 * p2**2
              - 2.0 * m2 * l1 * l2 * p1 * p2 * np.cos(dth)) / (2.0 * l1**2 * l2**2 * den**2)
        dp1 = -(m1 + m2) * g * l1 * np.sin(th1) - h1 + h2 * np.sin(2.0 * dth)
        dp2 = -m2 * g * l2 * np.sin(th2) + h1 - h2 * np.sin(2.0 * dth)
        return np.stack([dth1, dth2, dp1, dp2], axis=-1)

    def momentum_to_rates(self, state):
        """Map (theta, p) states to angular velocities (theta1', theta2')."""
        d = self.rhs(0.0, state)
        return d[..., :2]

    def rates_to_momentum(self, th1, th2, w1, w2):
        """Inverse map: p = M(theta) @ thetadot from the kinetic metric."""
        l1, l2, m1, m2 = self.l1, self.l2, self.m1, self.m2
        c = np.cos(th1 - th2)
        p1 = (m1 + m2) * l1**2 * w1 + m2 * l1 * l2 * c * w2
        p2 = m2 * l2**2 * w2 + m2 * l1 * l2 * c * w1
        return p1, p2

    def energy(self, state):
        th1, th2, p1, p2 = _split4(state)
        w = self.momentum_to_rates(state)
        w1, w2 = w[..., 0], w[..., 1]
        l1, l2, m1, m2, g = self.l1, self.l2, self.m1, self.m2, self.g
        kinetic = (0.5 * m1 * l1**2 * w1**2
                   + 0.5 * m2 * (l1**2 * w1**2 + l2**2 * w2**2
                                 + 2.0 * l1 * l2 * w1 * w2 * np.cos(th1 - th2)))
        potential = (-m1 * g * l1 * np.cos(th1)
                     - m2 * g * (l1 * np.cos(th1) + l2 * np.cos(th2)))
        return kinetic + potential


@dataclass(frozen=True)
class CartPole:
    """Cart of mass M with a pole of mass m and length l, force u on the cart.

    theta = 0 is the upright pole.  The two coupled second-order equations
    are solved for (theta'', x'') through the 2x2 mass matrix whose
    determinant m l^2 (M + m sin^2 theta) is positive for any M, m > 0.
    """

    M: float = 1.0
    m: float = 1.0
    l: float = 0.5
    g: float = GRAVITY

    name = "cartpole"
    state_width = 4
    n_u = 1

    def rhs(self, t, state, u=None, mu=None):
        th, x, om, v = _split4(state)
        if u is None:
            force = np.zeros_like(th)
        else:
            u = np.asarray(u, dtype=float)
            force = u[..., 0] if u.ndim > np.ndim(th) else u
        m, M, l, g = self.m, self.M, self.l, self.g
        sin, cos = np.sin(th), np.cos(th)
        a11 = m * l**2
        a12 = m * l * cos
        a22 = M + m
        b1 = m * g * l * sin
        b2 = force + m * l * om**2 * sin
        det = a11 * a22 - a12 * a12
        if np.any(det <= 0.0):
            raise ArithmeticError("cart-pole mass matrix lost definiteness")
        th_acc = (b1 * a22 - a12 * b2) / det
        x_acc = (a11 * b2 - a12 * b1) / det
        return np.stack([om, v, th_acc, x_acc], axis=-1)

    def accelerations(self, state, u):
        """(theta'', x'') for sampled states; the learning target for the
        control experiments."""
        return self.rhs(0.0, state, u)[..., 2:]


SYSTEMS = {
    "sms": MassSpring,
    "smsd": MassSpringDamper,
    "tmsd": TripleMassSpringDamper,
    "pendulum": Pendulum,
    "double_pendulum": DoublePendulum,
    "cartpole": CartPole,
}


def make(name: str, **overrides):
    try:
        return SYSTEMS[name](**overrides)
    except KeyError:
        raise ValueError(f"unknown system '{name}'") from None


def rhs(system, t, state, u=None):
    """State derivative of a benchmark system at (t, state, u)."""
    return system.rhs(t, state, u)


def energy(system, state):
    """Total mechanical energy where the benchmark defines one."""
    fn = getattr(system, "energy", None)
    if fn is None:
        raise ValueError(f"system '{system.name}' has no energy function")
    return fn(state)


def sms_analytic(params: MassSpring, x0: float, v0: float, t):
    return params.analytic(x0, v0, t)
