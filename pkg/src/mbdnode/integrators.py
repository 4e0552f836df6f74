"""Fixed-step one-step integrators: FE1, MP2, RK4, LF2, YS4.

All steppers share one field signature ``field(t, Z, u, mu) -> dZ/dt`` over
the full state.  The symplectic pair LF2/YS4 additionally needs the
position/velocity split, so those kinds require a field exposing an
``accel(t, q, v, u, mu)`` callable; :class:`SonodeField` builds such a field
from an acceleration function, giving dZ/dt = (v, a).

Every stepper works identically on plain float64 arrays and on autodiff
``Var`` states, so one training step through any kind is differentiable
end to end when the field is network-backed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from . import autodiff as ad
from .trajectory import Trajectory


class StepKind(str, Enum):
    FE1 = "fe1"   # forward Euler, 1st order, 1 field call
    MP2 = "mp2"   # explicit midpoint, 2nd order, 2 calls
    RK4 = "rk4"   # classical Runge-Kutta, 4th order, 4 calls
    LF2 = "lf2"   # kick-drift-kick leapfrog, 2nd order, 2 accel calls
    YS4 = "ys4"   # Yoshida triple-jump composition of LF2, 4th order

    @classmethod
    def parse(cls, name) -> "StepKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValueError(f"unknown integrator '{name}'") from None


SYMPLECTIC = (StepKind.LF2, StepKind.YS4)

# Yoshida triple-jump coefficients for the 4th-order composition of a
# 2nd-order symmetric map: substeps (w1, w0, w1) with w0 + 2*w1 = 1.
_CBRT2 = 2.0 ** (1.0 / 3.0)
YOSHIDA_W1 = 1.0 / (2.0 - _CBRT2)
YOSHIDA_W0 = -_CBRT2 / (2.0 - _CBRT2)


class BlowUpError(ArithmeticError):
    """State became non-finite during integration."""

    def __init__(self, step: int, t: float):
        self.step = step
        self.t = t
        super().__init__(f"integration blew up at step {step} (t={t:g})")


@dataclass
class SonodeField:
    """First-order field (v, a) built from an acceleration function.

    ``accel(t, q, v, u, mu)`` returns the acceleration of the position block;
    the full state is Z = (q, v) split in half along the last axis.
    """

    accel: Callable

    def __call__(self, t, Z, u=None, mu=None):
        q, v = split_state(Z)
        return join_state(v, self.accel(t, q, v, u, mu))


def split_state(Z):
    if isinstance(Z, ad.Var):
        axis = Z.value.ndim - 1
        n = Z.value.shape[axis]
        if n % 2:
            raise ValueError("state width must be even to split")
        return ad.narrow(Z, axis, 0, n // 2), ad.narrow(Z, axis, n // 2, n // 2)
    Z = np.asarray(Z)
    n = Z.shape[-1]
    if n % 2:
        raise ValueError("state width must be even to split")
    return Z[..., : n // 2], Z[..., n // 2:]


def join_state(q, v):
    if isinstance(q, ad.Var):
        return ad.concat([q, v], axis=q.value.ndim - 1)
    return np.concatenate([q, v], axis=-1)


def _leapfrog(accel, t, Z, dt, u, mu):
    q, v = split_state(Z)
    v_half = v + accel(t, q, v, u, mu) * (0.5 * dt)
    q_new = q + v_half * dt
    v_new = v_half + accel(t + dt, q_new, v_half, u, mu) * (0.5 * dt)
    return join_state(q_new, v_new)


def step(kind: StepKind, field, t: float, Z, dt: float, u=None, mu=None):
    """Advance one step of size dt; Z may be an ndarray or an autodiff Var."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    kind = StepKind.parse(kind)

    if kind in SYMPLECTIC:
        accel = getattr(field, "accel", None)
        if accel is None:
            raise TypeError(f"{kind.value} needs a field with an accel() split "
                            "(see SonodeField)")
        if kind is StepKind.LF2:
            out = _leapfrog(accel, t, Z, dt, u, mu)
        else:  # YS4: LF2 substeps of sizes w1*dt, w0*dt, w1*dt
            out = Z
            tt = t
            for w in (YOSHIDA_W1, YOSHIDA_W0, YOSHIDA_W1):
                out = _leapfrog(accel, tt, out, w * dt, u, mu)
                tt += w * dt
    elif kind is StepKind.FE1:
        out = Z + field(t, Z, u, mu) * dt
    elif kind is StepKind.MP2:
        mid = Z + field(t, Z, u, mu) * (0.5 * dt)
        out = Z + field(t + 0.5 * dt, mid, u, mu) * dt
    else:  # RK4
        k1 = field(t, Z, u, mu)
        k2 = field(t + 0.5 * dt, Z + k1 * (0.5 * dt), u, mu)
        k3 = field(t + 0.5 * dt, Z + k2 * (0.5 * dt), u, mu)
        k4 = field(t + dt, Z + k3 * dt, u, mu)
        out = Z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)

    if not isinstance(out, ad.Var) and not np.isfinite(out).all():
        raise ad.NonFiniteError("non-finite state after step")
    return out


def integrate(kind: StepKind, field, Z0, t0: float, dt: float, n_steps: int,
              u_seq=None, mu=None, meta: dict | None = None) -> Trajectory:
    """Iterate ``step`` n_steps times at fixed dt; the returned trajectory
    includes Z0, so it holds n_steps + 1 states."""
    Z0 = np.asarray(Z0, dtype=float)
    if not np.isfinite(Z0).all():
        raise ad.NonFiniteError("non-finite initial state")
    if u_seq is not None:
        u_seq = np.atleast_2d(np.asarray(u_seq, dtype=float))
        if len(u_seq) < n_steps:
            raise ValueError(f"u sequence has {len(u_seq)} rows < {n_steps} steps")
    states = np.empty((n_steps + 1, Z0.size))
    states[0] = Z0
    Z = Z0
    for i in range(n_steps):
        u = None if u_seq is None else u_seq[i]
        try:
            Z = step(kind, field, t0 + i * dt, Z, dt, u, mu)
        except ad.NonFiniteError:
            raise BlowUpError(i, t0 + i * dt) from None
        states[i + 1] = Z
    times = t0 + dt * np.arange(n_steps + 1)
    return Trajectory(times, states,
                      None if u_seq is None else u_seq[:n_steps].copy(),
                      dict(meta or {}))
