"""Ground-truth dataset generation for the seven benchmarks.

Two artifact shapes:

- trajectories: a single rollout of the reference integrator for the case
  (the undamped mass-spring uses its closed form; the damped chains and the
  double pendulum use RK4; the pendulum uses the midpoint rule at dt=0.01;
  the cart-pole uses the midpoint rule at dt=0.005).
- sample tables: i.i.d. uniformly drawn states/inputs paired with their
  ground-truth accelerations and with the state one reference step later
  (the one-step training target), used by the control and slider-crank
  experiments.

Everything is deterministic under the spec seed.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import systems
from .integrators import StepKind, integrate, step
from .slider_crank import SliderCrank
from .trajectory import Trajectory

_FMT = "%.17g"

# reference integrator and step size per case
REFERENCE = {
    "sms": ("analytic", 0.01),
    "smsd": (StepKind.RK4, 0.01),
    "tmsd": (StepKind.RK4, 0.01),
    "pendulum": (StepKind.MP2, 0.01),
    "double_pendulum": (StepKind.RK4, 0.01),
    "cartpole": (StepKind.MP2, 0.005),
    "slider_crank": (StepKind.RK4, 0.01),
}

DEFAULT_IC = {
    "sms": [1.0, 0.0],
    "smsd": [1.0, 0.0],
    "tmsd": [1.0, 2.0, 3.0, 0.0, 0.0, 0.0],
    "pendulum": [0.0, np.pi],
    "double_pendulum": [3 * np.pi / 7, 3 * np.pi / 4, 0.0, 0.0],  # (q, p)
    "cartpole": [np.pi / 6, 1.0, 0.0, 0.0],
    "slider_crank": [1.0, 1.0],
}

# uniform sampling boxes for the sample-table datasets
CARTPOLE_RANGES = ((0.0, 2 * np.pi), (-1.5, 1.5), (-8.0, 8.0), (-4.0, 4.0),
                   (-10.0, 30.0))   # (theta, x, omega, v) and force u
SLIDER_CRANK_RANGES = ((0.0, 2 * np.pi), (-4.0, 4.0), (-10.0, 10.0),
                       (-10.0, 10.0))  # (theta1, omega1) and (F, T)


@dataclass
class SampleTable:
    """One-step supervision rows: state, input, acceleration, next state."""

    states: np.ndarray       # (N, k)
    inputs: np.ndarray       # (N, m)
    accels: np.ndarray       # (N, k // 2)
    next_states: np.ndarray  # (N, k)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.states)
        if not (len(self.inputs) == len(self.accels) == len(self.next_states) == n):
            raise ValueError("sample table row counts differ")

    def __len__(self):
        return len(self.states)

    def to_csv(self) -> str:
        k, m, j = self.states.shape[1], self.inputs.shape[1], self.accels.shape[1]
        cols = ([f"x{i+1}" for i in range(k)] + [f"u{i+1}" for i in range(m)]
                + [f"a{i+1}" for i in range(j)] + [f"y{i+1}" for i in range(k)])
        buf = io.StringIO()
        buf.write(",".join(cols) + "\n")
        block = np.concatenate([self.states, self.inputs, self.accels,
                                self.next_states], axis=1)
        for row in block:
            buf.write(",".join(_FMT % x for x in row) + "\n")
        return buf.getvalue()

    def save_csv(self, path):
        Path(path).write_text(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "SampleTable":
        lines = [ln for ln in text.strip().split("\n") if ln]
        header = lines[0].split(",")
        k = sum(1 for c in header if c[0] == "x")
        m = sum(1 for c in header if c[0] == "u")
        j = sum(1 for c in header if c[0] == "a")
        rows = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
        return cls(rows[:, :k], rows[:, k:k + m], rows[:, k + m:k + m + j],
                   rows[:, k + m + j:])

    @classmethod
    def load_csv(cls, path) -> "SampleTable":
        return cls.from_csv(Path(path).read_text())


def reference_trajectory(case: str, n_steps: int, dt: float | None = None,
                         ic=None, u_seq=None, system=None) -> Trajectory:
    """Roll the case's reference integrator for n_steps.

    The double pendulum is integrated in Hamilton form and the stored states
    are converted to (theta1, theta2, theta1', theta2') so that downstream
    models see a (position, velocity) layout.
    """
    if case not in REFERENCE:
        raise ValueError(f"unknown case '{case}'")
    kind, ref_dt = REFERENCE[case]
    dt = ref_dt if dt is None else float(dt)
    if dt <= 0:
        raise ValueError("dt must be positive")
    ic = np.asarray(DEFAULT_IC[case] if ic is None else ic, dtype=float)

    if case == "sms":
        sys = system or systems.MassSpring()
        times = dt * np.arange(n_steps + 1)
        states = sys.analytic(ic[0], ic[1], times)
        return Trajectory(times, states, None, {"case": case, "ref": "analytic"})

    if case == "slider_crank":
        sys = system or SliderCrank()
    else:
        sys = system or systems.make(case)
    traj = integrate(kind, sys.rhs, ic, 0.0, dt, n_steps, u_seq=u_seq,
                     meta={"case": case, "ref": kind.value})
    if case == "double_pendulum":
        rates = sys.momentum_to_rates(traj.states)
        states = np.concatenate([traj.states[:, :2], rates], axis=1)
        return Trajectory(traj.times, states, traj.inputs,
                          dict(traj.meta, coords="rates"))
    return traj


def pendulum_forces(n_steps: int, sigma: float = 5.0, seed: int = 0) -> np.ndarray:
    """Per-step random bob forces F ~ N(0, sigma^2), one per step."""
    rng = np.random.default_rng(seed)
    return rng.normal(0.0, sigma, size=(n_steps, 1))


def _uniform_box(rng, ranges, n):
    lo = np.array([r[0] for r in ranges])
    hi = np.array([r[1] for r in ranges])
    return rng.uniform(lo, hi, size=(n, len(ranges)))


def cartpole_samples(n_samples: int, seed: int = 0,
                     system: systems.CartPole | None = None,
                     dt: float = 0.005) -> SampleTable:
    """Uniform (state, force) samples with accelerations and one-step targets
    (one midpoint step at fixed force)."""
    sys = system or systems.CartPole()
    rng = np.random.default_rng(seed)
    draw = _uniform_box(rng, CARTPOLE_RANGES, n_samples)
    states, inputs = draw[:, :4], draw[:, 4:5]
    accels = sys.accelerations(states, inputs[:, 0])
    next_states = step(StepKind.MP2, sys.rhs, 0.0, states, dt, inputs[:, 0])
    return SampleTable(states, inputs, accels, next_states,
                       {"case": "cartpole", "dt": dt, "seed": seed})


def slider_crank_samples(n_samples: int, seed: int = 0,
                         system: SliderCrank | None = None,
                         dt: float = 0.01) -> SampleTable:
    """Uniform (theta1, omega1, F, T) samples with the crank's constrained
    angular acceleration and one RK4 step of the minimal dynamics."""
    sys = system or SliderCrank()
    rng = np.random.default_rng(seed)
    draw = _uniform_box(rng, SLIDER_CRANK_RANGES, n_samples)
    states, inputs = draw[:, :2], draw[:, 2:]
    accels = sys.accel_batch(states[:, 0], states[:, 1],
                             inputs[:, 0], inputs[:, 1])[:, None]
    next_states = step(StepKind.RK4, sys.rhs, 0.0, states, dt, inputs)
    return SampleTable(states, inputs, accels, next_states,
                       {"case": "slider_crank", "dt": dt, "seed": seed})


@dataclass(frozen=True)
class DatasetSpec:
    """What to generate: a rollout (n_steps) or a sample table (n_samples)."""

    case: str
    n_steps: int = 0
    n_samples: int = 0
    dt: float | None = None
    seed: int = 0
    ic: tuple | None = None

    def is_samples(self) -> bool:
        return self.n_samples > 0


def generate_dataset(spec: DatasetSpec):
    """Dispatch on the spec: Trajectory for rollouts, SampleTable otherwise."""
    if spec.is_samples():
        if spec.case == "cartpole":
            return cartpole_samples(spec.n_samples, spec.seed,
                                    dt=spec.dt or 0.005)
        if spec.case == "slider_crank":
            return slider_crank_samples(spec.n_samples, spec.seed,
                                        dt=spec.dt or 0.01)
        raise ValueError(f"no sampled dataset defined for '{spec.case}'")
    if spec.n_steps <= 0:
        raise ValueError("n_steps or n_samples must be positive")
    return reference_trajectory(spec.case, spec.n_steps, spec.dt, spec.ic)
