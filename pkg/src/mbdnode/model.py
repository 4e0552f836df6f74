"""The learned dynamics model: a network-backed acceleration field wrapped in
a fixed-step integrator, trained on one-step transitions.

The network maps (positions, velocities[, inputs][, parameters]) to the
acceleration of the position block; velocities are recovered kinematically,
so the integrator sees the first-order field dZ/dt = (v, a).  External
inputs enter either as extra network inputs ("input" mode) or as a known
additive acceleration on top of the network's internal one ("additive" mode).

Training follows the one-step recipe: for every consecutive state pair the
model integrates one step from the earlier state, the squared error against
the later state is backpropagated through the integrator, and Adam updates
the parameters; the learning rate decays exponentially per epoch.  Wider
sub-trajectory windows are supported but default to width 1.

With a constraint context attached, the model lives in the minimal
coordinates of the mechanism and every emitted state is completed through
the exact constraint map, so reconstructed configurations satisfy the
position constraints to round-off no matter how good or bad the network is.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import autodiff as ad
from . import neural
from .datasets import SampleTable
from .integrators import SonodeField, StepKind, split_state, step
from .trajectory import Trajectory

TWO_PI = 2.0 * np.pi


class TrainingDiverged(ArithmeticError):
    def __init__(self, epoch: int, index: int):
        self.epoch = epoch
        self.index = index
        super().__init__(f"training diverged at epoch {epoch}, step {index}")


@dataclass
class TrainConfig:
    epochs: int
    lr: float = 1e-3
    decay: float = 1.0
    window: int = 1        # sub-trajectory width; 1 = one-step pairs
    seed: int = 0
    batch_size: int = 1024  # sample-table training only

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.window < 1:
            raise ValueError("window must be >= 1")


@dataclass
class MbdNode:
    """Network + integrator + input wiring for one benchmark system."""

    net: neural.Mlp
    n_z: int
    n_u: int = 0
    n_mu: int = 0
    kind: StepKind = StepKind.RK4
    dt: float = 0.01
    force_mode: str = "input"              # "input" | "additive"
    force_accel: Callable | None = None    # additive mode: u -> acceleration
    mu: np.ndarray | None = None
    wrap_angles: tuple = ()                # position indices wrapped mod 2*pi
    constraint: object | None = None       # plant with recover()/phi()

    def __post_init__(self):
        self.kind = StepKind.parse(self.kind)
        if self.force_mode not in ("input", "additive"):
            raise ValueError("force_mode must be 'input' or 'additive'")
        want_in = 2 * self.n_z + self.n_mu
        if self.force_mode == "input":
            want_in += self.n_u
        if self.net.in_width != want_in:
            raise ValueError(f"network input width {self.net.in_width}, "
                             f"model needs {want_in}")
        if self.net.out_width != self.n_z:
            raise ValueError(f"network output width {self.net.out_width}, "
                             f"model needs {self.n_z} (accelerations)")
        if self.force_mode == "additive" and self.n_u and self.force_accel is None:
            raise ValueError("additive mode needs a force_accel map")

    @property
    def state_width(self) -> int:
        return 2 * self.n_z


def _wrap_positions(model: MbdNode, q):
    """Map wrapped angle components into [0, 2*pi); identity gradient."""
    if not model.wrap_angles:
        return q
    if isinstance(q, ad.Var):
        offset = np.zeros_like(q.value)
        for i in model.wrap_angles:
            offset[..., i] = TWO_PI * np.floor(q.value[..., i] / TWO_PI)
        return q - q.graph.leaf(offset)
    q = np.array(q, dtype=float)
    for i in model.wrap_angles:
        q[..., i] = np.mod(q[..., i], TWO_PI)
    return q


def _rows_like(ref, arr, width):
    """Broadcast a constant input row to the batch shape of ref."""
    arr = np.asarray(arr, dtype=float).reshape(-1)[-width:] if np.ndim(arr) <= 1 \
        else np.asarray(arr, dtype=float)
    shape = ref.value.shape if isinstance(ref, ad.Var) else np.shape(ref)
    if len(shape) == 2 and arr.ndim == 1:
        arr = np.broadcast_to(arr, (shape[0], width))
    return arr


def make_accel(model: MbdNode, bound: neural.BoundMlp | None = None):
    """Acceleration field closure; Var-aware when ``bound`` is given."""

    def accel(t, q, v, u, mu):
        qw = _wrap_positions(model, q)
        parts = [qw, v]
        if model.force_mode == "input" and model.n_u:
            u_arr = np.zeros(model.n_u) if u is None else u
            parts.append(_rows_like(qw, u_arr, model.n_u))
        if model.n_mu:
            parts.append(_rows_like(qw, model.mu, model.n_mu))
        if isinstance(qw, ad.Var):
            graph = qw.graph
            vals = [p if isinstance(p, ad.Var) else graph.leaf(p) for p in parts]
            x = ad.concat(vals, axis=qw.value.ndim - 1) if len(vals) > 1 else vals[0]
            a = neural.forward(model.net, x, bound)
        else:
            x = np.concatenate([np.asarray(p, dtype=float) for p in parts], axis=-1)
            a = neural.forward_np(model.net, x)
        if model.force_mode == "additive" and u is not None and np.any(np.asarray(u)):
            ext = np.asarray(model.force_accel(u), dtype=float)
            a = a + ext.reshape(a.value.shape if isinstance(a, ad.Var) else a.shape)
        return a

    return accel


def derivative_field(model: MbdNode, bound: neural.BoundMlp | None = None) -> SonodeField:
    """First-order field dZ/dt = (v, a) over the model state."""
    return SonodeField(make_accel(model, bound))


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

def _segment_loss(model: MbdNode, bound: neural.BoundMlp, Z0: np.ndarray,
                  targets: np.ndarray, u_rows) -> ad.Var:
    """Squared error of a forward-integrated sub-trajectory against its
    targets: sum_k ||Zhat_k - Z_k||^2, batched over leading rows of Z0."""
    graph = bound.weight_vars[0].graph
    fld = derivative_field(model, bound)
    Z = graph.leaf(Z0)
    total = None
    for k in range(len(targets)):
        u = None if u_rows is None else u_rows[k]
        Z = step(model.kind, fld, 0.0, Z, model.dt, u, model.mu)
        diff = Z - graph.leaf(targets[k])
        term = ad.elementwise("square", diff).sum()
        total = term if total is None else total + term
    if Z0.ndim == 2:
        total = total * (1.0 / len(Z0))  # mean over batch rows
    return total


def _apply_update(model, bound, loss, adam):
    grads = ad.backward(loss)
    neural.adam_step(adam, model.net.params(), bound.grads(grads))
    return float(loss.value)


def train_unconstrained(model: MbdNode, traj: Trajectory,
                        config: TrainConfig) -> dict:
    """One-step training on a trajectory (window > 1 chains several steps).

    Epoch order is the trajectory order; one Adam update per sub-trajectory;
    the learning rate decays by ``config.decay`` each epoch.  Returns a
    history dict with the per-epoch mean loss.
    """
    if traj.n_steps < 1:
        raise ValueError("trajectory has no transitions to train on")
    if abs(traj.dt - model.dt) > 1e-12:
        raise ValueError(f"trajectory dt {traj.dt} != model dt {model.dt}")
    w = config.window
    starts = list(range(0, traj.n_steps, w))
    sched = neural.LrSchedule(config.lr, config.decay)
    adam = neural.AdamState(lr=config.lr)
    history = {"loss": [], "lr": [], "seconds": 0.0}
    t0 = time.perf_counter()
    for epoch in range(config.epochs):
        adam.lr = neural.decay_lr(sched, epoch)
        total = 0.0
        for i in starts:
            stop = min(i + w, traj.n_steps)
            targets = traj.states[i + 1:stop + 1]
            u_rows = None
            if traj.inputs is not None:
                u_rows = traj.inputs[i:stop]
            graph = ad.Graph()
            bound = neural.bind(model.net, graph)
            try:
                loss = _segment_loss(model, bound, traj.states[i], targets, u_rows)
                total += _apply_update(model, bound, loss, adam)
            except ad.NonFiniteError:
                raise TrainingDiverged(epoch, i) from None
        history["loss"].append(total / len(starts))
        history["lr"].append(adam.lr)
    history["seconds"] = time.perf_counter() - t0
    return history


def train_table(model: MbdNode, table: SampleTable, config: TrainConfig) -> dict:
    """Mini-batched one-step training on a sample table.

    Each Adam update consumes ``config.batch_size`` rows (state, input,
    next-state); rows are reshuffled every epoch under the config seed.
    """
    if len(table) < 1:
        raise ValueError("sample table is empty")
    rng = np.random.default_rng(config.seed)
    sched = neural.LrSchedule(config.lr, config.decay)
    adam = neural.AdamState(lr=config.lr)
    history = {"loss": [], "lr": [], "seconds": 0.0}
    n = len(table)
    bs = min(config.batch_size, n)
    t0 = time.perf_counter()
    for epoch in range(config.epochs):
        adam.lr = neural.decay_lr(sched, epoch)
        order = rng.permutation(n)
        total = 0.0
        batches = 0
        for lo in range(0, n, bs):
            rows = order[lo:lo + bs]
            graph = ad.Graph()
            bound = neural.bind(model.net, graph)
            try:
                loss = _segment_loss(model, bound, table.states[rows],
                                     table.next_states[rows][None],
                                     [table.inputs[rows]])
                total += _apply_update(model, bound, loss, adam)
            except ad.NonFiniteError:
                raise TrainingDiverged(epoch, lo) from None
            batches += 1
        history["loss"].append(total / batches)
        history["lr"].append(adam.lr)
    history["seconds"] = time.perf_counter() - t0
    return history


def train_minimal(model: MbdNode, data, config: TrainConfig) -> dict:
    """Training with only minimal-coordinate supervision.

    ``data`` is a minimal-coordinate Trajectory or a SampleTable of
    (state, input, next-state) rows; the loop is identical to the
    unconstrained one, just in the reduced coordinates.
    """
    if isinstance(data, SampleTable):
        return train_table(model, data, config)
    return train_unconstrained(model, data, config)


def train_dependent(model: MbdNode, full_traj: Trajectory, config: TrainConfig,
                    minimal_indices: tuple = (2, 11)) -> dict:
    """Training against full-coordinate data for a constrained mechanism.

    The network predicts the next minimal state; the dependent coordinates
    are completed through the exact constraint map and the reported loss is
    the squared error of the full combined state.  Gradients flow through
    the minimal branch only (the reconstruction is exact, so the minimal
    residual already carries the entire trainable signal).
    """
    plant = model.constraint
    if plant is None:
        raise ValueError("model has no constraint context")
    if traj_empty := full_traj.n_steps < 1:
        raise ValueError("trajectory has no transitions to train on")
    idx = list(minimal_indices)
    sched = neural.LrSchedule(config.lr, config.decay)
    adam = neural.AdamState(lr=config.lr)
    history = {"loss": [], "lr": [], "max_residual": 0.0, "seconds": 0.0}
    t0 = time.perf_counter()
    for epoch in range(config.epochs):
        adam.lr = neural.decay_lr(sched, epoch)
        total = 0.0
        for i in range(full_traj.n_steps):
            Z_min = full_traj.states[i][idx]
            target_full = full_traj.states[i + 1]
            u = None if full_traj.inputs is None else full_traj.inputs[i]
            graph = ad.Graph()
            bound = neural.bind(model.net, graph)
            try:
                loss_min = _segment_loss(model, bound, Z_min,
                                         target_full[None, idx], None if u is None else [u])
                # complete the predicted minimal state through the constraints
                fld = derivative_field(model, bound)
                pred_min = step(model.kind, fld, 0.0, graph.leaf(Z_min),
                                model.dt, u, model.mu).value
                q_hat, qd_hat = plant.recover(pred_min[0], pred_min[1])
                combined = np.concatenate([q_hat, qd_hat])
                history["max_residual"] = max(history["max_residual"],
                                              float(np.max(np.abs(plant.phi(q_hat)))))
                dep = [j for j in range(len(combined)) if j not in idx]
                full_loss = float(loss_min.value) + float(
                    np.sum((combined[dep] - target_full[dep]) ** 2))
                total += full_loss
                _apply_update(model, bound, loss_min, adam)
            except ad.NonFiniteError:
                raise TrainingDiverged(epoch, i) from None
        history["loss"].append(total / full_traj.n_steps)
        history["lr"].append(adam.lr)
    history["seconds"] = time.perf_counter() - t0
    return history


# ---------------------------------------------------------------------------
# rollout and evaluation
# ---------------------------------------------------------------------------

@dataclass
class Rollout:
    trajectory: Trajectory          # model-state rollout
    full: Trajectory | None = None  # constraint-completed coordinates
    max_residual: float = 0.0


def rollout(model: MbdNode, Z0, u_seq=None, n_steps: int = 0,
            t0: float = 0.0) -> Rollout:
    """Iterate the learned one-step map; in constrained mode also emit the
    reconstructed full coordinates (which satisfy the constraints exactly)."""
    fld = derivative_field(model)
    from .integrators import integrate  # local to avoid cycle at import time

    traj = integrate(model.kind, fld, Z0, t0, model.dt, n_steps, u_seq,
                     meta={"model": "mbdnode", "integrator": model.kind.value})
    if model.constraint is None:
        return Rollout(traj)
    plant = model.constraint
    q, qd = plant.recover_batch(traj.states[:, 0], traj.states[:, 1])
    full_states = np.concatenate([q, qd], axis=-1)
    residual = float(np.max(np.abs(plant.phi(q))))
    full = Trajectory(traj.times, full_states, traj.inputs,
                      dict(traj.meta, coords="full"))
    return Rollout(traj, full, residual)


@dataclass
class MseReport:
    epsilon: float
    per_state: np.ndarray


def evaluate_mse(predicted: Trajectory, truth: Trajectory) -> MseReport:
    """Average squared state error: (1/N) sum_i ||Z_i - Zhat_i||^2, with a
    per-column breakdown."""
    if predicted.states.shape != truth.states.shape:
        raise ValueError(f"trajectory shapes differ: {predicted.states.shape} "
                         f"vs {truth.states.shape}")
    diff2 = (predicted.states - truth.states) ** 2
    return MseReport(float(np.mean(np.sum(diff2, axis=1))),
                     np.mean(diff2, axis=0))
