"""Networks and their training machinery: MLP, LSTM cell, Adam, LR decay.

The MLP is the workhorse: an affine/activation chain with a linear output
layer, two hidden layers by default.  Parameters live in plain numpy arrays;
for a gradient step the arrays are bound onto an autodiff tape with
:func:`bind` and updated in place by :func:`adam_step`.  Inference-only code
should use :func:`forward_np`, which skips the tape entirely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import autodiff as ad

ACTIVATIONS = ("tanh", "relu")
INITS = ("xavier", "kaiming")


@dataclass(frozen=True)
class MlpConfig:
    """Layer widths (input, hidden..., output) plus activation/init/seed."""

    layers: tuple
    activation: str = "tanh"
    init: str = "xavier"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(int(w) for w in self.layers))
        if len(self.layers) < 3:
            raise ValueError("need at least one hidden layer")
        if any(w < 1 for w in self.layers):
            raise ValueError("layer widths must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        if self.init not in INITS:
            raise ValueError(f"init must be one of {INITS}")


@dataclass
class Mlp:
    config: MlpConfig
    weights: list  # per layer, shape (fan_in, fan_out)
    biases: list   # per layer, shape (fan_out,)

    @property
    def in_width(self) -> int:
        return self.config.layers[0]

    @property
    def out_width(self) -> int:
        return self.config.layers[-1]

    def params(self) -> list:
        """Flat parameter list in a fixed order (W0, b0, W1, b1, ...)."""
        out = []
        for W, b in zip(self.weights, self.biases):
            out.append(W)
            out.append(b)
        return out


def xavier_bound(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init(config: MlpConfig) -> Mlp:
    """Build an MLP with Xavier-uniform or Kaiming-normal weights, zero biases.

    Xavier draws W ~ U(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out)));
    Kaiming draws W ~ N(0, 2/fan_in).  Deterministic under the config seed.
    """
    rng = np.random.default_rng(config.seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(config.layers[:-1], config.layers[1:]):
        if config.init == "xavier":
            bound = xavier_bound(fan_in, fan_out)
            W = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        else:
            W = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
        weights.append(W)
        biases.append(np.zeros(fan_out))
    return Mlp(config, weights, biases)


class BoundMlp:
    """Parameter leaves of one MLP on one tape, reused across forward calls."""

    def __init__(self, net: Mlp, graph: ad.Graph):
        self.net = net
        self.weight_vars = [graph.leaf(W) for W in net.weights]
        self.bias_vars = [graph.leaf(b) for b in net.biases]

    def param_vars(self) -> list:
        out = []
        for W, b in zip(self.weight_vars, self.bias_vars):
            out.append(W)
            out.append(b)
        return out

    def grads(self, grads: ad.Gradients) -> list:
        return [grads.of(v) for v in self.param_vars()]


def bind(net: Mlp, graph: ad.Graph) -> BoundMlp:
    return BoundMlp(net, graph)


def forward(net: Mlp, x: ad.Var, bound: BoundMlp | None = None) -> ad.Var:
    """Differentiable forward pass; output layer has no activation.

    ``x`` has shape (batch, in_width) or (in_width,).
    """
    if bound is None:
        bound = bind(net, x.graph)
    squeeze = x.value.ndim == 1
    if squeeze:
        x = ad.reshape(x, (1, x.value.size))
    if x.value.shape[1] != net.in_width:
        raise ValueError(f"input width {x.value.shape[1]} != {net.in_width}")
    h = x
    last = len(bound.weight_vars) - 1
    for i, (W, b) in enumerate(zip(bound.weight_vars, bound.bias_vars)):
        h = ad.matmul(h, W) + b
        if i < last:
            h = ad.elementwise(net.config.activation, h)
    if squeeze:
        h = ad.reshape(h, (net.out_width,))
    return h


def forward_np(net: Mlp, x: np.ndarray) -> np.ndarray:
    """Plain-numpy forward pass, same arithmetic as :func:`forward`."""
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.shape[1] != net.in_width:
        raise ValueError(f"input width {x.shape[1]} != {net.in_width}")
    act = np.tanh if net.config.activation == "tanh" else lambda v: np.maximum(v, 0.0)
    h = x
    last = len(net.weights) - 1
    for i, (W, b) in enumerate(zip(net.weights, net.biases)):
        h = h @ W + b
        if i < last:
            h = act(h)
    return h[0] if squeeze else h


def mse(a, b) -> float:
    """Mean squared error between two arrays (symmetric; 0 iff equal)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.mean((a - b) ** 2))


# ---------------------------------------------------------------------------
# Adam with exponential learning-rate decay
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def adam_step(state: AdamState, params: Sequence[np.ndarray],
              grads: Sequence[np.ndarray]) -> Sequence[np.ndarray]:
    """One bias-corrected Adam update, applied to ``params`` in place."""
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    if len(grads) != len(params):
        raise ValueError("grads must be shaped like params")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** state.step
    bc2 = 1.0 - b2 ** state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        g = np.asarray(g)
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} != param shape {p.shape}")
        if not np.isfinite(g).all():
            raise ad.NonFiniteError("non-finite gradient in adam_step")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return params


@dataclass(frozen=True)
class LrSchedule:
    lr0: float
    gamma: float = 1.0


def decay_lr(schedule: LrSchedule, epoch: int) -> float:
    """Exponential decay: lr = lr0 * gamma**epoch."""
    if epoch < 0:
        raise ValueError("epoch must be >= 0")
    return schedule.lr0 * schedule.gamma ** epoch


# ---------------------------------------------------------------------------
# LSTM cell (single layer; used by the recurrent baseline)
# ---------------------------------------------------------------------------

@dataclass
class LstmCell:
    """Standard LSTM gates (input/forget/output sigmoid, candidate tanh).

    ``Wx`` (in, 4*hidden), ``Wh`` (hidden, 4*hidden) and ``b`` (4*hidden,) are
    packed in gate order i, f, g, o.  ``h``/``c`` hold the running state for
    stateful numpy stepping; they reset to zero at sequence start.
    """

    in_width: int
    hidden: int
    Wx: np.ndarray
    Wh: np.ndarray
    b: np.ndarray
    h: np.ndarray = None
    c: np.ndarray = None

    def reset(self):
        self.h = np.zeros(self.hidden)
        self.c = np.zeros(self.hidden)

    def params(self) -> list:
        return [self.Wx, self.Wh, self.b]


def init_lstm(in_width: int, hidden: int, seed: int = 0) -> LstmCell:
    rng = np.random.default_rng(seed)
    bx = xavier_bound(in_width, hidden)
    bh = xavier_bound(hidden, hidden)
    cell = LstmCell(
        in_width, hidden,
        Wx=rng.uniform(-bx, bx, size=(in_width, 4 * hidden)),
        Wh=rng.uniform(-bh, bh, size=(hidden, 4 * hidden)),
        b=np.zeros(4 * hidden))
    cell.reset()
    return cell


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def lstm_step(cell: LstmCell, x: np.ndarray) -> np.ndarray:
    """Advance the cell one step on a numpy input; returns the new hidden
    state (infinity norm bounded by 1 through the tanh output gate)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (cell.in_width,):
        raise ValueError(f"input width {x.shape} != ({cell.in_width},)")
    z = x @ cell.Wx + cell.h @ cell.Wh + cell.b
    H = cell.hidden
    i = _sigmoid(z[0:H])
    f = _sigmoid(z[H:2 * H])
    g = np.tanh(z[2 * H:3 * H])
    o = _sigmoid(z[3 * H:4 * H])
    cell.c = f * cell.c + i * g
    cell.h = o * np.tanh(cell.c)
    return cell.h


class BoundLstm:
    """LSTM parameters as leaves on one tape, for unrolled training."""

    def __init__(self, cell: LstmCell, graph: ad.Graph):
        self.cell = cell
        self.Wx = graph.leaf(cell.Wx)
        self.Wh = graph.leaf(cell.Wh)
        self.b = graph.leaf(cell.b)

    def param_vars(self) -> list:
        return [self.Wx, self.Wh, self.b]

    def grads(self, grads: ad.Gradients) -> list:
        return [grads.of(v) for v in self.param_vars()]


def lstm_step_var(bound: BoundLstm, x: ad.Var, h: ad.Var, c: ad.Var):
    """Differentiable cell step on (batch, in_width) inputs."""
    H = bound.cell.hidden
    z = ad.matmul(x, bound.Wx) + ad.matmul(h, bound.Wh) + bound.b
    i = ad.elementwise("sigmoid", ad.narrow(z, 1, 0, H))
    f = ad.elementwise("sigmoid", ad.narrow(z, 1, H, H))
    g = ad.elementwise("tanh", ad.narrow(z, 1, 2 * H, H))
    o = ad.elementwise("sigmoid", ad.narrow(z, 1, 3 * H, H))
    c_new = f * c + i * g
    h_new = o * ad.elementwise("tanh", c_new)
    return h_new, c_new
