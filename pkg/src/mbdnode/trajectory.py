"""Uniform-grid trajectory record and its CSV wire format.

CSV layout: header ``t,z1..zk,v1..vk[,u1..um]``, one row per stored state,
doubles printed with 17 significant digits so that write -> read -> write is
byte-identical and parsed values equal the originals bit for bit.  Inputs are
per-step (one fewer than states); the final row leaves the input cells empty.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_FMT = "%.17g"


@dataclass
class Trajectory:
    times: np.ndarray            # (n+1,)
    states: np.ndarray           # (n+1, width), width even: (z, zdot)
    inputs: np.ndarray = None    # (n, n_u) or None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        if self.times.ndim != 1 or len(self.times) != len(self.states):
            raise ValueError("times and states row counts differ")
        if self.states.shape[1] % 2 != 0:
            raise ValueError("state width must be even (positions, velocities)")
        if self.inputs is not None:
            self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
            if len(self.inputs) != len(self.states) - 1:
                raise ValueError("need exactly one input row per step")
        if len(self.times) > 1:
            dts = np.diff(self.times)
            if not np.allclose(dts, dts[0], rtol=1e-9, atol=1e-12) or dts[0] <= 0:
                raise ValueError("time grid must be uniform with dt > 0")

    @property
    def dt(self) -> float:
        if len(self.times) < 2:
            raise ValueError("trajectory has a single state, dt undefined")
        return float(self.times[1] - self.times[0])

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def width(self) -> int:
        return self.states.shape[1]

    def to_csv(self) -> str:
        k = self.width // 2
        cols = ["t"] + [f"z{i+1}" for i in range(k)] + [f"v{i+1}" for i in range(k)]
        n_u = 0 if self.inputs is None else self.inputs.shape[1]
        cols += [f"u{i+1}" for i in range(n_u)]
        buf = io.StringIO()
        buf.write(",".join(cols) + "\n")
        for row in range(len(self.times)):
            cells = [_FMT % self.times[row]]
            cells += [_FMT % x for x in self.states[row]]
            if n_u:
                if row < len(self.inputs):
                    cells += [_FMT % x for x in self.inputs[row]]
                else:
                    cells += [""] * n_u
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()

    def save_csv(self, path):
        Path(path).write_text(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "Trajectory":
        lines = [ln for ln in text.strip().split("\n") if ln]
        header = lines[0].split(",")
        if header[0] != "t":
            raise ValueError("trajectory CSV must start with a 't' column")
        width = sum(1 for c in header if c[0] in "zv")
        n_u = sum(1 for c in header if c[0] == "u")
        times, states, inputs = [], [], []
        for ln in lines[1:]:
            cells = ln.split(",")
            times.append(float(cells[0]))
            states.append([float(c) for c in cells[1:1 + width]])
            if n_u:
                ucells = cells[1 + width:1 + width + n_u]
                if all(c != "" for c in ucells):
                    inputs.append([float(c) for c in ucells])
        return cls(np.array(times), np.array(states),
                   np.array(inputs) if n_u and inputs else None)

    @classmethod
    def load_csv(cls, path) -> "Trajectory":
        return cls.from_csv(Path(path).read_text())
