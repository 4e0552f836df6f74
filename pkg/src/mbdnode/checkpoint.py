"""Structured-text (JSON) checkpoints with value-exact float round-trips.

Weights are stored as nested lists of decimal doubles; Python's repr-based
float formatting guarantees the parsed value is bit-identical to the stored
one.  Every document carries a ``schema_version`` and a ``kind`` tag.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .neural import LstmCell, Mlp, MlpConfig

SCHEMA_VERSION = 1


def _arr(a) -> list:
    return np.asarray(a, dtype=float).tolist()


def mlp_to_doc(net: Mlp) -> dict:
    cfg = net.config
    return {
        "config": {
            "layers": list(cfg.layers),
            "activation": cfg.activation,
            "init": cfg.init,
            "seed": cfg.seed,
        },
        "weights": [_arr(W) for W in net.weights],
        "biases": [_arr(b) for b in net.biases],
    }


def mlp_from_doc(doc: dict) -> Mlp:
    cfg = MlpConfig(
        layers=tuple(doc["config"]["layers"]),
        activation=doc["config"]["activation"],
        init=doc["config"]["init"],
        seed=doc["config"]["seed"],
    )
    weights = [np.asarray(W, dtype=float) for W in doc["weights"]]
    biases = [np.asarray(b, dtype=float) for b in doc["biases"]]
    return Mlp(cfg, weights, biases)


def lstm_to_doc(cell: LstmCell) -> dict:
    return {
        "in_width": cell.in_width,
        "hidden": cell.hidden,
        "Wx": _arr(cell.Wx),
        "Wh": _arr(cell.Wh),
        "b": _arr(cell.b),
    }


def lstm_from_doc(doc: dict) -> LstmCell:
    cell = LstmCell(
        in_width=int(doc["in_width"]),
        hidden=int(doc["hidden"]),
        Wx=np.asarray(doc["Wx"], dtype=float),
        Wh=np.asarray(doc["Wh"], dtype=float),
        b=np.asarray(doc["b"], dtype=float),
    )
    cell.reset()
    return cell


def save(path, kind: str, body: dict):
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind}
    doc.update(body)
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load(path, kind: str | None = None) -> dict:
    doc = json.loads(Path(path).read_text())
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported checkpoint schema: {doc.get('schema_version')}")
    if kind is not None and doc.get("kind") != kind:
        raise ValueError(f"expected checkpoint kind '{kind}', got '{doc.get('kind')}'")
    return doc
