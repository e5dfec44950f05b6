"""Minimal dense-network stack: forward, backprop, Adam, soft updates.

Everything is plain numpy so gradients can be audited against finite
differences.  A network is a list of affine layers z = x @ W + b with an
activation per layer (relu, tanh, or linear) and an optional scalar scale
on the final activation, which the policy network uses to bound its output
to [-scale, scale] through tanh.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

ACTIVATIONS = ("relu", "tanh", "linear")


def _act(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "tanh":
        return np.tanh(z)
    return z


def _act_grad(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return (z > 0.0).astype(z.dtype)  # subgradient 0 at z == 0
    if kind == "tanh":
        t = np.tanh(z)
        return 1.0 - t * t
    return np.ones_like(z)


class Mlp:
    """Dense network; weights[i] has shape (fan_in, fan_out)."""

    def __init__(self, weights, biases, activations, output_scale: float = 1.0):
        if not (len(weights) == len(biases) == len(activations)):
            raise ConfigurationError("weights, biases and activations must align")
        for a in activations:
            if a not in ACTIVATIONS:
                raise ConfigurationError(f"unknown activation {a!r}")
        for i in range(len(weights) - 1):
            if weights[i].shape[1] != weights[i + 1].shape[0]:
                raise ConfigurationError("layer shapes do not chain")
        for w, b in zip(weights, biases):
            if b.shape != (w.shape[1],):
                raise ConfigurationError("bias shape must match layer fan-out")
        self.weights = [np.asarray(w, dtype=float) for w in weights]
        self.biases = [np.asarray(b, dtype=float) for b in biases]
        self.activations = list(activations)
        self.output_scale = float(output_scale)

    @classmethod
    def init(cls, sizes, rng: np.random.Generator, hidden_activation: str = "relu",
             output_activation: str = "linear", output_scale: float = 1.0,
             final_init: float = 3e-3) -> "Mlp":
        """Uniform(-1/sqrt(fan_in)) init for hidden layers, +-final_init for the last."""
        if len(sizes) < 2:
            raise ConfigurationError("need at least input and output sizes")
        weights, biases, acts = [], [], []
        n_layers = len(sizes) - 1
        for i in range(n_layers):
            fan_in, fan_out = sizes[i], sizes[i + 1]
            last = i == n_layers - 1
            bound = final_init if last else 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(rng.uniform(-bound, bound, size=fan_out))
            acts.append(output_activation if last else hidden_activation)
        return cls(weights, biases, acts, output_scale)

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[1]

    def params(self) -> list:
        """Flat parameter list [W0, b0, W1, b1, ...]; arrays are live views."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def copy(self) -> "Mlp":
        return Mlp([w.copy() for w in self.weights], [b.copy() for b in self.biases],
                   list(self.activations), self.output_scale)

    def forward(self, x: np.ndarray) -> np.ndarray:
        y, _ = self.forward_cached(x)
        return y

    def forward_cached(self, x: np.ndarray):
        """Forward pass keeping per-layer inputs and pre-activations."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        a = x[None, :] if single else x
        if a.shape[1] != self.input_dim:
            raise ConfigurationError(f"input dim {a.shape[1]} != {self.input_dim}")
        inputs, zs = [], []
        for w, b, kind in zip(self.weights, self.biases, self.activations):
            inputs.append(a)
            z = a @ w + b
            zs.append(z)
            a = _act(z, kind)
        y = a * self.output_scale
        return (y[0] if single else y), (inputs, zs, single)

    def backward(self, cache, grad_out: np.ndarray):
        """Backprop an upstream gradient dL/dy.

        Returns (grads, grad_input) where grads matches params() order and
        grad_input is dL/dx.
        """
        inputs, zs, single = cache
        g = np.asarray(grad_out, dtype=float)
        if single:
            g = g[None, :]
        g = g * self.output_scale
        grads = [None] * (2 * len(self.weights))
        for i in range(len(self.weights) - 1, -1, -1):
            dz = g * _act_grad(zs[i], self.activations[i])
            grads[2 * i] = inputs[i].T @ dz
            grads[2 * i + 1] = dz.sum(axis=0)
            g = dz @ self.weights[i].T
        return grads, (g[0] if single else g)


@dataclass
class AdamState:
    """First/second moment accumulators for one parameter list."""

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    t: int = 0

    @classmethod
    def for_params(cls, params, lr: float, **kwargs) -> "AdamState":
        state = cls(lr=lr, **kwargs)
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
        return state


def adam_step(params, grads, state: AdamState) -> None:
    """One bias-corrected Adam update, in place on params."""
    if len(params) != len(state.m) or len(params) != len(grads):
        raise ConfigurationError("params, grads and Adam state must align")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1 ** state.t)
        v_hat = v / (1.0 - b2 ** state.t)
        p -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


def soft_update(target: Mlp, online: Mlp, tau: float) -> None:
    """target <- tau * online + (1 - tau) * target, element-wise in place."""
    if not (0.0 <= tau <= 1.0):
        raise ConfigurationError(f"tau must lie in [0, 1], got {tau}")
    for pt, po in zip(target.params(), online.params()):
        pt *= 1.0 - tau
        pt += tau * po


def to_dict(net: Mlp) -> dict:
    """JSON-ready description; W is nested row-major (fan_in rows)."""
    layers = []
    for w, b, kind in zip(net.weights, net.biases, net.activations):
        layers.append({
            "in": int(w.shape[0]),
            "out": int(w.shape[1]),
            "activation": kind,
            "W": w.tolist(),
            "b": b.tolist(),
        })
    return {"layers": layers, "output_scale": net.output_scale}


def from_dict(data: dict) -> Mlp:
    try:
        layers = data["layers"]
        weights, biases, acts = [], [], []
        for layer in layers:
            w = np.asarray(layer["W"], dtype=float)
            b = np.asarray(layer["b"], dtype=float)
            if w.shape != (layer["in"], layer["out"]):
                raise ConfigurationError(
                    f"layer W shape {w.shape} != ({layer['in']}, {layer['out']})"
                )
            weights.append(w)
            biases.append(b)
            acts.append(layer["activation"])
        return Mlp(weights, biases, acts, float(data.get("output_scale", 1.0)))
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"malformed weight file: {exc}") from exc


def save_weights(net: Mlp, path) -> None:
    """Write weights as JSON; float repr round-trips bitwise."""
    with open(path, "w") as fh:
        json.dump(to_dict(net), fh)


def load_weights(path) -> Mlp:
    with open(path) as fh:
        return from_dict(json.load(fh))
