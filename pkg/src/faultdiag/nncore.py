"""Minimal dense feed-forward engine with exact analytic gradients.

Every model in this package (autoencoders, one-class detectors) is a stack
of affine layers with tanh or linear activations over float64 numpy arrays.
Gradients are computed by hand-rolled backprop, optimization is Adam, and
weights serialize to a versioned JSON format that round-trips losslessly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

ACTIVATIONS = ("tanh", "linear")

WEIGHTS_FORMAT_VERSION = 1


class InvalidArchitectureError(ValueError):
    """Layer sizes or activation names that cannot form a valid network."""


class ShapeError(ValueError):
    """Input or gradient arrays that do not match the network shapes."""


class StaleCacheError(ValueError):
    """A forward cache handed to backward() that belongs to another pass."""


class TrainingDivergedError(RuntimeError):
    """Loss or gradients stopped being finite during optimization."""


def xavier_init(fan_in, fan_out, rng):
    """Glorot-uniform weight matrix of shape [fan_out, fan_in].

    Entries are drawn uniformly from +-sqrt(6 / (fan_in + fan_out)).
    """
    if fan_in < 1 or fan_out < 1:
        raise InvalidArchitectureError(
            f"layer dimensions must be >= 1, got {fan_in}x{fan_out}"
        )
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


@dataclass
class Layer:
    w: np.ndarray  # [out, in]
    b: np.ndarray  # [out]
    activation: str = "tanh"


class _Cache:
    """Per-pass activations; owned by the net that produced them."""

    __slots__ = ("owner", "acts", "single")

    def __init__(self, owner, acts, single):
        self.owner = owner
        self.acts = acts
        self.single = single


class DenseNet:
    """Fully connected net; layers own their weights, biases start at zero."""

    def __init__(self, layers):
        if not layers:
            raise InvalidArchitectureError("a network needs at least one layer")
        for layer in layers:
            if layer.activation not in ACTIVATIONS:
                raise InvalidArchitectureError(
                    f"unknown activation {layer.activation!r}, expected one of {ACTIVATIONS}"
                )
            if layer.w.ndim != 2 or layer.b.shape != (layer.w.shape[0],):
                raise InvalidArchitectureError("weight/bias shapes are inconsistent")
        for prev, nxt in zip(layers, layers[1:]):
            if nxt.w.shape[1] != prev.w.shape[0]:
                raise InvalidArchitectureError(
                    f"layer chain broken: {prev.w.shape[0]} outputs feed {nxt.w.shape[1]} inputs"
                )
        self.layers = list(layers)

    @classmethod
    def init(cls, sizes, rng, hidden_activation="tanh", output_activation="linear"):
        """Glorot-initialized net for consecutive layer sizes, zero biases."""
        if len(sizes) < 2:
            raise InvalidArchitectureError(f"need at least two sizes, got {sizes}")
        layers = []
        for k, (fan_in, fan_out) in enumerate(zip(sizes, sizes[1:])):
            act = output_activation if k == len(sizes) - 2 else hidden_activation
            layers.append(Layer(xavier_init(fan_in, fan_out, rng), np.zeros(fan_out), act))
        return cls(layers)

    @property
    def layer_sizes(self):
        return [self.layers[0].w.shape[1]] + [layer.w.shape[0] for layer in self.layers]

    def params(self):
        """Flat view [w0, b0, w1, b1, ...]; the arrays themselves, not copies."""
        out = []
        for layer in self.layers:
            out.append(layer.w)
            out.append(layer.b)
        return out

    def copy(self):
        return DenseNet(
            [Layer(layer.w.copy(), layer.b.copy(), layer.activation) for layer in self.layers]
        )

    def forward(self, x):
        """Returns (output, cache); accepts a single row or a [batch, in] block."""
        arr = np.asarray(x, dtype=float)
        single = arr.ndim == 1
        if single:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[1] != self.layers[0].w.shape[1]:
            raise ShapeError(
                f"expected input width {self.layers[0].w.shape[1]}, got shape {np.asarray(x).shape}"
            )
        acts = [arr]
        for layer in self.layers:
            pre = acts[-1] @ layer.w.T + layer.b
            acts.append(np.tanh(pre) if layer.activation == "tanh" else pre)
        y = acts[-1]
        cache = _Cache(self, acts, single)
        return (y[0] if single else y), cache

    def backward(self, cache, d_out):
        """Backprop d_out (dLoss/dOutput) through the cached pass.

        Returns (grads, d_input) with grads aligned to params() order.
        Gradients are summed over the batch; loss scaling belongs to the
        caller's d_out.
        """
        if not isinstance(cache, _Cache) or cache.owner is not self:
            raise StaleCacheError("cache does not belong to this network")
        if len(cache.acts) != len(self.layers) + 1:
            raise StaleCacheError("cache is stale: layer count changed")
        d = np.asarray(d_out, dtype=float)
        if cache.single:
            d = d[None, :]
        if d.shape != cache.acts[-1].shape:
            raise ShapeError(
                f"d_out shape {d.shape} does not match output shape {cache.acts[-1].shape}"
            )
        grads = [None] * (2 * len(self.layers))
        for k in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[k]
            if layer.activation == "tanh":
                d = d * (1.0 - cache.acts[k + 1] ** 2)
            grads[2 * k] = d.T @ cache.acts[k]
            grads[2 * k + 1] = d.sum(axis=0)
            d = d @ layer.w
        return grads, (d[0] if cache.single else d)

    def to_dict(self):
        return {
            "format_version": WEIGHTS_FORMAT_VERSION,
            "layer_sizes": self.layer_sizes,
            "activations": [layer.activation for layer in self.layers],
            "weights": [layer.w.tolist() for layer in self.layers],
            "biases": [layer.b.tolist() for layer in self.layers],
        }

    @classmethod
    def from_dict(cls, payload):
        version = payload.get("format_version")
        if version != WEIGHTS_FORMAT_VERSION:
            raise ValueError(
                f"unsupported weights format_version {version!r}, "
                f"this build reads version {WEIGHTS_FORMAT_VERSION}"
            )
        layers = [
            Layer(np.asarray(w, dtype=float), np.asarray(b, dtype=float), act)
            for w, b, act in zip(payload["weights"], payload["biases"], payload["activations"])
        ]
        net = cls(layers)
        if net.layer_sizes != list(payload["layer_sizes"]):
            raise ValueError("layer_sizes field disagrees with stored weight shapes")
        return net

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


class Adam:
    """Adam with bias correction; updates parameter arrays in place."""

    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params, grads):
        if len(params) != len(self.m) or len(grads) != len(self.m):
            raise ShapeError("params/grads do not match optimizer state")
        for g in grads:
            if not np.all(np.isfinite(g)):
                raise TrainingDivergedError("non-finite gradient encountered")
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
