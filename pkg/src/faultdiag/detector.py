"""One-class fault detection on top of a learned representation.

A small regression network G is trained to map healthy latent codes to the
constant target T = 1.  The detection threshold comes from the deviation
|1 - G| on held-out healthy validation codes: xi = margin * P_p of those
deviations.  A query scores s = |1 - G(mu)| / xi and is called healthy only
when s < 1 (s = 1 is already faulty).

The supervised baseline runs the same machinery directly on the 13 input
channels with a deeper net and no latent scaling; its 8-unit second hidden
layer doubles as the representation for clustering and projection.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .nncore import Adam, DenseNet, TrainingDivergedError

TARGET = 1.0

DETECTOR_FORMAT_VERSION = 1


@dataclass
class DetectorTrainConfig:
    lr: float = 0.001
    batch: int = 16
    epochs: int = 300
    seed: int = 0


@dataclass
class LatentScaler:
    """Per-dimension min/max map of latent codes onto [0, 1].

    Dimensions that were constant over the fit sample map to 0.5.
    """

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def fit(cls, latents):
        latents = np.atleast_2d(np.asarray(latents, dtype=float))
        if latents.shape[0] == 0:
            raise ValueError("cannot fit a latent scaler on zero rows")
        return cls(lo=latents.min(axis=0), hi=latents.max(axis=0))

    def apply(self, latents):
        latents = np.asarray(latents, dtype=float)
        degenerate = self.hi == self.lo
        span = np.where(degenerate, 1.0, self.hi - self.lo)
        out = (latents - self.lo) / span
        return np.where(degenerate, 0.5, out)

    def to_dict(self):
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @classmethod
    def from_dict(cls, payload):
        return cls(np.asarray(payload["lo"], dtype=float),
                   np.asarray(payload["hi"], dtype=float))


def train_one_class(inputs, config=None, hidden=(20, 100)):
    """Fit G(inputs) -> 1 by mini-batch Adam on mean squared error."""
    if config is None:
        config = DetectorTrainConfig()
    x = np.atleast_2d(np.asarray(inputs, dtype=float))
    if x.shape[0] == 0:
        raise ValueError("one-class training needs at least one row")
    rng = np.random.default_rng(config.seed)
    net = DenseNet.init([x.shape[1], *hidden, 1], rng)
    opt = Adam(net.params(), lr=config.lr)
    history = []
    m = x.shape[0]
    for _ in range(config.epochs):
        order = rng.permutation(m)
        total = 0.0
        steps = 0
        for start in range(0, m, config.batch):
            batch = x[order[start:start + config.batch]]
            out, cache = net.forward(batch)
            err = out - TARGET
            loss = float(np.mean(err**2))
            if not np.isfinite(loss):
                raise TrainingDivergedError(f"one-class loss became {loss}")
            grads, _ = net.backward(cache, 2.0 * err / err.size)
            opt.step(net.params(), grads)
            total += loss
            steps += 1
        history.append(float(total / steps))
    return net, history


def deviations(net, inputs):
    """|T - G(x)| per row."""
    out, _ = net.forward(np.atleast_2d(np.asarray(inputs, dtype=float)))
    return np.abs(TARGET - out[:, 0])


def calibrate_threshold(net, validation_inputs, percentile=99.9, margin=1.5):
    """xi = margin * P_percentile(|1 - G|) over healthy validation rows.

    The percentile uses linear interpolation on the sorted sample.
    """
    if not 0.0 < percentile <= 100.0:
        raise ValueError("percentile must sit in (0, 100]")
    if margin <= 0.0:
        raise ValueError("margin must be positive")
    dev = deviations(net, validation_inputs)
    if dev.size == 0:
        raise ValueError("threshold calibration needs validation rows")
    xi = float(margin * np.percentile(dev, percentile, method="linear"))
    if xi <= 0.0:
        # a perfectly fit constant validation set; keep scores finite
        xi = np.finfo(float).tiny
    return xi


def score(net, inputs, xi):
    """Anomaly score s = |1 - G(x)| / xi; healthy iff s < 1."""
    if xi <= 0.0:
        raise ValueError("threshold xi must be positive")
    return deviations(net, inputs) / xi


def detect(scores):
    """Health decision per score: 1 (healthy) iff s < 1, else 0 (faulty)."""
    return (np.asarray(scores, dtype=float) < 1.0).astype(int)


class OneClassDetector:
    """Trained G plus its latent scaler and calibrated threshold."""

    def __init__(self, net, scaler, xi, percentile=99.9, margin=1.5):
        self.net = net
        self.scaler = scaler  # None for the raw-input supervised baseline
        self.xi = xi
        self.percentile = percentile
        self.margin = margin

    def score(self, inputs):
        x = inputs if self.scaler is None else self.scaler.apply(inputs)
        return score(self.net, x, self.xi)

    def detect(self, inputs):
        return detect(self.score(inputs))

    def to_dict(self):
        return {
            "format_version": DETECTOR_FORMAT_VERSION,
            "net": self.net.to_dict(),
            "latent_scaler": None if self.scaler is None else self.scaler.to_dict(),
            "xi": self.xi,
            "target": TARGET,
            "percentile": self.percentile,
            "margin": self.margin,
        }

    @classmethod
    def from_dict(cls, payload):
        if payload.get("format_version") != DETECTOR_FORMAT_VERSION:
            raise ValueError(
                f"unsupported detector format_version {payload.get('format_version')!r}")
        scaler = payload.get("latent_scaler")
        return cls(
            DenseNet.from_dict(payload["net"]),
            None if scaler is None else LatentScaler.from_dict(scaler),
            float(payload["xi"]),
            float(payload.get("percentile", 99.9)),
            float(payload.get("margin", 1.5)),
        )

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def fit_detector(train_latents, val_latents, config=None,
                 percentile=99.9, margin=1.5, scale_latents=True):
    """Scaler + one-class training + calibration in one call.

    train_latents are labeled-healthy codes (S_T), val_latents the held-out
    healthy codes (S_V) used only for the threshold.
    """
    scaler = LatentScaler.fit(train_latents) if scale_latents else None
    xt = scaler.apply(train_latents) if scaler else np.atleast_2d(train_latents)
    xv = scaler.apply(val_latents) if scaler else np.atleast_2d(val_latents)
    net, history = train_one_class(xt, config)
    xi = calibrate_threshold(net, xv, percentile, margin)
    return OneClassDetector(net, scaler, xi, percentile, margin), history


def supervised_baseline_net_sizes(n_channels=13):
    """Architecture of the raw-input supervised detector."""
    return [n_channels, 20, 8, 20, 100, 1]


def train_supervised_baseline(train_rows, val_rows, config=None,
                              percentile=99.9, margin=1.5):
    """Raw-input one-class baseline; returns (detector, history).

    Uses the deeper [n, 20, 8, 20, 100, 1] stack; the 8-unit layer is the
    representation read back by hidden_representation().
    """
    if config is None:
        config = DetectorTrainConfig()
    x = np.atleast_2d(np.asarray(train_rows, dtype=float))
    net, history = train_one_class(
        x, config, hidden=(20, 8, 20, 100))
    xi = calibrate_threshold(net, np.atleast_2d(val_rows), percentile, margin)
    return OneClassDetector(net, None, xi, percentile, margin), history


def hidden_representation(net, inputs, layer_index=1):
    """Activations at a hidden layer (default: the 8-unit bottleneck)."""
    x = np.atleast_2d(np.asarray(inputs, dtype=float))
    _, cache = net.forward(x)
    return cache.acts[layer_index + 1]
