"""Variational autoencoder family for healthy-baseline representation learning.

One model class covers the whole zoo: a plain autoencoder, standard and
beta-weighted VAEs, the adaptive-sampling variants, and the knowledge-induced
models that add an extra KL penalty on labeled-healthy batches while training
on the mixed labeled+unlabeled pool.  Which terms are active is pure
configuration; the architecture never changes.

Encoder maps the n input channels to 2d outputs read as (mu, log sigma^2);
decoder maps d latent units back to n channels.  Latent code used downstream
is always mu.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .datagen import Scaler
from .nncore import Adam, DenseNet, ShapeError, TrainingDivergedError

LOGVAR_MIN = -20.0
LOGVAR_MAX = 20.0

SAMPLING_MODES = ("none", "standard", "adaptive")
POOLS = ("labeled", "mixed")

MODEL_FORMAT_VERSION = 1


@dataclass
class VariantSpec:
    """Loss/pool recipe for one named model variant."""

    name: str
    sampling: str          # "none" | "standard" | "adaptive"
    beta: float            # weight on the KL term over the training pool
    gamma: float           # weight on the extra KL term over labeled batches
    pool: str              # "labeled" trains on S_T only, "mixed" on S_T + D_U


# gamma defaults to the channel count n = 13 for the knowledge-induced models;
# alpha for adaptive sampling defaults to d/2 and is resolved at build time.
VARIANTS = {
    "sle-ae": VariantSpec("sle-ae", "none", 0.0, 0.0, "labeled"),
    "sle-vae": VariantSpec("sle-vae", "standard", 1.0, 0.0, "labeled"),
    "sle-beta-vae": VariantSpec("sle-beta-vae", "standard", 5.0, 0.0, "labeled"),
    "sle-adavae": VariantSpec("sle-adavae", "adaptive", 5.0, 0.0, "labeled"),
    "ssl-m1-vae": VariantSpec("ssl-m1-vae", "standard", 1.0, 0.0, "mixed"),
    "ssl-m1-adavae": VariantSpec("ssl-m1-adavae", "adaptive", 1.0, 0.0, "mixed"),
    "kil-vae": VariantSpec("kil-vae", "standard", 1.0, 13.0, "mixed"),
    "kil-adavae": VariantSpec("kil-adavae", "adaptive", 1.0, 13.0, "mixed"),
}


@dataclass
class TrainConfig:
    lr: float = 0.005
    batch: int = 512
    epochs: int = 800
    seed: int = 0


@dataclass
class LossParts:
    total: float
    recon: float
    kl: float
    kl_labeled: float


class VaeModel:
    """Encoder/decoder pair plus the loss recipe and preprocessing scaler."""

    def __init__(self, encoder, decoder, latent_dim, spec, alpha, scaler=None):
        if encoder.layer_sizes[-1] != 2 * latent_dim:
            raise ShapeError(
                f"encoder must emit 2*latent_dim={2 * latent_dim} values, "
                f"got {encoder.layer_sizes[-1]}"
            )
        if decoder.layer_sizes[0] != latent_dim:
            raise ShapeError("decoder input width must equal latent_dim")
        self.encoder = encoder
        self.decoder = decoder
        self.latent_dim = latent_dim
        self.spec = spec
        self.alpha = alpha
        self.scaler = scaler

    @property
    def n_channels(self):
        return self.encoder.layer_sizes[0]

    def params(self):
        return self.encoder.params() + self.decoder.params()

    def to_dict(self):
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "variant": self.spec.name,
            "latent_dim": self.latent_dim,
            "sampling": self.spec.sampling,
            "alpha": self.alpha,
            "beta": self.spec.beta,
            "gamma": self.spec.gamma,
            "pool": self.spec.pool,
            "encoder": self.encoder.to_dict(),
            "decoder": self.decoder.to_dict(),
            "scaler": None if self.scaler is None else self.scaler.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload):
        if payload.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format_version {payload.get('format_version')!r}")
        spec = VariantSpec(
            payload["variant"],
            payload["sampling"],
            float(payload["beta"]),
            float(payload["gamma"]),
            payload["pool"],
        )
        scaler = payload.get("scaler")
        return cls(
            DenseNet.from_dict(payload["encoder"]),
            DenseNet.from_dict(payload["decoder"]),
            int(payload["latent_dim"]),
            spec,
            float(payload["alpha"]),
            None if scaler is None else Scaler.from_dict(scaler),
        )

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def resolve_variant(name, beta=None, gamma=None):
    """Look up a variant by name, optionally overriding its loss weights."""
    key = name.lower()
    if key not in VARIANTS:
        raise ValueError(
            f"unknown model variant {name!r}; expected one of {sorted(VARIANTS)}"
        )
    spec = VARIANTS[key]
    if beta is not None:
        spec = replace(spec, beta=float(beta))
    if gamma is not None:
        spec = replace(spec, gamma=float(gamma))
    return spec


def build_model(variant, rng, n_channels=13, latent_dim=8, hidden=20,
                alpha=None, beta=None, gamma=None):
    """Fresh Glorot-initialized model for a named variant.

    Weight draws happen encoder first, then decoder, so a fixed rng seed pins
    every parameter.  alpha defaults to latent_dim / 2.
    """
    spec = variant if isinstance(variant, VariantSpec) else resolve_variant(variant, beta, gamma)
    encoder = DenseNet.init([n_channels, hidden, 2 * latent_dim], rng)
    decoder = DenseNet.init([latent_dim, hidden, n_channels], rng)
    if alpha is None:
        alpha = latent_dim / 2.0
    return VaeModel(encoder, decoder, latent_dim, spec, float(alpha))


def encode(model, x):
    """(mu, log sigma^2) for pre-normalized input x; log-variance is clamped."""
    out, _ = model.encoder.forward(x)
    d = model.latent_dim
    mu = out[..., :d]
    logvar = np.clip(out[..., d:], LOGVAR_MIN, LOGVAR_MAX)
    return mu, logvar


def decode(model, z):
    xbar, _ = model.decoder.forward(z)
    return xbar


def sample(mu, logvar, mode, eps, alpha=None):
    """Draw z from the chosen reparametrization.

    standard: z = mu + exp(logvar / 2) * eps
    adaptive: z = mu + alpha * logvar * eps   (noise vanishes at sigma = 1)
    none:     z = mu
    """
    if mode == "none":
        return np.array(mu, dtype=float, copy=True)
    if mode == "standard":
        return mu + np.exp(0.5 * logvar) * eps
    if mode == "adaptive":
        if alpha is None:
            raise ValueError("adaptive sampling needs alpha")
        return mu + alpha * logvar * eps
    raise ValueError(f"unknown sampling mode {mode!r}")


def kl_gaussian(mu, logvar):
    """KL(N(mu, sigma^2) || N(0, I)) = 0.5 * sum(mu^2 + sigma^2 - logvar - 1).

    Summed over latent dimensions; returns a scalar for a single code and a
    per-row array for a batch.
    """
    mu = np.asarray(mu, dtype=float)
    logvar = np.asarray(logvar, dtype=float)
    return 0.5 * np.sum(mu * mu + np.exp(logvar) - logvar - 1.0, axis=-1)


def recon_loss(x, xbar):
    """Mean over batch of the per-row mean squared error over channels."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    xbar = np.atleast_2d(np.asarray(xbar, dtype=float))
    if x.shape != xbar.shape:
        raise ShapeError(f"shape mismatch {x.shape} vs {xbar.shape}")
    return float(np.mean((x - xbar) ** 2))


def _encode_with_cache(model, batch):
    out, cache = model.encoder.forward(batch)
    d = model.latent_dim
    raw_logvar = out[:, d:]
    mask = (raw_logvar > LOGVAR_MIN) & (raw_logvar < LOGVAR_MAX)
    return out[:, :d], np.clip(raw_logvar, LOGVAR_MIN, LOGVAR_MAX), mask, cache


def loss_total(model, batch_mixed, batch_labeled=None, rng=None, eps=None):
    """Training objective and its exact gradient for one step.

    J = recon(batch_mixed) + beta * mean KL(batch_mixed)
                           + gamma * mean KL(batch_labeled)

    eps overrides the rng draw (one standard-normal array shaped like the
    latent batch); handy for gradient checks.  Returns (LossParts, grads)
    with grads aligned to model.params().
    """
    spec = model.spec
    xm = np.atleast_2d(np.asarray(batch_mixed, dtype=float))
    bm = xm.shape[0]
    d = model.latent_dim

    mu, logvar, mask, enc_cache = _encode_with_cache(model, xm)

    if spec.sampling == "none":
        z = mu
    else:
        if eps is None:
            if rng is None:
                raise ValueError("stochastic sampling needs rng or an explicit eps")
            eps = rng.standard_normal((bm, d))
        z = sample(mu, logvar, spec.sampling, eps, model.alpha)

    xbar, dec_cache = model.decoder.forward(z)
    recon = float(np.mean((xm - xbar) ** 2))

    d_xbar = 2.0 * (xbar - xm) / xm.size
    dec_grads, dz = model.decoder.backward(dec_cache, d_xbar)

    d_mu = dz.copy()
    if spec.sampling == "standard":
        d_logvar = dz * 0.5 * np.exp(0.5 * logvar) * eps
    elif spec.sampling == "adaptive":
        d_logvar = dz * model.alpha * eps
    else:
        d_logvar = np.zeros_like(logvar)

    kl = 0.0
    if spec.beta != 0.0:
        kl = float(np.mean(kl_gaussian(mu, logvar)))
        d_mu += spec.beta * mu / bm
        d_logvar += spec.beta * 0.5 * (np.exp(logvar) - 1.0) / bm

    enc_out_grad = np.concatenate([d_mu, d_logvar * mask], axis=1)
    enc_grads, _ = model.encoder.backward(enc_cache, enc_out_grad)

    kl_labeled = 0.0
    if spec.gamma != 0.0:
        if batch_labeled is None:
            raise ValueError(f"variant {spec.name} needs a labeled batch")
        xl = np.atleast_2d(np.asarray(batch_labeled, dtype=float))
        bl = xl.shape[0]
        mu_l, logvar_l, mask_l, cache_l = _encode_with_cache(model, xl)
        kl_labeled = float(np.mean(kl_gaussian(mu_l, logvar_l)))
        d_out_l = np.concatenate(
            [
                spec.gamma * mu_l / bl,
                (spec.gamma * 0.5 * (np.exp(logvar_l) - 1.0) / bl) * mask_l,
            ],
            axis=1,
        )
        grads_l, _ = model.encoder.backward(cache_l, d_out_l)
        enc_grads = [g + gl for g, gl in zip(enc_grads, grads_l)]

    total = recon + spec.beta * kl + spec.gamma * kl_labeled
    parts = LossParts(total, recon, kl, kl_labeled)
    return parts, enc_grads + dec_grads


def train_vae(dataset, variant, config=None, n_channels=13, latent_dim=8,
              hidden=20, alpha=None, beta=None, gamma=None):
    """Train a variant on a generated dataset per its pool recipe.

    Fits the [-1, 1] scaler on the variant's training pool, then runs Adam
    over shuffled mini-batches.  Knowledge-induced variants pair every mixed
    batch with an equal-size labeled-healthy batch drawn from S_T upsampled
    with replacement to the mixed-pool size, re-drawn each epoch.

    Returns (model, history); history carries per-epoch loss components and
    the per-step (mixed, labeled) batch sizes.
    """
    if config is None:
        config = TrainConfig()
    spec = variant if isinstance(variant, VariantSpec) else resolve_variant(variant, beta, gamma)
    rng = np.random.default_rng(config.seed)
    model = build_model(spec, rng, n_channels=n_channels, latent_dim=latent_dim,
                        hidden=hidden, alpha=alpha)

    x_labeled = dataset.X[dataset.split == "S_T"]
    if spec.pool == "mixed":
        pool = np.vstack([x_labeled, dataset.X[dataset.split == "D_U"]])
    else:
        pool = x_labeled
    if pool.shape[0] == 0:
        raise ValueError("training pool is empty")

    model.scaler = Scaler.fit(pool)
    pool = model.scaler.apply(pool)
    labeled = model.scaler.apply(x_labeled) if spec.gamma != 0.0 else None

    opt = Adam(model.params(), lr=config.lr)
    history = {"recon": [], "kl": [], "kl_labeled": [], "total": [],
               "step_batch_sizes": []}
    m = pool.shape[0]
    for _ in range(config.epochs):
        order = rng.permutation(m)
        if labeled is not None:
            paired = labeled[rng.integers(0, labeled.shape[0], size=m)]
        sums = np.zeros(4)
        steps = 0
        for start in range(0, m, config.batch):
            idx = order[start:start + config.batch]
            batch = pool[idx]
            batch_l = paired[start:start + config.batch] if labeled is not None else None
            parts, grads = loss_total(model, batch, batch_l, rng=rng)
            if not np.isfinite(parts.total):
                raise TrainingDivergedError(f"loss became {parts.total} mid-epoch")
            opt.step(model.params(), grads)
            sums += (parts.recon, parts.kl, parts.kl_labeled, parts.total)
            steps += 1
            history["step_batch_sizes"].append(
                (len(idx), 0 if batch_l is None else len(batch_l))
            )
        history["recon"].append(float(sums[0] / steps))
        history["kl"].append(float(sums[1] / steps))
        history["kl_labeled"].append(float(sums[2] / steps))
        history["total"].append(float(sums[3] / steps))
    return model, history


def sample_reconstruction(model, x_normalized, rng):
    """(z, xbar) with z drawn through the model's sampling mode."""
    mu, logvar = encode(model, x_normalized)
    if model.spec.sampling == "none":
        z = mu
    else:
        eps = rng.standard_normal(mu.shape)
        z = sample(mu, logvar, model.spec.sampling, eps, model.alpha)
    return z, decode(model, z)
