"""Exact t-SNE for visual inspection of the learned representations.

O(N^2) implementation: per-point Gaussian bandwidths found by binary search
so each conditional distribution hits the target perplexity, symmetrized
joint P, Student-t low-dimensional kernel, and plain momentum gradient
descent with early exaggeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PERPLEXITY_TOL = 1e-3  # relative
P_FLOOR = 1e-12


@dataclass
class TsneParams:
    perplexity: float = 200.0
    iterations: int = 1000
    learning_rate: float = 200.0
    momentum_start: float = 0.5
    momentum_final: float = 0.8
    momentum_switch: int = 250
    exaggeration: float = 12.0
    exaggeration_iters: int = 250
    init_scale: float = 1e-4
    seed: int = 0

    def validate(self):
        if self.perplexity <= 1.0:
            raise ValueError("perplexity must exceed 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")


@dataclass
class TsneResult:
    embedding: np.ndarray     # [N, 2]
    kl_history: np.ndarray    # KL(P || Q) of the un-exaggerated P, per iteration
    perplexity_error: float   # worst relative deviation from the target


def _squared_distances(x):
    sq = np.einsum("ij,ij->i", x, x)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def conditional_probabilities(d2, perplexity, max_steps=64):
    """Row-stochastic P(j|i) with per-row bandwidth matched to the perplexity.

    The search is on beta = 1 / (2 sigma^2); a row converges when
    2^H(P_i) (entropy in bits) is within PERPLEXITY_TOL relative of target.
    Returns (P, worst relative error).
    """
    n = d2.shape[0]
    if perplexity >= n:
        raise ValueError(f"perplexity {perplexity} needs more than {n} points")
    target = np.log2(perplexity)
    p = np.zeros_like(d2)
    worst = 0.0
    for i in range(n):
        row = np.delete(d2[i], i)
        lo, hi = 0.0, np.inf
        beta = 1.0
        q = np.full(n - 1, 1.0 / (n - 1))
        h_bits = np.log2(n - 1.0)
        for _ in range(max_steps):
            w = np.exp(-row * beta)
            s = w.sum()
            if s <= 0.0:
                hi = beta
                beta = beta / 2.0
                continue
            q = w / s
            nzq = q[q > 0]
            h_bits = float(-np.sum(nzq * np.log2(nzq)))
            if abs(2.0**h_bits / perplexity - 1.0) <= PERPLEXITY_TOL:
                break
            if h_bits > target:  # too flat, sharpen
                lo = beta
                beta = beta * 2.0 if np.isinf(hi) else 0.5 * (lo + hi)
            else:
                hi = beta
                beta = 0.5 * (lo + hi)
        worst = max(worst, abs(2.0**h_bits / perplexity - 1.0))
        p[i, np.arange(n) != i] = q
    return p, worst


def joint_probabilities(points, perplexity):
    """Symmetrized, normalized joint P from the conditional distributions."""
    d2 = _squared_distances(np.atleast_2d(np.asarray(points, dtype=float)))
    cond, worst = conditional_probabilities(d2, perplexity)
    p = (cond + cond.T) / (2.0 * d2.shape[0])
    p /= p.sum()
    return p, worst


def _student_t(y):
    w = 1.0 / (1.0 + _squared_distances(y))
    np.fill_diagonal(w, 0.0)
    q = w / w.sum()
    return np.maximum(q, P_FLOOR), w


def kl_divergence(p, q):
    mask = p > 0
    return float(np.sum(p[mask] * (np.log(p[mask]) - np.log(q[mask]))))


def tsne(points, params=None):
    """Embed points into 2-D; KL(P||Q) is logged every iteration."""
    if params is None:
        params = TsneParams()
    params.validate()
    x = np.atleast_2d(np.asarray(points, dtype=float))
    n = x.shape[0]
    if n < 10:
        raise ValueError("projection needs at least 10 points")
    if not np.all(np.isfinite(x)):
        raise ValueError("input contains non-finite values")
    if params.perplexity >= n / 3.0:
        raise ValueError(
            f"perplexity {params.perplexity} too large for {n} points; needs < N/3")

    p, worst = joint_probabilities(x, params.perplexity)
    rng = np.random.default_rng(params.seed)
    y = rng.standard_normal((n, 2)) * params.init_scale
    velocity = np.zeros_like(y)
    kl_history = np.empty(params.iterations)

    for it in range(params.iterations):
        exaggerate = it < params.exaggeration_iters
        p_eff = p * params.exaggeration if exaggerate else p
        q, w = _student_t(y)
        diff = (p_eff - q) * w
        grad = 4.0 * ((np.diag(diff.sum(axis=1)) - diff) @ y)
        momentum = (params.momentum_start if it < params.momentum_switch
                    else params.momentum_final)
        velocity = momentum * velocity - params.learning_rate * grad
        y = y + velocity
        y = y - y.mean(axis=0)
        kl_history[it] = kl_divergence(p, q)

    return TsneResult(y, kl_history, worst)


def save_embedding_csv(embedding, path, labels=None, states=None):
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["row", "y1", "y2"]
        if labels is not None:
            header.append("cluster")
        if states is not None:
            header.append("state")
        writer.writerow(header)
        for i, (y1, y2) in enumerate(embedding):
            row = [i, repr(float(y1)), repr(float(y2))]
            if labels is not None:
                row.append(int(labels[i]))
            if states is not None:
                row.append(int(states[i]))
            writer.writerow(row)
