"""Evaluation metrics: detection scores, clustering agreement, and
representation quality.

Clustering agreement (mutual information, its exact hypergeometric
expectation, adjusted mutual information, homogeneity, completeness) is
computed from scratch on contingency tables with natural-log entropies.
Representation quality comes as the adjusted-mutual-information gain of
latent-space over input-space clustering, the accuracy gain of a linear
softmax probe, and Kraskov-style k-nearest-neighbor mutual information maps
between channel sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma, gammaln

from .clustering import OpticsParams, optics


# ---------------------------------------------------------------------------
# detection scoring

@dataclass
class DetectionScores:
    accuracy: float        # percent of rows with the correct health call
    detection_rate: float  # percent of truly faulty rows flagged faulty
    false_alarm: float     # percent of truly healthy rows flagged faulty


def detection_scores(true_h, pred_h):
    """Percent accuracy / fault-detection rate / false-alarm rate.

    Health labels are 1 (healthy) and 0 (faulty).  Rates over an empty class
    come back as nan.
    """
    t = np.asarray(true_h, dtype=int)
    p = np.asarray(pred_h, dtype=int)
    if t.size == 0:
        raise ValueError("detection scoring needs at least one row")
    if t.shape != p.shape:
        raise ValueError(f"label shapes disagree: {t.shape} vs {p.shape}")
    acc = 100.0 * float(np.mean(t == p))
    faulty = t == 0
    healthy = ~faulty
    det = 100.0 * float(np.mean(p[faulty] == 0)) if faulty.any() else float("nan")
    fa = 100.0 * float(np.mean(p[healthy] == 0)) if healthy.any() else float("nan")
    return DetectionScores(acc, det, fa)


# ---------------------------------------------------------------------------
# partition agreement

def _check_labels(u, v):
    u = np.asarray(u).ravel()
    v = np.asarray(v).ravel()
    if u.size == 0 or u.size != v.size:
        raise ValueError("need two equal-length, non-empty label arrays")
    return u, v


def contingency_table(u, v):
    """Counts n_ij plus the marginals (a_i, b_j)."""
    u, v = _check_labels(u, v)
    _, ui = np.unique(u, return_inverse=True)
    _, vi = np.unique(v, return_inverse=True)
    table = np.zeros((ui.max() + 1, vi.max() + 1), dtype=np.int64)
    np.add.at(table, (ui, vi), 1)
    return table, table.sum(axis=1), table.sum(axis=0)


def entropy_from_counts(counts):
    """Shannon entropy in nats of a partition given its cluster sizes."""
    counts = np.asarray(counts, dtype=float)
    counts = counts[counts > 0]
    n = counts.sum()
    if n <= 0:
        raise ValueError("entropy needs positive counts")
    p = counts / n
    return float(-np.sum(p * np.log(p)))


def mutual_info_discrete(u, v):
    """I(U; V) in nats from the contingency table; 0 when either is trivial."""
    table, a, b = contingency_table(u, v)
    n = float(table.sum())
    nz = table > 0
    nij = table[nz].astype(float)
    outer = np.outer(a, b).astype(float)[nz]
    return float(np.sum((nij / n) * (np.log(nij * n) - np.log(outer))))


def expected_mi(a, b, n):
    """Exact E[MI] under the hypergeometric model of random labelings with
    fixed cluster sizes a and b over n items; log-space factorials."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.sum() != n or b.sum() != n:
        raise ValueError("cluster sizes must sum to n on both sides")
    lg = gammaln
    emi = 0.0
    for ai in a[a > 0]:
        for bj in b[b > 0]:
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            if hi < lo:
                continue
            nij = np.arange(lo, hi + 1, dtype=float)
            logw = (lg(ai + 1) + lg(bj + 1) + lg(n - ai + 1) + lg(n - bj + 1)
                    - lg(n + 1) - lg(nij + 1) - lg(ai - nij + 1) - lg(bj - nij + 1)
                    - lg(n - ai - bj + nij + 1))
            terms = (nij / n) * (np.log(n * nij) - math.log(ai) - math.log(bj))
            emi += float(np.sum(terms * np.exp(logw)))
    return emi


def adjusted_mutual_info(u, v):
    """AMI with the arithmetic-mean normalizer.

    Identical trivial partitions score 1; a single-cluster labeling against a
    non-trivial one scores 0.
    """
    u, v = _check_labels(u, v)
    table, a, b = contingency_table(u, v)
    hu = entropy_from_counts(a)
    hv = entropy_from_counts(b)
    if hu == 0.0 and hv == 0.0:
        return 1.0
    if hu == 0.0 or hv == 0.0:
        return 0.0
    # two all-singleton labelings are the same partition, but the chance
    # correction degenerates there (EMI equals the normalizer)
    if a.max() == 1 and b.max() == 1:
        return 1.0
    mi = mutual_info_discrete(u, v)
    emi = expected_mi(a, b, int(table.sum()))
    denom = 0.5 * (hu + hv) - emi
    if abs(denom) < np.finfo(float).eps:
        denom = math.copysign(np.finfo(float).eps, denom if denom != 0.0 else 1.0)
    return float((mi - emi) / denom)


def homogeneity_completeness(u, v):
    """(h, c) of predicted clustering u against true labeling v, in nats.

    h = 1 - H(V|U) / H(V), c = 1 - H(U|V) / H(U); degenerate entropies give 1.
    """
    u, v = _check_labels(u, v)
    table, a, b = contingency_table(u, v)
    n = float(table.sum())
    hu = entropy_from_counts(a)
    hv = entropy_from_counts(b)
    nz = table > 0
    nij = table[nz].astype(float)
    rows = np.broadcast_to(a[:, None], table.shape)[nz].astype(float)
    cols = np.broadcast_to(b[None, :], table.shape)[nz].astype(float)
    h_v_given_u = float(-np.sum((nij / n) * (np.log(nij) - np.log(rows))))
    h_u_given_v = float(-np.sum((nij / n) * (np.log(nij) - np.log(cols))))
    h = 1.0 if hv == 0.0 else 1.0 - h_v_given_u / hv
    c = 1.0 if hu == 0.0 else 1.0 - h_u_given_v / hu
    return float(h), float(c)


def noise_as_cluster(labels):
    """Map OPTICS noise (-1) to one extra cluster id so it is scored, not dropped."""
    labels = np.asarray(labels, dtype=int)
    out = labels.copy()
    out[labels == -1] = labels.max() + 1
    return out


# ---------------------------------------------------------------------------
# representation metrics

@dataclass
class AmigResult:
    ami_latent: float
    ami_input: float
    gain: float
    labels_latent: np.ndarray
    labels_input: np.ndarray
    r_latent: int
    r_input: int


def amig(x, z, true_states, params=None):
    """AMI gain of clustering the latent codes over clustering the inputs.

    Both spaces are clustered with the same OPTICS parameters; noise points
    count as one extra cluster.
    """
    if params is None:
        params = OpticsParams()
    res_z = optics(z, params)
    res_x = optics(x, params)
    ami_z = adjusted_mutual_info(noise_as_cluster(res_z.labels), true_states)
    ami_x = adjusted_mutual_info(noise_as_cluster(res_x.labels), true_states)
    return AmigResult(ami_z, ami_x, ami_z - ami_x,
                      res_z.labels, res_x.labels,
                      res_z.n_clusters, res_x.n_clusters)


def _softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def logistic_accuracy(points, labels, l2=1e-4, tol=1e-6, max_iter=5000):
    """Training accuracy (percent) of a multinomial softmax probe.

    Full-batch gradient descent with backtracking on the cross-entropy plus
    an L2 penalty on the non-bias weights, run to a loss-change tolerance.
    """
    x = np.atleast_2d(np.asarray(points, dtype=float))
    y = np.asarray(labels).ravel()
    if x.shape[0] != y.size or y.size == 0:
        raise ValueError("points and labels disagree")
    classes, yi = np.unique(y, return_inverse=True)
    if classes.size == 1:
        return 100.0
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    sd[sd == 0] = 1.0
    xb = np.hstack([(x - mu) / sd, np.ones((x.shape[0], 1))])
    n, d = xb.shape
    c = classes.size
    onehot = np.zeros((n, c))
    onehot[np.arange(n), yi] = 1.0

    w = np.zeros((d, c))

    def loss_and_grad(wm):
        p = _softmax(xb @ wm)
        ll = -np.sum(onehot * np.log(np.maximum(p, 1e-300))) / n
        pen = 0.5 * l2 * np.sum(wm[:-1] ** 2)
        g = xb.T @ (p - onehot) / n
        g[:-1] += l2 * wm[:-1]
        return ll + pen, g

    lr = 1.0
    prev, grad = loss_and_grad(w)
    for _ in range(max_iter):
        while True:
            w_new = w - lr * grad
            cur, grad_new = loss_and_grad(w_new)
            if cur <= prev or lr < 1e-12:
                break
            lr *= 0.5
        w = w_new
        done = abs(prev - cur) < tol
        prev, grad = cur, grad_new
        if done:
            break
        lr *= 1.1
    pred = np.argmax(xb @ w, axis=1)
    return 100.0 * float(np.mean(pred == yi))


@dataclass
class LsgResult:
    accuracy_latent: float
    accuracy_input: float
    gain: float  # percentage points


def lsg(x, z, true_states, l2=1e-4, tol=1e-6):
    """Linear-separability gain: probe accuracy on z minus probe accuracy on x."""
    acc_z = logistic_accuracy(z, true_states, l2=l2, tol=tol)
    acc_x = logistic_accuracy(x, true_states, l2=l2, tol=tol)
    return LsgResult(acc_z, acc_x, acc_z - acc_x)


# ---------------------------------------------------------------------------
# Kraskov mutual information

def _strict_marginal_counts(values, radii):
    """Per point: how many other points lie strictly within its radius."""
    order = np.argsort(values, kind="stable")
    sv = values[order]
    hi = np.searchsorted(sv, values + radii, side="left")
    lo = np.searchsorted(sv, values - radii, side="right")
    counts = hi - lo - 1  # the point itself is strictly inside when radius > 0
    return np.where(radii > 0, np.maximum(counts, 0), 0)


def ksg_mi(a, b, k=3):
    """Kraskov variant-1 MI estimate (nats) between two scalar series.

    Chebyshev max-norm in the joint space; the k-th neighbor distance sets a
    per-point radius, marginal neighbors are counted strictly inside it, and
    I = psi(k) + psi(N) - <psi(nx + 1) + psi(ny + 1)>, clipped at zero.
    Degenerate (constant) series return 0 by convention.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    n = a.size
    if n != b.size:
        raise ValueError("series lengths disagree")
    if n <= k:
        raise ValueError(f"need more than k={k} points, got {n}")
    if np.ptp(a) == 0.0 or np.ptp(b) == 0.0:
        return 0.0
    radii = np.empty(n)
    block = max(1, (1 << 21) // n)
    for start in range(0, n, block):
        stop = min(start + block, n)
        d = np.maximum(
            np.abs(a[start:stop, None] - a[None, :]),
            np.abs(b[start:stop, None] - b[None, :]),
        )
        d[np.arange(stop - start), np.arange(start, stop)] = np.inf
        radii[start:stop] = np.partition(d, k - 1, axis=1)[:, k - 1]
    nx = _strict_marginal_counts(a, radii)
    ny = _strict_marginal_counts(b, radii)
    mi = digamma(k) + digamma(n) - float(np.mean(digamma(nx + 1) + digamma(ny + 1)))
    return max(float(mi), 0.0)


@dataclass
class MmiResult:
    table: np.ndarray  # [a-channels, b-channels] pairwise MI estimates
    total: float
    mean: float        # the headline number


def mmi(a_block, b_block, k=3, max_rows=None):
    """Pairwise KSG MI map between the columns of two row-aligned blocks.

    max_rows caps the sample with an evenly strided, deterministic subset.
    Reports the summed map and its mean; the mean is the headline value.
    """
    a_block = np.atleast_2d(np.asarray(a_block, dtype=float))
    b_block = np.atleast_2d(np.asarray(b_block, dtype=float))
    if a_block.shape[0] != b_block.shape[0]:
        raise ValueError("blocks must align on rows")
    if max_rows is not None and a_block.shape[0] > max_rows:
        idx = np.round(np.linspace(0, a_block.shape[0] - 1, max_rows)).astype(int)
        a_block = a_block[idx]
        b_block = b_block[idx]
    table = np.empty((a_block.shape[1], b_block.shape[1]))
    for i in range(a_block.shape[1]):
        for j in range(b_block.shape[1]):
            table[i, j] = ksg_mi(a_block[:, i], b_block[:, j], k=k)
    return MmiResult(table, float(table.sum()), float(table.mean()))
