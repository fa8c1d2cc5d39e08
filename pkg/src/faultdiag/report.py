"""Report rendering: markdown/CSV metric tables and matplotlib figures.

Figures are written next to the delimited outputs with deterministic bytes:
the Agg backend, a fixed svg hash salt, and no embedded dates, so identical
runs produce identical files.
"""

from __future__ import annotations

import csv
import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "faultdiag"
plt.rcParams["figure.dpi"] = 110

_NO_DATE = {"Date": None}


def _finish(fig, path):
    fig.savefig(path, metadata=_NO_DATE if str(path).endswith(".svg") else None)
    plt.close(fig)


def fig_loss_history(history, path):
    """Per-epoch loss components on a log scale."""
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    epochs = np.arange(1, len(history["total"]) + 1)
    for key, style in (("total", "-"), ("recon", "--"), ("kl", ":"), ("kl_labeled", "-.")):
        series = np.asarray(history.get(key, []), dtype=float)
        if series.size and np.any(series != 0.0):
            ax.plot(epochs, series, style, label=key)
    ax.set_yscale("log")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _finish(fig, path)


def fig_reachability(result, path, states=None):
    """Reachability profile in visit order, colored by extracted cluster."""
    profile = result.reachability_profile.copy()
    labels = result.labels[result.ordering]
    finite = profile[np.isfinite(profile)]
    cap = float(finite.max()) * 1.1 if finite.size else 1.0
    profile[~np.isfinite(profile)] = cap
    fig, ax = plt.subplots(figsize=(7.0, 3.2))
    pos = np.arange(len(profile))
    noise = labels == -1
    ax.bar(pos[noise], profile[noise], width=1.0, color="0.75")
    if (~noise).any():
        cmap = plt.get_cmap("tab20")
        colors = [cmap(l % 20) for l in labels[~noise]]
        ax.bar(pos[~noise], profile[~noise], width=1.0, color=colors)
    ax.set_xlabel("ordering position")
    ax.set_ylabel("reachability")
    ax.set_title(f"R = {result.n_clusters} clusters, noise in grey", fontsize=9)
    fig.tight_layout()
    _finish(fig, path)


def fig_embedding(embedding, path, color_labels=None, legend_title="state"):
    """2-D scatter of a projection, one color per label; SVG-friendly."""
    fig, ax = plt.subplots(figsize=(5.2, 4.6))
    y = np.asarray(embedding, dtype=float)
    if color_labels is None:
        ax.scatter(y[:, 0], y[:, 1], s=6, color="C0", linewidths=0)
    else:
        color_labels = np.asarray(color_labels)
        cmap = plt.get_cmap("tab20")
        for k, lab in enumerate(np.unique(color_labels)):
            m = color_labels == lab
            color = "0.7" if lab == -1 else cmap(k % 20)
            ax.scatter(y[m, 0], y[m, 1], s=6, color=color, linewidths=0,
                       label=str(lab))
        if len(np.unique(color_labels)) <= 20:
            ax.legend(title=legend_title, fontsize=6, markerscale=1.5,
                      loc="center left", bbox_to_anchor=(1.0, 0.5))
    ax.set_xlabel("y1")
    ax.set_ylabel("y2")
    fig.tight_layout()
    _finish(fig, path)


# ---------------------------------------------------------------------------
# tables

def format_value(v):
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.4g}"
    return str(v)


def format_mean_std(values):
    """mean +- sample std over seeds; a single value prints bare."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 1:
        return format_value(float(arr[0]))
    std = float(arr.std(ddof=1))
    return f"{arr.mean():.4g} +- {std:.2g}"


def markdown_table(headers, rows):
    lines = ["| " + " | ".join(str(h) for h in headers) + " |",
             "| " + " | ".join("---" for _ in headers) + " |"]
    for row in rows:
        lines.append("| " + " | ".join(format_value(v) for v in row) + " |")
    return "\n".join(lines) + "\n"


def write_csv_table(path, headers, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(headers)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])


def write_markdown(path, title, sections):
    """sections: list of (heading, body-markdown)."""
    parts = [f"# {title}\n"]
    for heading, body in sections:
        parts.append(f"\n## {heading}\n\n{body}")
    with open(path, "w") as fh:
        fh.write("".join(parts))
