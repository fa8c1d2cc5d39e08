"""Density-based fault segmentation with OPTICS.

Builds the classic reachability ordering (Euclidean metric, priority queue on
smallest reachability with index tie-breaking) and extracts flat clusters two
ways: the xi method over steep areas of the reachability profile, or a
DBSCAN-equivalent cut at a fixed eps.  Noise keeps the label -1; R is the
number of extracted clusters.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

DEFAULT_MIN_SAMPLES = 100
DEFAULT_XI = 0.05


@dataclass
class OpticsParams:
    min_samples: int = DEFAULT_MIN_SAMPLES
    max_eps: float = np.inf
    extraction: str = "xi"          # "xi" or "dbscan"
    xi: float = DEFAULT_XI
    eps: float | None = None        # cut level for the dbscan extraction
    min_cluster_size: int | None = None  # defaults to min_samples

    def validate(self):
        if self.min_samples < 2:
            raise ValueError("min_samples must be at least 2")
        if not 0.0 < self.xi < 1.0:
            raise ValueError("xi must sit strictly inside (0, 1)")
        if self.max_eps <= 0:
            raise ValueError("max_eps must be positive")
        if self.extraction not in ("xi", "dbscan"):
            raise ValueError(f"unknown extraction {self.extraction!r}")
        if self.extraction == "dbscan" and (self.eps is None or self.eps <= 0):
            raise ValueError("dbscan extraction needs a positive eps")
        if self.min_cluster_size is not None and self.min_cluster_size < 2:
            raise ValueError("min_cluster_size must be at least 2")


@dataclass
class OpticsResult:
    ordering: np.ndarray        # visit order, a permutation of row indices
    reachability: np.ndarray    # per point (not per ordering position)
    core_distance: np.ndarray   # per point; inf where undefined
    labels: np.ndarray          # per point; -1 is noise
    n_clusters: int

    @property
    def reachability_profile(self):
        """Reachability in visit order, the plotted quantity."""
        return self.reachability[self.ordering]


def _pairwise_block(x, sq, rows):
    d2 = sq[rows][:, None] + sq[None, :] - 2.0 * (x[rows] @ x.T)
    return np.sqrt(np.maximum(d2, 0.0))


def _core_distances(x, sq, min_samples, max_eps):
    n = x.shape[0]
    core = np.full(n, np.inf)
    if min_samples > n:
        return core
    block = max(1, (1 << 21) // n)
    for start in range(0, n, block):
        rows = np.arange(start, min(start + block, n))
        d = _pairwise_block(x, sq, rows)
        # the query point counts itself (distance 0)
        core[rows] = np.partition(d, min_samples - 1, axis=1)[:, min_samples - 1]
    core[core > max_eps] = np.inf
    return core


def compute_ordering(points, min_samples=DEFAULT_MIN_SAMPLES, max_eps=np.inf):
    """OPTICS expansion: returns (ordering, reachability, core_distance).

    The seed queue pops the smallest reachability, ties resolved by the lower
    row index; every not-yet-reached point starts a new expansion in index
    order with reachability +inf.
    """
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if x.shape[0] == 0:
        raise ValueError("clustering needs at least one point")
    n = x.shape[0]
    sq = np.einsum("ij,ij->i", x, x)
    core = _core_distances(x, sq, min_samples, max_eps)

    reach = np.full(n, np.inf)
    processed = np.zeros(n, dtype=bool)
    ordering = np.empty(n, dtype=int)
    pos = 0
    heap = []

    def expand(p):
        d = _pairwise_block(x, sq, np.array([p]))[0]
        newr = np.maximum(core[p], d)
        cand = np.flatnonzero(~processed & (d <= max_eps) & (newr < reach))
        for o in cand:
            reach[o] = newr[o]
            heapq.heappush(heap, (newr[o], o))

    for start in range(n):
        if processed[start]:
            continue
        processed[start] = True
        ordering[pos] = start
        pos += 1
        if np.isfinite(core[start]):
            expand(start)
        while heap:
            r, q = heapq.heappop(heap)
            if processed[q] or r > reach[q]:
                continue
            processed[q] = True
            ordering[pos] = q
            pos += 1
            if np.isfinite(core[q]):
                expand(q)
    return ordering, reach, core


def extract_dbscan(ordering, reachability, core_distance, eps):
    """Flat labels equivalent to DBSCAN at eps, read off the ordering.

    Core structure matches a direct DBSCAN run; border points go to the
    cluster that first reaches them in the ordering.
    """
    labels = np.full(len(ordering), -1, dtype=int)
    cluster = -1
    for idx in ordering:
        if reachability[idx] > eps:
            if core_distance[idx] <= eps:
                cluster += 1
                labels[idx] = cluster
        else:
            labels[idx] = max(cluster, 0)
    return labels


def _extend_region(steep, forbidden, start, min_samples):
    """Maximal steep area from start, tolerating short non-steep stretches."""
    n = len(steep)
    index = start
    end = start
    quiet = 0
    while index < n:
        if steep[index]:
            quiet = 0
            end = index
        elif not forbidden[index]:
            quiet += 1
            if quiet > min_samples:
                break
        else:
            return end
        index += 1
    return end


class _SteepDownArea:
    __slots__ = ("start", "end", "maximum", "mib")

    def __init__(self, start, end, maximum):
        self.start = start
        self.end = end
        self.maximum = maximum
        self.mib = 0.0


def _filter_sdas(sdas, mib, xi_complement):
    if np.isinf(mib):
        return []
    keep = [sda for sda in sdas if mib <= sda.maximum * xi_complement]
    for sda in keep:
        sda.mib = max(sda.mib, mib)
    return keep


def _xi_cluster_ranges(profile, xi, min_samples, min_cluster_size):
    """Candidate (start, end) ordering ranges per the steep-area method."""
    r = np.hstack([profile, [np.inf]])
    xi_complement = 1.0 - xi
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = r[:-1] / r[1:]
        steep_up = ratio <= xi_complement
        steep_down = ratio >= 1.0 / xi_complement
        up = ratio < 1.0
        down = ratio > 1.0

    clusters = []
    sdas = []
    mib = 0.0
    index = 0
    n = len(steep_up)
    while index < n:
        mib = max(mib, r[index])
        if steep_down[index]:
            sdas = _filter_sdas(sdas, mib, xi_complement)
            d_start = index
            d_end = _extend_region(steep_down, up, d_start, min_samples)
            sdas.append(_SteepDownArea(d_start, d_end, r[d_start]))
            index = d_end + 1
            mib = r[index]
        elif steep_up[index]:
            sdas = _filter_sdas(sdas, mib, xi_complement)
            u_start = index
            u_end = _extend_region(steep_up, down, u_start, min_samples)
            index = u_end + 1
            mib = r[index]
            for area in sdas:
                c_start = area.start
                c_end = u_end
                # the maximum in between must fit under the cluster's walls
                if r[c_end + 1] * xi_complement < area.mib:
                    continue
                # trim the higher wall down to the lower one (Definition 11.4)
                if area.maximum * xi_complement >= r[c_end + 1]:
                    while r[c_start + 1] > r[c_end + 1] and c_start < area.end:
                        c_start += 1
                elif r[c_end + 1] * xi_complement >= area.maximum:
                    while r[c_end - 1] > area.maximum and c_end > u_start:
                        c_end -= 1
                if c_end - c_start + 1 < min_cluster_size:
                    continue
                if c_start > area.end:
                    continue
                if c_end < u_start:
                    continue
                clusters.append((c_start, c_end))
        else:
            index += 1
    return clusters


def extract_xi(ordering, reachability, xi=DEFAULT_XI,
               min_samples=DEFAULT_MIN_SAMPLES, min_cluster_size=None):
    """Flat labels from xi-steep areas; overlaps resolve to smaller clusters."""
    if min_cluster_size is None:
        min_cluster_size = min_samples
    profile = reachability[ordering]
    ranges = _xi_cluster_ranges(profile, xi, min_samples, min_cluster_size)
    ranges.sort(key=lambda c: c[1] - c[0])
    in_order = np.full(len(ordering), -1, dtype=int)
    label = 0
    for start, end in ranges:
        if np.all(in_order[start:end + 1] == -1):
            in_order[start:end + 1] = label
            label += 1
    labels = np.full(len(ordering), -1, dtype=int)
    labels[ordering] = in_order
    return labels


def optics(points, params=None):
    """Full pass: ordering plus flat labels per the configured extraction."""
    if params is None:
        params = OpticsParams()
    params.validate()
    ordering, reach, core = compute_ordering(points, params.min_samples, params.max_eps)
    if params.extraction == "dbscan":
        labels = extract_dbscan(ordering, reach, core, params.eps)
    else:
        labels = extract_xi(ordering, reach, params.xi,
                            params.min_samples, params.min_cluster_size)
    n_clusters = int(labels.max()) + 1 if labels.size and labels.max() >= 0 else 0
    return OpticsResult(ordering, reach, core, labels, n_clusters)


def save_reachability_csv(result, path):
    """Profile rows: position, point index, reachability, core distance, label."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["position", "point", "reachability", "core_distance", "label"])
        for pos, idx in enumerate(result.ordering):
            writer.writerow([
                pos, int(idx),
                repr(float(result.reachability[idx])),
                repr(float(result.core_distance[idx])),
                int(result.labels[idx]),
            ])
