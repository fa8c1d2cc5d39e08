import numpy as np
import pytest

from faultdiag.clustering import (
    OpticsParams,
    compute_ordering,
    extract_dbscan,
    extract_xi,
    optics,
    save_reachability_csv,
)


def blob(center, n, sd, rng):
    return center + sd * rng.standard_normal((n, len(center)))


def blobs_dataset(sizes, centers, sd=0.08, seed=0):
    rng = np.random.default_rng(seed)
    points = np.vstack([blob(np.asarray(c, dtype=float), n, sd, rng)
                        for n, c in zip(sizes, centers)])
    truth = np.repeat(np.arange(len(sizes)), sizes)
    return points, truth


def dbscan_reference(points, eps, min_samples):
    """Textbook DBSCAN: core points by eps-neighborhood count, BFS expansion."""
    n = len(points)
    d = np.sqrt(((points[:, None, :] - points[None, :, :]) ** 2).sum(-1))
    neighbors = [np.flatnonzero(d[i] <= eps) for i in range(n)]
    core = np.array([len(nb) >= min_samples for nb in neighbors])
    labels = np.full(n, -1, dtype=int)
    cluster = -1
    for i in range(n):
        if labels[i] != -1 or not core[i]:
            continue
        cluster += 1
        stack = [i]
        labels[i] = cluster
        while stack:
            p = stack.pop()
            if not core[p]:
                continue
            for q in neighbors[p]:
                if labels[q] == -1:
                    labels[q] = cluster
                    stack.append(q)
    return labels, core


def assert_same_partition(a, b):
    """Equal up to label renaming, including the noise set."""
    assert np.array_equal(a == -1, b == -1)
    keep = a != -1
    pairs = set(zip(a[keep].tolist(), b[keep].tolist()))
    assert len(pairs) == len(set(p for p, _ in pairs)) == len(set(q for _, q in pairs))


# ---------------------------------------------------------------------------
# ordering


def test_ordering_matches_the_hand_traced_line_example():
    # two triplets on a line; min_samples=2 makes every core distance 0.1
    x = np.array([[0.0], [0.1], [0.2], [10.0], [10.1], [10.2]])
    ordering, reach, core = compute_ordering(x, min_samples=2)
    assert list(ordering) == [0, 1, 2, 3, 4, 5]
    assert np.allclose(core, 0.1, atol=1e-9)
    profile = reach[ordering]
    assert np.isinf(profile[0])
    assert np.allclose(profile[1:], [0.1, 0.1, 9.8, 0.1, 0.1], atol=1e-9)


def test_ordering_is_a_permutation_starting_at_the_first_row():
    points, _ = blobs_dataset([40, 40], [(0, 0), (5, 5)])
    ordering, _, _ = compute_ordering(points, min_samples=5)
    assert ordering[0] == 0
    assert sorted(ordering.tolist()) == list(range(80))


def test_core_distances_match_a_brute_force_nearest_neighbor_scan():
    rng = np.random.default_rng(3)
    points = rng.normal(size=(40, 3))
    min_samples = 7
    _, _, core = compute_ordering(points, min_samples=min_samples)
    d = np.sqrt(((points[:, None, :] - points[None, :, :]) ** 2).sum(-1))
    for i in range(40):
        expected = np.sort(d[i])[min_samples - 1]  # self included at distance 0
        assert core[i] == pytest.approx(expected, abs=1e-9)


def test_tiny_samples_have_no_core_points():
    points = np.random.default_rng(0).normal(size=(5, 2))
    ordering, reach, core = compute_ordering(points, min_samples=10)
    assert np.all(np.isinf(core))
    assert np.all(np.isinf(reach))
    assert list(ordering) == list(range(5))


def test_max_eps_cuts_off_long_jumps():
    points, _ = blobs_dataset([30, 30], [(0, 0), (50, 50)], sd=0.05, seed=1)
    _, reach, _ = compute_ordering(points, min_samples=5, max_eps=1.0)
    finite = reach[np.isfinite(reach)]
    assert finite.size > 0
    assert np.all(finite <= 1.0)


def test_empty_input_is_rejected():
    with pytest.raises(ValueError, match="at least one point"):
        compute_ordering(np.zeros((0, 2)), min_samples=2)


# ---------------------------------------------------------------------------
# dbscan extraction


def test_dbscan_cut_separates_the_line_blobs():
    x = np.array([[0.0], [0.1], [0.2], [10.0], [10.1], [10.2]])
    params = OpticsParams(min_samples=2, extraction="dbscan", eps=0.5)
    result = optics(x, params)
    assert result.n_clusters == 2
    assert list(result.labels) == [0, 0, 0, 1, 1, 1]


@pytest.mark.parametrize("seed", range(6))
def test_dbscan_cut_agrees_with_the_reference_implementation(seed):
    rng = np.random.default_rng(seed)
    points = np.vstack([
        blob(np.array([0.0, 0.0]), 60, 0.4, rng),
        blob(np.array([4.0, 1.0]), 50, 0.5, rng),
        rng.uniform(-4, 8, size=(40, 2)),
    ])
    eps = 0.6
    min_samples = 8
    ref_labels, core = dbscan_reference(points, eps, min_samples)

    params = OpticsParams(min_samples=min_samples, extraction="dbscan", eps=eps)
    result = optics(points, params)

    # core points must form the exact same partition, and none of them is noise
    assert np.all(result.labels[core] != -1)
    assert np.all(ref_labels[core] != -1)
    pairs = set(zip(result.labels[core].tolist(), ref_labels[core].tolist()))
    assert len(pairs) == len(set(p for p, _ in pairs)) == len(set(q for _, q in pairs))
    # points DBSCAN rejects have no core neighbor, so the cut rejects them too
    assert np.all(result.labels[ref_labels == -1] == -1)
    # border points may differ (the cut can miss them), but when the cut does
    # cluster one, a core point of that cluster must sit within eps
    d = np.sqrt(((points[:, None, :] - points[None, :, :]) ** 2).sum(-1))
    border = (result.labels != -1) & ~core
    for i in np.flatnonzero(border):
        owners = set(result.labels[core & (d[i] <= eps)].tolist())
        assert result.labels[i] in owners


def test_dbscan_extraction_requires_eps():
    with pytest.raises(ValueError, match="eps"):
        optics(np.zeros((4, 2)), OpticsParams(min_samples=2, extraction="dbscan"))


# ---------------------------------------------------------------------------
# xi extraction


def test_xi_extraction_finds_two_well_separated_blobs():
    points, truth = blobs_dataset([120, 100], [(0, 0), (6, 6)], seed=2)
    result = optics(points, OpticsParams(min_samples=25, min_cluster_size=50))
    assert result.n_clusters == 2
    sizes = set()
    for label in (0, 1):
        members = truth[result.labels == label]
        assert np.all(members == members[0])
        sizes.add(int(members.size))
    assert sizes == {120, 100}


def test_xi_extraction_finds_three_blobs_of_unequal_size():
    points, truth = blobs_dataset([150, 90, 60], [(0, 0), (6, 0), (0, 6)], seed=3)
    result = optics(points, OpticsParams(min_samples=20, min_cluster_size=45))
    assert result.n_clusters == 3
    sizes = set()
    for label in range(3):
        members = truth[result.labels == label]
        assert np.all(members == members[0])
        sizes.add(int(members.size))
    assert sizes == {150, 90, 60}


def test_xi_extraction_keeps_a_single_blob_together():
    points, _ = blobs_dataset([200], [(0, 0)], seed=4)
    result = optics(points, OpticsParams(min_samples=15, min_cluster_size=60))
    assert result.n_clusters == 1
    assert int(np.sum(result.labels == 0)) == 200


def test_xi_extraction_respects_min_cluster_size():
    points, _ = blobs_dataset([120, 100], [(0, 0), (6, 6)], seed=2)
    small = optics(points, OpticsParams(min_samples=25, min_cluster_size=50))
    assert small.n_clusters == 2
    # past the leaf sizes only the parent range spanning both blobs survives
    merged = optics(points, OpticsParams(min_samples=25, min_cluster_size=150))
    assert merged.n_clusters == 1
    assert int(np.sum(merged.labels == 0)) == 220
    nothing = optics(points, OpticsParams(min_samples=25, min_cluster_size=221))
    assert nothing.n_clusters == 0


def test_xi_labels_are_stable_under_row_permutation():
    points, _ = blobs_dataset([90, 80], [(0, 0), (7, 7)], sd=0.05, seed=6)
    params = OpticsParams(min_samples=20, min_cluster_size=40)
    base = optics(points, params)
    assert base.n_clusters == 2
    perm = np.random.default_rng(7).permutation(len(points))
    shuffled = optics(points[perm], params)
    assert_same_partition(base.labels[perm], shuffled.labels)


def test_undersized_samples_come_back_as_pure_noise():
    points = np.random.default_rng(8).normal(size=(20, 2))
    result = optics(points, OpticsParams(min_samples=50))
    assert result.n_clusters == 0
    assert np.all(result.labels == -1)


# ---------------------------------------------------------------------------
# params and result plumbing


def test_params_validation_catches_bad_values():
    with pytest.raises(ValueError, match="min_samples"):
        OpticsParams(min_samples=1).validate()
    with pytest.raises(ValueError, match="xi"):
        OpticsParams(xi=0.0).validate()
    with pytest.raises(ValueError, match="xi"):
        OpticsParams(xi=1.0).validate()
    with pytest.raises(ValueError, match="max_eps"):
        OpticsParams(max_eps=0.0).validate()
    with pytest.raises(ValueError, match="extraction"):
        OpticsParams(extraction="kmeans").validate()
    with pytest.raises(ValueError, match="min_cluster_size"):
        OpticsParams(min_cluster_size=1).validate()


def test_reachability_profile_is_reachability_in_visit_order():
    points, _ = blobs_dataset([30, 30], [(0, 0), (5, 5)], seed=9)
    result = optics(points, OpticsParams(min_samples=5))
    assert np.array_equal(result.reachability_profile,
                          result.reachability[result.ordering])


def test_reachability_csv_lists_every_position(tmp_path):
    points, _ = blobs_dataset([25, 25], [(0, 0), (5, 5)], seed=10)
    result = optics(points, OpticsParams(min_samples=5))
    path = tmp_path / "reachability.csv"
    save_reachability_csv(result, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "position,point,reachability,core_distance,label"
    assert len(lines) == 51
    first = lines[1].split(",")
    assert first[0] == "0"
    assert first[1] == str(result.ordering[0])
    assert float(first[2]) == np.inf or first[2] == "inf"
