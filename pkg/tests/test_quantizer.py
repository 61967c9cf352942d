import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dc3.errors import DimensionMismatch, EmptyInput
from dc3.quantizer import BinPartition, assign, kmeans_partition

from oracles import nearest_centroid


def test_two_well_separated_pairs_split_cleanly():
    points = np.array([[0.0], [0.1], [10.0], [10.1]])
    for seed in range(10):
        part = kmeans_partition(points, bin_count=2, seed=seed)
        assert sorted(np.round(part.centroids.ravel(), 6)) == [0.05, 10.05]
        assert part.assignment[0] == part.assignment[1]
        assert part.assignment[2] == part.assignment[3]
        assert part.assignment[0] != part.assignment[2]


def test_single_bin_centroid_is_the_mean():
    rng = np.random.default_rng(3)
    points = rng.normal(size=(20, 4))
    part = kmeans_partition(points, bin_count=1, seed=0)
    assert np.allclose(part.centroids[0], points.mean(axis=0))
    assert part.bin_count == 1
    assert set(part.assignment.tolist()) == {0}


def test_bin_count_clamps_to_sample_count():
    points = np.array([[0.0], [5.0], [9.0]])
    part = kmeans_partition(points, bin_count=10, seed=1)
    assert part.bin_count == 3
    assert sorted(part.assignment.tolist()) == [0, 1, 2]


def test_more_iterations_never_increase_cost():
    rng = np.random.default_rng(7)
    points = rng.normal(size=(60, 3))
    part = kmeans_partition(points, bin_count=4, seed=5)
    deltas = np.diff(part.inertia_history)
    assert (deltas <= 1e-9).all()
    assert part.inertia == part.inertia_history[-1]


@given(seed=st.integers(min_value=0, max_value=2**32))
@settings(max_examples=60, deadline=None)
def test_converged_assignment_is_the_nearest_centroid(seed):
    rng = np.random.default_rng(seed % 10_000)
    points = rng.normal(size=(40, 3))
    part = kmeans_partition(points, bin_count=5, seed=seed)
    dists = ((points[:, None, :] - part.centroids[None, :, :]) ** 2).sum(axis=2)
    own = dists[np.arange(len(points)), part.assignment]
    assert np.allclose(own, dists.min(axis=1))
    sizes = part.sizes()
    assert (sizes > 0).all()
    assert sizes.sum() == len(points)


def test_fixed_inputs_reproduce_identical_partitions():
    rng = np.random.default_rng(0)
    points = rng.normal(size=(30, 2))
    a = kmeans_partition(points, bin_count=3, seed=42)
    b = kmeans_partition(points, bin_count=3, seed=42)
    assert np.array_equal(a.centroids, b.centroids)
    assert np.array_equal(a.assignment, b.assignment)
    assert a.inertia_history == b.inertia_history


def test_different_seeds_may_relabel_but_cover_all_bins():
    rng = np.random.default_rng(8)
    points = rng.normal(size=(25, 2))
    for seed in range(5):
        part = kmeans_partition(points, bin_count=4, seed=seed)
        assert (part.sizes() > 0).all()


def test_duplicate_points_still_fill_every_bin():
    points = np.zeros((6, 2))
    part = kmeans_partition(points, bin_count=3, seed=2)
    assert (part.sizes() > 0).all()
    assert part.inertia == 0.0


def test_assign_matches_batch_rule_and_breaks_ties_low():
    centroids = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert assign(np.array([0.2, 0.0]), centroids) == 0
    assert assign(np.array([0.9, 0.0]), centroids) == 1
    assert assign(np.array([0.5, 0.0]), centroids) == 0  # equidistant


@given(seed=st.integers(0, 1000))
@settings(max_examples=30, deadline=None)
def test_assign_agrees_with_reference_loop(seed):
    rng = np.random.default_rng(seed)
    centroids = rng.normal(size=(4, 3))
    point = rng.normal(size=3)
    assert assign(point, centroids) == nearest_centroid(
        point.tolist(), centroids.tolist()
    )


def test_empty_input_is_rejected():
    with pytest.raises(EmptyInput):
        kmeans_partition(np.empty((0, 3)), bin_count=2, seed=0)
    with pytest.raises(EmptyInput):
        kmeans_partition(np.ones((4, 2)), bin_count=0, seed=0)


def test_dimension_errors_are_rejected():
    with pytest.raises(DimensionMismatch):
        kmeans_partition(np.ones(5), bin_count=2, seed=0)
    with pytest.raises(DimensionMismatch):
        assign(np.ones(3), np.ones((2, 4)))


def test_json_round_trip_preserves_the_partition():
    rng = np.random.default_rng(4)
    points = rng.normal(size=(15, 2))
    part = kmeans_partition(points, bin_count=3, seed=9, class_label="cat")
    clone = BinPartition.from_json_dict(part.to_json_dict())
    assert clone.class_label == "cat"
    assert clone.bin_count == part.bin_count
    assert np.array_equal(clone.centroids, part.centroids)
    assert np.array_equal(clone.assignment, part.assignment)
    assert clone.inertia == part.inertia
    assert clone.inertia_history == part.inertia_history


def test_members_lists_each_bin_in_ascending_order():
    rng = np.random.default_rng(6)
    points = rng.normal(size=(20, 2))
    part = kmeans_partition(points, bin_count=4, seed=3)
    seen = []
    for j in range(part.bin_count):
        members = part.members(j)
        assert list(members) == sorted(members)
        assert (part.assignment[members] == j).all()
        seen.extend(members.tolist())
    assert sorted(seen) == list(range(20))
