import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bottleneckhc.topology import (
    SampleCloud,
    label_points,
    nearest_gap,
    read_cloud,
    rips_components,
    rips_graph,
    sample_curve,
    write_cloud,
)


def test_circle_samples_on_curve(circle):
    c = sample_curve(circle, [(-2, 2), (-2, 2)], 0.1)
    assert len(c) > 50
    assert np.max(np.abs(np.sum(c.points**2, axis=1) - 1)) < 1e-8
    assert c.residual_bound < 1e-8


def test_two_ovals_bands(two_ovals):
    c = sample_curve(two_ovals, [(-3, 3), (-3, 3)], 0.05)
    ax = np.abs(c.points[:, 0])
    assert np.all((ax >= 1 - 1e-6) & (ax <= 2 + 1e-6))
    assert c.max_gap < 0.4
    assert rips_components(c, 0.4)[0] == 2
    assert rips_components(c, 100)[0] == 1


def test_empty_when_box_misses(circle, caplog):
    c = sample_curve(circle, [(5, 6), (5, 6)], 0.1)
    assert len(c) == 0
    assert rips_components(c, 1.0)[0] == 0


def test_sample_requires_curve(ellipse):
    from bottleneckhc.families import named

    with pytest.raises(ValueError):
        sample_curve(named("goursat"), [(-1, 1)] * 3, 0.5)
    with pytest.raises(ValueError):
        sample_curve(ellipse, [(-1, 1)], 0.1)
    with pytest.raises(ValueError):
        sample_curve(ellipse, [(-1, 1)] * 2, 0.0)


def test_two_clusters():
    rng = np.random.default_rng(0)
    a = rng.random((10, 2))
    pts = np.vstack([a, a + 10])
    count, labels = rips_components(pts, 1.0)
    assert count == 2
    assert len(set(labels[:10])) == 1 and len(set(labels[10:])) == 1


def test_edges_strict_inequalities():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
    g = rips_graph(pts, 0.5)  # distance exactly 2r: no edge; duplicate points: no edge
    assert len(g.edges) == 0 and g.count == 3
    with pytest.raises(ValueError):
        rips_graph(pts, 0.0)


def test_label_points_and_csv(tmp_path):
    pts = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 5.0]])
    count, labels = rips_components(pts, 0.2)
    assert count == 2
    lab = label_points(pts, labels, [[0.05, 0.01], [4.9, 5.0]])
    assert lab[0] == labels[0] and lab[1] == labels[2]
    path = tmp_path / "c.csv"
    write_cloud(path, pts, labels)
    back, back_labels = read_cloud(path)
    np.testing.assert_array_equal(back, pts)
    np.testing.assert_array_equal(back_labels, labels)
    write_cloud(path, pts)
    assert read_cloud(path)[1] is None


def test_nearest_gap():
    assert nearest_gap(np.array([[0.0], [1.0], [3.0]])) == 2.0
    assert nearest_gap(np.zeros((1, 2))) == 0.0


clouds = st.integers(0, 2**32 - 1).map(lambda s: np.random.default_rng(s).random((40, 2)) * 4)


@settings(max_examples=40, deadline=None)
@given(pts=clouds, r1=st.floats(0.01, 2.0), r2=st.floats(0.01, 2.0))
def test_count_monotone_in_r(pts, r1, r2):
    lo, hi = sorted((r1, r2))
    assert rips_components(pts, hi)[0] <= rips_components(pts, lo)[0]


@settings(max_examples=40, deadline=None)
@given(pts=clouds, r=st.floats(0.05, 1.0), seed=st.integers(0, 1000))
def test_partition_invariant_under_shuffle(pts, r, seed):
    perm = np.random.default_rng(seed).permutation(len(pts))
    _, a = rips_components(pts, r)
    _, b = rips_components(pts[perm], r)
    # same partition: i ~ j in the original iff perm positions agree
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm))
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            assert (a[i] == a[j]) == (b[inv[i]] == b[inv[j]])


@settings(max_examples=40, deadline=None)
@given(pts=clouds)
def test_tiny_radius_isolates_points(pts):
    d = np.linalg.norm(pts[:, None] - pts[None], axis=2)
    m = d[np.triu_indices(len(pts), 1)].min()
    assert rips_components(pts, 0.49 * m)[0] == len(pts)
