import numpy as np
import pytest
from hypothesis import given, strategies as st

from egoshift.dbcv import (
    LabeledPointSet,
    dbcv_score,
    largest_remainder,
    proportional_sample,
    read_points,
    write_points_binary,
)
from oracles import dbcv_bruteforce


def blobs(rng, centers, n, spread):
    pts = np.vstack([rng.normal(c, spread, size=(n, len(c))) for c in centers])
    return pts, np.repeat(np.arange(len(centers)), n)


def test_far_blobs_score_high():
    pts, lab = blobs(np.random.default_rng(0), [(0, 0), (100, 100)], 30, 0.1)
    assert dbcv_score(LabeledPointSet(pts, lab)).overall > 0.9


def test_split_blob_scores_negative():
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(60, 2))
    assert dbcv_score(LabeledPointSet(pts, rng.integers(0, 2, 60))).overall < 0


def test_duplicate_points_cluster():
    s = dbcv_score(LabeledPointSet([[0.0, 0.0], [0.0, 0.0], [5.0, 5.0], [5.0, 5.1]], [0, 0, 1, 1]))
    assert -1 <= s.overall <= 1 and np.isfinite(s.overall)
    # zero-distance pair: sparseness floors at 1e-12, separation is large
    assert s.per_cluster[0] == pytest.approx(1.0)


def test_single_cluster_scores_zero():
    s = dbcv_score(LabeledPointSet([[0.0], [1.0], [2.0]], [0, 0, 0]))
    assert s.overall == 0.0


def test_errors():
    with pytest.raises(ValueError):
        dbcv_score(LabeledPointSet([[0.0], [1.0]], [-1, -1]))
    with pytest.raises(ValueError):
        dbcv_score(LabeledPointSet([[0.0], [1.0], [2.0]], [0, 0, 1]))


def test_noise_counts_in_mass():
    pts, lab = blobs(np.random.default_rng(2), [(0, 0), (50, 0)], 10, 0.5)
    pts = np.vstack([pts, [[25, 25]] * 5])
    lab = np.r_[lab, [-1] * 5]
    s = dbcv_score(LabeledPointSet(pts, lab))
    assert s.noise_fraction == pytest.approx(0.2)
    assert s.overall == pytest.approx(sum(10 / 25 * v for v in s.per_cluster.values()), abs=1e-12)


@st.composite
def instances(draw):
    d = draw(st.integers(1, 3))
    k = draw(st.integers(2, 4))
    sizes = [draw(st.integers(2, 12)) for _ in range(k)]
    n_noise = draw(st.integers(0, 5))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(sum(sizes) + n_noise, d)) * draw(st.floats(0.1, 10))
    lab = np.r_[np.repeat(np.arange(k), sizes), [-1] * n_noise]
    return pts, lab


@given(instances())
def test_matches_bruteforce(inst):
    pts, lab = inst
    s = dbcv_score(LabeledPointSet(pts, lab))
    ref, per = dbcv_bruteforce(pts, lab)
    assert abs(s.overall - ref) < 1e-9
    assert -1 <= s.overall <= 1 and all(-1 <= v <= 1 for v in s.per_cluster.values())


@given(instances(), st.randoms(), st.floats(0, 2 * np.pi))
def test_permutation_and_rigid_motion(inst, rnd, angle):
    pts, lab = inst
    base = dbcv_score(LabeledPointSet(pts, lab)).overall
    perm = list(range(len(lab)))
    rnd.shuffle(perm)
    assert dbcv_score(LabeledPointSet(pts[perm], lab[perm])).overall == pytest.approx(base, abs=1e-9)
    moved = pts + 3.5
    if pts.shape[1] >= 2:
        c, s = np.cos(angle), np.sin(angle)
        rot = np.eye(pts.shape[1])
        rot[:2, :2] = [[c, -s], [s, c]]
        moved = moved @ rot.T
    assert dbcv_score(LabeledPointSet(moved, lab)).overall == pytest.approx(base, abs=1e-9)


def test_proportional_sampling():
    data = LabeledPointSet(np.arange(100.0), np.repeat([0, 1], [90, 10]))
    s = proportional_sample(data, 10, seed=0)
    assert np.bincount(s.labels).tolist() == [9, 1]
    assert proportional_sample(data, 100, seed=3).index.tolist() == list(range(100))
    a = proportional_sample(data, 20, seed=4)
    b = proportional_sample(data, 20, seed=4)
    assert a.index.tolist() == b.index.tolist()
    with pytest.raises(ValueError):
        proportional_sample(data, 3, seed=0)
    with pytest.raises(ValueError):
        proportional_sample(data, 101, seed=0)


@given(st.lists(st.integers(1, 500), min_size=1, max_size=6), st.data())
def test_largest_remainder_sums(sizes, data):
    table = dict(enumerate(sizes))
    target = data.draw(st.integers(0, sum(sizes)))
    quota = largest_remainder(table, target)
    assert sum(quota.values()) == target
    n = sum(sizes)
    assert all(abs(quota[k] - target * v / n) < 1 for k, v in table.items())


def test_sampling_stability():
    rng = np.random.default_rng(8)
    pts, lab = blobs(rng, [(0, 0), (30, 0), (0, 30)], 200, 1.0)
    data = LabeledPointSet(pts, lab)
    full = dbcv_score(data).overall
    sampled = [dbcv_score(proportional_sample(data, 60, seed=s)).overall for s in range(10)]
    assert max(abs(np.array(sampled) - full)) < 0.05


def test_points_io(tmp_path):
    pts = np.random.default_rng(0).normal(size=(7, 3))
    p = tmp_path / "p.bin"
    with open(p, "wb") as fh:
        write_points_binary(pts, fh)
    assert np.array_equal(read_points(p), pts)
    c = tmp_path / "p.csv"
    np.savetxt(c, pts, delimiter=",")
    assert np.allclose(read_points(c), pts)
