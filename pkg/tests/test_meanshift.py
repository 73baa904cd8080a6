import numpy as np
import pytest
from hypothesis import given, strategies as st

from egoshift.meanshift import estimate_bandwidth, mean_shift, shift
from oracles import mean_shift_bruteforce


def groups_of(res):
    return [sorted(np.flatnonzero(res.labels == k).tolist()) for k in range(res.n_clusters)]


def test_singleton_and_constant():
    assert mean_shift([7.0]).n_clusters == 1
    r = mean_shift([3.0] * 10)
    assert r.n_clusters == 1 and set(r.labels) == {0}


def test_two_groups_example():
    vals = [5.0, 5.1, 4.9, 50.0, 49.5, 50.5]
    r = mean_shift(np.log(vals))
    assert groups_of(r) == [[3, 4, 5], [0, 1, 2]]
    # on the raw scale the sparse upper group fragments under the same estimator
    assert mean_shift(vals).n_clusters > 2


def test_empty_raises():
    with pytest.raises(ValueError, match="empty"):
        mean_shift([])


def test_bandwidth_estimator_small():
    # k = ceil(0.3 * 4) = 2nd nearest other point
    assert estimate_bandwidth([0.0, 1.0, 3.0, 6.0]) == pytest.approx((3 + 2 + 3 + 5) / 4)


def test_tie_goes_to_higher_mode():
    r = mean_shift([0.0, 0.0, 1.0, 2.0, 2.0], bandwidth=0.4)
    # 1.0 sits half-way between the modes 0 and 2 after its own mode is dropped or kept
    assert r.labels[0] == r.n_clusters - 1
    assert r.labels[3] == 0


@given(st.lists(st.integers(0, 400).map(lambda v: v / 4), min_size=2, max_size=40), st.floats(0.5, 20))
def test_matches_bruteforce(values, h):
    r = mean_shift(values, bandwidth=h, tol=1e-12, max_iter=10_000)
    assert r.converged
    assert groups_of(r) == mean_shift_bruteforce(values, h, tol=1e-12)


@given(st.lists(st.floats(0.01, 1000, allow_nan=False), min_size=1, max_size=40), st.integers(-6, 6), st.randoms())
def test_scale_and_permutation_invariance(values, e, rnd):
    c = 2.0**e  # exact in floating point, so window edges scale without rounding
    x = np.array(values)
    r = mean_shift(x)
    r2 = mean_shift(x * c, bandwidth=r.bandwidth * c if r.bandwidth else None)
    assert np.array_equal(r.labels, r2.labels)
    perm = list(range(len(x)))
    rnd.shuffle(perm)
    r3 = mean_shift(x[perm])
    assert np.array_equal(r3.labels, r.labels[perm])


@given(st.lists(st.floats(0, 100, allow_nan=False), min_size=2, max_size=40))
def test_modes_are_fixed_points(values):
    r = mean_shift(values, tol=1e-12, max_iter=5000)
    span = max(values) - min(values)
    if r.converged and r.bandwidth > 0:
        for k, m in enumerate(r.modes):
            members = np.asarray(values)[r.labels == k]
            # merged modes average nearby fixed points, so allow the merge radius
            assert abs(shift(values, m, r.bandwidth) - m) <= r.bandwidth / 2 + 1e-9 * max(span, 1)
            assert members.size > 0


def test_ring_means_descend():
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = rng.lognormal(1, 1.2, size=rng.integers(1, 80))
        r = mean_shift(np.log(x))
        means = [x[r.labels == k].mean() for k in range(r.n_clusters)]
        assert all(a > b for a, b in zip(means, means[1:]))
