"""Tests for the disjoint set."""

import numpy as np

from nodallab.unionfind import DisjointSet


def test_merge_and_count():
    ds = DisjointSet(6)
    assert len(ds) == 6
    assert ds.count() == 6
    assert ds.merge(0, 1)
    assert ds.merge(1, 2)
    assert not ds.merge(2, 0)
    assert ds.count() == 4
    assert ds[2] == ds[0]
    assert ds.find(3) == 3


def test_merge_pairs():
    ds = DisjointSet(5)
    joins = ds.merge_pairs(np.array([0, 3, 1]), np.array([4, 2, 4]))
    assert joins == 3
    assert ds.count() == 2


def test_labels_follow_first_appearance():
    ds = DisjointSet(6)
    ds.merge(4, 5)
    ds.merge(1, 3)
    ds.merge(0, 5)
    assert ds.labels().tolist() == [0, 1, 2, 1, 0, 0]
    assert len(set(ds.roots().tolist())) == 3
