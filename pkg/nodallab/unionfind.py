"""Disjoint set over 0..n-1 with path halving and union by size."""

import logging

import numpy as np

_LOGGER = logging.getLogger(__name__)


class DisjointSet:
    """Union-find forest stored in numpy arrays."""

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)
        self.size = np.ones(n, dtype=np.int64)

    def __len__(self):
        return self.parent.size

    def find(self, i: int) -> int:
        parent = self.parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return int(i)

    def merge(self, i: int, j: int) -> bool:
        """Join the sets of i and j; False if they were already joined."""
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        if self.size[ri] < self.size[rj]:
            ri, rj = rj, ri
        self.parent[rj] = ri
        self.size[ri] += self.size[rj]
        return True

    def merge_pairs(self, first, second) -> int:
        """Merge each first[i] with second[i]; returns the number of joins."""
        joins = 0
        for i, j in zip(np.asarray(first).tolist(), np.asarray(second).tolist()):
            joins += self.merge(i, j)
        return joins

    def roots(self):
        """Root of every element."""
        return np.array([self.find(i) for i in range(len(self))], dtype=np.int64)

    def labels(self):
        """Compact labels 0..k-1, numbered by first appearance."""
        _, first_seen, inverse = np.unique(
            self.roots(), return_index=True, return_inverse=True
        )
        order = np.argsort(np.argsort(first_seen))
        return order[inverse]

    def count(self) -> int:
        return int(np.count_nonzero(self.parent == np.arange(len(self))))

    def __getitem__(self, i: int) -> int:
        return self.find(i)
