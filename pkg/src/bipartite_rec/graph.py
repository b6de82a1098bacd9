"""Immutable bipartite user-item graph stored as two sorted CSR adjacencies."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class GraphStats:
    n_users: int
    n_items: int
    n_links: int
    mean_item_degree: float
    mean_user_tag_popularity: float

    def as_dict(self) -> dict:
        return {
            "n_users": self.n_users,
            "n_items": self.n_items,
            "n_links": self.n_links,
            "mean_item_degree": self.mean_item_degree,
            "mean_user_tag_popularity": self.mean_user_tag_popularity,
        }


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _csr_from_pairs(rows: np.ndarray, cols: np.ndarray, n_rows: int):
    """Row pointer and column index arrays for pairs already sorted by (row, col)."""
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n_rows), out=indptr[1:])
    return indptr, cols.astype(np.int64, copy=True)


class BipartiteGraph:
    """Binary user-item adjacency held in both directions.

    Users and items are dense indices ``0..n-1`` and ``0..m-1``; the
    external ids seen in input files are kept in ``user_ids`` / ``item_ids``.
    Instances are never mutated after construction, so concurrent readers
    need no locking.
    """

    def __init__(self, user_ids, item_ids, users, items, n_duplicates=0):
        # users/items: parallel dense-index arrays, unique and sorted by (user, item)
        self.user_ids = _readonly(np.asarray(user_ids, dtype=np.int64))
        self.item_ids = _readonly(np.asarray(item_ids, dtype=np.int64))
        self.n_users = len(self.user_ids)
        self.n_items = len(self.item_ids)
        self.n_duplicates = int(n_duplicates)

        users = np.asarray(users, dtype=np.int64)
        items = np.asarray(items, dtype=np.int64)
        self.edge_count = len(users)

        ptr, idx = _csr_from_pairs(users, items, self.n_users)
        self.user_ptr, self.user_idx = _readonly(ptr), _readonly(idx)
        order = np.lexsort((users, items))
        ptr, idx = _csr_from_pairs(items[order], users[order], self.n_items)
        self.item_ptr, self.item_idx = _readonly(ptr), _readonly(idx)

        self.user_degrees = _readonly(np.diff(self.user_ptr))
        self.item_degrees = _readonly(np.diff(self.item_ptr))

        data = np.ones(self.edge_count, dtype=np.float64)
        # n x m incidence matrix; shares the sorted index arrays
        self.incidence = sp.csr_matrix(
            (data, self.user_idx, self.user_ptr), shape=(self.n_users, self.n_items)
        )
        # m x n transpose; row slices give item user-sets without column slicing
        self.incidence_t = sp.csr_matrix(
            (data, self.item_idx, self.item_ptr), shape=(self.n_items, self.n_users)
        )
        self._user_index = {int(x): i for i, x in enumerate(self.user_ids)}
        self._item_index = {int(x): i for i, x in enumerate(self.item_ids)}

    # -- queries ---------------------------------------------------------

    def user_items(self, u: int) -> np.ndarray:
        self._check_user(u)
        return self.user_idx[self.user_ptr[u]:self.user_ptr[u + 1]]

    def item_users(self, i: int) -> np.ndarray:
        self._check_item(i)
        return self.item_idx[self.item_ptr[i]:self.item_ptr[i + 1]]

    def user_degree(self, u: int) -> int:
        self._check_user(u)
        return int(self.user_degrees[u])

    def item_degree(self, i: int) -> int:
        self._check_item(i)
        return int(self.item_degrees[i])

    def co_occurrence(self, s: int, j: int) -> int:
        """Number of users holding both items ``s`` and ``j``."""
        a = self.item_users(s)
        b = self.item_users(j)
        return merge_count(a, b)

    def user_index(self, user_id: int) -> int:
        try:
            return self._user_index[int(user_id)]
        except KeyError:
            raise GraphError(f"unknown user id {user_id}") from None

    def item_index(self, item_id: int) -> int:
        try:
            return self._item_index[int(item_id)]
        except KeyError:
            raise GraphError(f"unknown item id {item_id}") from None

    def edges(self) -> np.ndarray:
        """Dense-index edges as an (L, 2) array in (user, item) order."""
        users = np.repeat(np.arange(self.n_users, dtype=np.int64), self.user_degrees)
        return np.column_stack([users, self.user_idx])

    def edge_list(self) -> list[tuple[int, int]]:
        """Edges with external ids restored."""
        e = self.edges()
        return list(zip(self.user_ids[e[:, 0]].tolist(), self.item_ids[e[:, 1]].tolist()))

    def isolated_users(self) -> np.ndarray:
        return np.flatnonzero(self.user_degrees == 0)

    def isolated_items(self) -> np.ndarray:
        return np.flatnonzero(self.item_degrees == 0)

    def _check_user(self, u):
        if not 0 <= u < self.n_users:
            raise IndexError(f"user index {u} out of range [0, {self.n_users})")

    def _check_item(self, i):
        if not 0 <= i < self.n_items:
            raise IndexError(f"item index {i} out of range [0, {self.n_items})")

    def __eq__(self, other):
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (
            np.array_equal(self.user_ids, other.user_ids)
            and np.array_equal(self.item_ids, other.item_ids)
            and np.array_equal(self.user_ptr, other.user_ptr)
            and np.array_equal(self.user_idx, other.user_idx)
        )

    __hash__ = None

    def __repr__(self):
        return f"BipartiteGraph(n_users={self.n_users}, n_items={self.n_items}, edges={self.edge_count})"


def merge_count(a: Sequence[int], b: Sequence[int]) -> int:
    """Size of the intersection of two strictly increasing sequences (linear merge)."""
    i = j = count = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        x, y = a[i], b[j]
        if x == y:
            count += 1
            i += 1
            j += 1
        elif x < y:
            i += 1
        else:
            j += 1
    return count


def build_graph(edges: Iterable) -> BipartiteGraph:
    """Build a graph from ``(user_id, item_id)`` pairs.

    Ids must be non-negative integers. Duplicate pairs are collapsed and
    counted in ``n_duplicates``. Dense indices follow ascending external id.
    """
    pairs = []
    for k, rec in enumerate(edges):
        try:
            u, i = rec
        except (TypeError, ValueError):
            raise GraphError(f"record {k}: expected a (user, item) pair, got {rec!r}") from None
        if isinstance(u, (bool, np.bool_)) or isinstance(i, (bool, np.bool_)):
            raise GraphError(f"record {k}: ids must be integers, got {rec!r}")
        if not (isinstance(u, (int, np.integer)) and isinstance(i, (int, np.integer))):
            raise GraphError(f"record {k}: ids must be integers, got {rec!r}")
        if u < 0 or i < 0:
            raise GraphError(f"record {k}: ids must be non-negative, got {rec!r}")
        pairs.append((int(u), int(i)))
    arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    return _from_id_array(arr)


def _from_id_array(arr: np.ndarray, user_ids=None, item_ids=None) -> BipartiteGraph:
    if user_ids is None:
        user_ids = np.unique(arr[:, 0])
    if item_ids is None:
        item_ids = np.unique(arr[:, 1])
    users = np.searchsorted(user_ids, arr[:, 0])
    items = np.searchsorted(item_ids, arr[:, 1])
    n_items = max(len(item_ids), 1)
    key = np.unique(users * n_items + items)
    n_dup = len(arr) - len(key)
    return BipartiteGraph(user_ids, item_ids, key // n_items, key % n_items, n_duplicates=n_dup)


def remove_edges(g: BipartiteGraph, edges) -> BipartiteGraph:
    """Copy of ``g`` without the given dense-index ``(user, item)`` edges.

    The node index space is preserved, so users or items may become isolated.
    """
    rm = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    m = max(g.n_items, 1)
    all_keys = g.edges() @ np.array([m, 1], dtype=np.int64)
    rm_keys = rm @ np.array([m, 1], dtype=np.int64)
    present = np.isin(rm_keys, all_keys)
    if not present.all():
        u, i = rm[np.argmin(present)]
        raise GraphError(f"edge ({int(u)}, {int(i)}) not present in graph")
    keep = ~np.isin(all_keys, rm_keys)
    kept = all_keys[keep]
    return BipartiteGraph(g.user_ids, g.item_ids, kept // m, kept % m)


def subgraph(g: BipartiteGraph, users) -> BipartiteGraph:
    """Induced subgraph on ``users`` with all their edges; unreached items dropped."""
    users = np.unique(np.asarray(users, dtype=np.int64))
    e = g.edges()
    mask = np.isin(e[:, 0], users)
    ids = np.column_stack([g.user_ids[e[mask, 0]], g.item_ids[e[mask, 1]]])
    return _from_id_array(ids, user_ids=g.user_ids[users])


def user_mean_item_degree(g: BipartiteGraph) -> np.ndarray:
    """Mean degree of each user's items (NaN for users without items)."""
    owner = np.repeat(np.arange(g.n_users), g.user_degrees)
    sums = np.bincount(owner, weights=g.item_degrees[g.user_idx], minlength=g.n_users)
    out = np.full(g.n_users, np.nan)
    has = g.user_degrees > 0
    out[has] = sums[has] / g.user_degrees[has]
    return out


def stats(g: BipartiteGraph) -> GraphStats:
    if g.n_items == 0 or g.edge_count == 0:
        return GraphStats(g.n_users, g.n_items, g.edge_count, 0.0, 0.0)
    p = user_mean_item_degree(g)
    p = p[~np.isnan(p)]
    return GraphStats(
        n_users=g.n_users,
        n_items=g.n_items,
        n_links=g.edge_count,
        mean_item_degree=g.edge_count / g.n_items,
        mean_user_tag_popularity=float(p.mean()),
    )
