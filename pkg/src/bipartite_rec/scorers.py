"""Diffusion scorers on a bipartite user-item graph and top-L ranking.

Every scorer maps ``(graph, target user)`` to a dense score vector over
items. Owned items get scores too; they are removed in :func:`recommend`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .graph import BipartiteGraph

ALGORITHMS = ("pliers", "probs", "heats", "hybrid", "pd", "bhc")


@dataclass(frozen=True)
class ScorerParams:
    lam: float = 0.5
    epsilon: float = -0.85
    gamma: float = 0.8

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")
        if not (np.isfinite(self.epsilon) and np.isfinite(self.gamma)):
            raise ValueError("epsilon and gamma must be finite")

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "epsilon": self.epsilon, "gamma": self.gamma}


@dataclass(frozen=True)
class RankedList:
    target: int
    items: np.ndarray
    scores: np.ndarray

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return zip(self.items.tolist(), self.scores.tolist())


def _inv(deg: np.ndarray) -> np.ndarray:
    out = np.zeros(len(deg), dtype=np.float64)
    nz = deg > 0
    out[nz] = 1.0 / deg[nz]
    return out


def _user_resource(g: BipartiteGraph, t: int, item_weight: np.ndarray) -> np.ndarray:
    """First pass: push ``item_weight[s]`` from each owned item s to its users."""
    x = np.zeros(g.n_items)
    owned = g.user_items(t)
    x[owned] = item_weight[owned]
    return g.incidence @ x


def score_probs(g: BipartiteGraph, t: int) -> np.ndarray:
    r = _user_resource(g, t, _inv(g.item_degrees))
    return g.incidence.T @ (r * _inv(g.user_degrees))


def score_heats(g: BipartiteGraph, t: int) -> np.ndarray:
    r = _user_resource(g, t, np.ones(g.n_items))
    return (g.incidence.T @ (r * _inv(g.user_degrees))) * _inv(g.item_degrees)


def score_hybrid(g: BipartiteGraph, t: int, lam: float) -> np.ndarray:
    return lam * score_probs(g, t) + (1.0 - lam) * score_heats(g, t)


def _degree_power(deg: np.ndarray, exponent: float) -> np.ndarray:
    out = np.zeros(len(deg), dtype=np.float64)
    nz = deg > 0
    out[nz] = np.power(deg[nz].astype(np.float64), exponent)
    return out


def score_pd(g: BipartiteGraph, t: int, epsilon: float) -> np.ndarray:
    return score_probs(g, t) * _degree_power(g.item_degrees, epsilon)


def score_bhc(g: BipartiteGraph, t: int, gamma: float) -> np.ndarray:
    return score_heats(g, t) * _degree_power(g.item_degrees, gamma)


@njit(cache=True, nogil=True)
def _pliers_kernel(owned, item_ptr, item_idx, user_ptr, user_idx, inv_user_deg, inv_item_deg):
    n_items = len(item_ptr) - 1
    out = np.zeros(n_items)
    weight = np.zeros(n_items)
    count = np.zeros(n_items)
    touched = np.empty(n_items, dtype=np.int64)
    for s in owned:
        n_touched = 0
        for p in range(item_ptr[s], item_ptr[s + 1]):
            l = item_idx[p]
            w = inv_user_deg[l]
            for q in range(user_ptr[l], user_ptr[l + 1]):
                j = user_idx[q]
                if count[j] == 0.0:
                    touched[n_touched] = j
                    n_touched += 1
                weight[j] += w
                count[j] += 1.0
        scale = inv_item_deg[s]
        for k in range(n_touched):
            j = touched[k]
            out[j] += weight[j] * count[j] * scale
            weight[j] = 0.0
            count[j] = 0.0
    for j in range(n_items):
        out[j] *= inv_item_deg[j]
    return out


def score_pliers(g: BipartiteGraph, t: int) -> np.ndarray:
    """ProbS with every (owned s, candidate j) term scaled by |U_s & U_j| / k(j).

    For each owned item s a single two-hop walk s -> users -> items
    accumulates both the diffusion weight sum_l 1/k(l) and the co-count
    |U_s & U_j| in dense scratch arrays, reset through a touched list, so
    the cost is bounded by the two-hop neighbourhood of t.
    """
    owned = g.user_items(t)
    if len(owned) == 0:
        return np.zeros(g.n_items)
    return _pliers_kernel(owned, g.item_ptr, g.item_idx, g.user_ptr, g.user_idx,
                          _inv(g.user_degrees), _inv(g.item_degrees))


def score(g: BipartiteGraph, t: int, algorithm: str, params: ScorerParams | None = None) -> np.ndarray:
    params = params or ScorerParams()
    if algorithm == "probs":
        return score_probs(g, t)
    if algorithm == "heats":
        return score_heats(g, t)
    if algorithm == "hybrid":
        return score_hybrid(g, t, params.lam)
    if algorithm == "pd":
        return score_pd(g, t, params.epsilon)
    if algorithm == "bhc":
        return score_bhc(g, t, params.gamma)
    if algorithm == "pliers":
        return score_pliers(g, t)
    raise ValueError(f"unknown scorer {algorithm!r}; expected one of {', '.join(ALGORITHMS)}")


def top_l(g: BipartiteGraph, t: int, scores: np.ndarray, length: int) -> RankedList:
    """Highest-scoring non-owned items; ties go to the lower item index."""
    if length < 1:
        raise ValueError(f"list length must be >= 1, got {length}")
    mask = scores > 0
    mask[g.user_items(t)] = False
    cand = np.flatnonzero(mask)
    if len(cand) > length:
        # keep everything tied with the length-th best so the tie-break stays exact
        cut = np.partition(scores[cand], len(cand) - length)[len(cand) - length]
        cand = cand[scores[cand] >= cut]
    order = np.lexsort((cand, -scores[cand]))[:length]
    items = cand[order]
    return RankedList(t, items, scores[items])


def recommend(g: BipartiteGraph, t: int, algorithm: str, length: int,
              params: ScorerParams | None = None) -> RankedList:
    if length < 1:
        raise ValueError(f"list length must be >= 1, got {length}")
    return top_l(g, t, score(g, t, algorithm, params), length)
