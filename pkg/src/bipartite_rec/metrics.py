"""Personalization (popularity gap, overlap) and link-prediction metrics.

Recommendation collections are mappings ``user index -> RankedList``.
Per-user terms are aggregated in ascending user order, and users whose
term would be 0/0 (no recommendations, no probe edges) are left out of
the average.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .graph import BipartiteGraph, merge_count, user_mean_item_degree
from .scorers import RankedList


@dataclass(frozen=True)
class PersonalizationScores:
    v: float
    o: float
    users_counted: int


@dataclass(frozen=True)
class LinkPredScores:
    l: int
    recall: float
    precision: float
    novelty: float


def jaccard(a, b) -> float:
    """|a & b| / |a | b| for sorted duplicate-free sequences; 0 when both are empty."""
    if len(a) == 0 and len(b) == 0:
        return 0.0
    inter = merge_count(a, b)
    return inter / (len(a) + len(b) - inter)


def _counted(g: BipartiteGraph, recs: Mapping[int, RankedList]):
    for u in sorted(recs):
        if g.user_degrees[u] == 0:
            raise ValueError(f"user {u} owns no items; its mean popularity is undefined")
        if len(recs[u]) > 0:
            yield u, recs[u]


def variance_v(g: BipartiteGraph, recs: Mapping[int, RankedList]) -> float:
    """Mean absolute gap between recommended-item degree and the user's mean owned degree."""
    p = user_mean_item_degree(g)
    terms = [np.abs(g.item_degrees[r.items] - p[u]).mean() for u, r in _counted(g, recs)]
    return float(np.mean(terms)) if terms else 0.0


def _jaccard_block(g: BipartiteGraph, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    at = g.incidence_t
    inter = (at[rows] @ at[cols].T).toarray()
    union = g.item_degrees[rows][:, None] + g.item_degrees[cols][None, :] - inter
    out = np.zeros_like(inter)
    np.divide(inter, union, out=out, where=union > 0)
    return out


def overlap_o(g: BipartiteGraph, recs: Mapping[int, RankedList], product: bool = False) -> float:
    """Mean Jaccard similarity between the user sets of recommended and owned items.

    By default each recommendation is scored by the mean Jaccard index over
    the user's owned items. ``product=True`` switches to ``(1/z) * prod_k J``
    for comparison.
    """
    terms = []
    for u, r in _counted(g, recs):
        owned = g.user_items(u)
        jac = _jaccard_block(g, r.items, owned)
        per_rec = jac.prod(axis=1) / len(owned) if product else jac.mean(axis=1)
        terms.append(per_rec.mean())
    return float(np.mean(terms)) if terms else 0.0


def personalization(g: BipartiteGraph, recs: Mapping[int, RankedList], product: bool = False) -> PersonalizationScores:
    n = sum(1 for _ in _counted(g, recs))
    return PersonalizationScores(variance_v(g, recs), overlap_o(g, recs, product), n)


def _hits(probe, recs, l):
    for u in sorted(probe):
        items = probe[u]
        if len(items) == 0:
            continue
        r = recs.get(u)
        top = r.items[:l] if r is not None else np.empty(0, dtype=np.int64)
        yield len(items), int(np.isin(top, np.fromiter(items, dtype=np.int64)).sum())


def _check_l(l):
    if l < 1:
        raise ValueError(f"list length must be >= 1, got {l}")


def recall_at_l(probe: Mapping[int, set], recs: Mapping[int, RankedList], l: int) -> float:
    """Recovered probe items among the first ``l`` recommendations, divided by ``l``."""
    _check_l(l)
    terms = [hit / l for _, hit in _hits(probe, recs, l)]
    return float(np.mean(terms)) if terms else 0.0


def precision_at_l(probe: Mapping[int, set], recs: Mapping[int, RankedList], l: int) -> float:
    """Recovered probe items among the first ``l`` recommendations over the user's probe size."""
    _check_l(l)
    terms = [hit / size for size, hit in _hits(probe, recs, l)]
    return float(np.mean(terms)) if terms else 0.0


def novelty_at_l(g_train: BipartiteGraph, recs: Mapping[int, RankedList], l: int) -> float:
    _check_l(l)
    terms = [g_train.item_degrees[recs[u].items[:l]].mean() for u in sorted(recs) if len(recs[u]) > 0]
    return float(np.mean(terms)) if terms else 0.0


def link_prediction(g_train, probe, recs, l) -> LinkPredScores:
    return LinkPredScores(
        l=l,
        recall=recall_at_l(probe, recs, l),
        precision=precision_at_l(probe, recs, l),
        novelty=novelty_at_l(g_train, recs, l),
    )
