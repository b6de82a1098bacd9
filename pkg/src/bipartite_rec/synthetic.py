"""Seeded power-law bipartite fixtures with an exact-stats manifest."""

from __future__ import annotations

import json

import numpy as np

from .experiments import make_rng
from .graph import build_graph, stats


def _zipf_weights(rng, n, exponent):
    w = np.arange(1, n + 1, dtype=np.float64) ** (-exponent)
    rng.shuffle(w)
    return w / w.sum()


def power_law_edges(n_users: int, n_items: int, n_links: int, seed: int,
                    user_exponent: float = 0.6, item_exponent: float = 0.85) -> list[tuple[int, int]]:
    """Edge list with exactly ``n_users`` users, ``n_items`` items and ``n_links`` distinct links.

    User activity and item popularity follow Zipf rank laws. Every item first
    receives one user and every still-empty user one item, both drawn by
    weight; the remaining links are weighted pairs, rejected when duplicate.
    """
    if n_links < n_items or n_links > n_users * n_items:
        raise ValueError("need n_items <= n_links <= n_users * n_items")
    rng = make_rng(seed)
    wu = _zipf_weights(rng, n_users, user_exponent)
    wi = _zipf_weights(rng, n_items, item_exponent)

    users = rng.choice(n_users, size=n_items, p=wu)
    keys = users * n_items + np.arange(n_items)
    empty = np.setdiff1d(np.arange(n_users), users)
    keys = np.concatenate([keys, empty * n_items + rng.choice(n_items, size=len(empty), p=wi)])
    if len(keys) > n_links:
        raise ValueError(f"n_links={n_links} too small to cover every user and item ({len(keys)} needed)")

    seen = set(keys.tolist())
    out = keys.tolist()
    while len(out) < n_links:
        batch = 2 * (n_links - len(out)) + 16
        cand = rng.choice(n_users, size=batch, p=wu) * n_items + rng.choice(n_items, size=batch, p=wi)
        for k in cand.tolist():
            if k not in seen:
                seen.add(k)
                out.append(k)
                if len(out) == n_links:
                    break
    arr = np.array(sorted(out), dtype=np.int64)
    return list(zip((arr // n_items).tolist(), (arr % n_items).tolist()))


def manifest(edges, **params) -> dict:
    return {"generator": params, "stats": stats(build_graph(edges)).as_dict()}


def write_manifest(m: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(m, fh, sort_keys=True, indent=2)
        fh.write("\n")
