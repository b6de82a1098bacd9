"""Seeded personalization and link-prediction experiment drivers."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import metrics
from .graph import BipartiteGraph, remove_edges, stats
from .scorers import ALGORITHMS, RankedList, ScorerParams, recommend

log = logging.getLogger(__name__)

DEFAULT_L_SWEEP = tuple(range(1, 21)) + tuple(range(30, 101, 10))


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; the one PRNG used for every seeded draw in the package."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class LinkSplit:
    train: BipartiteGraph
    probe: dict  # user index -> sorted int array of removed item indices
    fraction: float
    seed: int
    isolated_users: tuple = ()

    @property
    def n_probe(self) -> int:
        return sum(len(v) for v in self.probe.values())

    def probe_edges(self) -> np.ndarray:
        rows = [np.column_stack([np.full(len(v), u), v]) for u, v in sorted(self.probe.items())]
        return np.vstack(rows).astype(np.int64) if rows else np.empty((0, 2), dtype=np.int64)


@dataclass(frozen=True)
class ExperimentConfig:
    algorithms: tuple = ALGORITHMS
    params: ScorerParams = field(default_factory=ScorerParams)
    list_length: int = 10
    removal_fraction: float = 0.10
    l_sweep: tuple = DEFAULT_L_SWEEP
    seed: int = 0
    product_overlap: bool = False

    def __post_init__(self):
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ValueError(f"unknown algorithms: {', '.join(unknown)}")
        if self.list_length < 1:
            raise ValueError("list_length must be >= 1")
        if not 0.0 < self.removal_fraction < 1.0:
            raise ValueError(f"removal fraction must lie in (0, 1), got {self.removal_fraction}")
        if not self.l_sweep or any(b <= a for a, b in zip(self.l_sweep, self.l_sweep[1:])):
            raise ValueError("l_sweep must be a non-empty, strictly increasing sequence")
        if self.l_sweep[0] < 1:
            raise ValueError("l_sweep values must be >= 1")

    def as_dict(self) -> dict:
        return {
            "algorithms": list(self.algorithms),
            "params": self.params.as_dict(),
            "list_length": self.list_length,
            "removal_fraction": self.removal_fraction,
            "l_sweep": list(self.l_sweep),
            "seed": self.seed,
            "product_overlap": self.product_overlap,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ExperimentConfig":
        p = d["params"]
        return cls(
            algorithms=tuple(d["algorithms"]),
            params=ScorerParams(lam=p["lambda"], epsilon=p["epsilon"], gamma=p["gamma"]),
            list_length=d["list_length"],
            removal_fraction=d["removal_fraction"],
            l_sweep=tuple(d["l_sweep"]),
            seed=d["seed"],
            product_overlap=d["product_overlap"],
        )

    def digest(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class MetricsReport:
    rows: dict  # algorithm -> PersonalizationScores, in config order
    config: ExperimentConfig
    extra: dict = field(default_factory=dict)
    wall_time: float = field(default=0.0, compare=False)

    @property
    def seed(self):
        return self.config.seed

    @property
    def config_hash(self):
        return self.config.digest()


@dataclass
class CurveReport:
    curves: dict  # algorithm -> list[LinkPredScores], one per l in config.l_sweep
    reference: float  # mean user-tag popularity of the unsplit graph
    config: ExperimentConfig
    extra: dict = field(default_factory=dict)
    wall_time: float = field(default=0.0, compare=False)

    @property
    def seed(self):
        return self.config.seed

    @property
    def config_hash(self):
        return self.config.digest()

    def at(self, algorithm: str, l: int) -> metrics.LinkPredScores:
        return self.curves[algorithm][self.config.l_sweep.index(l)]


def probe_size(n_edges: int, fraction: float) -> int:
    # round half up; Python's round() would send 0.5 to the even neighbour
    return int(math.floor(fraction * n_edges + 0.5))


def split_links(g: BipartiteGraph, fraction: float, seed: int) -> LinkSplit:
    """Move a uniform random ``fraction`` of the edges into a probe set.

    Edges are taken in canonical (user, item) order and the first ``k`` slots
    of a partial Fisher-Yates shuffle driven by PCG64(seed) form the probe.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    if g.edge_count < 10:
        raise ValueError(f"graph needs at least 10 edges to split, has {g.edge_count}")
    edges = g.edges()
    n = len(edges)
    k = probe_size(n, fraction)
    rng = make_rng(seed)
    perm = np.arange(n)
    picks = rng.integers(np.arange(k), n) if k else np.empty(0, dtype=np.int64)
    for i, j in enumerate(picks.tolist()):
        perm[i], perm[j] = perm[j], perm[i]
    chosen = edges[np.sort(perm[:k])]
    train = remove_edges(g, chosen)
    probe = {}
    for u, i in chosen.tolist():
        probe.setdefault(u, []).append(i)
    probe = {u: np.array(sorted(v), dtype=np.int64) for u, v in probe.items()}
    isolated = tuple(u for u in sorted(probe) if train.user_degrees[u] == 0)
    return LinkSplit(train, probe, fraction, seed, isolated)


def recommend_all(g: BipartiteGraph, users: Sequence[int], algorithm: str, length: int,
                  params: ScorerParams, threads: int = 1) -> dict:
    """Top-``length`` lists for ``users``; identical output for any thread count."""
    def one(u):
        return recommend(g, u, algorithm, length, params)

    users = [int(u) for u in users]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            lists = list(pool.map(one, users))
    else:
        lists = [one(u) for u in users]
    return dict(zip(users, lists))


def run_personalization(g: BipartiteGraph, config: ExperimentConfig, threads: int = 1) -> MetricsReport:
    start = time.perf_counter()
    users = np.flatnonzero(g.user_degrees > 0)
    rows = {}
    for alg in config.algorithms:
        recs = recommend_all(g, users, alg, config.list_length, config.params, threads)
        rows[alg] = metrics.personalization(g, recs, product=config.product_overlap)
        log.info("personalization %s: V=%.4f O=%.4f", alg, rows[alg].v, rows[alg].o)
    extra = {"graph": stats(g).as_dict()}
    return MetricsReport(rows, config, extra, wall_time=time.perf_counter() - start)


def run_link_prediction(g: BipartiteGraph, config: ExperimentConfig, threads: int = 1) -> CurveReport:
    start = time.perf_counter()
    split = split_links(g, config.removal_fraction, config.seed)
    if split.n_probe == 0:
        raise ValueError("probe set is empty after rounding; raise the removal fraction")
    # users left without train edges get all-zero scores; keep them out of R/P
    skipped = set(split.isolated_users)
    probe = {u: v for u, v in split.probe.items() if u not in skipped}
    users = sorted(probe)
    longest = max(config.l_sweep)
    curves = {}
    for alg in config.algorithms:
        recs = recommend_all(split.train, users, alg, longest, config.params, threads)
        curves[alg] = [metrics.link_prediction(split.train, probe, recs, l) for l in config.l_sweep]
        log.info("link prediction %s done for %d users", alg, len(users))
    extra = {
        "graph": stats(g).as_dict(),
        "n_probe_edges": split.n_probe,
        "n_evaluated_users": len(users),
        "n_isolated_users": len(skipped),
    }
    return CurveReport(curves, stats(g).mean_user_tag_popularity, config, extra,
                       wall_time=time.perf_counter() - start)


def summarize_curves(reports: Sequence[CurveReport]) -> dict:
    """Median and interquartile spread of R, P, N per (algorithm, l) across seeded runs."""
    first = reports[0]
    out = {}
    for alg in first.config.algorithms:
        rows = []
        for idx, l in enumerate(first.config.l_sweep):
            pts = np.array([[r.curves[alg][idx].recall, r.curves[alg][idx].precision,
                             r.curves[alg][idx].novelty] for r in reports])
            q1, med, q3 = np.percentile(pts, [25, 50, 75], axis=0)
            rows.append({"l": l, "median": med.tolist(), "iqr": (q3 - q1).tolist()})
        out[alg] = rows
    return out
