"""Edge-list ingestion, user-budget sampling and report serialization."""

from __future__ import annotations

import csv
import io
import json
import os
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .experiments import CurveReport, ExperimentConfig, MetricsReport, make_rng
from .graph import BipartiteGraph, subgraph
from .metrics import LinkPredScores, PersonalizationScores


class EdgeListError(ValueError):
    pass


@dataclass(frozen=True)
class EdgeListFormat:
    delimiter: str = "\t"
    user_column: int = 0
    item_column: int = 1
    header_lines: int = 0
    comment_prefix: Optional[str] = "#"

    def __post_init__(self):
        if self.user_column == self.item_column:
            raise ValueError("user_column and item_column must differ")
        if min(self.user_column, self.item_column, self.header_lines) < 0:
            raise ValueError("columns and header_lines must be non-negative")
        if not self.delimiter:
            raise ValueError("delimiter must be non-empty")


def load_edge_list(path, fmt: EdgeListFormat = EdgeListFormat()) -> list[tuple[int, int]]:
    """Parse ``(user_id, item_id)`` pairs; duplicates are kept.

    Blank lines and lines starting with ``fmt.comment_prefix`` are skipped.
    Raises :class:`EdgeListError` naming the 1-based line of the first bad record.
    """
    pairs = []
    need = max(fmt.user_column, fmt.item_column) + 1
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            if lineno <= fmt.header_lines:
                continue
            stripped = line.strip()
            if not stripped or (fmt.comment_prefix and stripped.startswith(fmt.comment_prefix)):
                continue
            raw = line.rstrip("\r\n")
            # csv handles quoting for one-character delimiters; longer ones such as "::" split plainly
            if len(fmt.delimiter) == 1:
                fields = next(csv.reader([raw], delimiter=fmt.delimiter))
            else:
                fields = raw.split(fmt.delimiter)
            if len(fields) < need:
                raise EdgeListError(f"{path}:{lineno}: expected at least {need} columns, got {len(fields)}")
            try:
                u = int(fields[fmt.user_column].strip())
                i = int(fields[fmt.item_column].strip())
            except ValueError:
                raise EdgeListError(f"{path}:{lineno}: non-integer id in {line.rstrip()!r}") from None
            if u < 0 or i < 0:
                raise EdgeListError(f"{path}:{lineno}: negative id in {line.rstrip()!r}")
            pairs.append((u, i))
    return pairs


def write_edge_list(pairs, path, delimiter: str = "\t") -> None:
    with open(path, "w", newline="") as fh:
        for u, i in pairs:
            fh.write(f"{u}{delimiter}{i}\n")


# -- sampling ------------------------------------------------------------

@dataclass(frozen=True)
class SampleSpec:
    max_users: int
    method: str = "snowball"
    seed: int = 0

    def __post_init__(self):
        if self.max_users < 1:
            raise ValueError("max_users must be >= 1")
        if self.method not in ("snowball", "uniform"):
            raise ValueError(f"unknown sampling method {self.method!r}")


def snowball_order(g: BipartiteGraph, budget: int, seed: int) -> list[int]:
    """Users in breadth-first discovery order over the user-item-user projection.

    Start points come from a seeded permutation of all users; when a
    component is exhausted the next undiscovered user in that permutation
    seeds a new search. The output for a smaller budget is always a prefix
    of the output for a larger one.
    """
    starts = make_rng(seed).permutation(g.n_users)
    seen = np.zeros(g.n_users, dtype=bool)
    order: list[int] = []
    for s in starts.tolist():
        if len(order) >= budget:
            break
        if seen[s]:
            continue
        seen[s] = True
        order.append(s)
        queue = deque([s])
        while queue and len(order) < budget:
            u = queue.popleft()
            items = g.user_items(u)
            if len(items) == 0:
                continue
            nbrs = np.concatenate([g.item_users(i) for i in items.tolist()])
            _, first = np.unique(nbrs, return_index=True)
            for v in nbrs[np.sort(first)].tolist():
                if not seen[v]:
                    seen[v] = True
                    order.append(v)
                    queue.append(v)
    return order[:budget]


def sample_users(g: BipartiteGraph, spec: SampleSpec) -> BipartiteGraph:
    """Induced subgraph on at most ``spec.max_users`` users, items never truncated."""
    if spec.max_users >= g.n_users:
        return g
    if spec.method == "uniform":
        users = make_rng(spec.seed).permutation(g.n_users)[: spec.max_users]
    else:
        users = snowball_order(g, spec.max_users, spec.seed)
    return subgraph(g, users)


# -- reports -------------------------------------------------------------

COLUMN_ALIASES = {
    "R": "hits in top L / L (conventional precision@L)",
    "P": "hits in top L / probe size (conventional recall@L)",
    "N": "mean train degree of top L (novelty)",
}
REFERENCE_ROW = "reference_p_T_U"


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def report_to_dict(report) -> dict:
    if isinstance(report, MetricsReport):
        body = {
            "kind": "personalization",
            "rows": [
                {"algorithm": a, "V": s.v, "O": s.o, "users_counted": s.users_counted}
                for a, s in report.rows.items()
            ],
        }
    elif isinstance(report, CurveReport):
        body = {
            "kind": "link_prediction",
            "column_aliases": COLUMN_ALIASES,
            "reference_p_T_U": report.reference,
            "curves": {
                a: [{"L": s.l, "R": s.recall, "P": s.precision, "N": s.novelty} for s in pts]
                for a, pts in report.curves.items()
            },
        }
    else:
        raise TypeError(f"not a report: {type(report).__name__}")
    body.update(seed=report.seed, config=report.config.as_dict(),
                config_hash=report.config_hash, extra=report.extra)
    return body


def report_from_dict(d: dict):
    config = ExperimentConfig.from_dict(d["config"])
    if d["kind"] == "personalization":
        rows = {r["algorithm"]: PersonalizationScores(r["V"], r["O"], r["users_counted"]) for r in d["rows"]}
        return MetricsReport(rows, config, d.get("extra", {}))
    if d["kind"] == "link_prediction":
        curves = {
            a: [LinkPredScores(p["L"], p["R"], p["P"], p["N"]) for p in pts]
            for a, pts in d["curves"].items()
        }
        return CurveReport(curves, d["reference_p_T_U"], config, d.get("extra", {}))
    raise ValueError(f"unknown report kind {d['kind']!r}")


def render_csv(report) -> str:
    buf = io.StringIO()
    meta = {"seed": report.seed, "config_hash": report.config_hash, "config": report.config.as_dict()}
    if "input" in report.extra:
        meta["input"] = report.extra["input"]
    meta = json.dumps(meta, sort_keys=True)
    buf.write(f"# {meta}\n")
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(report, MetricsReport):
        w.writerow(["algorithm", "V", "O"])
        for a, s in report.rows.items():
            w.writerow([a, _fmt(s.v), _fmt(s.o)])
    elif isinstance(report, CurveReport):
        w.writerow(["algorithm", "L", "R", "P", "N"])
        for a, pts in report.curves.items():
            for s in pts:
                w.writerow([a, s.l, _fmt(s.recall), _fmt(s.precision), _fmt(s.novelty)])
        w.writerow([REFERENCE_ROW, "", "", "", _fmt(report.reference)])
    else:
        raise TypeError(f"not a report: {type(report).__name__}")
    return buf.getvalue()


def render_json(report) -> str:
    return json.dumps(report_to_dict(report), sort_keys=True, indent=2) + "\n"


def write_report(report, path, fmt: str = "csv") -> None:
    """Write a report as csv (first line is a ``#`` metadata comment) or json."""
    if fmt == "csv":
        text = render_csv(report)
    elif fmt == "json":
        text = render_json(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    parent = os.path.dirname(os.fspath(path))
    if parent and not os.path.isdir(parent):
        raise OSError(f"cannot write {path}: directory {parent} does not exist")
    with open(path, "w", newline="") as fh:
        fh.write(text)


def read_report(path):
    with open(path) as fh:
        return report_from_dict(json.load(fh))
