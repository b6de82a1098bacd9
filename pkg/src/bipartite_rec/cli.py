"""Command-line entry point: ``bipartite-rec <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import dataio, synthetic
from .experiments import (
    DEFAULT_L_SWEEP,
    ExperimentConfig,
    run_link_prediction,
    run_personalization,
    summarize_curves,
)
from .graph import GraphError, build_graph, stats
from .scorers import ALGORITHMS, ScorerParams, recommend

log = logging.getLogger("bipartite_rec")


def parse_int_list(text: str) -> list[int]:
    """Parse ``"1..5"``, ``"1,2,10"`` or mixes such as ``"1..20,30,40"``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise argparse.ArgumentTypeError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _int_list(text):
    try:
        return parse_int_list(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None


def _algorithms(text):
    algs = tuple(a.strip().lower() for a in text.split(",") if a.strip())
    bad = [a for a in algs if a not in ALGORITHMS]
    if bad or not algs:
        raise argparse.ArgumentTypeError(f"unknown algorithm(s) {', '.join(bad) or '(none)'}; choose from {', '.join(ALGORITHMS)}")
    return algs


def _delimiter(text):
    return {"tab": "\t", "\\t": "\t", "comma": ",", "space": " "}.get(text, text)


def _add_input(p):
    p.add_argument("--input", required=True, help="edge-list file, one user/item pair per line")
    g = p.add_argument_group("input format")
    g.add_argument("--delimiter", type=_delimiter, default="\t", help="field delimiter (tab, comma, space or a character; default tab)")
    g.add_argument("--user-column", type=int, default=0)
    g.add_argument("--item-column", type=int, default=1)
    g.add_argument("--header-lines", type=int, default=0)
    g.add_argument("--comment-prefix", default="#", help="skip lines starting with this (empty string disables)")


def _add_params(p):
    p.add_argument("--lambda", dest="lam", type=float, default=0.5, help="Hybrid mixing weight (default 0.5)")
    p.add_argument("--epsilon", type=float, default=-0.85, help="PD degree exponent (default -0.85)")
    p.add_argument("--gamma", type=float, default=0.8, help="BHC degree exponent (default 0.8)")


def _add_sampling(p):
    p.add_argument("--max-users", type=int, default=None, help="sample at most this many users first")
    p.add_argument("--method", choices=("snowball", "uniform"), default="snowball")


def _add_output(p, required=True):
    p.add_argument("--output", required=required)
    p.add_argument("--output-format", choices=("csv", "json"), default="csv")
    p.add_argument("--threads", type=int, default=1, help="worker threads; output bytes do not depend on it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bipartite-rec", description="Diffusion recommenders on bipartite user-tag graphs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="print n, m, L, mean item degree and mean user-tag popularity")
    _add_input(p)

    p = sub.add_parser("sample", help="write a user-budget subgraph as an edge list")
    _add_input(p)
    _add_sampling(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)

    p = sub.add_parser("recommend", help="top-L items for one user")
    _add_input(p)
    p.add_argument("--user", type=int, required=True, help="external user id")
    p.add_argument("--algorithm", type=lambda s: _algorithms(s)[0], default="pliers")
    p.add_argument("--top", type=int, default=10)
    _add_params(p)

    p = sub.add_parser("eval-personalization", help="popularity gap V and overlap O per algorithm")
    _add_input(p)
    _add_sampling(p)
    p.add_argument("--algorithms", type=_algorithms, default=ALGORITHMS)
    p.add_argument("--top", type=int, default=10, help="recommendation list length L (default 10)")
    p.add_argument("--product-overlap", action="store_true", help="use the (1/z) * product form of the overlap")
    _add_params(p)
    p.add_argument("--seed", type=_int_list, default=[0], help="seed or seed list, e.g. 7 or 1..5")
    _add_output(p)

    p = sub.add_parser("eval-linkpred", help="recall/precision/novelty curves after random link removal")
    _add_input(p)
    _add_sampling(p)
    p.add_argument("--algorithms", type=_algorithms, default=ALGORITHMS)
    p.add_argument("--fraction", type=float, default=0.10, help="fraction of links moved to the probe set (default 0.10)")
    p.add_argument("--l-sweep", type=_int_list, default=list(DEFAULT_L_SWEEP),
                   help="list lengths, e.g. 1..20,30,40 (default 1..20 then 30..100 step 10)")
    _add_params(p)
    p.add_argument("--seed", type=_int_list, default=[0], help="seed or seed list, e.g. 7 or 1..5")
    _add_output(p)

    p = sub.add_parser("gen-fixture", help="write a seeded power-law edge list and its stats manifest")
    p.add_argument("--users", type=int, default=2000)
    p.add_argument("--items", type=int, default=20000)
    p.add_argument("--links", type=int, default=113400)
    p.add_argument("--user-exponent", type=float, default=0.6)
    p.add_argument("--item-exponent", type=float, default=0.85)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True, help="edge-list path; the manifest goes to <output>.manifest.json")
    return parser


def _format(args) -> dataio.EdgeListFormat:
    return dataio.EdgeListFormat(
        delimiter=args.delimiter,
        user_column=args.user_column,
        item_column=args.item_column,
        header_lines=args.header_lines,
        comment_prefix=args.comment_prefix or None,
    )


def _load(args):
    fmt = _format(args)
    g = build_graph(dataio.load_edge_list(args.input, fmt))
    if g.n_duplicates:
        log.warning("collapsed %d duplicate edges", g.n_duplicates)
    return g, fmt


def _input_record(args, fmt, seed):
    rec = {
        "path": args.input,
        "format": {"delimiter": fmt.delimiter, "user_column": fmt.user_column, "item_column": fmt.item_column,
                   "header_lines": fmt.header_lines, "comment_prefix": fmt.comment_prefix},
    }
    if getattr(args, "max_users", None):
        rec["sample"] = {"max_users": args.max_users, "method": args.method, "seed": seed}
    return rec


def _seeded_path(path, seed, many):
    if not many:
        return path
    root, ext = os.path.splitext(path)
    return f"{root}.seed{seed}{ext}"


def cmd_stats(args):
    g, _ = _load(args)
    s = stats(g)
    for k, v in s.as_dict().items():
        print(f"{k}\t{v:.6f}" if isinstance(v, float) else f"{k}\t{v}")
    if g.n_duplicates:
        print(f"duplicates_collapsed\t{g.n_duplicates}", file=sys.stderr)
    return 0


def cmd_sample(args):
    g, _ = _load(args)
    sub = dataio.sample_users(g, dataio.SampleSpec(args.max_users, args.method, args.seed))
    dataio.write_edge_list(sub.edge_list(), args.output)
    log.info("kept %d users, %d items, %d links", sub.n_users, sub.n_items, sub.edge_count)
    return 0


def cmd_recommend(args):
    g, _ = _load(args)
    t = g.user_index(args.user)
    params = ScorerParams(args.lam, args.epsilon, args.gamma)
    ranked = recommend(g, t, args.algorithm, args.top, params)
    for i, s in ranked:
        print(f"{g.item_ids[i]}\t{s:.6f}")
    return 0


def _run_eval(args, runner, **cfg_kw):
    g_full, fmt = _load(args)
    params = ScorerParams(args.lam, args.epsilon, args.gamma)
    many = len(args.seed) > 1
    reports = []
    for seed in args.seed:
        g = g_full
        if args.max_users:
            g = dataio.sample_users(g_full, dataio.SampleSpec(args.max_users, args.method, seed))
        config = ExperimentConfig(algorithms=tuple(args.algorithms), params=params, seed=seed, **cfg_kw)
        report = runner(g, config, threads=max(1, args.threads))
        report.extra["input"] = _input_record(args, fmt, seed)
        path = _seeded_path(args.output, seed, many)
        dataio.write_report(report, path, args.output_format)
        log.info("wrote %s (%.1fs)", path, report.wall_time)
        reports.append(report)
    return reports


def cmd_eval_personalization(args):
    _run_eval(args, run_personalization, list_length=args.top, product_overlap=args.product_overlap)
    return 0


def cmd_eval_linkpred(args):
    reports = _run_eval(args, run_link_prediction, removal_fraction=args.fraction, l_sweep=tuple(args.l_sweep))
    if len(reports) > 1:
        root, _ = os.path.splitext(args.output)
        summary = {"seeds": list(args.seed), "columns": ["R", "P", "N"], "curves": summarize_curves(reports)}
        with open(f"{root}.summary.json", "w") as fh:
            json.dump(summary, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return 0


def cmd_gen_fixture(args):
    params = dict(n_users=args.users, n_items=args.items, n_links=args.links, seed=args.seed,
                  user_exponent=args.user_exponent, item_exponent=args.item_exponent)
    edges = synthetic.power_law_edges(**params)
    dataio.write_edge_list(edges, args.output)
    synthetic.write_manifest(synthetic.manifest(edges, **params), f"{args.output}.manifest.json")
    return 0


COMMANDS = {
    "stats": cmd_stats,
    "sample": cmd_sample,
    "recommend": cmd_recommend,
    "eval-personalization": cmd_eval_personalization,
    "eval-linkpred": cmd_eval_linkpred,
    "gen-fixture": cmd_gen_fixture,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "top", 1) < 1:
        parser.error("--top must be >= 1")
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    if args.command == "sample" and args.max_users is None:
        parser.error("sample requires --max-users")
    if getattr(args, "max_users", None) is not None and args.max_users < 1:
        parser.error("--max-users must be >= 1")
    if args.command == "eval-linkpred":
        if not 0.0 < args.fraction < 1.0:
            parser.error("--fraction must lie strictly between 0 and 1")
        if any(b <= a for a, b in zip(args.l_sweep, args.l_sweep[1:])) or args.l_sweep[0] < 1:
            parser.error("--l-sweep must be strictly increasing positive integers")
    try:
        return COMMANDS[args.command](args)
    except (GraphError, dataio.EdgeListError, ValueError, OSError) as exc:
        print(f"bipartite-rec {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
