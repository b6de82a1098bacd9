import json
from collections import Counter
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bipartite_rec import dataio, synthetic
from bipartite_rec.dataio import EdgeListError, EdgeListFormat, SampleSpec, load_edge_list, sample_users
from bipartite_rec.experiments import ExperimentConfig, run_link_prediction, run_personalization
from bipartite_rec.graph import build_graph, stats
from conftest import random_graph

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def write(tmp_path, text, name="edges.tsv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_tab_separated(tmp_path):
    p = write(tmp_path, "1\t10\n1\t11\n2\t10\n")
    assert load_edge_list(p) == [(1, 10), (1, 11), (2, 10)]


def test_header_comments_blank_lines(tmp_path):
    p = write(tmp_path, "userID,bookmarkID,tagID\n# note\n\n5,900,42\n5,901,42\n6,900,7\n")
    fmt = EdgeListFormat(delimiter=",", user_column=0, item_column=2, header_lines=1)
    assert load_edge_list(p, fmt) == [(5, 42), (5, 42), (6, 7)]


def test_multi_character_delimiter(tmp_path):
    p = write(tmp_path, "1::20::5\n2::21::3\n")
    assert load_edge_list(p, EdgeListFormat(delimiter="::")) == [(1, 20), (2, 21)]


def test_crlf_and_extra_columns(tmp_path):
    p = write(tmp_path, "1\t2\t999\r\n3\t4\t0\r\n")
    assert load_edge_list(p) == [(1, 2), (3, 4)]


@pytest.mark.parametrize("text, line, msg", [
    ("1\t2\n3\n", 2, "expected at least 2 columns"),
    ("1\t2\nx\t4\n", 2, "non-integer"),
    ("1\t2\n1\t2\n-1\t4\n", 3, "negative"),
])
def test_errors_name_the_line(tmp_path, text, line, msg):
    p = write(tmp_path, text)
    with pytest.raises(EdgeListError, match=f":{line}: {msg}"):
        load_edge_list(p)


def test_empty_file(tmp_path):
    assert load_edge_list(write(tmp_path, "")) == []
    g = build_graph(load_edge_list(write(tmp_path, "# only a comment\n")))
    assert g.edge_count == 0


def test_format_validation():
    with pytest.raises(ValueError):
        EdgeListFormat(user_column=1, item_column=1)
    with pytest.raises(ValueError):
        EdgeListFormat(delimiter="")
    with pytest.raises(ValueError):
        EdgeListFormat(header_lines=-1)


def test_write_then_load_round_trip(tmp_path):
    pairs = [(3, 1), (0, 7), (3, 2)]
    dataio.write_edge_list(pairs, tmp_path / "out.tsv")
    assert load_edge_list(tmp_path / "out.tsv") == pairs


def test_shipped_fixtures_match_manifest():
    g = build_graph(load_edge_list(FIXTURES / "powerlaw_small.tsv"))
    m = json.loads((FIXTURES / "powerlaw_small.tsv.manifest.json").read_text())
    assert stats(g).as_dict() == m["stats"]
    regenerated = synthetic.power_law_edges(**m["generator"])
    assert regenerated == g.edge_list()
    micro = build_graph(load_edge_list(FIXTURES / "micro.tsv"))
    assert (micro.n_users, micro.n_items, micro.edge_count) == (2, 3, 4)


def test_power_law_edges_exact_counts():
    edges = synthetic.power_law_edges(50, 120, 400, seed=1)
    g = build_graph(edges)
    assert (g.n_users, g.n_items, g.edge_count) == (50, 120, 400)
    assert g.n_duplicates == 0
    assert edges == synthetic.power_law_edges(50, 120, 400, seed=1)
    with pytest.raises(ValueError):
        synthetic.power_law_edges(5, 10, 5, seed=0)


# -- sampling ------------------------------------------------------------

def test_budget_at_least_user_count_is_identity():
    g = random_graph(np.random.default_rng(0))
    for method in ("snowball", "uniform"):
        assert sample_users(g, SampleSpec(g.n_users, method)) is g
        assert sample_users(g, SampleSpec(g.n_users + 5, method)) is g


def test_single_user_budget_keeps_all_its_items():
    g = random_graph(np.random.default_rng(1), max_users=30, max_items=50, density=(0.2, 0.4))
    for method in ("snowball", "uniform"):
        sub = sample_users(g, SampleSpec(1, method, seed=3))
        assert sub.n_users == 1
        uid = int(sub.user_ids[0])
        full = {int(g.item_ids[i]) for i in g.user_items(g.user_index(uid)).tolist()}
        assert {i for _, i in sub.edge_list()} == full


def test_sample_is_an_induced_subgraph():
    g = random_graph(np.random.default_rng(2), max_users=40, max_items=60)
    sub = sample_users(g, SampleSpec(10, "snowball", seed=1))
    kept = set(sub.user_ids.tolist())
    assert sub.n_users == 10
    assert sorted(sub.edge_list()) == sorted(e for e in g.edge_list() if e[0] in kept)


def test_sample_is_deterministic():
    g = random_graph(np.random.default_rng(3), max_users=40, max_items=60)
    for method in ("snowball", "uniform"):
        assert sample_users(g, SampleSpec(7, method, 5)) == sample_users(g, SampleSpec(7, method, 5))


def test_snowball_follows_shared_items():
    # two components; a budget of 3 starting in the first must exhaust it before jumping
    g = build_graph([(0, 0), (1, 0), (2, 0), (3, 1), (4, 1)])
    for seed in range(10):
        order = dataio.snowball_order(g, 5, seed)
        first = order[0]
        comp = {0, 1, 2} if first < 3 else {3, 4}
        assert set(order[: len(comp)]) == comp


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 20), st.integers(0, 30)), min_size=1, max_size=100),
       st.integers(0, 1000))
def test_snowball_prefix_property(edges, seed):
    g = build_graph(edges)
    full = dataio.snowball_order(g, g.n_users, seed)
    assert sorted(full) == list(range(g.n_users))
    for b in range(1, g.n_users + 1):
        assert dataio.snowball_order(g, b, seed) == full[:b]
    # smaller budgets never lose users or links
    sizes = [sample_users(g, SampleSpec(b, "snowball", seed)).edge_count for b in range(1, g.n_users + 1)]
    assert sizes == sorted(sizes)


def test_sample_spec_validation():
    with pytest.raises(ValueError):
        SampleSpec(0)
    with pytest.raises(ValueError):
        SampleSpec(5, method="random-walk")


# -- reports -------------------------------------------------------------

@pytest.fixture(scope="module")
def reports():
    g = random_graph(np.random.default_rng(8), max_users=40, max_items=60, density=(0.1, 0.3))
    cfg = ExperimentConfig(algorithms=("pliers", "probs"), l_sweep=(1, 2, 5), seed=1, list_length=3)
    return run_personalization(g, cfg), run_link_prediction(g, cfg)


def test_csv_personalization(reports, tmp_path):
    rep, _ = reports
    dataio.write_report(rep, tmp_path / "p.csv")
    lines = (tmp_path / "p.csv").read_bytes().split(b"\n")
    assert b"\r" not in b"".join(lines)
    meta = json.loads(lines[0][2:])
    assert meta["seed"] == 1 and meta["config_hash"] == rep.config_hash
    assert lines[1] == b"algorithm,V,O"
    name, v, o = lines[2].decode().split(",")
    assert name == "pliers" and v == f"{rep.rows['pliers'].v:.6f}" and o == f"{rep.rows['pliers'].o:.6f}"


def test_csv_link_prediction(reports, tmp_path):
    _, rep = reports
    dataio.write_report(rep, tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[1] == "algorithm,L,R,P,N"
    assert len(lines) == 2 + 2 * 3 + 1
    assert lines[-1] == f"{dataio.REFERENCE_ROW},,,,{rep.reference:.6f}"
    for row in lines[2:-1]:
        for cell in row.split(",")[2:]:
            assert len(cell.split(".")[1]) == 6


@pytest.mark.parametrize("which", [0, 1])
def test_json_round_trip(reports, tmp_path, which):
    rep = reports[which]
    path = tmp_path / "r.json"
    dataio.write_report(rep, path, "json")
    back = dataio.read_report(path)
    assert back == rep
    assert dataio.render_json(back) == path.read_text()
    assert json.loads(path.read_text())["config_hash"] == rep.config_hash


def test_json_carries_column_aliases(reports):
    d = json.loads(dataio.render_json(reports[1]))
    assert set(d["column_aliases"]) == {"R", "P", "N"}
    assert "wall_time" not in d


def test_write_report_errors(reports, tmp_path):
    with pytest.raises(OSError, match="does not exist"):
        dataio.write_report(reports[0], tmp_path / "missing" / "x.csv")
    with pytest.raises(ValueError):
        dataio.write_report(reports[0], tmp_path / "x.txt", "xml")


def test_duplicates_counted_in_hetrec_style_file(tmp_path):
    rows = [(u, b, t) for u in range(5) for b in range(3) for t in (u, u + 1)]
    text = "userID\tbookmarkID\ttagID\n" + "".join(f"{u}\t{b}\t{t}\n" for u, b, t in rows)
    p = write(tmp_path, text)
    pairs = load_edge_list(p, EdgeListFormat(item_column=2, header_lines=1))
    g = build_graph(pairs)
    distinct = set(pairs)
    assert g.edge_count == len(distinct)
    assert g.n_duplicates == len(pairs) - len(distinct)
    assert Counter(pairs)[(0, 0)] == 3
