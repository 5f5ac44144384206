import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oimp.graph import (
    Graph,
    GraphFormatError,
    assign_tv_weights,
    assign_wc_weights,
    load_edge_list,
    save_edge_list,
)


def write(tmp_path, text, name="g.txt"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_empty_file_gives_empty_graph(tmp_path):
    g = load_edge_list(write(tmp_path, ""))
    assert g.node_count == 0 and g.edge_count == 0


def test_two_edges_in_degree(tmp_path):
    g = load_edge_list(write(tmp_path, "0 1\n1 2\n"))
    assert g.node_count == 3
    assert g.edge_count == 2
    assert g.in_degree.tolist() == [0, 1, 1]


def test_explicit_weight(tmp_path):
    g = load_edge_list(write(tmp_path, "0 1 0.25\n"))
    assert g.edges() == [(0, 1, 0.25)]


def test_missing_weight_defaults_to_zero(tmp_path):
    g = load_edge_list(write(tmp_path, "# header\n\n0 1\n"))
    assert g.weights.tolist() == [0.0]


def test_malformed_line_reports_line_number(tmp_path):
    with pytest.raises(GraphFormatError, match=":3:"):
        load_edge_list(write(tmp_path, "0 1\n1 2\n1 x\n"))


def test_too_many_fields(tmp_path):
    with pytest.raises(GraphFormatError, match=":1:"):
        load_edge_list(write(tmp_path, "0 1 0.5 7\n"))


@pytest.mark.parametrize("w", ["1.5", "-0.1"])
def test_weight_out_of_range(tmp_path, w):
    with pytest.raises(GraphFormatError, match="outside"):
        load_edge_list(write(tmp_path, f"0 1 {w}\n"))


def test_parallel_edges_kept(tmp_path):
    g = load_edge_list(write(tmp_path, "0 1\n0 1\n"))
    assert g.edge_count == 2
    assert g.in_degree[1] == 2


def test_self_loops_dropped_and_counted(tmp_path, caplog):
    g = load_edge_list(write(tmp_path, "0 0\n0 1\n2 2\n"))
    assert g.edge_count == 1
    assert g.self_loops_dropped == 2
    assert g.node_count == 3
    assert "self-loops" in caplog.text


def test_undirected_emits_both_directions(tmp_path):
    g = load_edge_list(write(tmp_path, "0 1 0.5\n"), undirected=True)
    assert sorted(g.edges()) == [(0, 1, 0.5), (1, 0, 0.5)]


def test_wc_in_degree_four():
    g = assign_wc_weights(Graph.from_edges(5, [(u, 4) for u in range(4)]))
    assert g.weights.tolist() == [0.25] * 4


def test_wc_in_degree_one():
    g = assign_wc_weights(Graph.from_edges(2, [(0, 1)]))
    assert g.weights.tolist() == [1.0]


def test_wc_counts_parallel_edges():
    g = assign_wc_weights(Graph.from_edges(2, [(0, 1), (0, 1)]))
    assert g.weights.tolist() == [0.5, 0.5]


def test_tv_values_and_determinism():
    base = Graph.from_edges(3, [(0, 1), (1, 2), (2, 0)] * 10)
    a = assign_tv_weights(base, np.random.default_rng(7))
    b = assign_tv_weights(base, np.random.default_rng(7))
    assert set(a.weights.tolist()) <= {0.1, 0.01, 0.001}
    assert a == b


def test_tv_frequency():
    rng = np.random.default_rng(0)
    edges = rng.integers(0, 1000, size=(31000, 2))
    edges = edges[edges[:, 0] != edges[:, 1]][:30000]
    g = assign_tv_weights(Graph.from_edges(1000, edges.tolist()), rng)
    assert g.edge_count == 30000
    assert abs(np.mean(g.weights == 0.1) - 1 / 3) < 0.02


def test_invalid_construction():
    with pytest.raises(ValueError):
        Graph.from_edges(2, [(0, 5)])
    with pytest.raises(ValueError):
        Graph.from_edges(2, [(0, 1, 2.0)])


def test_graph_arrays_read_only():
    g = Graph.from_edges(2, [(0, 1, 0.5)])
    with pytest.raises(ValueError):
        g.weights[0] = 0.9


def test_reversed():
    g = Graph.from_edges(3, [(0, 1, 0.5), (0, 2, 0.25)])
    assert sorted(g.reversed().edges()) == [(1, 0, 0.5), (2, 0, 0.25)]


edge_lists = st.integers(1, 12).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1),
                           st.floats(0.0, 1.0, allow_nan=False)), max_size=40)))


@given(edge_lists)
def test_wc_incoming_sums_to_one(data):
    n, edges = data
    g = assign_wc_weights(Graph.from_edges(n, edges))
    sums = g.in_weight_sums
    for v in range(n):
        if g.in_degree[v] >= 1:
            assert abs(sums[v] - 1.0) <= g.in_degree[v] * np.finfo(float).eps
        else:
            assert sums[v] == 0.0


@settings(max_examples=50)
@given(edge_lists)
def test_round_trip(tmp_path_factory, data):
    n, edges = data
    g = Graph.from_edges(n, edges)
    path = tmp_path_factory.mktemp("rt") / "g.txt"
    save_edge_list(g, path)
    assert load_edge_list(path) == g


@given(edge_lists)
def test_graph_invariants(data):
    n, edges = data
    g = Graph.from_edges(n, edges)
    assert np.all((g.weights >= 0) & (g.weights <= 1))
    assert np.all(g.indices < n)
    expected = np.zeros(n, dtype=int)
    for u, v, _ in edges:
        if u != v:
            expected[v] += 1
    assert g.in_degree.tolist() == expected.tolist()
