import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oimp.extraction import (
    divrank_scores,
    extract_divrank,
    extract_greedy_max_cover,
    extract_max_degree,
    greedy_mc_im,
)
from oimp.graph import Graph, assign_wc_weights


def star(center, leaves, n=None, w=0.0):
    return Graph.from_edges(n or max(leaves) + 1, [(center, v, w) for v in leaves])


def dense_divrank(g, alpha=0.85, iters=200, tol=1e-9):
    """Loop-based cumulative DivRank on the reversed graph."""
    n = g.node_count
    P = np.zeros((n, n))
    for u, v, _ in g.edges():
        P[v, u] += 1.0  # reversed edge v -> u
    rows = P.sum(axis=1)
    P[rows > 0] /= rows[rows > 0, None]
    pi = np.full(n, 1.0 / n)
    visits = pi.copy()
    for _ in range(iters):
        new = np.full(n, (1 - alpha) / n)
        for x in range(n):
            if rows[x] == 0:
                new += alpha * pi[x] / n
                continue
            w = P[x] * visits
            new += alpha * pi[x] * w / w.sum()
        done = np.abs(new - pi).max() < tol
        pi = new
        visits = visits + pi
        if done:
            break
    return pi


# ------------------------------------------------------------- max degree

def test_max_degree_examples():
    g = star(3, [0, 1, 2, 4, 5, 6, 7, 8, 9, 10])
    assert extract_max_degree(g, 1).influencers == [3]
    assert sorted(extract_max_degree(g, g.node_count).influencers) == list(range(11))
    g = Graph.from_edges(14, [(0, v) for v in range(3, 8)] + [(1, v) for v in range(8, 13)]
                         + [(2, v) for v in range(3, 6)])
    assert extract_max_degree(g, 2).influencers == [0, 1]
    with pytest.raises(ValueError):
        extract_max_degree(g, 15)


# -------------------------------------------------------------- max cover

def test_max_cover_disjoint_stars():
    g = Graph.from_edges(8, [(0, v) for v in (1, 2, 3)] + [(4, v) for v in (5, 6, 7)])
    assert extract_greedy_max_cover(g, 2).influencers == [0, 4]


def test_max_cover_one_star():
    g = star(0, range(1, 6), n=8)
    res = extract_greedy_max_cover(g, 2)
    assert res.influencers == [0, 6] and not res.warning


def test_max_cover_pads_when_exhausted():
    g = star(0, range(1, 6))
    res = extract_greedy_max_cover(g, 2)
    assert res.warning
    assert res.influencers[0] == 0 and len(set(res.influencers)) == 2


def test_max_cover_chain():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    assert extract_greedy_max_cover(g, 1).influencers == [0]


def test_max_cover_two_hops():
    # 9 only covers nodes two hops away from 1
    g = Graph.from_edges(11, [(1, 2), (1, 3), (1, 7), (2, 4), (2, 5), (9, 4), (9, 5), (8, 10)])
    assert extract_greedy_max_cover(g, 2, hops=1).influencers == [1, 9]
    assert extract_greedy_max_cover(g, 2, hops=2).influencers == [1, 8]


random_graphs = st.integers(3, 25).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
                                             max_size=60)))


@given(random_graphs, st.data())
def test_extractors_return_distinct_valid_ids(data, draw):
    n, edges = data
    g = Graph.from_edges(n, edges)
    K = draw.draw(st.integers(0, n))
    for res in (extract_max_degree(g, K), extract_greedy_max_cover(g, K), extract_divrank(g, K)):
        assert len(res.influencers) == K == len(set(res.influencers))
        assert all(0 <= u < n for u in res.influencers)


@given(random_graphs, st.integers(1, 6))
def test_max_cover_trace_is_disjoint(data, K):
    n, edges = data
    g = Graph.from_edges(n, edges)
    K = min(K, n)
    res = extract_greedy_max_cover(g, K, hops=1)
    removed = set()
    for u, counted in zip(res.influencers, res.trace):
        assert u not in removed
        assert not counted & removed
        removed |= {u} | set(g.out_edges(u)[0].tolist())


# ---------------------------------------------------------------- divrank

def test_divrank_symmetric_pair():
    g = Graph.from_edges(2, [(0, 1), (1, 0)])
    assert np.allclose(divrank_scores(g), [0.5, 0.5])
    assert extract_divrank(g, 1).influencers == [0]


def test_divrank_broadcaster_ranks_first():
    # node 0 points at everyone: after reversal every edge leads into 0
    g = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    pi = divrank_scores(g)
    assert extract_divrank(g, 1).influencers == [0]
    assert np.allclose(pi, dense_divrank(g), atol=1e-12)


def test_divrank_sums_to_one_every_iteration():
    rng = np.random.default_rng(0)
    edges = rng.integers(0, 40, size=(150, 2)).tolist()
    g = Graph.from_edges(40, edges)
    seen = []
    divrank_scores(g, callback=seen.append)
    assert seen
    for pi in seen:
        assert np.all(pi >= 0) and abs(pi.sum() - 1.0) < 1e-9


@settings(max_examples=30, deadline=None)
@given(random_graphs, st.floats(0.05, 0.95))
def test_divrank_matches_dense_reference(data, alpha):
    n, edges = data
    g = Graph.from_edges(n, edges)
    assert np.allclose(divrank_scores(g, alpha), dense_divrank(g, alpha), atol=1e-10)


def test_divrank_validation():
    with pytest.raises(ValueError):
        divrank_scores(Graph.from_edges(2, []), alpha=1.0)
    with pytest.raises(ValueError):
        divrank_scores(Graph.from_edges(0, []))


# -------------------------------------------------------------- greedy IM

def test_greedy_zero_weights_picks_lowest_ids():
    g = Graph.from_edges(5, [(4, v, 0.0) for v in range(4)])
    res = greedy_mc_im(g, 3, "ic", 20, None, np.random.default_rng())
    assert res.influencers == [0, 1, 2]
    assert res.scores == [1.0, 1.0, 1.0]


def test_greedy_path():
    g = Graph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
    res = greedy_mc_im(g, 1, "ic", 10, None, np.random.default_rng())
    assert res.influencers == [0] and res.scores == [3.0]


def test_greedy_disjoint_edges():
    g = Graph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)])
    res = greedy_mc_im(g, 2, "ic", 10, None, np.random.default_rng())
    assert sorted(res.influencers) == [0, 2]


def test_greedy_discount():
    g = Graph.from_edges(5, [(0, 1, 1.0), (0, 2, 1.0), (3, 4, 1.0)])
    res = greedy_mc_im(g, 1, "ic", 10, {0, 1, 2}, np.random.default_rng())
    assert res.influencers == [3]


def test_greedy_candidates_and_validation():
    g = Graph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)])
    res = greedy_mc_im(g, 1, "ic", 10, None, np.random.default_rng(), candidates=[1, 2])
    assert res.influencers == [2]
    with pytest.raises(ValueError):
        greedy_mc_im(g, 3, "ic", 10, None, np.random.default_rng(), candidates=[1, 2])


def test_greedy_gains_non_increasing_within_noise():
    rng = np.random.default_rng(3)
    edges = rng.integers(0, 200, size=(800, 2)).tolist()
    g = assign_wc_weights(Graph.from_edges(200, edges))
    res = greedy_mc_im(g, 6, "ic", 400, None, rng)
    for (a, sa), (b, sb) in zip(zip(res.scores, res.stderr), zip(res.scores[1:], res.stderr[1:])):
        assert b <= a + 3 * np.hypot(sa, sb)
