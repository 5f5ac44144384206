"""Choosing K influencer nodes from a known graph."""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import sparse

from .environments import simulate_spread_sizes
from .graph import Graph

log = logging.getLogger(__name__)


@dataclass
class ExtractionResult:
    """Selected node ids in selection order, with the score that selected each.

    ``warning`` is set when a method ran out of eligible nodes and padded
    the result with leftovers.
    """

    influencers: list[int]
    scores: list[float]
    warning: bool = False
    stderr: list[float] | None = None
    trace: list[frozenset[int]] = field(default_factory=list)


def _check_k(g: Graph, K: int) -> None:
    if not 0 <= K <= g.node_count:
        raise ValueError(f"cannot extract K={K} influencers from {g.node_count} nodes")


def _by_degree(g: Graph, exclude: set[int] = frozenset()) -> list[int]:
    deg = g.out_degree
    return [int(u) for u in np.lexsort((np.arange(g.node_count), -deg)) if int(u) not in exclude]


def extract_max_degree(g: Graph, K: int) -> ExtractionResult:
    _check_k(g, K)
    chosen = _by_degree(g)[:K]
    return ExtractionResult(chosen, [float(g.out_degree[u]) for u in chosen])


def _within_hops(g: Graph, u: int, hops: int) -> set[int]:
    reached = {u}
    frontier = [u]
    for _ in range(hops):
        nxt = []
        for x in frontier:
            for v in g.out_edges(x)[0].tolist():
                if v not in reached:
                    reached.add(v)
                    nxt.append(v)
        frontier = nxt
    return reached


def extract_greedy_max_cover(g: Graph, K: int, hops: int = 1) -> ExtractionResult:
    """Greedy cover: repeatedly take the node with most uncovered out-neighbours.

    The chosen node and everything within ``hops`` out-hops of it leave the
    pool and stop counting as neighbours.
    """
    _check_k(g, K)
    if hops < 1:
        raise ValueError("hops must be >= 1")
    removed = np.zeros(g.node_count, dtype=bool)
    nbrs = [set(g.out_edges(u)[0].tolist()) - {u} for u in range(g.node_count)]
    heap = [(-len(nb), u) for u, nb in enumerate(nbrs)]
    heapq.heapify(heap)
    chosen, scores, trace = [], [], []
    while len(chosen) < K and heap:
        neg, u = heapq.heappop(heap)
        if removed[u]:
            continue
        counted = frozenset(v for v in nbrs[u] if not removed[v])
        if len(counted) != -neg:
            heapq.heappush(heap, (-len(counted), u))
            continue
        chosen.append(u)
        scores.append(float(len(counted)))
        trace.append(counted)
        for v in _within_hops(g, u, hops):
            removed[v] = True
    warning = len(chosen) < K
    if warning:
        log.warning("max-cover exhausted the graph after %d picks; padding by degree", len(chosen))
        for u in _by_degree(g, set(chosen))[:K - len(chosen)]:
            chosen.append(u)
            scores.append(0.0)
    return ExtractionResult(chosen, scores, warning=warning, trace=trace)


def divrank_scores(g: Graph, alpha: float = 0.85, iters: int = 200, tol: float = 1e-9,
                   callback: Callable[[np.ndarray], None] | None = None) -> np.ndarray:
    """Cumulative DivRank on the edge-reversed graph.

    The walk moves from x to y with probability proportional to the base
    transition times y's accumulated score so far (rich get richer), with
    teleport mass 1 - alpha spread uniformly.  Nodes without out-edges in
    the reversed graph teleport all their walk mass.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    n = g.node_count
    if n == 0:
        raise ValueError("DivRank needs a non-empty graph")
    # reversed edge v -> u for every original edge u -> v
    rows, cols = g.indices, g.sources
    out_deg = np.bincount(rows, minlength=n).astype(float)
    base = sparse.csr_matrix((1.0 / out_deg[rows], (rows, cols)), shape=(n, n))
    dangling = out_deg == 0
    pi = np.full(n, 1.0 / n)
    visits = pi.copy()
    for _ in range(iters):
        reach = base @ visits
        q = np.divide(pi, reach, out=np.zeros(n), where=~dangling)
        new = alpha * visits * (base.T @ q)
        new += (1.0 - alpha) / n + alpha * pi[dangling].sum() / n
        new /= new.sum()
        if callback is not None:
            callback(new)
        delta = np.abs(new - pi).max()
        pi = new
        visits += pi
        if delta < tol:
            break
    return pi


def extract_divrank(g: Graph, K: int, alpha: float = 0.85, iters: int = 200,
                    tol: float = 1e-9) -> ExtractionResult:
    _check_k(g, K)
    pi = divrank_scores(g, alpha, iters, tol)
    chosen = [int(u) for u in np.lexsort((np.arange(g.node_count), -pi))[:K]]
    return ExtractionResult(chosen, [float(pi[u]) for u in chosen])


def greedy_mc_im(g: Graph, K: int, model: str, mc_samples: int,
                 discount: Iterable[int] | None, rng: np.random.Generator,
                 candidates: Sequence[int] | None = None) -> ExtractionResult:
    """Lazy greedy (CELF) maximisation of Monte-Carlo estimated spread.

    Nodes in ``discount`` add nothing to a spread.  ``scores`` are the
    marginal gains at selection time and ``stderr`` their standard errors.
    """
    pool = list(range(g.node_count)) if candidates is None else [int(c) for c in candidates]
    if K > len(pool):
        raise ValueError(f"cannot pick {K} seeds from {len(pool)} candidates")
    discount = set(discount or ())
    ids = np.fromiter(discount, dtype=np.int64, count=len(discount))

    def estimate(seed_sets):
        sizes = simulate_spread_sizes(g, seed_sets, mc_samples, model, rng, discount=ids)
        return sizes.mean(axis=1), sizes.std(axis=1) / np.sqrt(mc_samples)

    chosen: list[int] = []
    scores: list[float] = []
    errs: list[float] = []
    if K == 0:
        return ExtractionResult(chosen, scores, stderr=errs)
    means, ses = estimate([[c] for c in pool])
    # (negated gain, node, round evaluated, stderr)
    heap = [(-m, c, 0, s) for m, c, s in zip(means.tolist(), pool, ses.tolist())]
    heapq.heapify(heap)
    sigma = 0.0
    while len(chosen) < K:
        neg, c, evaluated, se = heapq.heappop(heap)
        if evaluated == len(chosen):
            chosen.append(c)
            scores.append(-neg)
            errs.append(se)
            sigma += -neg
            continue
        m, s = estimate([chosen + [c]])
        heapq.heappush(heap, (-(float(m[0]) - sigma), c, len(chosen), float(s[0])))
    return ExtractionResult(chosen, scores, stderr=errs)
